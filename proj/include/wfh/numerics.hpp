#ifndef WFH_NUMERICS_HPP
#define WFH_NUMERICS_HPP

#include <vector>

namespace wfh {

using int128 = __int128;

// ln(n!). Exact integer product for n <= 20, cached running log sum above.
double log_factorial(int n);

// Exact C(n, k) in 128-bit integer arithmetic; 0 outside 0 <= k <= n.
// Throws on overflow of the working width.
int128 binomial_exact(int n, int k);

// Binomial(x, eta) probability row b[m] = C(x,m) eta^m (1-eta)^(x-m),
// m = 0..x, evaluated in log space so extreme eta stays accurate.
std::vector<double> binomial_pmf_row(int x, double eta);

// The alternating inner sum of the balanced-splitter joint probability:
// sum_k C(m, m+k-j) C(n, k) (-1)^k, exact in 128-bit integers.
// Its squared modulus is symmetric under swapping m and n.
int128 interference_kernel(int j, int m, int n);

// Physicists' Hermite polynomial H_j(x) by three-term recurrence.
// Overflow to infinity is permitted; callers needing large orders use
// hermite_log.
double hermite(int j, double x);

// log|H_j(x)| and sign, via a rescaled recurrence. sign == 0 marks an
// exact zero (log_abs is then -inf).
struct HermiteLog {
    double log_abs;
    int sign;
};
HermiteLog hermite_log(int j, double x);

// Laguerre polynomial L_k(x) by recurrence.
double laguerre(int k, double x);

// Smallest eigenvalue of a small symmetric matrix by cyclic Jacobi
// rotations. Requires a square matrix, symmetric within 1e-12 relative
// asymmetry, of dimension <= 64.
double min_eigenvalue_symmetric(const std::vector<std::vector<double>> &matrix);

}  // namespace wfh

#endif
