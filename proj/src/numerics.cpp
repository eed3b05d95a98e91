#include "wfh/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "wfh/error.hpp"

namespace wfh {

namespace {

constexpr int kLogFactCacheSize = 4096;

// Largest row of Pascal's triangle kept; C(n, n/2) beyond ~132 no longer
// fits in 128 bits, overflowed slots hold the kOverflown sentinel.
constexpr int kBinomialRows = 160;
constexpr int128 kOverflown = -1;

const std::vector<double> &log_factorial_table() {
    static const std::vector<double> table = [] {
        std::vector<double> t(kLogFactCacheSize);
        std::uint64_t product = 1;
        for (int n = 0; n <= 20; ++n) {
            if (n > 1) product *= static_cast<std::uint64_t>(n);
            t[n] = std::log(static_cast<double>(product));
        }
        for (int n = 21; n < kLogFactCacheSize; ++n) {
            t[n] = t[n - 1] + std::log(static_cast<double>(n));
        }
        return t;
    }();
    return table;
}

const std::vector<std::vector<int128>> &binomial_table() {
    static const std::vector<std::vector<int128>> table = [] {
        std::vector<std::vector<int128>> rows(kBinomialRows);
        rows[0] = {int128{1}};
        for (int n = 1; n < kBinomialRows; ++n) {
            rows[n].assign(static_cast<size_t>(n) + 1, int128{1});
            for (int k = 1; k < n; ++k) {
                const int128 a = rows[n - 1][k - 1];
                const int128 b = rows[n - 1][k];
                int128 sum = 0;
                if (a == kOverflown || b == kOverflown ||
                    __builtin_add_overflow(a, b, &sum)) {
                    sum = kOverflown;
                }
                rows[n][k] = sum;
            }
        }
        return rows;
    }();
    return table;
}

std::string triple(int j, int m, int n) {
    return "(j=" + std::to_string(j) + ", m=" + std::to_string(m) +
           ", n=" + std::to_string(n) + ")";
}

}  // namespace

double log_factorial(int n) {
    if (n < 0) throw Error(errc::kDomain, "log_factorial: negative argument");
    if (n < kLogFactCacheSize) return log_factorial_table()[n];
    return std::lgamma(static_cast<double>(n) + 1.0);
}

int128 binomial_exact(int n, int k) {
    if (k < 0 || k > n || n < 0) return 0;
    if (n < kBinomialRows) {
        const int128 v = binomial_table()[n][k];
        if (v != kOverflown) return v;
    }
    throw Error(errc::kOverflow, "binomial_exact: C(" + std::to_string(n) + "," +
                                     std::to_string(k) + ") exceeds 128-bit width");
}

std::vector<double> binomial_pmf_row(int x, double eta) {
    if (x < 0 || eta < 0.0 || eta > 1.0) {
        throw Error(errc::kDomain, "binomial_pmf_row: need x >= 0, eta in [0,1]");
    }
    std::vector<double> row(static_cast<size_t>(x) + 1, 0.0);
    if (x == 0) {
        row[0] = 1.0;
        return row;
    }
    if (eta == 1.0) {
        row[static_cast<size_t>(x)] = 1.0;
        return row;
    }
    if (eta == 0.0) {
        row[0] = 1.0;
        return row;
    }
    const double log_eta = std::log(eta);
    const double log_1m = std::log1p(-eta);
    const double lfx = log_factorial(x);
    for (int m = 0; m <= x; ++m) {
        const double lp = lfx - log_factorial(m) - log_factorial(x - m) +
                          m * log_eta + (x - m) * log_1m;
        row[static_cast<size_t>(m)] = std::exp(lp);
    }
    return row;
}

int128 interference_kernel(int j, int m, int n) {
    if (j < 0 || m < 0 || n < 0) {
        throw Error(errc::kDomain, "interference_kernel: negative index " + triple(j, m, n));
    }
    const int k_lo = std::max(0, j - m);
    const int k_hi = std::min(j, n);
    int128 acc = 0;
    for (int k = k_lo; k <= k_hi; ++k) {
        int128 a;
        int128 b;
        try {
            a = binomial_exact(m, m + k - j);
            b = binomial_exact(n, k);
        } catch (const Error &) {
            throw Error(errc::kOverflow, "interference_kernel: overflow at " + triple(j, m, n));
        }
        int128 prod = 0;
        if (__builtin_mul_overflow(a, b, &prod)) {
            throw Error(errc::kOverflow, "interference_kernel: overflow at " + triple(j, m, n));
        }
        if (k & 1) prod = -prod;
        int128 next = 0;
        if (__builtin_add_overflow(acc, prod, &next)) {
            throw Error(errc::kOverflow, "interference_kernel: overflow at " + triple(j, m, n));
        }
        acc = next;
    }
    return acc;
}

double hermite(int j, double x) {
    if (j < 0) throw Error(errc::kDomain, "hermite: negative order");
    double h_prev = 1.0;
    if (j == 0) return h_prev;
    double h = 2.0 * x;
    for (int k = 1; k < j; ++k) {
        const double h_next = 2.0 * x * h - 2.0 * k * h_prev;
        h_prev = h;
        h = h_next;
    }
    return h;
}

HermiteLog hermite_log(int j, double x) {
    if (j < 0) throw Error(errc::kDomain, "hermite_log: negative order");
    double offset = 0.0;
    double h_prev = 1.0;
    double h = 2.0 * x;
    if (j == 0) h = 1.0;
    for (int k = 1; k < j; ++k) {
        const double h_next = 2.0 * x * h - 2.0 * k * h_prev;
        h_prev = h;
        h = h_next;
        const double scale = std::max(std::abs(h), std::abs(h_prev));
        if (scale > 1e250) {
            h /= 1e250;
            h_prev /= 1e250;
            offset += std::log(1e250);
        }
    }
    if (h == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
    return {std::log(std::abs(h)) + offset, h > 0.0 ? 1 : -1};
}

double laguerre(int k, double x) {
    if (k < 0) throw Error(errc::kDomain, "laguerre: negative order");
    double l_prev = 1.0;
    if (k == 0) return l_prev;
    double l = 1.0 - x;
    for (int i = 1; i < k; ++i) {
        const double l_next = ((2.0 * i + 1.0 - x) * l - i * l_prev) / (i + 1.0);
        l_prev = l;
        l = l_next;
    }
    return l;
}

double min_eigenvalue_symmetric(const std::vector<std::vector<double>> &matrix) {
    const size_t dim = matrix.size();
    if (dim == 0 || dim > 64) {
        throw Error(errc::kShape, "min_eigenvalue_symmetric: dimension must be 1..64");
    }
    double max_abs = 0.0;
    for (const auto &row : matrix) {
        if (row.size() != dim) {
            throw Error(errc::kShape, "min_eigenvalue_symmetric: matrix is not square");
        }
        for (double v : row) max_abs = std::max(max_abs, std::abs(v));
    }
    const double asym_tol = 1e-12 * std::max(max_abs, 1e-30);
    for (size_t i = 0; i < dim; ++i) {
        for (size_t k = i + 1; k < dim; ++k) {
            if (std::abs(matrix[i][k] - matrix[k][i]) > asym_tol) {
                throw Error(errc::kShape, "min_eigenvalue_symmetric: matrix is not symmetric");
            }
        }
    }

    std::vector<std::vector<double>> a = matrix;
    // Symmetrize fuzz below the tolerance before rotating.
    for (size_t i = 0; i < dim; ++i) {
        for (size_t k = i + 1; k < dim; ++k) {
            const double s = 0.5 * (a[i][k] + a[k][i]);
            a[i][k] = a[k][i] = s;
        }
    }

    double max_diag = 0.0;
    for (size_t i = 0; i < dim; ++i) max_diag = std::max(max_diag, std::abs(a[i][i]));
    const auto off_threshold = [&a, dim] {
        double d = 0.0;
        for (size_t i = 0; i < dim; ++i) d = std::max(d, std::abs(a[i][i]));
        return 1e-13 * std::max(d, 1.0);
    };

    for (int sweep = 0; sweep < 128; ++sweep) {
        double off = 0.0;
        for (size_t p = 0; p < dim; ++p) {
            for (size_t q = p + 1; q < dim; ++q) off = std::max(off, std::abs(a[p][q]));
        }
        if (off < off_threshold()) break;
        for (size_t p = 0; p < dim; ++p) {
            for (size_t q = p + 1; q < dim; ++q) {
                const double apq = a[p][q];
                if (std::abs(apq) < off_threshold() * 1e-3) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                const double app = a[p][p];
                const double aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = a[q][p] = 0.0;
                for (size_t r = 0; r < dim; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a[r][p];
                    const double arq = a[r][q];
                    a[r][p] = a[p][r] = arp - s * (arq + tau * arp);
                    a[r][q] = a[q][r] = arq + s * (arp - tau * arq);
                }
            }
        }
    }

    double min_eig = a[0][0];
    for (size_t i = 1; i < dim; ++i) min_eig = std::min(min_eig, a[i][i]);
    return min_eig;
}

}  // namespace wfh
