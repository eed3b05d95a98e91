#ifndef WFH_NONCLASSICALITY_HPP
#define WFH_NONCLASSICALITY_HPP

#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "wfh/distributions.hpp"

namespace wfh {

// Raw event counts E^(j)(k, l): herald outcome j, arm-c outcome k, arm-d
// outcome l. Counts are reals so expectation-valued tallies can be
// analyzed exactly; measured tallies hold integers.
struct EventTally {
    std::map<std::tuple<int, int, int>, double> counts;

    void validate() const;
    double total(int j) const;
    // Largest outcome index appearing for herald outcome j, but at least
    // the conventional analysis range [0, 6].
    int max_outcome(int j) const;
    std::vector<int> herald_outcomes() const;
    void add(int j, int k, int l, double count);
};

// Eq.-level sign choice for the correlation matrix: the covariance-style
// witness subtracts the product of marginals (multinomial statistics then
// sit exactly at mu_min = 0); kAdd keeps the printed plus sign.
enum class SignConvention { kSubtract, kAdd };

// Symmetric correlation matrix M_xy of the two signal arms for herald
// outcome j.
std::vector<std::vector<double>> correlation_matrix(const EventTally &tally, int j,
                                                    SignConvention sign = SignConvention::kSubtract);

// Minimum eigenvalue of the correlation matrix; negative values witness
// submultinomial statistics.
double submultinomial_witness(const EventTally &tally, int j,
                              SignConvention sign = SignConvention::kSubtract);

// Combined photon-number statistics of both signal arms,
// P(n) = sum_{k+l=n} E(k,l) / E_tot.
PhotonDist combined_stats(const EventTally &tally, int j);

// g2 of the combined statistics; < 1 witnesses sub-Poissonian light.
// Invariant under loss on the signal arms.
double sub_poissonian_witness(const EventTally &tally, int j);

// Both witnesses with nonparametric-bootstrap uncertainties (resampled
// tallies of the same event total).
struct WitnessReport {
    int j = 0;
    double events = 0.0;
    double mu_min = 0.0;
    double mu_min_sigma = 0.0;
    double g2 = 0.0;
    double g2_sigma = 0.0;
};
WitnessReport witness_report(const EventTally &tally, int j, int bootstrap_resamples = 10,
                             std::uint64_t seed = 1);

// Difference statistics of a tally: P(dn) = sum_{k-l=dn} E(k,l) / E_tot.
DiffDist diff_from_tally(const EventTally &tally, int j);

}  // namespace wfh

#endif
