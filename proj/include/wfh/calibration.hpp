#ifndef WFH_CALIBRATION_HPP
#define WFH_CALIBRATION_HPP

#include <cstdint>

namespace wfh {

// Raw coincidence bookkeeping for the Klyshko measurement. Any detector
// outcome of one photon or more counts as a detection.
struct CoincidenceCounts {
    std::int64_t herald_singles = 0;
    std::int64_t signal_singles_c = 0;
    std::int64_t signal_singles_d = 0;
    std::int64_t coincidences_hc = 0;
    std::int64_t coincidences_hd = 0;
    std::int64_t trials = 0;

    void validate() const;
};

// Point estimates with Poisson-propagated one-sigma uncertainties.
// Estimates outside (0, 1] are returned as-is with out_of_range set, so a
// miscalibrated input stays visible downstream.
struct EfficiencyEstimate {
    double eta_h = 0.0;
    double eta_c = 0.0;
    double eta_d = 0.0;
    double sigma_h = 0.0;
    double sigma_c = 0.0;
    double sigma_d = 0.0;
    bool out_of_range = false;
};

// Klyshko heralding efficiencies in the low-squeezing limit:
// eta_h = P(herald | signal), eta_s = P(signal | herald) = (eta_c+eta_d)/2,
// R = eta_c/eta_d from the singles ratio, then eta_d = 2 eta_s / (1+R) and
// eta_c = R eta_d.
EfficiencyEstimate klyshko_efficiencies(const CoincidenceCounts &counts);

// Squeezing magnitude from the mean herald photon number:
// |lambda| = tanh(arcsinh(sqrt(mean / eta_h))).
double lambda_from_mean(double mean_herald_photons, double eta_h);

// Coherent-state amplitude from the pump-blocked arm rates:
// |alpha| = sqrt(mean_c/eta_c + mean_d/eta_d).
double alpha_from_counts(double mean_c, double mean_d, double eta_c, double eta_d);

}  // namespace wfh

#endif
