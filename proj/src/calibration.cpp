#include "wfh/calibration.hpp"

#include <cmath>

#include "wfh/error.hpp"

namespace wfh {

void CoincidenceCounts::validate() const {
    const auto nonneg = herald_singles >= 0 && signal_singles_c >= 0 && signal_singles_d >= 0 &&
                        coincidences_hc >= 0 && coincidences_hd >= 0 && trials >= 0;
    if (!nonneg) throw Error(errc::kInvariant, "CoincidenceCounts: counts must be >= 0");
    if (coincidences_hc > signal_singles_c || coincidences_hd > signal_singles_d ||
        coincidences_hc + coincidences_hd > herald_singles) {
        throw Error(errc::kInvariant, "CoincidenceCounts: coincidences exceed singles");
    }
    if (herald_singles > trials || signal_singles_c > trials || signal_singles_d > trials) {
        throw Error(errc::kInvariant, "CoincidenceCounts: singles exceed trials");
    }
}

EfficiencyEstimate klyshko_efficiencies(const CoincidenceCounts &counts) {
    counts.validate();
    const double coinc = static_cast<double>(counts.coincidences_hc + counts.coincidences_hd);
    const double signal = static_cast<double>(counts.signal_singles_c + counts.signal_singles_d);
    const double herald = static_cast<double>(counts.herald_singles);
    if (herald <= 0.0 || signal <= 0.0) {
        throw Error(errc::kInsufficientData,
                    "klyshko_efficiencies: zero herald or signal singles");
    }
    if (counts.signal_singles_d <= 0 || coinc <= 0.0) {
        throw Error(errc::kInsufficientData,
                    "klyshko_efficiencies: no coincidences or empty arm d");
    }

    const double eta_h = coinc / signal;
    const double eta_s = coinc / herald;
    const double ratio =
        static_cast<double>(counts.signal_singles_c) / static_cast<double>(counts.signal_singles_d);
    const double eta_d = 2.0 * eta_s / (1.0 + ratio);
    const double eta_c = ratio * eta_d;

    // Poisson propagation: relative variance of a count ratio a/b is
    // 1/a + 1/b.
    const auto rel_var = [](double a, double b) { return 1.0 / a + 1.0 / b; };
    const double rv_eta_h = rel_var(coinc, signal);
    const double rv_eta_s = rel_var(coinc, herald);
    const double rv_ratio = rel_var(static_cast<double>(counts.signal_singles_c),
                                    static_cast<double>(counts.signal_singles_d));
    // eta_d = 2 eta_s/(1+R) and eta_c = 2 eta_s R/(1+R):
    // d(ln eta_d)/d(ln R) = -R/(1+R), d(ln eta_c)/d(ln R) = 1/(1+R).
    const double ratio_term = ratio / (1.0 + ratio);
    const double rv_eta_d = rv_eta_s + ratio_term * ratio_term * rv_ratio;
    const double rv_eta_c =
        rv_eta_s + (1.0 - ratio_term) * (1.0 - ratio_term) * rv_ratio;

    EfficiencyEstimate est;
    est.eta_h = eta_h;
    est.eta_c = eta_c;
    est.eta_d = eta_d;
    est.sigma_h = eta_h * std::sqrt(rv_eta_h);
    est.sigma_d = eta_d * std::sqrt(rv_eta_d);
    est.sigma_c = eta_c * std::sqrt(std::max(rv_eta_c, 0.0));
    est.out_of_range = eta_h > 1.0 || eta_c > 1.0 || eta_d > 1.0;
    return est;
}

double lambda_from_mean(double mean_herald_photons, double eta_h) {
    if (!(mean_herald_photons >= 0.0)) {
        throw Error(errc::kDomain, "lambda_from_mean: mean must be >= 0");
    }
    if (!(eta_h > 0.0)) throw Error(errc::kDomain, "lambda_from_mean: eta_h must be > 0");
    const double sinh_r = std::sqrt(mean_herald_photons / eta_h);
    return std::tanh(std::asinh(sinh_r));
}

double alpha_from_counts(double mean_c, double mean_d, double eta_c, double eta_d) {
    if (!(mean_c >= 0.0) || !(mean_d >= 0.0)) {
        throw Error(errc::kDomain, "alpha_from_counts: means must be >= 0");
    }
    if (!(eta_c > 0.0) || !(eta_d > 0.0)) {
        throw Error(errc::kDomain, "alpha_from_counts: efficiencies must be > 0");
    }
    return std::sqrt(mean_c / eta_c + mean_d / eta_d);
}

}  // namespace wfh
