#include "wfh/classical_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "wfh/error.hpp"
#include "wfh/numerics.hpp"
#include "wfh/quantum_model.hpp"

namespace wfh {

namespace {

// The continuous densities are carried as cell masses on a quarter-integer
// lattice x = k/4 until the final integer sampling, so sub-unit blur
// widths and non-integer shifts do not alias.
constexpr double kGridStep = 0.25;
constexpr int kCellsPerUnit = 4;

struct GridMass {
    int k_lo = 0;
    std::vector<double> mass;

    int k_hi() const { return k_lo + static_cast<int>(mass.size()) - 1; }
};

GridMass delta_mass() { return {0, {1.0}}; }

GridMass gaussian_kernel(double sigma) {
    const int half = std::max(1, static_cast<int>(std::ceil(8.0 * sigma / kGridStep)));
    GridMass out;
    out.k_lo = -half;
    out.mass.resize(static_cast<size_t>(2 * half) + 1);
    const double inv = 1.0 / (sigma * std::sqrt(2.0));
    for (int k = -half; k <= half; ++k) {
        const double a = (k * kGridStep - 0.5 * kGridStep) * inv;
        const double b = (k * kGridStep + 0.5 * kGridStep) * inv;
        out.mass[static_cast<size_t>(k + half)] = 0.5 * (std::erf(b) - std::erf(a));
    }
    return out;
}

GridMass convolve(const GridMass &a, const GridMass &b) {
    GridMass out;
    out.k_lo = a.k_lo + b.k_lo;
    out.mass.assign(a.mass.size() + b.mass.size() - 1, 0.0);
    for (size_t i = 0; i < a.mass.size(); ++i) {
        const double ai = a.mass[i];
        if (ai == 0.0) continue;
        for (size_t k = 0; k < b.mass.size(); ++k) out.mass[i + k] += ai * b.mass[k];
    }
    return out;
}

// Shifted, blurred single-Fock density as lattice masses over a window of
// ten combined standard deviations around the shift.
GridMass component_from_channel(int j, const ClassicalChannel &channel) {
    if (channel.g == 0.0) return delta_mass();
    const double spread =
        std::sqrt(channel.g * channel.g * (2.0 * j + 1.0) + channel.sigma * channel.sigma);
    const int k_lo = static_cast<int>(std::floor((channel.shift - 10.0 * spread) / kGridStep));
    const int k_hi = static_cast<int>(std::ceil((channel.shift + 10.0 * spread) / kGridStep));
    GridMass out;
    out.k_lo = k_lo;
    out.mass.resize(static_cast<size_t>(k_hi - k_lo) + 1);
    const double g_sq = channel.g * channel.g;
    for (int k = k_lo; k <= k_hi; ++k) {
        const double u = k * kGridStep - channel.shift;
        out.mass[static_cast<size_t>(k - k_lo)] = classical_ideal(j, g_sq, u) * kGridStep;
    }
    if (channel.sigma > 0.0) out = convolve(out, gaussian_kernel(channel.sigma));
    return out;
}

DiffDist sample_integers(const GridMass &grid) {
    std::map<int, double> out;
    int k = grid.k_lo;
    const int rem = ((k % kCellsPerUnit) + kCellsPerUnit) % kCellsPerUnit;
    if (rem != 0) k += kCellsPerUnit - rem;
    for (; k <= grid.k_hi(); k += kCellsPerUnit) {
        const double density = grid.mass[static_cast<size_t>(k - grid.k_lo)] / kGridStep;
        if (density > 0.0) out[k / kCellsPerUnit] = density;
    }
    return DiffDist(std::move(out));
}

}  // namespace

ClassicalChannel ClassicalChannel::from(double alpha_sq, double eta_c, double eta_d) {
    if (!(alpha_sq >= 0.0)) throw Error(errc::kDomain, "ClassicalChannel: alpha_sq must be >= 0");
    if (!(eta_c > 0.0) || !(eta_c <= 1.0) || !(eta_d > 0.0) || !(eta_d <= 1.0)) {
        throw Error(errc::kDomain, "ClassicalChannel: efficiencies must lie in (0, 1]");
    }
    ClassicalChannel ch;
    ch.eta_mean = 0.5 * (eta_c + eta_d);
    ch.g = ch.eta_mean * std::sqrt(alpha_sq);
    ch.sigma = ch.g * std::sqrt((1.0 - ch.eta_mean) / ch.eta_mean);
    // Imbalance offset. The sign places the peak on the arm with the
    // higher efficiency deficit, matching the exact model's mean
    // (eta_c - eta_d)(N + |alpha|^2)/2 up to the signal term that the
    // classical approximation does not carry.
    ch.shift = alpha_sq * (eta_c - eta_d) / 2.0;
    return ch;
}

void ClassicalChannel::validate() const {
    if (!(g >= 0.0) || !(sigma >= 0.0)) {
        throw Error(errc::kInvariant, "ClassicalChannel: g and sigma must be >= 0");
    }
    if (!(eta_mean > 0.0) || !(eta_mean <= 1.0)) {
        throw Error(errc::kInvariant, "ClassicalChannel: eta_mean must lie in (0, 1]");
    }
}

double classical_ideal(int j, double alpha_sq, double dn) {
    if (j < 0) throw Error(errc::kDomain, "classical_ideal: j must be >= 0");
    if (alpha_sq == 0.0) {
        throw Error(errc::kDomain, "classical model undefined at alpha = 0");
    }
    if (!(alpha_sq > 0.0)) throw Error(errc::kDomain, "classical_ideal: alpha_sq must be > 0");
    const double alpha = std::sqrt(alpha_sq);
    const HermiteLog h = hermite_log(j, dn / (std::sqrt(2.0) * alpha));
    if (h.sign == 0) return 0.0;
    const double log_density = -0.5 * std::log(2.0 * M_PI) - std::log(alpha) -
                               j * std::log(2.0) - log_factorial(j) + 2.0 * h.log_abs -
                               dn * dn / (2.0 * alpha_sq);
    return std::exp(log_density);
}

DiffDist classical_lossy(int j, double alpha_sq, const ClassicalChannel &channel,
                         const TruncationPolicy &trunc) {
    if (j < 0) throw Error(errc::kDomain, "classical_lossy: j must be >= 0");
    if (alpha_sq == 0.0) throw Error(errc::kDomain, "classical model undefined at alpha = 0");
    channel.validate();
    trunc.validate();
    return sample_integers(component_from_channel(j, channel));
}

DiffDist classical_full(int j, const ExperimentParams &params) {
    if (j < 0) throw Error(errc::kDomain, "classical_full: j must be >= 0");
    params.validate();
    if (params.detector.alpha_sq == 0.0) {
        throw Error(errc::kDomain, "classical model undefined at alpha = 0");
    }
    const double overlap = params.detector.mode_overlap;
    const double eta_c = params.detector.eta_c;
    const double eta_d = params.detector.eta_d;

    const auto weights = herald_mixture_weights(j, params.source, params.trunc);
    std::vector<GridMass> parts;
    parts.reserve(weights.size());
    const double alpha_par = overlap * params.detector.alpha_sq;
    const ClassicalChannel channel_par = ClassicalChannel::from(alpha_par, eta_c, eta_d);
    for (const auto &[f, w] : weights) {
        parts.push_back(component_from_channel(f, channel_par));
    }

    int k_lo = parts.front().k_lo;
    int k_hi = parts.front().k_hi();
    for (const auto &g : parts) {
        k_lo = std::min(k_lo, g.k_lo);
        k_hi = std::max(k_hi, g.k_hi());
    }
    GridMass mixed;
    mixed.k_lo = k_lo;
    mixed.mass.assign(static_cast<size_t>(k_hi - k_lo) + 1, 0.0);
    for (size_t i = 0; i < parts.size(); ++i) {
        const double w = weights[i].second;
        const GridMass &g = parts[i];
        for (size_t k = 0; k < g.mass.size(); ++k) {
            mixed.mass[static_cast<size_t>(g.k_lo - k_lo) + k] += w * g.mass[k];
        }
    }

    if (overlap < 1.0) {
        const GridMass orthogonal = component_from_channel(
            0, ClassicalChannel::from((1.0 - overlap) * params.detector.alpha_sq, eta_c, eta_d));
        mixed = convolve(mixed, orthogonal);
    }
    return sample_integers(mixed);
}

}  // namespace wfh
