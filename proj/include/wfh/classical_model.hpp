#ifndef WFH_CLASSICAL_MODEL_HPP
#define WFH_CLASSICAL_MODEL_HPP

#include "wfh/distributions.hpp"
#include "wfh/params.hpp"

namespace wfh {

// Loss parameters of the classical-field channel: the per-arm efficiencies
// enter through a rescaled amplitude g = eta*|alpha|, a Gaussian blur of
// width sigma = sqrt(g^2 (1-eta)/eta), and a mean shift
// |alpha|^2 (eta_d - eta_c)/2, with eta = (eta_c + eta_d)/2.
struct ClassicalChannel {
    double g = 0.0;
    double sigma = 0.0;
    double shift = 0.0;
    double eta_mean = 1.0;

    static ClassicalChannel from(double alpha_sq, double eta_c, double eta_d);
    void validate() const;
};

// Continuous classical-field density of the photon-number difference for
// the Fock state |j> against a coherent state of strength alpha_sq,
// evaluated at (real-valued) dn. Undefined at alpha_sq == 0.
double classical_ideal(int j, double alpha_sq, double dn);

// The ideal density at the channel's rescaled amplitude, shifted and
// Gaussian-blurred, sampled on the integer dn grid and renormalized.
DiffDist classical_lossy(int j, double alpha_sq, const ClassicalChannel &channel,
                         const TruncationPolicy &trunc = {});

// Full classical model: mode-mismatch convolution wrapped in the herald
// mixture, sharing its weights with the exact model.
DiffDist classical_full(int j, const ExperimentParams &params);

}  // namespace wfh

#endif
