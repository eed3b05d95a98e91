#ifndef WFH_STATES_HPP
#define WFH_STATES_HPP

#include "wfh/distributions.hpp"
#include "wfh/params.hpp"

namespace wfh {

// Phase-space coordinates in the vacuum-variance-1 convention.
struct PhaseSpacePoint {
    double x = 0.0;
    double p = 0.0;
};

// Photon-number distribution of the signal heralded on outcome j with an
// imperfect herald detector: P(f) ~ C(f,j) eta_h^j (1-eta_h)^(f-j)
// |lambda|^(2f), zero below f = j.
PhotonDist heralded_signal_dist(int j, const SourceParams &source,
                                const TruncationPolicy &trunc = {});

// Second-order correlation g2 = sum k(k-1) P(k) / (sum k P(k))^2.
double g2_of_dist(const PhotonDist &dist);

// Fano factor, variance over mean.
double fano_of_dist(const PhotonDist &dist);

// Wigner function of a diagonal Fock mixture at one phase-space point.
double wigner(const PhotonDist &dist, PhaseSpacePoint pt);

// Quadrature probability density of a diagonal Fock mixture.
double quadrature_dist(const PhotonDist &dist, double x);

// Photon-number distribution of the herald mode conditioned on the signal
// detectors reading (m, n): the herald-outcome posterior of the joint
// model at fixed (m, n), normalized over j. With interfering == false the
// coherent state and signal share no mode (overlap 0), modeling the
// temporally mismatched configuration.
PhotonDist engineered_herald_dist(int m, int n, const ExperimentParams &params, bool interfering);

}  // namespace wfh

#endif
