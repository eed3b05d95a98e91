#ifndef WFH_QUANTUM_MODEL_HPP
#define WFH_QUANTUM_MODEL_HPP

#include <utility>
#include <vector>

#include "wfh/distributions.hpp"
#include "wfh/params.hpp"

namespace wfh {

// Joint photon-number distribution at the outputs of a balanced beam
// splitter fed with the Fock state |j> and a coherent state of strength
// alpha_sq, with ideal detectors. Zero whenever m + n < j.
JointPhotonDist joint_ideal(int j, double alpha_sq, const TruncationPolicy &trunc = {});

// Detection loss on both arms: each source outcome (x, y) redistributes
// its mass binomially with per-arm efficiencies. Implemented as a
// push-forward over the sparse source support.
JointPhotonDist bernoulli_loss(const JointPhotonDist &joint, double eta_c, double eta_d,
                               const TruncationPolicy &trunc = {});

// Single-mode binomial loss on a photon-number distribution.
PhotonDist binomial_loss(const PhotonDist &dist, double eta);

// Mode mismatch: the coherent state splits into a component in the signal
// mode (strength M * alpha_sq) and an orthogonal component ((1-M) *
// alpha_sq, vacuum signal); a mode-insensitive detector sees the
// convolution of the two lossy joints.
JointPhotonDist joint_with_mismatch(int j, const DetectorParams &detector,
                                    const TruncationPolicy &trunc = {});

// Normalized herald-mixture weights w(f) over the true pair number f >= j:
// w(f) = C(f,j) q^(f-j) (1-q)^(j+1) with q = lambda^2 (1 - eta_h). The
// normalizer comes from the closed-form negative-binomial series; the
// f-sum stops once the kept mass exceeds 1 - tail_epsilon.
std::vector<std::pair<int, double>> herald_mixture_weights(int j, const SourceParams &source,
                                                           const TruncationPolicy &trunc = {});

// Full model: herald outcome j on an imperfectly detected two-mode
// squeezed source, mixed over the true pair number, with loss and mode
// mismatch on the signal arms.
JointPhotonDist heralded_joint(int j, const ExperimentParams &params);

// Photon-number difference statistics P(dn) = sum_m P(m, m - dn).
DiffDist diff_dist(const JointPhotonDist &joint);

// Single entry of the convolution of two joints, (a * b)(m, n).
double convolve_entry(const JointPhotonDist &a, const JointPhotonDist &b, int m, int n);

}  // namespace wfh

#endif
