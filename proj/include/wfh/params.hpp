#ifndef WFH_PARAMS_HPP
#define WFH_PARAMS_HPP

#include "wfh/distributions.hpp"

namespace wfh {

// Pair-source description: squeezing magnitude |lambda| = tanh(r) and the
// herald-arm total efficiency.
struct SourceParams {
    double lambda_mag = 0.0;
    double eta_h = 1.0;

    void validate() const;
};

// Signal-arm detection efficiencies, mode overlap between the signal and
// the coherent state, and the coherent-state strength |alpha|^2. The
// relative phase is deliberately absent: the difference statistics do not
// depend on it.
struct DetectorParams {
    double eta_c = 1.0;
    double eta_d = 1.0;
    double mode_overlap = 1.0;
    double alpha_sq = 0.0;

    void validate() const;
};

struct ExperimentParams {
    SourceParams source;
    DetectorParams detector;
    TruncationPolicy trunc;

    void validate() const;
};

// The measured operating point: lambda = 0.797, eta_h = 0.395,
// eta_c = 0.274, eta_d = 0.352, mode overlap 0.82.
ExperimentParams table1_params(double alpha_sq);

}  // namespace wfh

#endif
