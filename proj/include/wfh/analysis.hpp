#ifndef WFH_ANALYSIS_HPP
#define WFH_ANALYSIS_HPP

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "wfh/distributions.hpp"
#include "wfh/params.hpp"

namespace wfh {

// The averaged squared residual between the measured quantum model and the
// exact model, used as the acceptance level for a quadrature-like
// measurement.
inline constexpr double kDefaultSThreshold = 6.7e-6;

struct TransitionPoint {
    double alpha_sq = 0.0;
    double s_classical = 0.0;
    int nu = 0;
};

struct ExpFit {
    double a = 0.0;
    double b = 0.0;
    double threshold = kDefaultSThreshold;
    double alpha_sq_min = 0.0;
};

// Mean squared residual over the union support (entries above 1e-12 in
// either distribution); returns (S, nu) with nu the union size.
std::pair<double, int> residual_metric(const DiffDist &observed, const DiffDist &model);

// Least-squares fit of s = A exp(-B alpha_sq), linear in log space over
// points with alpha_sq >= lower_cut; alpha_sq_min = ln(A/threshold)/B when
// A exceeds the threshold, 0 otherwise. With refine == true a Gauss-Newton
// pass on the linear-space residuals polishes the log-space seed.
ExpFit fit_exponential(std::span<const TransitionPoint> points,
                       double threshold = kDefaultSThreshold, double lower_cut = 4.0,
                       bool refine = false);

// Ordinary least squares, returning (slope, intercept).
std::pair<double, double> fit_linear(std::span<const double> xs, std::span<const double> ys);

// Residual metric of model-vs-classical over a coherent-strength grid,
// with the quantum model standing in for the measured statistics.
std::vector<TransitionPoint> transition_scan(int j, std::span<const double> alpha_sq_grid,
                                             const ExperimentParams &params);

// Same scan against externally supplied difference statistics keyed by
// alpha_sq (e.g. ingested tallies).
std::vector<TransitionPoint> transition_scan(int j, std::span<const double> alpha_sq_grid,
                                             const ExperimentParams &params,
                                             const std::map<double, DiffDist> &observed);

}  // namespace wfh

#endif
