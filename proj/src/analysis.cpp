#include "wfh/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "wfh/classical_model.hpp"
#include "wfh/error.hpp"
#include "wfh/quantum_model.hpp"

namespace wfh {

namespace {

constexpr double kSupportFloor = 1e-12;

std::vector<TransitionPoint> scan_impl(int j, std::span<const double> grid,
                                       const ExperimentParams &params,
                                       const std::map<double, DiffDist> *observed) {
    params.validate();
    std::vector<TransitionPoint> out;
    out.reserve(grid.size());
    for (double alpha_sq : grid) {
        if (!(alpha_sq > 0.0)) {
            throw Error(errc::kDomain, "transition_scan: grid values must be > 0");
        }
        ExperimentParams point = params;
        point.detector.alpha_sq = alpha_sq;
        const DiffDist model = classical_full(j, point);
        TransitionPoint tp;
        tp.alpha_sq = alpha_sq;
        if (observed != nullptr) {
            auto it = observed->find(alpha_sq);
            if (it == observed->end()) {
                throw Error(errc::kInsufficientData,
                            "transition_scan: no observed statistics at alpha_sq=" +
                                std::to_string(alpha_sq));
            }
            std::tie(tp.s_classical, tp.nu) = residual_metric(it->second, model);
        } else {
            const DiffDist quantum = diff_dist(heralded_joint(j, point));
            std::tie(tp.s_classical, tp.nu) = residual_metric(quantum, model);
        }
        out.push_back(tp);
    }
    return out;
}

}  // namespace

std::pair<double, int> residual_metric(const DiffDist &observed, const DiffDist &model) {
    std::set<int> support;
    for (const auto &[dn, p] : observed.probs()) {
        if (p > kSupportFloor) support.insert(dn);
    }
    for (const auto &[dn, p] : model.probs()) {
        if (p > kSupportFloor) support.insert(dn);
    }
    if (support.empty()) return {0.0, 0};
    double sum = 0.0;
    for (int dn : support) {
        const double d = observed.prob(dn) - model.prob(dn);
        sum += d * d;
    }
    const int nu = static_cast<int>(support.size());
    return {sum / nu, nu};
}

ExpFit fit_exponential(std::span<const TransitionPoint> points, double threshold,
                       double lower_cut, bool refine) {
    if (!(threshold > 0.0)) throw Error(errc::kDomain, "fit_exponential: threshold must be > 0");
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto &p : points) {
        if (p.alpha_sq < lower_cut) continue;
        if (!(p.s_classical > 0.0)) {
            throw Error(errc::kFitFailure, "fit_exponential: non-positive residual value");
        }
        xs.push_back(p.alpha_sq);
        ys.push_back(std::log(p.s_classical));
    }
    std::set<double> distinct(xs.begin(), xs.end());
    if (distinct.size() < 3) {
        throw Error(errc::kFitFailure,
                    "fit_exponential: need at least 3 points with distinct alpha_sq above the cut");
    }
    const auto [slope, intercept] = fit_linear(xs, ys);
    double a = std::exp(intercept);
    double b = -slope;
    if (!(b > 0.0)) {
        throw Error(errc::kFitFailure, "fit_exponential: fitted decay rate is not positive");
    }

    if (refine) {
        // Gauss-Newton on the linear-space residuals, seeded by the
        // log-space solution, with step halving when the error grows.
        const auto sse = [&](double aa, double bb) {
            double s = 0.0;
            for (size_t i = 0; i < xs.size(); ++i) {
                const double r = std::exp(ys[i]) - aa * std::exp(-bb * xs[i]);
                s += r * r;
            }
            return s;
        };
        double err = sse(a, b);
        for (int iter = 0; iter < 50; ++iter) {
            double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
            for (size_t i = 0; i < xs.size(); ++i) {
                const double e = std::exp(-b * xs[i]);
                const double r = std::exp(ys[i]) - a * e;
                const double j0 = e;
                const double j1 = -a * xs[i] * e;
                jtj00 += j0 * j0;
                jtj01 += j0 * j1;
                jtj11 += j1 * j1;
                jtr0 += j0 * r;
                jtr1 += j1 * r;
            }
            const double det = jtj00 * jtj11 - jtj01 * jtj01;
            if (std::abs(det) < 1e-300) break;
            double da = (jtj11 * jtr0 - jtj01 * jtr1) / det;
            double db = (jtj00 * jtr1 - jtj01 * jtr0) / det;
            double scale = 1.0;
            double a_next = a;
            double b_next = b;
            for (int halving = 0; halving < 30; ++halving) {
                a_next = a + scale * da;
                b_next = b + scale * db;
                if (a_next > 0.0 && b_next > 0.0 && sse(a_next, b_next) <= err) break;
                scale *= 0.5;
            }
            const double err_next = sse(a_next, b_next);
            const bool converged = std::abs(a_next - a) <= 1e-14 * a && std::abs(b_next - b) <= 1e-14 * b;
            if (a_next > 0.0 && b_next > 0.0 && err_next <= err) {
                a = a_next;
                b = b_next;
                err = err_next;
            } else {
                break;
            }
            if (converged) break;
        }
        if (!(b > 0.0)) {
            throw Error(errc::kFitFailure, "fit_exponential: refinement lost positivity");
        }
    }

    ExpFit fit;
    fit.a = a;
    fit.b = b;
    fit.threshold = threshold;
    fit.alpha_sq_min = a > threshold ? std::log(a / threshold) / b : 0.0;
    return fit;
}

std::pair<double, double> fit_linear(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw Error(errc::kFitFailure, "fit_linear: need matching xs/ys with >= 2 points");
    }
    const auto n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-12 * std::max(1.0, sxx * n)) {
        throw Error(errc::kFitFailure, "fit_linear: degenerate x values");
    }
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    return {slope, intercept};
}

std::vector<TransitionPoint> transition_scan(int j, std::span<const double> alpha_sq_grid,
                                             const ExperimentParams &params) {
    return scan_impl(j, alpha_sq_grid, params, nullptr);
}

std::vector<TransitionPoint> transition_scan(int j, std::span<const double> alpha_sq_grid,
                                             const ExperimentParams &params,
                                             const std::map<double, DiffDist> &observed) {
    return scan_impl(j, alpha_sq_grid, params, &observed);
}

}  // namespace wfh
