#include "wfh/quantum_model.hpp"

#include <cmath>
#include <map>
#include <unordered_map>
#include <vector>

#include "wfh/error.hpp"
#include "wfh/numerics.hpp"

namespace wfh {

namespace {

constexpr double kLn2 = 0.6931471805599453;

double log_abs_int128(int128 v) {
    long double a = v < 0 ? -static_cast<long double>(v) : static_cast<long double>(v);
    return static_cast<double>(std::log(a));
}

// Dense working buffer for joint distributions; sparse maps are the
// public representation.
struct DenseJoint {
    int m_size = 0;
    int n_size = 0;
    std::vector<double> v;

    DenseJoint(int ms, int ns) : m_size(ms), n_size(ns), v(static_cast<size_t>(ms) * ns, 0.0) {}

    double &at(int m, int n) { return v[static_cast<size_t>(m) * n_size + n]; }
    double get(int m, int n) const { return v[static_cast<size_t>(m) * n_size + n]; }

    JointPhotonDist to_dist() const {
        std::map<JointPhotonDist::Key, double> out;
        for (int m = 0; m < m_size; ++m) {
            for (int n = 0; n < n_size; ++n) {
                const double p = get(m, n);
                if (p > 0.0) out[{m, n}] = p;
            }
        }
        return JointPhotonDist(std::move(out));
    }
};

// Accumulates weight * P_ideal(j, alpha_sq) rows into `acc`, growing it as
// needed. Enumerates total photon number t = m + n from j upward until the
// Poisson(alpha_sq) mass above t - j falls below tail_epsilon.
void accumulate_ideal(std::map<JointPhotonDist::Key, double> &acc, int j, double alpha_sq,
                      double weight, const TruncationPolicy &trunc) {
    const double lfj = log_factorial(j);
    const double log_weight = std::log(weight);
    if (alpha_sq == 0.0) {
        const int t = j;
        for (int m = 0; m <= t; ++m) {
            const int n = t - m;
            const int128 kernel = interference_kernel(j, m, n);
            if (kernel == 0) continue;
            const double logp = log_weight + lfj - t * kLn2 - log_factorial(m) -
                                log_factorial(n) + 2.0 * log_abs_int128(kernel);
            acc[{m, n}] += std::exp(logp);
        }
        return;
    }
    const double log_alpha_sq = std::log(alpha_sq);
    double pois = std::exp(-alpha_sq);
    double cum = 0.0;
    for (int s = 0;; ++s) {
        if (s > 0) pois *= alpha_sq / s;
        const int t = j + s;
        const double base = log_weight - alpha_sq + lfj + s * log_alpha_sq - t * kLn2;
        for (int m = 0; m <= t; ++m) {
            const int n = t - m;
            const int128 kernel = interference_kernel(j, m, n);
            if (kernel == 0) continue;
            const double logp =
                base - log_factorial(m) - log_factorial(n) + 2.0 * log_abs_int128(kernel);
            const double p = std::exp(logp);
            if (p > 0.0) acc[{m, n}] += p;
        }
        cum += pois;
        if (1.0 - cum < trunc.tail_epsilon) break;
        if (s >= trunc.hard_cap) break;
    }
}

JointPhotonDist convolve(const JointPhotonDist &a, const JointPhotonDist &b) {
    int am = 0, an = 0, bm = 0, bn = 0;
    for (const auto &[k, p] : a.probs()) {
        am = std::max(am, k.first);
        an = std::max(an, k.second);
    }
    for (const auto &[k, p] : b.probs()) {
        bm = std::max(bm, k.first);
        bn = std::max(bn, k.second);
    }
    DenseJoint out(am + bm + 1, an + bn + 1);
    for (const auto &[ka, pa] : a.probs()) {
        for (const auto &[kb, pb] : b.probs()) {
            out.at(ka.first + kb.first, ka.second + kb.second) += pa * pb;
        }
    }
    return out.to_dist();
}

// Per-arm binomial rows, cached across the source support of one call.
class PmfRowCache {
  public:
    explicit PmfRowCache(double eta) : eta_(eta) {}

    const std::vector<double> &row(int x) {
        auto it = rows_.find(x);
        if (it == rows_.end()) it = rows_.emplace(x, binomial_pmf_row(x, eta_)).first;
        return it->second;
    }

  private:
    double eta_;
    std::unordered_map<int, std::vector<double>> rows_;
};

}  // namespace

void SourceParams::validate() const {
    if (!(lambda_mag >= 0.0) || !(lambda_mag < 1.0)) {
        throw Error(errc::kInvariant, "SourceParams: need 0 <= |lambda| < 1");
    }
    if (!(eta_h > 0.0) || !(eta_h <= 1.0)) {
        throw Error(errc::kInvariant, "SourceParams: need 0 < eta_h <= 1");
    }
}

void DetectorParams::validate() const {
    if (!(eta_c > 0.0) || !(eta_c <= 1.0) || !(eta_d > 0.0) || !(eta_d <= 1.0)) {
        throw Error(errc::kInvariant, "DetectorParams: efficiencies must lie in (0, 1]");
    }
    if (!(mode_overlap >= 0.0) || !(mode_overlap <= 1.0)) {
        throw Error(errc::kInvariant, "DetectorParams: mode overlap must lie in [0, 1]");
    }
    if (!(alpha_sq >= 0.0)) {
        throw Error(errc::kInvariant, "DetectorParams: alpha_sq must be >= 0");
    }
}

void ExperimentParams::validate() const {
    source.validate();
    detector.validate();
    trunc.validate();
}

ExperimentParams table1_params(double alpha_sq) {
    ExperimentParams p;
    p.source.lambda_mag = 0.797;
    p.source.eta_h = 0.395;
    p.detector.eta_c = 0.274;
    p.detector.eta_d = 0.352;
    p.detector.mode_overlap = 0.82;
    p.detector.alpha_sq = alpha_sq;
    p.validate();
    return p;
}

JointPhotonDist joint_ideal(int j, double alpha_sq, const TruncationPolicy &trunc) {
    if (j < 0) throw Error(errc::kDomain, "joint_ideal: j must be >= 0");
    if (!(alpha_sq >= 0.0)) throw Error(errc::kDomain, "joint_ideal: alpha_sq must be >= 0");
    trunc.validate();
    std::map<JointPhotonDist::Key, double> acc;
    accumulate_ideal(acc, j, alpha_sq, 1.0, trunc);
    return JointPhotonDist(std::move(acc));
}

JointPhotonDist bernoulli_loss(const JointPhotonDist &joint, double eta_c, double eta_d,
                               const TruncationPolicy &trunc) {
    if (!(eta_c > 0.0) || !(eta_c <= 1.0) || !(eta_d > 0.0) || !(eta_d <= 1.0)) {
        throw Error(errc::kDomain, "bernoulli_loss: efficiencies must lie in (0, 1]");
    }
    trunc.validate();
    if (eta_c == 1.0 && eta_d == 1.0) return joint;

    int max_m = 0, max_n = 0;
    for (const auto &[k, p] : joint.probs()) {
        max_m = std::max(max_m, k.first);
        max_n = std::max(max_n, k.second);
    }
    DenseJoint out(max_m + 1, max_n + 1);
    PmfRowCache rows_c(eta_c);
    PmfRowCache rows_d(eta_d);
    for (const auto &[k, p] : joint.probs()) {
        const auto &[x, y] = k;
        const auto &row_c = rows_c.row(x);
        const auto &row_d = rows_d.row(y);
        for (int m = 0; m <= x; ++m) {
            const double pc = p * row_c[static_cast<size_t>(m)];
            if (pc == 0.0) continue;
            double *dst = &out.at(m, 0);
            for (int n = 0; n <= y; ++n) dst[n] += pc * row_d[static_cast<size_t>(n)];
        }
    }
    return out.to_dist();
}

PhotonDist binomial_loss(const PhotonDist &dist, double eta) {
    if (!(eta > 0.0) || !(eta <= 1.0)) {
        throw Error(errc::kDomain, "binomial_loss: efficiency must lie in (0, 1]");
    }
    if (eta == 1.0) return dist;
    std::map<int, double> out;
    for (const auto &[x, p] : dist.probs()) {
        const auto row = binomial_pmf_row(x, eta);
        for (int m = 0; m <= x; ++m) out[m] += p * row[static_cast<size_t>(m)];
    }
    return PhotonDist(std::move(out));
}

JointPhotonDist joint_with_mismatch(int j, const DetectorParams &detector,
                                    const TruncationPolicy &trunc) {
    if (j < 0) throw Error(errc::kDomain, "joint_with_mismatch: j must be >= 0");
    detector.validate();
    const double overlap = detector.mode_overlap;
    const JointPhotonDist matched = bernoulli_loss(
        joint_ideal(j, overlap * detector.alpha_sq, trunc), detector.eta_c, detector.eta_d, trunc);
    if (overlap == 1.0) return matched;
    const JointPhotonDist orthogonal =
        bernoulli_loss(joint_ideal(0, (1.0 - overlap) * detector.alpha_sq, trunc),
                       detector.eta_c, detector.eta_d, trunc);
    return convolve(matched, orthogonal);
}

std::vector<std::pair<int, double>> herald_mixture_weights(int j, const SourceParams &source,
                                                           const TruncationPolicy &trunc) {
    if (j < 0) throw Error(errc::kDomain, "herald_mixture_weights: j must be >= 0");
    source.validate();
    trunc.validate();
    const double q = source.lambda_mag * source.lambda_mag * (1.0 - source.eta_h);
    std::vector<std::pair<int, double>> weights;
    // Closed-form normalizer: sum_{f>=j} C(f,j) q^(f-j) = (1-q)^-(j+1).
    double w = std::pow(1.0 - q, j + 1);
    double cum = 0.0;
    for (int f = j;; ++f) {
        weights.emplace_back(f, w);
        cum += w;
        if (1.0 - cum < trunc.tail_epsilon) break;
        if (f - j >= trunc.hard_cap) break;
        if (q == 0.0) break;
        w *= q * (f + 1.0) / (f + 1.0 - j);
    }
    if (cum > 1.0 + 1e-9) {
        throw Error(errc::kInvariant, "herald_mixture_weights: truncated sum exceeds normalizer");
    }
    return weights;
}

JointPhotonDist heralded_joint(int j, const ExperimentParams &params) {
    if (j < 0) throw Error(errc::kDomain, "heralded_joint: j must be >= 0");
    params.validate();
    const auto weights = herald_mixture_weights(j, params.source, params.trunc);
    const double overlap = params.detector.mode_overlap;
    const double alpha_par = overlap * params.detector.alpha_sq;

    // Loss and the orthogonal-mode convolution are linear, so the mixture
    // over the pair number is taken on the ideal joints first.
    std::map<JointPhotonDist::Key, double> acc;
    for (const auto &[f, w] : weights) {
        accumulate_ideal(acc, f, alpha_par, w, params.trunc);
    }
    JointPhotonDist mixed = bernoulli_loss(JointPhotonDist(std::move(acc)), params.detector.eta_c,
                                           params.detector.eta_d, params.trunc);
    if (overlap == 1.0) return mixed;
    const JointPhotonDist orthogonal =
        bernoulli_loss(joint_ideal(0, (1.0 - overlap) * params.detector.alpha_sq, params.trunc),
                       params.detector.eta_c, params.detector.eta_d, params.trunc);
    return convolve(mixed, orthogonal);
}

DiffDist diff_dist(const JointPhotonDist &joint) {
    std::map<int, double> out;
    for (const auto &[k, p] : joint.probs()) out[k.first - k.second] += p;
    return DiffDist(std::move(out));
}

double convolve_entry(const JointPhotonDist &a, const JointPhotonDist &b, int m, int n) {
    double acc = 0.0;
    for (const auto &[k, p] : a.probs()) {
        if (k.first > m || k.second > n) continue;
        acc += p * b.prob(m - k.first, n - k.second);
    }
    return acc;
}

}  // namespace wfh
