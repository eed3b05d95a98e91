#include "wfh/states.hpp"

#include <cmath>
#include <map>
#include <unordered_map>
#include <vector>

#include "wfh/error.hpp"
#include "wfh/numerics.hpp"
#include "wfh/quantum_model.hpp"

namespace wfh {

PhotonDist heralded_signal_dist(int j, const SourceParams &source,
                                const TruncationPolicy &trunc) {
    const auto weights = herald_mixture_weights(j, source, trunc);
    std::map<int, double> probs;
    for (const auto &[f, w] : weights) probs[f] = w;
    return PhotonDist(std::move(probs));
}

double g2_of_dist(const PhotonDist &dist) {
    double mean = 0.0;
    double second = 0.0;
    for (const auto &[k, p] : dist.probs()) {
        mean += k * p;
        second += static_cast<double>(k) * (k - 1.0) * p;
    }
    if (!(mean > 0.0)) throw Error(errc::kDomain, "g2_of_dist: distribution has zero mean");
    return second / (mean * mean);
}

double fano_of_dist(const PhotonDist &dist) {
    const double mean = dist.mean();
    if (!(mean > 0.0)) throw Error(errc::kDomain, "fano_of_dist: distribution has zero mean");
    return dist.variance() / mean;
}

double wigner(const PhotonDist &dist, PhaseSpacePoint pt) {
    const double r_sq = pt.x * pt.x + pt.p * pt.p;
    const double envelope = std::exp(-0.5 * r_sq) / (2.0 * M_PI);
    if (envelope == 0.0) return 0.0;
    const int k_max = dist.max_outcome();
    // One recurrence pass collects every Laguerre order.
    double l_prev = 1.0;
    double l = 1.0 - r_sq;
    double acc = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        double l_k;
        if (k == 0) {
            l_k = l_prev;
        } else if (k == 1) {
            l_k = l;
        } else {
            const double l_next = ((2.0 * (k - 1) + 1.0 - r_sq) * l - (k - 1.0) * l_prev) / k;
            l_prev = l;
            l = l_next;
            l_k = l;
        }
        const double p = dist.prob(k);
        if (p == 0.0) continue;
        acc += p * (k % 2 == 0 ? 1.0 : -1.0) * l_k;
    }
    return acc * envelope;
}

double quadrature_dist(const PhotonDist &dist, double x) {
    const double u = x / std::sqrt(2.0);
    const double envelope = std::exp(-u * u) / std::sqrt(2.0 * M_PI);
    if (envelope == 0.0) return 0.0;
    const int k_max = dist.max_outcome();
    // phi_k = H_k(u) / sqrt(2^k k!), which keeps the recurrence bounded.
    double phi_prev = 1.0;
    double phi = u * std::sqrt(2.0);
    double acc = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        double phi_k;
        if (k == 0) {
            phi_k = phi_prev;
        } else if (k == 1) {
            phi_k = phi;
        } else {
            const double phi_next =
                u * std::sqrt(2.0 / k) * phi - std::sqrt((k - 1.0) / k) * phi_prev;
            phi_prev = phi;
            phi = phi_next;
            phi_k = phi;
        }
        const double p = dist.prob(k);
        if (p == 0.0) continue;
        acc += p * phi_k * phi_k;
    }
    return acc * envelope;
}

namespace {

class ArmRowCache {
  public:
    explicit ArmRowCache(double eta) : eta_(eta) {}

    const std::vector<double> &row(int x) {
        auto it = rows_.find(x);
        if (it == rows_.end()) it = rows_.emplace(x, binomial_pmf_row(x, eta_)).first;
        return it->second;
    }

  private:
    double eta_;
    std::unordered_map<int, std::vector<double>> rows_;
};

// Lossy joint probability of every outcome (m1, n1) with m1 <= m, n1 <= n
// for one ideal joint, gathered pointwise instead of scattering the full
// support.
std::vector<double> lossy_block(const JointPhotonDist &ideal, ArmRowCache &rows_c,
                                ArmRowCache &rows_d, int m, int n) {
    std::vector<double> block(static_cast<size_t>(m + 1) * (n + 1), 0.0);
    for (const auto &[key, p] : ideal.probs()) {
        const auto &[x, y] = key;
        const auto &rc = rows_c.row(x);
        const auto &rd = rows_d.row(y);
        const int m_top = std::min(m, x);
        const int n_top = std::min(n, y);
        for (int m1 = 0; m1 <= m_top; ++m1) {
            const double pc = p * rc[static_cast<size_t>(m1)];
            for (int n1 = 0; n1 <= n_top; ++n1) {
                block[static_cast<size_t>(m1) * (n + 1) + n1] += pc * rd[static_cast<size_t>(n1)];
            }
        }
    }
    return block;
}

}  // namespace

PhotonDist engineered_herald_dist(int m, int n, const ExperimentParams &params,
                                  bool interfering) {
    if (m < 0 || n < 0) throw Error(errc::kDomain, "engineered_herald_dist: outcomes must be >= 0");
    params.validate();
    const double overlap = interfering ? params.detector.mode_overlap : 0.0;
    const double lambda_sq = params.source.lambda_mag * params.source.lambda_mag;
    const double eta_h = params.source.eta_h;
    const TruncationPolicy &trunc = params.trunc;
    const double alpha_par = overlap * params.detector.alpha_sq;
    const double alpha_perp = (1.0 - overlap) * params.detector.alpha_sq;

    ArmRowCache rows_c(params.detector.eta_c);
    ArmRowCache rows_d(params.detector.eta_d);

    // The orthogonal-mode factor does not depend on the pair number.
    const bool has_perp = overlap < 1.0;
    const JointPhotonDist perp =
        has_perp ? bernoulli_loss(joint_ideal(0, alpha_perp, trunc), params.detector.eta_c,
                                  params.detector.eta_d, trunc)
                 : JointPhotonDist({{{0, 0}, 1.0}});

    // Herald-outcome distribution at fixed (m, n): for each j, the
    // normalized heralded-state joint probability of (m, n) — the
    // mixture terms lambda^(2f) P(f -> m,n) distributed over herald
    // outcomes by the detector's binomial response, times the per-j
    // mixture normalizer X_j = (1-q)^(j+1) (eta_h lambda^2)^(-j) — and
    // the resulting sequence normalized over j.
    const double q = lambda_sq * (1.0 - eta_h);
    std::vector<double> posterior;
    double lambda_pow = 1.0;
    double total = 0.0;
    int quiet_rounds = 0;
    // The exact kernel is 128-bit; keep the enumerated total photon
    // number m + n within its overflow-free envelope.
    int poisson_span = 0;
    if (alpha_par > 0.0) {
        double pmf = std::exp(-alpha_par);
        double cum = pmf;
        while (1.0 - cum > trunc.tail_epsilon && poisson_span < trunc.hard_cap) {
            ++poisson_span;
            pmf *= alpha_par / poisson_span;
            cum += pmf;
        }
    }
    const int pair_cap = std::min(trunc.hard_cap, 132 - poisson_span);
    for (int f = 0;; ++f) {
        const JointPhotonDist ideal = joint_ideal(f, alpha_par, trunc);
        const auto block = lossy_block(ideal, rows_c, rows_d, m, n);
        double v = 0.0;
        for (int m1 = 0; m1 <= m; ++m1) {
            for (int n1 = 0; n1 <= n; ++n1) {
                const double lp = block[static_cast<size_t>(m1) * (n + 1) + n1];
                if (lp != 0.0) v += lp * perp.prob(m - m1, n - n1);
            }
        }
        const double term = lambda_pow * v;
        double added = 0.0;
        if (term > 0.0) {
            if (posterior.size() < static_cast<size_t>(f + 1)) posterior.resize(f + 1, 0.0);
            const auto herald_response = binomial_pmf_row(f, eta_h);
            double normalizer = 1.0 - q;  // X_0
            for (int j = 0; j <= f; ++j) {
                const double contribution =
                    term * herald_response[static_cast<size_t>(j)] * normalizer;
                posterior[static_cast<size_t>(j)] += contribution;
                added += contribution;
                if (eta_h * lambda_sq > 0.0) normalizer *= (1.0 - q) / (eta_h * lambda_sq);
            }
            total += added;
        }
        lambda_pow *= lambda_sq;
        if (lambda_sq == 0.0) break;
        if (f + 1 >= pair_cap) break;
        // The per-pair-number probability of the fixed outcome dies off
        // geometrically once f is large; stop after several rounds whose
        // whole contribution is below the tail bound.
        quiet_rounds = total > 0.0 && added < trunc.tail_epsilon * total ? quiet_rounds + 1 : 0;
        if (quiet_rounds >= 3) break;
    }

    if (!(total > 0.0)) {
        throw Error(errc::kUnreachableOutcome,
                    "engineered_herald_dist: outcome (" + std::to_string(m) + ", " +
                        std::to_string(n) + ") has vanishing probability");
    }

    // Trim the large-j tail below the truncation policy before normalizing.
    double cum = 0.0;
    size_t keep = posterior.size();
    for (size_t idx = 0; idx < posterior.size(); ++idx) {
        cum += posterior[idx];
        if (1.0 - cum / total < trunc.tail_epsilon) {
            keep = idx + 1;
            break;
        }
    }
    std::map<int, double> probs;
    for (size_t idx = 0; idx < keep; ++idx) {
        if (posterior[idx] > 0.0) probs[static_cast<int>(idx)] = posterior[idx];
    }
    return PhotonDist(std::move(probs));
}

}  // namespace wfh
