#include "wfh/distributions.hpp"

#include <cmath>
#include <string>

#include "wfh/error.hpp"

namespace wfh {

namespace {

constexpr double kSparseFloor = 1e-300;

// Shared renormalization: validates entries, drops sub-floor mass, divides
// by the raw sum. Returns the raw sum.
template <typename Map>
double normalize(Map &m, const char *what) {
    double raw = 0.0;
    for (auto it = m.begin(); it != m.end();) {
        double v = it->second;
        if (!std::isfinite(v)) {
            throw Error(errc::kInvariant, std::string(what) + ": non-finite weight");
        }
        if (v < 0.0) {
            if (v < -1e-12) {
                throw Error(errc::kInvariant, std::string(what) + ": negative weight");
            }
            v = 0.0;
        }
        if (v < kSparseFloor) {
            it = m.erase(it);
            continue;
        }
        raw += v;
        ++it;
    }
    if (!(raw > 0.0) || !std::isfinite(raw)) {
        throw Error(errc::kInvariant, std::string(what) + ": total mass is not positive");
    }
    for (auto &kv : m) kv.second /= raw;
    return raw;
}

}  // namespace

void TruncationPolicy::validate() const {
    if (!(tail_epsilon > 0.0) || !(tail_epsilon < 1e-3)) {
        throw Error(errc::kInvariant, "tail_epsilon must lie in (0, 1e-3)");
    }
    if (hard_cap < 1) {
        throw Error(errc::kInvariant, "hard_cap must be >= 1");
    }
}

PhotonDist::PhotonDist(std::map<int, double> weights) : probs_(std::move(weights)) {
    for (const auto &kv : probs_) {
        if (kv.first < 0) throw Error(errc::kInvariant, "PhotonDist: negative photon number");
    }
    raw_sum_ = normalize(probs_, "PhotonDist");
}

double PhotonDist::prob(int n) const {
    auto it = probs_.find(n);
    return it == probs_.end() ? 0.0 : it->second;
}

double PhotonDist::mean() const {
    double s = 0.0;
    for (const auto &[n, p] : probs_) s += n * p;
    return s;
}

double PhotonDist::variance() const {
    const double mu = mean();
    double s = 0.0;
    for (const auto &[n, p] : probs_) s += (n - mu) * (n - mu) * p;
    return s;
}

int PhotonDist::max_outcome() const {
    return probs_.empty() ? 0 : probs_.rbegin()->first;
}

JointPhotonDist::JointPhotonDist(std::map<Key, double> weights) : probs_(std::move(weights)) {
    for (const auto &kv : probs_) {
        if (kv.first.first < 0 || kv.first.second < 0) {
            throw Error(errc::kInvariant, "JointPhotonDist: negative outcome index");
        }
    }
    raw_sum_ = normalize(probs_, "JointPhotonDist");
}

double JointPhotonDist::prob(int m, int n) const {
    auto it = probs_.find({m, n});
    return it == probs_.end() ? 0.0 : it->second;
}

DiffDist::DiffDist(std::map<int, double> weights) : probs_(std::move(weights)) {
    raw_sum_ = normalize(probs_, "DiffDist");
}

double DiffDist::prob(int dn) const {
    auto it = probs_.find(dn);
    return it == probs_.end() ? 0.0 : it->second;
}

double DiffDist::mean() const {
    double s = 0.0;
    for (const auto &[dn, p] : probs_) s += dn * p;
    return s;
}

double DiffDist::variance() const {
    const double mu = mean();
    double s = 0.0;
    for (const auto &[dn, p] : probs_) s += (dn - mu) * (dn - mu) * p;
    return s;
}

}  // namespace wfh
