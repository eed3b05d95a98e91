#include "wfh/nonclassicality.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "wfh/error.hpp"
#include "wfh/numerics.hpp"

namespace wfh {

namespace {

constexpr int kConventionalRange = 6;

void require_events(const EventTally &tally, int j) {
    if (tally.total(j) <= 0.0) {
        throw Error(errc::kInsufficientData,
                    "no events for herald outcome j=" + std::to_string(j));
    }
}

}  // namespace

void EventTally::validate() const {
    for (const auto &[key, count] : counts) {
        const auto &[j, k, l] = key;
        if (j < 0 || k < 0 || l < 0) {
            throw Error(errc::kInvariant, "EventTally: negative outcome index");
        }
        if (!(count >= 0.0)) throw Error(errc::kInvariant, "EventTally: negative count");
    }
}

double EventTally::total(int j) const {
    double t = 0.0;
    for (const auto &[key, count] : counts) {
        if (std::get<0>(key) == j) t += count;
    }
    return t;
}

int EventTally::max_outcome(int j) const {
    int top = kConventionalRange;
    for (const auto &[key, count] : counts) {
        if (std::get<0>(key) != j || count <= 0.0) continue;
        top = std::max({top, std::get<1>(key), std::get<2>(key)});
    }
    return top;
}

std::vector<int> EventTally::herald_outcomes() const {
    std::vector<int> out;
    for (const auto &[key, count] : counts) {
        const int j = std::get<0>(key);
        if (count > 0.0 && (out.empty() || out.back() != j)) {
            if (std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void EventTally::add(int j, int k, int l, double count) { counts[{j, k, l}] += count; }

std::vector<std::vector<double>> correlation_matrix(const EventTally &tally, int j,
                                                    SignConvention sign) {
    tally.validate();
    require_events(tally, j);
    const double total = tally.total(j);
    const int dim = tally.max_outcome(j) + 1;

    std::vector<std::vector<double>> coinc(dim, std::vector<double>(dim, 0.0));
    std::vector<double> marginal(dim, 0.0);  // S_x = row_x + col_x
    for (const auto &[key, count] : tally.counts) {
        if (std::get<0>(key) != j || count == 0.0) continue;
        const int k = std::get<1>(key);
        const int l = std::get<2>(key);
        coinc[k][l] += count;
        marginal[k] += count;
        marginal[l] += count;
    }

    const double second_sign = sign == SignConvention::kSubtract ? -1.0 : 1.0;
    std::vector<std::vector<double>> m(dim, std::vector<double>(dim, 0.0));
    for (int x = 0; x < dim; ++x) {
        for (int y = x; y < dim; ++y) {
            const double pair_term = 2.0 * (coinc[x][y] + coinc[y][x]) / total;
            const double marginal_term = marginal[x] * marginal[y] / (total * total);
            const double v = pair_term + second_sign * marginal_term;
            m[x][y] = m[y][x] = v;
        }
    }
    return m;
}

double submultinomial_witness(const EventTally &tally, int j, SignConvention sign) {
    return min_eigenvalue_symmetric(correlation_matrix(tally, j, sign));
}

PhotonDist combined_stats(const EventTally &tally, int j) {
    tally.validate();
    require_events(tally, j);
    std::map<int, double> sums;
    for (const auto &[key, count] : tally.counts) {
        if (std::get<0>(key) != j || count == 0.0) continue;
        sums[std::get<1>(key) + std::get<2>(key)] += count;
    }
    return PhotonDist(std::move(sums));
}

double sub_poissonian_witness(const EventTally &tally, int j) {
    const PhotonDist combined = combined_stats(tally, j);
    double mean = 0.0;
    double second = 0.0;
    for (const auto &[n, p] : combined.probs()) {
        mean += n * p;
        second += static_cast<double>(n) * (n - 1.0) * p;
    }
    if (!(mean > 0.0)) {
        throw Error(errc::kDomain, "sub_poissonian_witness: zero mean for j=" + std::to_string(j));
    }
    return second / (mean * mean);
}

WitnessReport witness_report(const EventTally &tally, int j, int bootstrap_resamples,
                             std::uint64_t seed) {
    if (bootstrap_resamples < 2) {
        throw Error(errc::kDomain, "witness_report: need at least 2 bootstrap resamples");
    }
    WitnessReport report;
    report.j = j;
    report.events = tally.total(j);
    report.mu_min = submultinomial_witness(tally, j);
    report.g2 = sub_poissonian_witness(tally, j);

    // Multinomial resampling of the per-j slice at the same event total.
    std::vector<std::pair<std::pair<int, int>, double>> cells;
    for (const auto &[key, count] : tally.counts) {
        if (std::get<0>(key) == j && count > 0.0) {
            cells.push_back({{std::get<1>(key), std::get<2>(key)}, count});
        }
    }
    const auto draws = static_cast<std::uint64_t>(std::llround(report.events));
    std::mt19937_64 rng(seed);
    std::vector<double> mus;
    std::vector<double> g2s;
    for (int r = 0; r < bootstrap_resamples; ++r) {
        EventTally resampled;
        std::uint64_t remaining = draws;
        double mass_left = report.events;
        for (size_t c = 0; c < cells.size() && remaining > 0; ++c) {
            double expected = cells[c].second;
            std::uint64_t drawn;
            if (c + 1 == cells.size() || mass_left <= expected) {
                drawn = remaining;
            } else {
                std::binomial_distribution<std::uint64_t> binom(remaining,
                                                                expected / mass_left);
                drawn = binom(rng);
            }
            if (drawn > 0) {
                resampled.add(j, cells[c].first.first, cells[c].first.second,
                              static_cast<double>(drawn));
            }
            remaining -= drawn;
            mass_left -= expected;
        }
        if (resampled.total(j) <= 0.0) continue;
        mus.push_back(submultinomial_witness(resampled, j));
        try {
            g2s.push_back(sub_poissonian_witness(resampled, j));
        } catch (const Error &) {
            // A resample can land entirely on (0,0); skip its g2.
        }
    }
    const auto stddev = [](const std::vector<double> &xs) {
        if (xs.size() < 2) return 0.0;
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        return std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0));
    };
    report.mu_min_sigma = stddev(mus);
    report.g2_sigma = stddev(g2s);
    return report;
}

DiffDist diff_from_tally(const EventTally &tally, int j) {
    tally.validate();
    require_events(tally, j);
    std::map<int, double> sums;
    for (const auto &[key, count] : tally.counts) {
        if (std::get<0>(key) != j || count == 0.0) continue;
        sums[std::get<1>(key) - std::get<2>(key)] += count;
    }
    return DiffDist(std::move(sums));
}

}  // namespace wfh
