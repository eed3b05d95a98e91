#include "wfh/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "wfh/error.hpp"

namespace wfh {

namespace {

std::string trim(const std::string &s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string &token, const std::string &context) {
    try {
        size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception &) {
        throw Error(errc::kParse, context + ": cannot parse number '" + token + "'");
    }
}

std::int64_t parse_int(const std::string &token, const std::string &context) {
    try {
        size_t used = 0;
        const long long v = std::stoll(token, &used);
        if (used != token.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception &) {
        throw Error(errc::kParse, context + ": cannot parse integer '" + token + "'");
    }
}

std::vector<std::string> split(const std::string &line, char sep) {
    std::vector<std::string> out;
    std::string token;
    std::istringstream stream(line);
    while (std::getline(stream, token, sep)) out.push_back(token);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

void expect_header(std::istream &in, const std::string &expected, const std::string &what) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(errc::kParse, what + ": missing header");
    }
    if (trim(line) != expected) {
        throw Error(errc::kParse, what + ": expected header '" + expected + "'");
    }
}

double quantile(const std::vector<double> &sorted, double q) {
    const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
    const auto lo = static_cast<size_t>(std::floor(pos));
    const auto hi = static_cast<size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

Channel parse_channel(const std::string &name) {
    if (name == "herald") return Channel::kHerald;
    if (name == "c") return Channel::kC;
    if (name == "d") return Channel::kD;
    throw Error(errc::kParse, "unknown channel '" + name + "' (expected herald|c|d)");
}

std::string channel_name(Channel channel) {
    switch (channel) {
        case Channel::kHerald: return "herald";
        case Channel::kC: return "c";
        case Channel::kD: return "d";
    }
    return "?";
}

BinResult bin_pulse_energies(std::span<const PulseEnergyRecord> records, Channel channel) {
    std::vector<double> values;
    std::vector<std::int64_t> trials;
    for (const auto &rec : records) {
        if (rec.channel != channel) continue;
        if (!std::isfinite(rec.value)) {
            throw Error(errc::kInvariant, "bin_pulse_energies: non-finite pulse value");
        }
        if (rec.trial < 0) {
            throw Error(errc::kInvariant, "bin_pulse_energies: negative trial index");
        }
        values.push_back(rec.value);
        trials.push_back(rec.trial);
    }
    if (values.empty()) {
        throw Error(errc::kInsufficientData, "bin_pulse_energies: no records for channel '" +
                                                 channel_name(channel) + "'");
    }
    if (values.size() < 100) {
        throw Error(errc::kInsufficientData,
                    "bin_pulse_energies: need at least 100 records per channel");
    }

    BinResult result;
    result.trials = trials;
    result.labels.assign(values.size(), 0);
    result.overflow.assign(values.size(), 0);

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    const double span = sorted.back() - sorted.front();
    if (iqr <= 0.0 || span <= 0.0) {
        result.quality_warning = true;  // a single peak at best
        return result;
    }

    // Freedman-Diaconis bin width.
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(values.size()));
    const int bins = std::clamp(static_cast<int>(std::ceil(span / width)), 8, 4096);
    const double bin_width = span / bins;
    std::vector<double> hist(static_cast<size_t>(bins), 0.0);
    for (double v : values) {
        int idx = static_cast<int>((v - sorted.front()) / bin_width);
        idx = std::clamp(idx, 0, bins - 1);
        hist[static_cast<size_t>(idx)] += 1.0;
    }

    // Moving average over 3 bins.
    std::vector<double> smooth(hist.size(), 0.0);
    for (size_t i = 0; i < hist.size(); ++i) {
        double sum = hist[i];
        double n = 1.0;
        if (i > 0) {
            sum += hist[i - 1];
            n += 1.0;
        }
        if (i + 1 < hist.size()) {
            sum += hist[i + 1];
            n += 1.0;
        }
        smooth[i] = sum / n;
    }

    // Local maxima with plateau collapse.
    std::vector<int> peaks;
    for (size_t i = 0; i < smooth.size();) {
        size_t k = i;
        while (k + 1 < smooth.size() && smooth[k + 1] == smooth[i]) ++k;
        const bool left_lower = i == 0 || smooth[i - 1] < smooth[i];
        const bool right_lower = k + 1 == smooth.size() || smooth[k + 1] < smooth[i];
        if (left_lower && right_lower && smooth[i] > 0.0) {
            peaks.push_back(static_cast<int>((i + k) / 2));
        }
        i = k + 1;
    }

    // Merge adjacent peaks whose separating valley is too shallow, so a
    // noise wiggle on a peak top does not become its own photon bin.
    const auto valley_between = [&smooth](int a, int b) {
        double v = smooth[static_cast<size_t>(a)];
        for (int i = a + 1; i < b; ++i) v = std::min(v, smooth[static_cast<size_t>(i)]);
        return v;
    };
    bool merged = true;
    while (merged && peaks.size() > 1) {
        merged = false;
        size_t worst = 0;
        double worst_rel = 1e9;
        for (size_t i = 0; i + 1 < peaks.size(); ++i) {
            const double lower =
                std::min(smooth[static_cast<size_t>(peaks[i])], smooth[static_cast<size_t>(peaks[i + 1])]);
            const double depth = lower - valley_between(peaks[i], peaks[i + 1]);
            const double rel = depth / std::max(lower, 1e-30);
            if (rel < worst_rel) {
                worst_rel = rel;
                worst = i;
            }
        }
        if (worst_rel < 0.1) {
            const size_t drop = smooth[static_cast<size_t>(peaks[worst])] <
                                        smooth[static_cast<size_t>(peaks[worst + 1])]
                                    ? worst
                                    : worst + 1;
            peaks.erase(peaks.begin() + static_cast<std::ptrdiff_t>(drop));
            merged = true;
        }
    }

    if (peaks.size() < 2) {
        result.quality_warning = true;
        return result;
    }

    for (size_t i = 0; i + 1 < peaks.size(); ++i) {
        int best = peaks[i] + 1;
        for (int k = peaks[i] + 1; k < peaks[i + 1]; ++k) {
            if (smooth[static_cast<size_t>(k)] < smooth[static_cast<size_t>(best)]) best = k;
        }
        result.boundaries.push_back(sorted.front() + (best + 0.5) * bin_width);
    }

    const int top_label = static_cast<int>(peaks.size()) - 1;
    for (size_t i = 0; i < values.size(); ++i) {
        const auto it =
            std::upper_bound(result.boundaries.begin(), result.boundaries.end(), values[i]);
        const int label = static_cast<int>(it - result.boundaries.begin());
        result.labels[i] = label;
        result.overflow[i] = label == top_label ? 1 : 0;
    }
    return result;
}

EventTally build_tally(const BinResult &herald, const BinResult &arm_c, const BinResult &arm_d) {
    const auto index = [](const BinResult &r, const char *name) {
        std::map<std::int64_t, int> by_trial;
        for (size_t i = 0; i < r.trials.size(); ++i) {
            if (!by_trial.emplace(r.trials[i], r.labels[i]).second) {
                throw Error(errc::kAlignment, std::string("build_tally: duplicate trial ") +
                                                  std::to_string(r.trials[i]) + " on channel " +
                                                  name);
            }
        }
        return by_trial;
    };
    const auto h = index(herald, "herald");
    const auto c = index(arm_c, "c");
    const auto d = index(arm_d, "d");
    if (h.size() != c.size() || h.size() != d.size()) {
        throw Error(errc::kAlignment, "build_tally: channels cover different trial sets");
    }
    EventTally tally;
    for (const auto &[trial, j] : h) {
        const auto itc = c.find(trial);
        const auto itd = d.find(trial);
        if (itc == c.end() || itd == d.end()) {
            throw Error(errc::kAlignment,
                        "build_tally: trial " + std::to_string(trial) + " missing on a channel");
        }
        tally.add(j, itc->second, itd->second, 1.0);
    }
    return tally;
}

RunConfig parse_config(std::istream &in) {
    RunConfig config;
    config.params.trunc = TruncationPolicy{};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(errc::kParse,
                        "config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string context = "config key '" + key + "'";
        if (key == "lambda_mag") {
            config.params.source.lambda_mag = parse_double(value, context);
        } else if (key == "eta_h") {
            config.params.source.eta_h = parse_double(value, context);
        } else if (key == "eta_c") {
            config.params.detector.eta_c = parse_double(value, context);
        } else if (key == "eta_d") {
            config.params.detector.eta_d = parse_double(value, context);
        } else if (key == "mode_overlap") {
            config.params.detector.mode_overlap = parse_double(value, context);
        } else if (key == "alpha_sq") {
            config.params.detector.alpha_sq = parse_double(value, context);
        } else if (key == "tail_epsilon") {
            config.params.trunc.tail_epsilon = parse_double(value, context);
        } else if (key == "hard_cap") {
            config.params.trunc.hard_cap = static_cast<int>(parse_int(value, context));
        } else if (key == "alpha_sq_grid") {
            config.alpha_sq_grid.clear();
            for (const auto &tok : split(value, ',')) {
                config.alpha_sq_grid.push_back(parse_double(trim(tok), context));
            }
        } else if (key == "herald_outcomes") {
            config.herald_outcomes.clear();
            for (const auto &tok : split(value, ',')) {
                config.herald_outcomes.push_back(static_cast<int>(parse_int(trim(tok), context)));
            }
        } else if (key == "threshold") {
            config.threshold = parse_double(value, context);
        } else if (key == "output_dir") {
            config.output_dir = value;
        } else if (key == "seed") {
            config.seed = static_cast<std::uint64_t>(parse_int(value, context));
        } else if (key == "jobs") {
            config.jobs = static_cast<int>(parse_int(value, context));
        } else {
            throw Error(errc::kParse, "config line " + std::to_string(line_no) +
                                          ": unknown key '" + key + "'");
        }
    }
    return config;
}

RunConfig parse_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::kParse, "cannot open config file '" + path + "'");
    return parse_config(in);
}

std::string format_probability(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    std::string s(buf);
    if (s.find_first_of(".eE") == std::string::npos && s.find_first_of("0123456789") != std::string::npos) {
        s += ".0";
    }
    return s;
}

void write_photon_csv(std::ostream &out, const PhotonDist &dist) {
    out << "n,probability\n";
    for (const auto &[n, p] : dist.probs()) {
        out << n << ',' << format_probability(p) << '\n';
    }
}

PhotonDist read_photon_csv(std::istream &in) {
    expect_header(in, "n,probability", "photon csv");
    std::map<int, double> probs;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cols = split(trim(line), ',');
        if (cols.size() != 2) {
            throw Error(errc::kParse, "photon csv line " + std::to_string(line_no));
        }
        const std::string context = "photon csv line " + std::to_string(line_no);
        probs[static_cast<int>(parse_int(cols[0], context))] = parse_double(cols[1], context);
    }
    return PhotonDist(std::move(probs));
}

void write_diff_csv(std::ostream &out, const DiffDist &dist) {
    out << "dn,probability\n";
    for (const auto &[dn, p] : dist.probs()) {
        out << dn << ',' << format_probability(p) << '\n';
    }
}

DiffDist read_diff_csv(std::istream &in) {
    expect_header(in, "dn,probability", "diff csv");
    std::map<int, double> probs;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cols = split(trim(line), ',');
        if (cols.size() != 2) {
            throw Error(errc::kParse, "diff csv line " + std::to_string(line_no));
        }
        const std::string context = "diff csv line " + std::to_string(line_no);
        probs[static_cast<int>(parse_int(cols[0], context))] = parse_double(cols[1], context);
    }
    return DiffDist(std::move(probs));
}

void write_tally_csv(std::ostream &out, const EventTally &tally) {
    out << "j,k,l,count\n";
    for (const auto &[key, count] : tally.counts) {
        if (count == 0.0) continue;
        out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
            << format_probability(count) << '\n';
    }
}

EventTally read_tally_csv(std::istream &in) {
    expect_header(in, "j,k,l,count", "tally csv");
    EventTally tally;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cols = split(trim(line), ',');
        if (cols.size() != 4) {
            throw Error(errc::kParse, "tally csv line " + std::to_string(line_no));
        }
        const std::string context = "tally csv line " + std::to_string(line_no);
        tally.add(static_cast<int>(parse_int(cols[0], context)),
                  static_cast<int>(parse_int(cols[1], context)),
                  static_cast<int>(parse_int(cols[2], context)), parse_double(cols[3], context));
    }
    tally.validate();
    return tally;
}

void write_transition_csv(std::ostream &out, std::span<const TransitionPoint> points) {
    out << "alpha_sq,s_classical,nu\n";
    for (const auto &p : points) {
        out << format_probability(p.alpha_sq) << ',' << format_probability(p.s_classical) << ','
            << p.nu << '\n';
    }
}

std::vector<TransitionPoint> read_transition_csv(std::istream &in) {
    expect_header(in, "alpha_sq,s_classical,nu", "transition csv");
    std::vector<TransitionPoint> points;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cols = split(trim(line), ',');
        if (cols.size() != 3) {
            throw Error(errc::kParse, "transition csv line " + std::to_string(line_no));
        }
        const std::string context = "transition csv line " + std::to_string(line_no);
        TransitionPoint p;
        p.alpha_sq = parse_double(cols[0], context);
        p.s_classical = parse_double(cols[1], context);
        p.nu = static_cast<int>(parse_int(cols[2], context));
        points.push_back(p);
    }
    return points;
}

std::vector<PulseEnergyRecord> read_pulse_csv(std::istream &in) {
    expect_header(in, "channel,trial,value", "pulse csv");
    std::vector<PulseEnergyRecord> records;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cols = split(trim(line), ',');
        if (cols.size() != 3) {
            throw Error(errc::kParse, "pulse csv line " + std::to_string(line_no));
        }
        const std::string context = "pulse csv line " + std::to_string(line_no);
        PulseEnergyRecord rec;
        rec.channel = parse_channel(trim(cols[0]));
        rec.trial = parse_int(cols[1], context);
        rec.value = parse_double(cols[2], context);
        records.push_back(rec);
    }
    return records;
}

void write_pulse_csv(std::ostream &out, std::span<const PulseEnergyRecord> records) {
    out << "channel,trial,value\n";
    for (const auto &rec : records) {
        out << channel_name(rec.channel) << ',' << rec.trial << ','
            << format_probability(rec.value) << '\n';
    }
}

CountSummary read_counts_json(std::istream &in) {
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception &e) {
        throw Error(errc::kParse, std::string("counts json: ") + e.what());
    }
    CountSummary summary;
    const auto fetch = [&doc](const char *key) {
        if (!doc.contains(key) || !doc[key].is_number()) {
            throw Error(errc::kParse, std::string("counts json: missing numeric field '") + key +
                                          "'");
        }
        return doc[key].get<double>();
    };
    summary.counts.herald_singles = static_cast<std::int64_t>(fetch("herald_singles"));
    summary.counts.signal_singles_c = static_cast<std::int64_t>(fetch("signal_singles_c"));
    summary.counts.signal_singles_d = static_cast<std::int64_t>(fetch("signal_singles_d"));
    summary.counts.coincidences_hc = static_cast<std::int64_t>(fetch("coincidences_hc"));
    summary.counts.coincidences_hd = static_cast<std::int64_t>(fetch("coincidences_hd"));
    summary.counts.trials = static_cast<std::int64_t>(fetch("trials"));
    if (doc.contains("mean_herald_photons")) {
        summary.has_means = true;
        summary.mean_herald_photons = fetch("mean_herald_photons");
        summary.mean_c = fetch("mean_c");
        summary.mean_d = fetch("mean_d");
    }
    return summary;
}

int resolve_jobs(int requested) {
    if (const char *env = std::getenv("WFH_SIM_JOBS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception &) {
            // fall through to the flag / hardware default
        }
    }
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int count, int jobs, const std::function<void(int)> &body) {
    if (count <= 0) return;
    jobs = std::min(jobs, count);
    if (jobs <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto &t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace wfh
