#ifndef WFH_INGEST_HPP
#define WFH_INGEST_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wfh/analysis.hpp"
#include "wfh/calibration.hpp"
#include "wfh/distributions.hpp"
#include "wfh/nonclassicality.hpp"
#include "wfh/params.hpp"

namespace wfh {

enum class Channel { kHerald, kC, kD };

Channel parse_channel(const std::string &name);
std::string channel_name(Channel channel);

// One saved matched-filter output: a scalar energy estimate per detector
// per pulse.
struct PulseEnergyRecord {
    Channel channel = Channel::kHerald;
    std::int64_t trial = 0;
    double value = 0.0;
};

// Photon labels for one channel. Boundaries sit at the histogram minima
// between adjacent peaks; labels count peaks in increasing value order.
// Records in the unbounded top interval carry the overflow flag (their
// label is a lower bound).
struct BinResult {
    std::vector<double> boundaries;
    std::vector<std::int64_t> trials;
    std::vector<int> labels;
    std::vector<char> overflow;
    bool quality_warning = false;  // fewer than 2 peaks found
};

BinResult bin_pulse_energies(std::span<const PulseEnergyRecord> records, Channel channel);

// Assemble E^(j)(k,l) from per-trial labels of all three channels. Every
// trial must be labeled exactly once per channel.
EventTally build_tally(const BinResult &herald, const BinResult &arm_c, const BinResult &arm_d);

// Run configuration: model parameters plus grids, seed and output
// location. Parsed from "key = value" lines; '#' starts a comment.
struct RunConfig {
    ExperimentParams params;
    std::vector<double> alpha_sq_grid;
    std::vector<int> herald_outcomes;
    double threshold = kDefaultSThreshold;
    std::string output_dir = ".";
    std::uint64_t seed = 1;
    int jobs = 0;  // 0 = available parallelism
};

RunConfig parse_config(std::istream &in);
RunConfig parse_config_file(const std::string &path);

// Table writers/readers. All tables are UTF-8 with LF line endings and
// probabilities printed to 12 significant digits.
void write_photon_csv(std::ostream &out, const PhotonDist &dist);
PhotonDist read_photon_csv(std::istream &in);
void write_diff_csv(std::ostream &out, const DiffDist &dist);
DiffDist read_diff_csv(std::istream &in);
void write_tally_csv(std::ostream &out, const EventTally &tally);
EventTally read_tally_csv(std::istream &in);
void write_transition_csv(std::ostream &out, std::span<const TransitionPoint> points);
std::vector<TransitionPoint> read_transition_csv(std::istream &in);
std::vector<PulseEnergyRecord> read_pulse_csv(std::istream &in);
void write_pulse_csv(std::ostream &out, std::span<const PulseEnergyRecord> records);

// Count summary for the calibration pipeline, as a JSON object with
// snake_case keys; mean-rate fields are optional and enable the lambda
// and alpha estimates.
struct CountSummary {
    CoincidenceCounts counts;
    bool has_means = false;
    double mean_herald_photons = 0.0;
    double mean_c = 0.0;
    double mean_d = 0.0;
};
CountSummary read_counts_json(std::istream &in);

std::string format_probability(double value);

// Fixed-width worker fan-out for grid evaluations; results land in
// index-order so output stays deterministic.
int resolve_jobs(int requested);
void parallel_for(int count, int jobs, const std::function<void(int)> &body);

}  // namespace wfh

#endif
