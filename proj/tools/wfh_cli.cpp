#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wfh/analysis.hpp"
#include "wfh/calibration.hpp"
#include "wfh/classical_model.hpp"
#include "wfh/error.hpp"
#include "wfh/ingest.hpp"
#include "wfh/nonclassicality.hpp"
#include "wfh/quantum_model.hpp"
#include "wfh/states.hpp"

namespace {

using nlohmann::json;

void diag(const json &j) { std::cerr << j.dump() << "\n"; }

// Writes through a file when --out/--out-dir is given, stdout otherwise.
void with_output(const std::string &path, const std::function<void(std::ostream &)> &body) {
    if (path.empty()) {
        body(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw wfh::Error(wfh::errc::kParse, "cannot open output file '" + path + "'");
    body(out);
}

std::ifstream open_input(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw wfh::Error(wfh::errc::kParse, "cannot open input file '" + path + "'");
    return in;
}

// Model parameters shared by the model-facing subcommands. Resolution
// order: built-in ideal defaults, then --config, then --preset, then
// explicit flags.
struct ModelArgs {
    std::string config_path;
    std::string preset;
    double lambda = 0.0;
    double eta_h = 1.0;
    double eta_c = 1.0;
    double eta_d = 1.0;
    double overlap = 1.0;
    double alpha_sq = 0.0;
    double tail_epsilon = 0.0;
    int hard_cap = 0;
    std::uint64_t seed = 0;
    int jobs = 0;

    CLI::Option *o_lambda = nullptr;
    CLI::Option *o_eta_h = nullptr;
    CLI::Option *o_eta_c = nullptr;
    CLI::Option *o_eta_d = nullptr;
    CLI::Option *o_overlap = nullptr;
    CLI::Option *o_alpha = nullptr;
    CLI::Option *o_tail = nullptr;
    CLI::Option *o_cap = nullptr;
    CLI::Option *o_seed = nullptr;
    CLI::Option *o_jobs = nullptr;

    void attach(CLI::App *cmd, bool with_alpha) {
        cmd->add_option("--config", config_path, "run configuration file (key = value lines)");
        cmd->add_option("--preset", preset, "named parameter preset (table1)");
        o_lambda = cmd->add_option("--lambda", lambda, "squeezing magnitude |lambda|");
        o_eta_h = cmd->add_option("--eta-h", eta_h, "herald-arm efficiency");
        o_eta_c = cmd->add_option("--eta-c", eta_c, "signal-arm-c efficiency");
        o_eta_d = cmd->add_option("--eta-d", eta_d, "signal-arm-d efficiency");
        o_overlap = cmd->add_option("--mode-overlap", overlap, "mode overlap M");
        if (with_alpha) {
            o_alpha = cmd->add_option("--alpha-sq", alpha_sq, "coherent-state strength |alpha|^2");
        }
        o_tail = cmd->add_option("--tail-epsilon", tail_epsilon, "truncation tail bound");
        o_cap = cmd->add_option("--hard-cap", hard_cap, "truncation hard cap");
        o_seed = cmd->add_option("--seed", seed, "RNG seed for sampling steps");
        o_jobs = cmd->add_option("--jobs", jobs, "worker threads (WFH_SIM_JOBS overrides)");
    }

    wfh::RunConfig resolve() const {
        wfh::RunConfig rc;
        if (!config_path.empty()) rc = wfh::parse_config_file(config_path);
        if (preset == "table1") {
            const auto t = wfh::table1_params(rc.params.detector.alpha_sq);
            rc.params.source = t.source;
            rc.params.detector.eta_c = t.detector.eta_c;
            rc.params.detector.eta_d = t.detector.eta_d;
            rc.params.detector.mode_overlap = t.detector.mode_overlap;
        } else if (!preset.empty()) {
            throw wfh::Error(wfh::errc::kParse, "unknown preset '" + preset + "'");
        }
        const auto set = [](CLI::Option *o) { return o != nullptr && o->count() > 0; };
        if (set(o_lambda)) rc.params.source.lambda_mag = lambda;
        if (set(o_eta_h)) rc.params.source.eta_h = eta_h;
        if (set(o_eta_c)) rc.params.detector.eta_c = eta_c;
        if (set(o_eta_d)) rc.params.detector.eta_d = eta_d;
        if (set(o_overlap)) rc.params.detector.mode_overlap = overlap;
        if (set(o_alpha)) rc.params.detector.alpha_sq = alpha_sq;
        if (set(o_tail)) rc.params.trunc.tail_epsilon = tail_epsilon;
        if (set(o_cap)) rc.params.trunc.hard_cap = hard_cap;
        if (set(o_seed)) rc.seed = seed;
        if (set(o_jobs)) rc.jobs = jobs;
        rc.params.validate();
        return rc;
    }
};

json fit_to_json(const wfh::ExpFit &fit) {
    return json{{"a", fit.a},
                {"b", fit.b},
                {"threshold", fit.threshold},
                {"alpha_sq_min", fit.alpha_sq_min}};
}

json report_to_json(const wfh::WitnessReport &r) {
    return json{{"j", r.j},         {"events", r.events},
                {"mu_min", r.mu_min}, {"mu_min_sigma", r.mu_min_sigma},
                {"g2", r.g2},       {"g2_sigma", r.g2_sigma}};
}

int run_app(int argc, char **argv) {
    CLI::App app{"weak-field homodyne detection: model, calibration and analysis tables"};
    app.require_subcommand(1);

    // model-quantum
    auto *quantum = app.add_subcommand(
        "model-quantum", "difference statistics of the exact model (CSV: dn,probability)");
    auto q_args = std::make_shared<ModelArgs>();
    q_args->attach(quantum, true);
    auto q_j = std::make_shared<int>(0);
    auto q_out = std::make_shared<std::string>();
    quantum->add_option("--j", *q_j, "herald outcome")->required();
    quantum->add_option("--out", *q_out, "output file (default stdout)");
    quantum->callback([q_args, q_j, q_out] {
        const auto rc = q_args->resolve();
        const auto joint = wfh::heralded_joint(*q_j, rc.params);
        const auto diff = wfh::diff_dist(joint);
        diag(json{{"subcommand", "model-quantum"},
                  {"joint_deficit", joint.deficit()},
                  {"diff_deficit", diff.deficit()}});
        with_output(*q_out, [&](std::ostream &os) { wfh::write_diff_csv(os, diff); });
    });

    // model-classical
    auto *classical = app.add_subcommand(
        "model-classical",
        "difference statistics of the classical-field model (CSV: dn,probability)");
    auto c_args = std::make_shared<ModelArgs>();
    c_args->attach(classical, true);
    auto c_j = std::make_shared<int>(0);
    auto c_out = std::make_shared<std::string>();
    classical->add_option("--j", *c_j, "herald outcome")->required();
    classical->add_option("--out", *c_out, "output file (default stdout)");
    classical->callback([c_args, c_j, c_out] {
        const auto rc = c_args->resolve();
        const auto diff = wfh::classical_full(*c_j, rc.params);
        diag(json{{"subcommand", "model-classical"}, {"diff_deficit", diff.deficit()}});
        with_output(*c_out, [&](std::ostream &os) { wfh::write_diff_csv(os, diff); });
    });

    // transition-scan
    auto *scan = app.add_subcommand(
        "transition-scan", "residual metric of model vs classical over an |alpha|^2 grid");
    auto s_args = std::make_shared<ModelArgs>();
    s_args->attach(scan, false);
    auto s_j = std::make_shared<int>(0);
    auto s_grid = std::make_shared<std::vector<double>>();
    auto s_out = std::make_shared<std::string>();
    scan->add_option("--j", *s_j, "herald outcome")->required();
    scan->add_option("--grid", *s_grid, "|alpha|^2 grid values")->delimiter(',');
    scan->add_option("--out", *s_out, "output file (default stdout)");
    scan->callback([s_args, s_j, s_grid, s_out] {
        auto rc = s_args->resolve();
        if (!s_grid->empty()) rc.alpha_sq_grid = *s_grid;
        if (rc.alpha_sq_grid.empty()) {
            throw wfh::Error(wfh::errc::kParse, "transition-scan: empty |alpha|^2 grid");
        }
        std::vector<wfh::TransitionPoint> points(rc.alpha_sq_grid.size());
        const int jobs = wfh::resolve_jobs(rc.jobs);
        wfh::parallel_for(static_cast<int>(rc.alpha_sq_grid.size()), jobs, [&](int i) {
            const double a = rc.alpha_sq_grid[static_cast<size_t>(i)];
            points[static_cast<size_t>(i)] =
                wfh::transition_scan(*s_j, std::span<const double>(&a, 1), rc.params).front();
        });
        with_output(*s_out, [&](std::ostream &os) { wfh::write_transition_csv(os, points); });
    });

    // fit-alpha-min
    auto *fit = app.add_subcommand("fit-alpha-min",
                                   "exponential fit of a transition scan (JSON result)");
    auto f_in = std::make_shared<std::string>();
    auto f_out = std::make_shared<std::string>();
    auto f_threshold = std::make_shared<double>(wfh::kDefaultSThreshold);
    auto f_cut = std::make_shared<double>(4.0);
    auto f_refine = std::make_shared<bool>(false);
    fit->add_option("--in", *f_in, "transition CSV")->required();
    fit->add_option("--threshold", *f_threshold, "acceptance level for S");
    fit->add_option("--lower-cut", *f_cut, "fit only points with alpha_sq >= cut");
    fit->add_flag("--refine", *f_refine, "Gauss-Newton refinement in linear space");
    fit->add_option("--out", *f_out, "output file (default stdout)");
    fit->callback([f_in, f_out, f_threshold, f_cut, f_refine] {
        auto in = open_input(*f_in);
        const auto points = wfh::read_transition_csv(in);
        const auto result = wfh::fit_exponential(points, *f_threshold, *f_cut, *f_refine);
        with_output(*f_out,
                    [&](std::ostream &os) { os << fit_to_json(result).dump(2) << "\n"; });
    });

    // nonclassicality
    auto *ncl = app.add_subcommand("nonclassicality",
                                   "per-herald witnesses with bootstrap uncertainties (JSON)");
    auto n_tally = std::make_shared<std::string>();
    auto n_out = std::make_shared<std::string>();
    auto n_js = std::make_shared<std::vector<int>>();
    auto n_resamples = std::make_shared<int>(10);
    auto n_seed = std::make_shared<std::uint64_t>(1);
    auto n_add = std::make_shared<bool>(false);
    ncl->add_option("--tally", *n_tally, "tally CSV (j,k,l,count)")->required();
    ncl->add_option("--j-list", *n_js, "herald outcomes to analyze")->delimiter(',');
    ncl->add_option("--resamples", *n_resamples, "bootstrap resamples");
    ncl->add_option("--seed", *n_seed, "bootstrap RNG seed");
    ncl->add_flag("--sign-add", *n_add, "use the printed plus-sign convention");
    ncl->add_option("--out", *n_out, "output file (default stdout)");
    ncl->callback([n_tally, n_out, n_js, n_resamples, n_seed, n_add] {
        auto in = open_input(*n_tally);
        const auto tally = wfh::read_tally_csv(in);
        std::vector<int> js = n_js->empty() ? tally.herald_outcomes() : *n_js;
        json out = json::array();
        for (int j : js) {
            auto report = wfh::witness_report(tally, j, *n_resamples, *n_seed);
            const double mu_add =
                wfh::submultinomial_witness(tally, j, wfh::SignConvention::kAdd);
            diag(json{{"subcommand", "nonclassicality"},
                      {"j", j},
                      {"mu_min_subtract", report.mu_min},
                      {"mu_min_add", mu_add}});
            if (*n_add) report.mu_min = mu_add;
            out.push_back(report_to_json(report));
        }
        with_output(*n_out, [&](std::ostream &os) { os << out.dump(2) << "\n"; });
    });

    // engineer
    auto *engineer = app.add_subcommand(
        "engineer", "herald-mode photon distribution for a fixed detection outcome");
    auto e_args = std::make_shared<ModelArgs>();
    e_args->attach(engineer, true);
    auto e_m = std::make_shared<int>(0);
    auto e_n = std::make_shared<int>(0);
    auto e_nointf = std::make_shared<bool>(false);
    auto e_out = std::make_shared<std::string>();
    engineer->add_option("--m", *e_m, "arm-c outcome")->required();
    engineer->add_option("--n", *e_n, "arm-d outcome")->required();
    engineer->add_flag("--no-interference", *e_nointf,
                       "model the temporally mismatched (non-interfering) case");
    engineer->add_option("--out", *e_out, "CSV output file (default stdout)");
    engineer->callback([e_args, e_m, e_n, e_nointf, e_out] {
        const auto rc = e_args->resolve();
        const auto dist = wfh::engineered_herald_dist(*e_m, *e_n, rc.params, !*e_nointf);
        const json summary{{"m", *e_m},
                           {"n", *e_n},
                           {"interfering", !*e_nointf},
                           {"g2", wfh::g2_of_dist(dist)}};
        with_output(*e_out, [&](std::ostream &os) { wfh::write_photon_csv(os, dist); });
        if (e_out->empty()) {
            diag(summary);
        } else {
            std::cout << summary.dump(2) << "\n";
        }
    });

    // calibrate
    auto *calibrate = app.add_subcommand("calibrate",
                                         "Klyshko efficiencies and source strength (JSON)");
    auto k_in = std::make_shared<std::string>();
    auto k_out = std::make_shared<std::string>();
    calibrate->add_option("--counts", *k_in, "count summary JSON")->required();
    calibrate->add_option("--out", *k_out, "output file (default stdout)");
    calibrate->callback([k_in, k_out] {
        auto in = open_input(*k_in);
        const auto summary = wfh::read_counts_json(in);
        const auto est = wfh::klyshko_efficiencies(summary.counts);
        json out{{"eta_h", est.eta_h},   {"eta_h_sigma", est.sigma_h},
                 {"eta_c", est.eta_c},   {"eta_c_sigma", est.sigma_c},
                 {"eta_d", est.eta_d},   {"eta_d_sigma", est.sigma_d},
                 {"out_of_range", est.out_of_range},
                 {"detection_rule", "any outcome >= 1 photon counts as a detection"}};
        if (summary.has_means) {
            const double lambda = wfh::lambda_from_mean(summary.mean_herald_photons, est.eta_h);
            const double alpha =
                wfh::alpha_from_counts(summary.mean_c, summary.mean_d, est.eta_c, est.eta_d);
            out["lambda_mag"] = lambda;
            out["alpha_mag"] = alpha;
            out["alpha_sq"] = alpha * alpha;
        }
        with_output(*k_out, [&](std::ostream &os) { os << out.dump(2) << "\n"; });
    });

    // states
    auto *states = app.add_subcommand(
        "states", "photon, quadrature and Wigner tables of the heralded signal");
    auto st_args = std::make_shared<ModelArgs>();
    st_args->attach(states, false);
    auto st_j = std::make_shared<int>(0);
    auto st_xmax = std::make_shared<double>(10.0);
    auto st_xstep = std::make_shared<double>(0.1);
    auto st_wrange = std::make_shared<double>(6.0);
    auto st_wpoints = std::make_shared<int>(121);
    auto st_dir = std::make_shared<std::string>(".");
    states->add_option("--j", *st_j, "herald outcome")->required();
    states->add_option("--x-max", *st_xmax, "quadrature grid half-width");
    states->add_option("--x-step", *st_xstep, "quadrature grid step");
    states->add_option("--wigner-range", *st_wrange, "Wigner grid half-width");
    states->add_option("--wigner-grid", *st_wpoints, "Wigner grid points per axis");
    states->add_option("--out-dir", *st_dir, "output directory");
    states->callback([st_args, st_j, st_xmax, st_xstep, st_wrange, st_wpoints, st_dir] {
        const auto rc = st_args->resolve();
        if (*st_xstep <= 0.0 || *st_wpoints < 2 || *st_wrange <= 0.0) {
            throw wfh::Error(wfh::errc::kParse, "states: invalid grid settings");
        }
        const auto dist = wfh::heralded_signal_dist(*st_j, rc.params.source, rc.params.trunc);
        std::filesystem::create_directories(*st_dir);
        const auto path = [&](const char *name) {
            return (std::filesystem::path(*st_dir) / name).string();
        };
        with_output(path("photon.csv"),
                    [&](std::ostream &os) { wfh::write_photon_csv(os, dist); });

        with_output(path("quadrature.csv"), [&](std::ostream &os) {
            os << "x,density\n";
            for (double x = -*st_xmax; x <= *st_xmax + 0.5 * *st_xstep; x += *st_xstep) {
                os << wfh::format_probability(x) << ','
                   << wfh::format_probability(wfh::quadrature_dist(dist, x)) << '\n';
            }
        });

        const int np = *st_wpoints;
        const double step = 2.0 * *st_wrange / (np - 1);
        std::vector<std::string> rows(static_cast<size_t>(np));
        const int jobs = wfh::resolve_jobs(rc.jobs);
        wfh::parallel_for(np, jobs, [&](int xi) {
            std::ostringstream line;
            const double x = -*st_wrange + xi * step;
            for (int pi = 0; pi < np; ++pi) {
                const double p = -*st_wrange + pi * step;
                line << wfh::format_probability(x) << ',' << wfh::format_probability(p) << ','
                     << wfh::format_probability(wfh::wigner(dist, {x, p})) << '\n';
            }
            rows[static_cast<size_t>(xi)] = line.str();
        });
        with_output(path("wigner.csv"), [&](std::ostream &os) {
            os << "x,p,w\n";
            for (const auto &row : rows) os << row;
        });
        diag(json{{"subcommand", "states"},
                  {"j", *st_j},
                  {"photon_deficit", dist.deficit()},
                  {"files", {path("photon.csv"), path("quadrature.csv"), path("wigner.csv")}}});
    });

    // bin-pulses
    auto *binp = app.add_subcommand("bin-pulses",
                                    "bin matched-filter outputs into photon labels and a tally");
    auto b_in = std::make_shared<std::string>();
    auto b_dir = std::make_shared<std::string>(".");
    binp->add_option("--in", *b_in, "pulse CSV (channel,trial,value)")->required();
    binp->add_option("--out-dir", *b_dir, "output directory");
    binp->callback([b_in, b_dir] {
        auto in = open_input(*b_in);
        const auto records = wfh::read_pulse_csv(in);
        const auto herald = wfh::bin_pulse_energies(records, wfh::Channel::kHerald);
        const auto arm_c = wfh::bin_pulse_energies(records, wfh::Channel::kC);
        const auto arm_d = wfh::bin_pulse_energies(records, wfh::Channel::kD);
        for (const auto &[name, res] :
             {std::pair<const char *, const wfh::BinResult &>{"herald", herald},
              {"c", arm_c},
              {"d", arm_d}}) {
            if (res.quality_warning) {
                diag(json{{"subcommand", "bin-pulses"},
                          {"warning", "fewer than 2 peaks"},
                          {"channel", name}});
            }
        }
        const auto tally = wfh::build_tally(herald, arm_c, arm_d);
        std::filesystem::create_directories(*b_dir);
        const auto path = [&](const char *name) {
            return (std::filesystem::path(*b_dir) / name).string();
        };
        with_output(path("boundaries.csv"), [&](std::ostream &os) {
            os << "channel,boundary\n";
            for (const auto &[name, res] :
                 {std::pair<const char *, const wfh::BinResult &>{"herald", herald},
                  {"c", arm_c},
                  {"d", arm_d}}) {
                for (double b : res.boundaries) {
                    os << name << ',' << wfh::format_probability(b) << '\n';
                }
            }
        });
        with_output(path("tally.csv"),
                    [&](std::ostream &os) { wfh::write_tally_csv(os, tally); });
    });

    // residual-metric
    auto *residual = app.add_subcommand("residual-metric",
                                        "mean squared residual between two diff CSVs (JSON)");
    auto r_obs = std::make_shared<std::string>();
    auto r_model = std::make_shared<std::string>();
    auto r_out = std::make_shared<std::string>();
    residual->add_option("--observed", *r_obs, "observed diff CSV")->required();
    residual->add_option("--model", *r_model, "model diff CSV")->required();
    residual->add_option("--out", *r_out, "output file (default stdout)");
    residual->callback([r_obs, r_model, r_out] {
        auto in_a = open_input(*r_obs);
        auto in_b = open_input(*r_model);
        const auto observed = wfh::read_diff_csv(in_a);
        const auto model = wfh::read_diff_csv(in_b);
        const auto [s, nu] = wfh::residual_metric(observed, model);
        with_output(*r_out, [&, s = s, nu = nu](std::ostream &os) {
            os << json{{"s_classical", s}, {"nu", nu}}.dump(2) << "\n";
        });
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        diag(json{{"error", "cli_parse"}, {"message", e.what()}});
        return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
    }
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    try {
        return run_app(argc, argv);
    } catch (const wfh::Error &e) {
        diag(json{{"error", e.code()}, {"message", e.what()}});
        return 2;
    } catch (const std::exception &e) {
        diag(json{{"error", "internal"}, {"message", e.what()}});
        return 3;
    }
}
