#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <string>

#include "support/helpers.hpp"
#include "wfh/ingest.hpp"

using wfh_tests::make_temp_dir;
using wfh_tests::read_file;
using wfh_tests::run_cli;
using wfh_tests::write_file;

namespace {
const std::string kCli = WFH_CLI_PATH;
}

TEST_CASE("model-quantum trivial output") {
    const auto r = run_cli(kCli, "model-quantum --j 0 --alpha-sq 0");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "dn,probability\n0,1.0\n");
    CHECK(r.err.find("deficit") != std::string::npos);
}

TEST_CASE("model-classical rejects alpha = 0 with a machine-readable error") {
    const auto r = run_cli(kCli, "model-classical --j 6 --alpha-sq 0");
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("\"error\":\"domain_error\"") != std::string::npos);
}

TEST_CASE("unknown flags exit nonzero with a diagnostic") {
    const auto r = run_cli(kCli, "model-quantum --j 0 --alpha-sq 1 --bogus 3");
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("\"error\"") != std::string::npos);
}

TEST_CASE("model tables parse back as normalized distributions") {
    const auto dir = make_temp_dir("modelq");
    const auto r = run_cli(kCli, "model-quantum --preset table1 --j 2 --alpha-sq 6.52 --out '" +
                                     dir + "/q.csv'");
    REQUIRE(r.exit_code == 0);
    std::stringstream in(read_file(dir + "/q.csv"));
    const auto dist = wfh::read_diff_csv(in);
    CHECK(dist.raw_sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("residual-metric compares the two models") {
    const auto dir = make_temp_dir("resid");
    auto rq = run_cli(kCli, "model-quantum --preset table1 --j 6 --alpha-sq 15.41 --out '" + dir +
                                "/q.csv'");
    auto rc = run_cli(kCli, "model-classical --preset table1 --j 6 --alpha-sq 15.41 --out '" +
                                dir + "/c.csv'");
    REQUIRE(rq.exit_code == 0);
    REQUIRE(rc.exit_code == 0);
    const auto rm = run_cli(kCli, "residual-metric --observed '" + dir + "/q.csv' --model '" +
                                      dir + "/c.csv'");
    CHECK(rm.exit_code == 0);
    CHECK(rm.out.find("s_classical") != std::string::npos);
    CHECK(rm.out.find("nu") != std::string::npos);
}

TEST_CASE("transition-scan and fit-alpha-min pipeline") {
    const auto dir = make_temp_dir("scan");
    const auto scan = run_cli(
        kCli, "transition-scan --preset table1 --j 1 --grid 6,9,12,15 --out '" + dir + "/scan.csv'");
    REQUIRE(scan.exit_code == 0);
    std::stringstream in(read_file(dir + "/scan.csv"));
    const auto points = wfh::read_transition_csv(in);
    REQUIRE(points.size() == 4);
    CHECK(points.front().s_classical > points.back().s_classical);

    const auto fit = run_cli(kCli, "fit-alpha-min --in '" + dir + "/scan.csv'");
    CHECK(fit.exit_code == 0);
    CHECK(fit.out.find("alpha_sq_min") != std::string::npos);
    CHECK(fit.out.find("6.7e-06") != std::string::npos);  // default threshold
}

TEST_CASE("engineer emits a distribution and summary") {
    const auto dir = make_temp_dir("eng");
    const auto r = run_cli(kCli,
                           "engineer --preset table1 --m 2 --n 0 --alpha-sq 6.52 --out '" + dir +
                               "/dist.csv'");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("\"g2\"") != std::string::npos);
    std::stringstream in(read_file(dir + "/dist.csv"));
    const auto dist = wfh::read_photon_csv(in);
    CHECK(dist.raw_sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("calibrate consumes a counts summary") {
    const auto dir = make_temp_dir("cal");
    write_file(dir + "/counts.json", R"({
        "herald_singles": 400000, "signal_singles_c": 240000,
        "signal_singles_d": 300000, "coincidences_hc": 60000,
        "coincidences_hd": 72000, "trials": 10000000,
        "mean_herald_photons": 0.689, "mean_c": 2.11, "mean_d": 2.71
    })");
    const auto r = run_cli(kCli, "calibrate --counts '" + dir + "/counts.json'");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("eta_h") != std::string::npos);
    CHECK(r.out.find("lambda_mag") != std::string::npos);
    CHECK(r.out.find("detection_rule") != std::string::npos);
}

TEST_CASE("states writes the three tables") {
    const auto dir = make_temp_dir("states");
    const auto r = run_cli(kCli,
                           "states --preset table1 --j 2 --wigner-grid 21 --wigner-range 4 "
                           "--x-max 4 --x-step 0.5 --out-dir '" +
                               dir + "'");
    REQUIRE(r.exit_code == 0);
    std::stringstream photon(read_file(dir + "/photon.csv"));
    const auto dist = wfh::read_photon_csv(photon);
    CHECK(dist.raw_sum() == doctest::Approx(1.0).epsilon(1e-9));
    const auto quad = read_file(dir + "/quadrature.csv");
    CHECK(quad.rfind("x,density\n", 0) == 0);
    const auto wig = read_file(dir + "/wigner.csv");
    CHECK(wig.rfind("x,p,w\n", 0) == 0);
    // 21x21 grid plus header.
    CHECK(std::count(wig.begin(), wig.end(), '\n') == 21 * 21 + 1);
}

TEST_CASE("bin-pulses ingests a pulse file into a tally") {
    const auto dir = make_temp_dir("pulses");
    std::ostringstream pulses;
    pulses << "channel,trial,value\n";
    // 150 trials of clean two-level data per channel; herald alternates.
    for (int t = 0; t < 150; ++t) {
        pulses << "herald," << t << ',' << (t % 2 == 0 ? 0.02 : 1.01) << "\n";
        pulses << "c," << t << ',' << (t % 3 == 0 ? 1.0 : 0.0) << "\n";
        pulses << "d," << t << ',' << (t % 5 == 0 ? 1.0 : 0.0) << "\n";
    }
    write_file(dir + "/pulses.csv", pulses.str());
    const auto r = run_cli(kCli, "bin-pulses --in '" + dir + "/pulses.csv' --out-dir '" + dir + "'");
    REQUIRE(r.exit_code == 0);
    std::stringstream tally_in(read_file(dir + "/tally.csv"));
    const auto tally = wfh::read_tally_csv(tally_in);
    double total = 0.0;
    for (const auto &[key, c] : tally.counts) total += c;
    CHECK(total == doctest::Approx(150.0));
    const auto boundaries = read_file(dir + "/boundaries.csv");
    CHECK(boundaries.rfind("channel,boundary\n", 0) == 0);
    CHECK(boundaries.find("herald,") != std::string::npos);
}

TEST_CASE("nonclassicality reports witnesses with uncertainties") {
    const auto dir = make_temp_dir("ncl");
    const auto params = wfh::table1_params(0.0);
    const auto tally = wfh_tests::sampled_tally(params, 1, 200000, 9);
    {
        std::ostringstream out;
        wfh::write_tally_csv(out, tally);
        write_file(dir + "/tally.csv", out.str());
    }
    const auto r = run_cli(kCli, "nonclassicality --tally '" + dir +
                                     "/tally.csv' --resamples 10 --seed 3");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("mu_min") != std::string::npos);
    CHECK(r.out.find("g2_sigma") != std::string::npos);
    // Both sign conventions appear on the diagnostic stream.
    CHECK(r.err.find("mu_min_subtract") != std::string::npos);
    CHECK(r.err.find("mu_min_add") != std::string::npos);
}

TEST_CASE("config file drives a run and flags override it") {
    const auto dir = make_temp_dir("config");
    write_file(dir + "/run.conf",
               "lambda_mag = 0.797\n"
               "eta_h = 0.395\n"
               "eta_c = 0.274\n"
               "eta_d = 0.352\n"
               "mode_overlap = 0.82\n"
               "alpha_sq = 6.52\n");
    const auto from_config =
        run_cli(kCli, "model-quantum --j 1 --config '" + dir + "/run.conf'");
    const auto from_flags = run_cli(
        kCli,
        "model-quantum --j 1 --preset table1 --alpha-sq 6.52");
    REQUIRE(from_config.exit_code == 0);
    REQUIRE(from_flags.exit_code == 0);
    CHECK(from_config.out == from_flags.out);

    const auto overridden = run_cli(
        kCli, "model-quantum --j 1 --config '" + dir + "/run.conf' --alpha-sq 2.0");
    CHECK(overridden.out != from_config.out);
}

TEST_CASE("identical invocations are byte identical") {
    const auto dir = make_temp_dir("determinism");
    for (const std::string name : {"a", "b"}) {
        const auto r = run_cli(kCli, "transition-scan --preset table1 --j 1 --grid 6,9,12 --out '" +
                                         dir + "/" + name + ".csv'");
        REQUIRE(r.exit_code == 0);
    }
    CHECK(read_file(dir + "/a.csv") == read_file(dir + "/b.csv"));
}

TEST_CASE("worker count does not change the bytes and the env overrides the flag") {
    const auto dir = make_temp_dir("jobs");
    const auto serial = run_cli(kCli, "transition-scan --preset table1 --j 1 --grid 6,9,12 "
                                      "--jobs 1 --out '" + dir + "/serial.csv'");
    const auto pooled = run_cli(kCli,
                                "transition-scan --preset table1 --j 1 --grid 6,9,12 "
                                "--jobs 1 --out '" + dir + "/pooled.csv'",
                                "WFH_SIM_JOBS=3");
    REQUIRE(serial.exit_code == 0);
    REQUIRE(pooled.exit_code == 0);
    CHECK(read_file(dir + "/serial.csv") == read_file(dir + "/pooled.csv"));
    CHECK(!read_file(dir + "/serial.csv").empty());
}
