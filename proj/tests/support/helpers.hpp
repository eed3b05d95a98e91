#ifndef WFH_TESTS_HELPERS_HPP
#define WFH_TESTS_HELPERS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "wfh/distributions.hpp"
#include "wfh/nonclassicality.hpp"
#include "wfh/params.hpp"

namespace wfh_tests {

// Upper-tail p-value of a chi-square statistic with df degrees of freedom.
double chi_square_pvalue(double stat, double df);

// Expectation-valued tally: counts(j,k,l) = scale * P_model(k,l | j).
wfh::EventTally expected_tally(const wfh::ExperimentParams &params, const std::vector<int> &js,
                               double scale = 1e6);

// Multinomially sampled tally from one herald outcome's model joint.
wfh::EventTally sampled_tally(const wfh::ExperimentParams &params, int j, std::int64_t events,
                              std::uint64_t seed);

// Product tally E(k,l) = scale * u_k * v_l from a single-arm distribution
// (an exact two-trial multinomial when u == v).
wfh::EventTally product_tally(int j, const std::vector<double> &u, const std::vector<double> &v,
                              double scale = 1e6);

// Poisson and geometric probability vectors truncated when the pmf drops
// below 1e-16.
std::vector<double> poisson_pmf(double mean);
std::vector<double> geometric_pmf(double mean);

struct CliResult {
    int exit_code = 0;
    std::string out;
    std::string err;
};

// Runs the CLI binary with the given argument string via the shell; env
// assignments (e.g. "WFH_SIM_JOBS=2") are prefixed when given.
CliResult run_cli(const std::string &cli_path, const std::string &args,
                  const std::string &env = "");

std::string make_temp_dir(const std::string &tag);
std::string read_file(const std::string &path);
void write_file(const std::string &path, const std::string &content);

}  // namespace wfh_tests

#endif
