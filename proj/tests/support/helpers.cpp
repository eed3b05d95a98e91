#include "support/helpers.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "wfh/quantum_model.hpp"

namespace wfh_tests {

namespace {

// Regularized incomplete gamma functions (series / continued fraction).
double gamma_series_p(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_cf_q(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double chi_square_pvalue(double stat, double df) {
    if (stat <= 0.0) return 1.0;
    const double a = 0.5 * df;
    const double x = 0.5 * stat;
    if (x < a + 1.0) return 1.0 - gamma_series_p(a, x);
    return gamma_cf_q(a, x);
}

wfh::EventTally expected_tally(const wfh::ExperimentParams &params, const std::vector<int> &js,
                               double scale) {
    wfh::EventTally tally;
    for (int j : js) {
        const auto joint = wfh::heralded_joint(j, params);
        for (const auto &[key, p] : joint.probs()) {
            if (p * scale > 1e-14) tally.add(j, key.first, key.second, p * scale);
        }
    }
    return tally;
}

wfh::EventTally sampled_tally(const wfh::ExperimentParams &params, int j, std::int64_t events,
                              std::uint64_t seed) {
    const auto joint = wfh::heralded_joint(j, params);
    std::vector<std::pair<std::pair<int, int>, double>> cells(joint.probs().begin(),
                                                              joint.probs().end());
    std::mt19937_64 rng(seed);
    wfh::EventTally tally;
    std::int64_t remaining = events;
    double mass_left = 1.0;
    for (size_t c = 0; c < cells.size() && remaining > 0; ++c) {
        std::int64_t drawn;
        if (c + 1 == cells.size() || cells[c].second >= mass_left) {
            drawn = remaining;
        } else {
            std::binomial_distribution<std::int64_t> binom(remaining,
                                                           cells[c].second / mass_left);
            drawn = binom(rng);
        }
        if (drawn > 0) {
            tally.add(j, cells[c].first.first, cells[c].first.second,
                      static_cast<double>(drawn));
        }
        remaining -= drawn;
        mass_left -= cells[c].second;
    }
    return tally;
}

wfh::EventTally product_tally(int j, const std::vector<double> &u, const std::vector<double> &v,
                              double scale) {
    wfh::EventTally tally;
    for (size_t k = 0; k < u.size(); ++k) {
        for (size_t l = 0; l < v.size(); ++l) {
            const double c = scale * u[k] * v[l];
            if (c > 0.0) tally.add(j, static_cast<int>(k), static_cast<int>(l), c);
        }
    }
    return tally;
}

std::vector<double> poisson_pmf(double mean) {
    std::vector<double> pmf;
    double p = std::exp(-mean);
    for (int k = 0;; ++k) {
        if (k > 0) p *= mean / k;
        pmf.push_back(p);
        if (k > mean && p < 1e-16) break;
    }
    return pmf;
}

std::vector<double> geometric_pmf(double mean) {
    const double q = mean / (1.0 + mean);
    std::vector<double> pmf;
    double p = 1.0 - q;
    for (int k = 0;; ++k) {
        if (k > 0) p *= q;
        pmf.push_back(p);
        if (p < 1e-16) break;
    }
    return pmf;
}

CliResult run_cli(const std::string &cli_path, const std::string &args, const std::string &env) {
    const std::string dir = make_temp_dir("cli");
    const std::string out_path = dir + "/stdout";
    const std::string err_path = dir + "/stderr";
    const std::string cmd = (env.empty() ? "" : env + " ") + "'" + cli_path + "' " + args +
                            " > '" + out_path + "' 2> '" + err_path + "'";
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = status == -1 ? -1 : WEXITSTATUS(status);
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    return result;
}

std::string make_temp_dir(const std::string &tag) {
    std::string tmpl = "/tmp/wfh_" + tag + "_XXXXXX";
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (mkdtemp(buf.data()) == nullptr) {
        throw std::runtime_error("mkdtemp failed");
    }
    return std::string(buf.data());
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace wfh_tests
