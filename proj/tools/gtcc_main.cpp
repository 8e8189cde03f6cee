// gtcc: probabilistic group testing and sparse parity-check coding for
// distributed matrix-vector computation with unreliable workers.
//
// Subcommands: params, grouptest, analysis, pipeline, sweep. Every run echoes
// its effective configuration to stderr as one line of canonical JSON; a run
// is replayable from that line alone.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "gtcc/analysis.hpp"
#include "gtcc/harness.hpp"
#include "gtcc/io.hpp"
#include "gtcc/sim.hpp"

using json = nlohmann::json;
using namespace gtcc;

namespace {

constexpr std::uint64_t kDefaultSeed = 20230815;  // fixed: reproducibility-first tool
constexpr const char* kVersion = "gtcc 0.1.0";

struct CommonFlags {
    int n = 0;
    int L = 0;
    double alpha = 0.0;
    double beta = 1.0;
    double theta = 0.15;
    double eta = 1.0;
    std::optional<double> lambda;
    std::uint64_t seed = kDefaultSeed;
    int threads = 0;
    std::string config_path;
    std::string csv_path;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_lambda = true) {
    cmd->add_option("--n", f.n, "worker count");
    cmd->add_option("--L", f.L, "unreliable worker count");
    cmd->add_option("--alpha", f.alpha, "per-slot attack probability")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--beta", f.beta, "error exponent");
    cmd->add_option("--theta", f.theta, "test density parameter")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--eta", f.eta, "threshold margin");
    if (with_lambda) {
        cmd->add_option_function<double>(
            "--lambda", [&f](double v) { f.lambda = v; }, "slot multiplier override");
    }
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--threads", f.threads, "worker threads (0 = auto)");
    cmd->add_option("--config", f.config_path, "JSON config file; explicit flags win");
}

// Config-file values fill in any option the command line left untouched.
void apply_config(CLI::App* cmd, const std::string& path) {
    if (path.empty()) return;
    std::ifstream is(path);
    if (!is) throw CLI::ValidationError("--config", "cannot open " + path);
    json cfg = json::parse(is);
    for (auto& [key, value] : cfg.items()) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr || opt->count() > 0) continue;
        opt->add_result(value.is_string() ? value.get<std::string>() : value.dump());
        opt->run_callback();
    }
}

void echo_config(const std::string& subcommand, const json& extra) {
    json j = extra;
    j["subcommand"] = subcommand;
    std::cerr << j.dump() << "\n";
}

json params_json(const ExperimentParams& p) {
    return json{{"n", p.n},         {"L", p.L},     {"alpha", p.alpha}, {"beta", p.beta},
                {"theta", p.theta}, {"eta", p.eta}, {"lambda", p.lambda}, {"q", p.q},
                {"epsilon", p.epsilon}, {"m", p.m}, {"Z", p.Z},         {"M", p.M},
                {"T", p.T},         {"d", p.d},     {"seed", p.seed}};
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << text;
}

void warn_if_coding_unviable(const ExperimentParams& p) {
    if (!p.coding_viable())
        std::cerr << "warning: M = " << p.M << " >= n = " << p.n
                  << "; the parity code has no message positions (k <= 0)\n";
}

int run_params(const CommonFlags& f) {
    const auto p = ExperimentParams::select(f.n, f.L, f.alpha, f.beta, f.theta, f.eta, f.lambda, f.seed);
    echo_config("params", params_json(p));
    warn_if_coding_unviable(p);
    std::cout << "q=" << fmt_double(p.q) << "\nm=" << p.m << "\nlambda=" << fmt_double(p.lambda)
              << "\nZ=" << p.Z << "\nM=" << p.M << "\nepsilon=" << fmt_double(p.epsilon)
              << "\nd=" << fmt_double(p.d) << "\ntest_count_bound=" << fmt_double(p.test_count_bound())
              << "\nunrounded_test_count=" << fmt_double(p.unrounded_test_count()) << "\n";
    return 0;
}

int run_grouptest_cmd(const CommonFlags& f, std::int64_t trials, bool assert_thresholds,
                      double max_error_rate) {
    const auto p = ExperimentParams::select(f.n, f.L, f.alpha, f.beta, f.theta, f.eta, f.lambda, f.seed);
    json j = params_json(p);
    j["trials"] = trials;
    echo_config("grouptest", j);

    const auto run = run_grouptest_many(p, trials, f.threads);
    write_output(f.csv_path, grouptest_csv(run));

    std::int64_t errors = 0;
    for (const auto& t : run.trials) {
        if (t.exact != (t.false_alarms == 0 && t.misses == 0)) return 3;
        if (!t.exact) ++errors;
    }
    const double rate = static_cast<double>(errors) / static_cast<double>(trials);
    std::cerr << "error_rate=" << fmt_double(rate) << " (" << errors << "/" << trials << ")\n";
    if (assert_thresholds && rate > max_error_rate) return 1;
    return 0;
}

int run_analysis_cmd(const CommonFlags& f, std::int64_t m_override, std::int64_t z_override,
                     bool check_bounds) {
    if (check_bounds) {
        echo_config("analysis", json{{"check_bounds", true}});
        bool all_ok = true;
        std::string out = "L,theta,alpha,q,m,h_L,lower_slack,upper_slack,diff_slack,ok\n";
        for (int L : {2, 5, 10, 20}) {
            for (double theta : {0.05, 0.1, 0.15, 0.3}) {
                for (int ai = 1; ai <= 10; ++ai) {
                    const double alpha = ai / 10.0;
                    const double q = theta / L;
                    const auto m = floor_int(L / theta);
                    const auto r = check_compat_bounds(L, q, m, alpha);
                    all_ok = all_ok && r.all_ok();
                    out += std::to_string(L) + "," + fmt_double(theta) + "," + fmt_double(alpha) + "," +
                           fmt_double(q) + "," + std::to_string(m) + "," + fmt_double(r.h_L) + "," +
                           fmt_double(r.lower_slack) + "," + fmt_double(r.upper_slack) + "," +
                           fmt_double(r.diff_slack) + "," + (r.all_ok() ? "1" : "0") + "\n";
                }
            }
        }
        write_output(f.csv_path, out);
        return all_ok ? 0 : 1;
    }

    ExperimentParams p = (m_override > 0 && z_override > 0)
                             ? ExperimentParams::with_explicit_tests(f.n, f.L, f.alpha, f.theta, m_override,
                                                                     z_override, 0, f.eta, f.seed)
                             : ExperimentParams::select(f.n, f.L, f.alpha, f.beta, f.theta, f.eta, f.lambda,
                                                        f.seed);
    echo_config("analysis", params_json(p));
    const auto mu = expected_scores(p);
    std::string out = "quantity,value\n";
    for (int x = 0; x <= p.L; ++x)
        out += "h_" + std::to_string(x) + "," + fmt_double(compat_prob(x, p.q, p.m, p.alpha)) + "\n";
    out += "p_epsilon," + fmt_double(empty_column_prob(p.q, p.m)) + "\n";
    out += "mu_f," + fmt_double(mu.reliable) + "\n";
    out += "mu_m," + fmt_double(mu.unreliable) + "\n";
    out += "d," + fmt_double(p.d) + "\n";
    write_output(f.csv_path, out);
    return 0;
}

int run_pipeline_cmd(const CommonFlags& f, std::int64_t m, std::int64_t Z, std::int64_t T,
                     std::uint64_t field_prime, std::int64_t r, std::int64_t c, std::int64_t trials,
                     const std::string& dump_dir) {
    const auto p = ExperimentParams::with_explicit_tests(f.n, f.L, f.alpha, f.theta, m, Z, T, f.eta, f.seed);
    json j = params_json(p);
    j["field_prime"] = field_prime;
    j["r"] = r;
    j["c"] = c;
    j["trials"] = trials;
    echo_config("pipeline", j);
    warn_if_coding_unviable(p);

    if (!dump_dir.empty()) {
        PrimeField field(field_prime);
        PipelineArtifacts artifacts;
        run_pipeline_trial(p, field, r, c, derive_seed(p.seed, 0), &artifacts);
        dump_shares(dump_dir, *artifacts.shares);
        write_field_matrix(dump_dir + "/source.bin", *artifacts.source);
        std::cerr << "shares written to " << dump_dir << "\n";
    }

    const auto run = run_pipeline_many(p, field_prime, r, c, trials, f.threads);
    write_output(f.csv_path, pipeline_csv(run));

    std::int64_t exact = 0, zc = 0;
    for (const auto& t : run.records) {
        exact += t.exact_recovery ? 1 : 0;
        zc += t.zchannel_violations;
    }
    std::cerr << "exact_identification=" << exact << "/" << trials << "\n";
    return zc == 0 ? 0 : 3;
}

int run_sweep_cmd(const CommonFlags& f, const std::string& axis, const std::vector<double>& values,
                  std::int64_t trials) {
    SweepSpec spec;
    spec.axis = sweep_axis_from_string(axis);
    spec.values = values;
    spec.trials_per_point = trials;
    spec.base = ExperimentParams::select(f.n, f.L, f.alpha, f.beta, f.theta, f.eta, f.lambda, f.seed);
    spec.threads = f.threads;
    json j = params_json(spec.base);
    j["axis"] = axis;
    j["values"] = values;
    j["trials_per_point"] = trials;
    echo_config("sweep", j);

    const auto rows = run_grouptest_sweep(spec);
    write_output(f.csv_path, sweep_csv(spec.axis, rows));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"group testing and parity-check coding simulator for unreliable distributed computing"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonFlags pf, gf, af, plf, sf;

    auto* params_cmd = app.add_subcommand("params", "derive and print experiment parameters");
    add_common(params_cmd, pf);

    auto* gt_cmd = app.add_subcommand("grouptest", "Monte Carlo identification trials");
    add_common(gt_cmd, gf);
    std::int64_t gt_trials = 100;
    bool gt_assert = false;
    double gt_max_error = 0.0;
    gt_cmd->add_option("--trials", gt_trials, "trial count");
    gt_cmd->add_option("--csv", gf.csv_path, "CSV output path or - for stdout");
    gt_cmd->add_flag("--assert", gt_assert, "exit nonzero unless error rate <= --max-error-rate");
    gt_cmd->add_option("--max-error-rate", gt_max_error, "threshold used by --assert");

    auto* an_cmd = app.add_subcommand("analysis", "closed-form score tables and bound checks");
    add_common(an_cmd, af);
    std::int64_t an_m = 0, an_z = 0;
    bool an_bounds = false;
    an_cmd->add_option("--m", an_m, "tests per slot (with --Z overrides the derived design)");
    an_cmd->add_option("--Z", an_z, "tested slots");
    an_cmd->add_flag("--check-bounds", an_bounds, "run the bound grid; exit nonzero on violation");
    an_cmd->add_option("--csv", af.csv_path, "CSV output path or - for stdout");

    auto* pl_cmd = app.add_subcommand("pipeline", "end-to-end encode/identify/reconstruct/decode trials");
    add_common(pl_cmd, plf, /*with_lambda=*/false);
    std::int64_t pl_m = 0, pl_z = 0, pl_t = 0, pl_r = 0, pl_c = 8, pl_trials = 10;
    std::uint64_t pl_prime = PrimeField::kDefaultModulus;
    std::string pl_dump;
    pl_cmd->add_option("--m", pl_m, "tests per slot")->required();
    pl_cmd->add_option("--Z", pl_z, "tested slots")->required();
    pl_cmd->add_option("--T", pl_t, "total slots (default 2Z)");
    pl_cmd->add_option("--field-prime", pl_prime, "prime field modulus");
    pl_cmd->add_option("--r", pl_r, "source matrix rows (default 2k)");
    pl_cmd->add_option("--c", pl_c, "source matrix columns");
    pl_cmd->add_option("--trials", pl_trials, "trial count");
    pl_cmd->add_option("--csv", plf.csv_path, "CSV output path or - for stdout");
    pl_cmd->add_option("--dump-shares", pl_dump, "directory for per-worker share files");

    auto* sw_cmd = app.add_subcommand("sweep", "error-rate sweep along one axis");
    add_common(sw_cmd, sf);
    std::string sw_axis = "alpha";
    std::vector<double> sw_values;
    std::int64_t sw_trials = 50;
    sw_cmd->add_option("--axis", sw_axis, "one of n, L, alpha, M, lambda");
    sw_cmd->add_option("--values", sw_values, "sweep points")->delimiter(',');
    sw_cmd->add_option("--trials", sw_trials, "trials per point");
    sw_cmd->add_option("--csv", sf.csv_path, "CSV output path or - for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return 2;
    }

    try {
        if (params_cmd->parsed()) {
            apply_config(params_cmd, pf.config_path);
            return run_params(pf);
        }
        if (gt_cmd->parsed()) {
            apply_config(gt_cmd, gf.config_path);
            return run_grouptest_cmd(gf, gt_trials, gt_assert, gt_max_error);
        }
        if (an_cmd->parsed()) {
            apply_config(an_cmd, af.config_path);
            return run_analysis_cmd(af, an_m, an_z, an_bounds);
        }
        if (pl_cmd->parsed()) {
            apply_config(pl_cmd, plf.config_path);
            if (pl_t == 0) pl_t = 2 * pl_z;
            if (pl_r == 0) pl_r = 2 * (plf.n - pl_m * pl_z);
            return run_pipeline_cmd(plf, pl_m, pl_z, pl_t, pl_prime, pl_r, pl_c, pl_trials, pl_dump);
        }
        if (sw_cmd->parsed()) {
            apply_config(sw_cmd, sf.config_path);
            return run_sweep_cmd(sf, sw_axis, sw_values, sw_trials);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
