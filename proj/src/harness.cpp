#include "gtcc/harness.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gtcc/analysis.hpp"
#include "gtcc/sim.hpp"

namespace gtcc {

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
    if (trials <= 0) throw std::invalid_argument("wilson_interval: trials must be > 0");
    if (successes < 0 || successes > trials) throw std::invalid_argument("wilson_interval: bad success count");
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return WilsonInterval{std::max(0.0, center - half), std::min(1.0, center + half)};
}

int default_thread_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) return 1;
    return static_cast<int>(hw > 16 ? 16 : hw);
}

std::vector<std::uint64_t> trial_seeds(std::uint64_t master, std::int64_t count) {
    std::vector<std::uint64_t> seeds(static_cast<size_t>(count));
    for (std::int64_t i = 0; i < count; ++i)
        seeds[static_cast<size_t>(i)] = derive_seed(master, static_cast<std::uint64_t>(i));
    return seeds;
}

void parallel_for_index(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn) {
    if (threads <= 0) threads = default_thread_count();
    if (threads == 1 || count <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    const int nthreads = static_cast<int>(std::min<std::int64_t>(threads, count));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

GroupTestRun run_grouptest_many(const ExperimentParams& p, std::int64_t trials, int threads) {
    GroupTestRun run;
    run.params = p;
    run.trials.resize(static_cast<size_t>(trials));
    const auto seeds = trial_seeds(p.seed, trials);
    parallel_for_index(trials, threads, [&](std::int64_t i) {
        Rng rng(seeds[static_cast<size_t>(i)]);
        run.trials[static_cast<size_t>(i)] = run_grouptest_trial(p, rng);
    });
    return run;
}

std::string grouptest_csv(const GroupTestRun& run) {
    std::ostringstream os;
    os << "trial,n,L,alpha,m,Z,M,d,false_alarms,misses,exact_recovery\n";
    const auto& p = run.params;
    for (size_t i = 0; i < run.trials.size(); ++i) {
        const auto& t = run.trials[i];
        os << i << ',' << p.n << ',' << p.L << ',' << fmt_double(p.alpha) << ',' << p.m << ',' << p.Z << ','
           << p.M << ',' << fmt_double(p.d) << ',' << t.false_alarms << ',' << t.misses << ','
           << (t.exact ? 1 : 0) << '\n';
    }
    return os.str();
}

SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "n") return SweepAxis::N;
    if (s == "L") return SweepAxis::L;
    if (s == "alpha") return SweepAxis::Alpha;
    if (s == "M") return SweepAxis::M;
    if (s == "lambda") return SweepAxis::Lambda;
    throw std::invalid_argument("unknown sweep axis: " + s);
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::N: return "n";
        case SweepAxis::L: return "L";
        case SweepAxis::Alpha: return "alpha";
        case SweepAxis::M: return "M";
        case SweepAxis::Lambda: return "lambda";
    }
    return "?";
}

namespace {

ExperimentParams params_at_point(const ExperimentParams& base, SweepAxis axis, double value) {
    switch (axis) {
        case SweepAxis::N:
            return ExperimentParams::select(static_cast<int>(value), base.L, base.alpha, base.beta,
                                            base.theta, base.eta, base.lambda, base.seed);
        case SweepAxis::L:
            return ExperimentParams::select(base.n, static_cast<int>(value), base.alpha, base.beta,
                                            base.theta, base.eta, base.lambda, base.seed);
        case SweepAxis::Alpha:
            return ExperimentParams::select(base.n, base.L, value, base.beta, base.theta, base.eta,
                                            base.lambda, base.seed);
        case SweepAxis::M: {
            const auto Z = std::max<std::int64_t>(1, ceil_int(value / static_cast<double>(base.m)));
            return ExperimentParams::with_explicit_tests(base.n, base.L, base.alpha, base.theta, base.m, Z,
                                                         0, base.eta, base.seed);
        }
        case SweepAxis::Lambda:
            return ExperimentParams::select(base.n, base.L, base.alpha, base.beta, base.theta, base.eta,
                                            value, base.seed);
    }
    throw std::logic_error("bad axis");
}

}  // namespace

std::vector<SweepRow> run_grouptest_sweep(const SweepSpec& spec) {
    if (spec.values.empty()) throw std::invalid_argument("sweep: values must be nonempty");
    if (spec.trials_per_point < 1) throw std::invalid_argument("sweep: trials_per_point must be >= 1");
    std::vector<SweepRow> rows;
    rows.reserve(spec.values.size());
    for (size_t pi = 0; pi < spec.values.size(); ++pi) {
        ExperimentParams p = params_at_point(spec.base, spec.axis, spec.values[pi]);
        p.seed = derive_seed(spec.base.seed, pi);
        const GroupTestRun run = run_grouptest_many(p, spec.trials_per_point, spec.threads);
        SweepRow row;
        row.point = spec.values[pi];
        row.trials = spec.trials_per_point;
        for (const auto& t : run.trials) {
            if (!t.exact) ++row.errors;
            row.total_false_alarms += t.false_alarms;
            row.total_misses += t.misses;
        }
        row.error_rate = static_cast<double>(row.errors) / static_cast<double>(row.trials);
        const auto ci = wilson_interval(row.errors, row.trials);
        row.wilson_lo = ci.lo;
        row.wilson_hi = ci.hi;
        row.mean_false_alarms = static_cast<double>(row.total_false_alarms) / static_cast<double>(row.trials);
        row.mean_misses = static_cast<double>(row.total_misses) / static_cast<double>(row.trials);
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_csv(SweepAxis axis, std::span<const SweepRow> rows) {
    std::ostringstream os;
    os << "axis,point,trials,errors,error_rate,wilson_lo,wilson_hi,mean_false_alarms,mean_misses\n";
    for (const auto& r : rows) {
        os << to_string(axis) << ',' << fmt_double(r.point) << ',' << r.trials << ',' << r.errors << ','
           << fmt_double(r.error_rate) << ',' << fmt_double(r.wilson_lo) << ',' << fmt_double(r.wilson_hi)
           << ',' << fmt_double(r.mean_false_alarms) << ',' << fmt_double(r.mean_misses) << '\n';
    }
    return os.str();
}

std::vector<TheoryRow> run_theory_comparison(const ExperimentParams& p, std::int64_t trials, int threads) {
    if (trials < 2) throw std::invalid_argument("run_theory_comparison: need at least 2 trials");
    const GroupTestRun run = run_grouptest_many(p, trials, threads);

    const double n_rel = static_cast<double>(p.n - p.L);
    const double n_unrel = static_cast<double>(p.L);
    const double nz = static_cast<double>(p.n) * static_cast<double>(p.Z);
    const double zslots = static_cast<double>(p.Z);

    struct Series {
        std::string name;
        double theory;
        std::vector<double> per_trial;
    };
    const ExpectedScores mu = expected_scores(p);
    const double empty = empty_column_prob(p.q, p.m);
    const double h_L = compat_prob(p.L, p.q, p.m, p.alpha);
    const double h_Lm1 = p.L >= 1 ? compat_prob(p.L - 1, p.q, p.m, p.alpha) : 1.0;

    std::vector<Series> series;
    series.push_back({"mu_f", mu.reliable, {}});
    series.push_back({"mu_m", mu.unreliable, {}});
    series.push_back({"p_epsilon", empty, {}});
    series.push_back({"p_one_reliable", h_L - empty, {}});
    series.push_back({"p_one_unreliable", p.alpha + (1.0 - p.alpha) * h_Lm1 - empty, {}});
    for (auto& s : series) s.per_trial.reserve(run.trials.size());

    for (const auto& t : run.trials) {
        series[0].per_trial.push_back(t.sum_score_reliable / n_rel);
        series[1].per_trial.push_back(t.sum_score_unreliable / n_unrel);
        series[2].per_trial.push_back(static_cast<double>(t.epsilon_slots) / nz);
        series[3].per_trial.push_back(static_cast<double>(t.ones_reliable) / (n_rel * zslots));
        series[4].per_trial.push_back(static_cast<double>(t.ones_unreliable) / (n_unrel * zslots));
    }

    std::vector<TheoryRow> rows;
    for (const auto& s : series) {
        double mean = 0.0;
        for (double v : s.per_trial) mean += v;
        mean /= static_cast<double>(s.per_trial.size());
        double var = 0.0;
        for (double v : s.per_trial) var += (v - mean) * (v - mean);
        var /= static_cast<double>(s.per_trial.size() - 1);
        const double se = std::sqrt(var / static_cast<double>(s.per_trial.size()));
        TheoryRow row;
        row.quantity = s.name;
        row.theory = s.theory;
        row.empirical = mean;
        row.std_err = se;
        row.z_score = se > 0.0 ? (mean - s.theory) / se : (mean == s.theory ? 0.0 : INFINITY);
        rows.push_back(row);
    }
    return rows;
}

std::string theory_csv(std::span<const TheoryRow> rows) {
    std::ostringstream os;
    os << "quantity,theory,empirical,std_err,z_score\n";
    for (const auto& r : rows) {
        os << r.quantity << ',' << fmt_double(r.theory) << ',' << fmt_double(r.empirical) << ','
           << fmt_double(r.std_err) << ',' << fmt_double(r.z_score) << '\n';
    }
    return os.str();
}

ReconstructionCoverage run_reconstruction_coverage(const ExperimentParams& p, std::int64_t trials,
                                                   int threads) {
    struct PerTrial {
        bool failed = false;
        std::int64_t qualifying = 0;
    };
    std::vector<PerTrial> results(static_cast<size_t>(trials));
    const auto seeds = trial_seeds(p.seed, trials);
    const size_t wpr = static_cast<size_t>((p.n + 63) / 64);

    parallel_for_index(trials, threads, [&](std::int64_t i) {
        Rng rng(seeds[static_cast<size_t>(i)]);
        const auto unreliable = sample_worker_subset(p.n, p.L, rng);
        const ContactMatrix contact = generate_contact_matrix(p, rng);

        std::vector<std::uint64_t> lmask(wpr, 0);
        for (std::uint32_t w : unreliable) lmask[w / 64] |= 1ULL << (w & 63);

        std::vector<std::uint8_t> covered(static_cast<size_t>(p.n), 0);
        PerTrial& out = results[static_cast<size_t>(i)];
        for (std::int64_t row = 0; row < p.M; ++row) {
            const auto bits = contact.bits.row(row);
            int in_set = 0;
            std::uint32_t member = 0;
            bool outside = false;
            for (size_t wd = 0; wd < wpr && in_set <= 1; ++wd) {
                const std::uint64_t hit = bits[wd] & lmask[wd];
                if (hit) {
                    in_set += std::popcount(hit);
                    member = static_cast<std::uint32_t>(wd * 64 + static_cast<size_t>(std::countr_zero(hit)));
                }
                if (bits[wd] & ~lmask[wd]) outside = true;
            }
            if (in_set != 1) continue;
            if (!outside) {
                for (size_t wd = 0; wd < wpr; ++wd) {
                    if (bits[wd] & ~lmask[wd]) {
                        outside = true;
                        break;
                    }
                }
            }
            if (!outside) continue;
            ++out.qualifying;
            covered[member] = 1;
        }
        for (std::uint32_t w : unreliable) {
            if (!covered[w]) {
                out.failed = true;
                break;
            }
        }
    });

    ReconstructionCoverage cov;
    cov.trials = trials;
    cov.rows_total = p.M * trials;
    for (const auto& r : results) {
        if (r.failed) ++cov.failed_trials;
        cov.rows_qualifying += r.qualifying;
    }
    cov.failure_fraction = static_cast<double>(cov.failed_trials) / static_cast<double>(trials);
    const double q = p.q;
    cov.per_row_theory = q * std::pow(1.0 - q, static_cast<double>(p.L - 1)) *
                         (1.0 - std::pow(1.0 - q, static_cast<double>(p.n - p.L)));
    cov.per_row_empirical = static_cast<double>(cov.rows_qualifying) /
                            (static_cast<double>(cov.rows_total) * static_cast<double>(p.L));
    const double p_any = static_cast<double>(p.L) * cov.per_row_theory;  // disjoint per-worker events
    const double nrows = static_cast<double>(cov.rows_total);
    const double sd = std::sqrt(nrows * p_any * (1.0 - p_any));
    cov.z_score = sd > 0.0 ? (static_cast<double>(cov.rows_qualifying) - nrows * p_any) / sd : 0.0;
    return cov;
}

PipelineRun run_pipeline_many(const ExperimentParams& p, std::uint64_t field_prime, std::int64_t r,
                              std::int64_t c, std::int64_t trials, int threads) {
    PipelineRun run;
    run.params = p;
    run.field_prime = field_prime;
    run.r = r;
    run.c = c;
    run.records.resize(static_cast<size_t>(trials));
    const PrimeField field(field_prime);
    const auto seeds = trial_seeds(p.seed, trials);
    parallel_for_index(trials, threads, [&](std::int64_t i) {
        TrialRecord rec = run_pipeline_trial(p, field, r, c, seeds[static_cast<size_t>(i)]);
        rec.trial_index = static_cast<std::uint64_t>(i);
        run.records[static_cast<size_t>(i)] = std::move(rec);
    });
    return run;
}

std::string pipeline_csv(const PipelineRun& run) {
    std::ostringstream os;
    os << "trial,n,L,alpha,m,Z,M,k,d,false_alarms,misses,exact_recovery,criterion_failures,"
          "decode_failures,slots_decoded_ok,slots_total,parity_collisions,parity_check_mul_adds\n";
    const auto& p = run.params;
    for (size_t i = 0; i < run.records.size(); ++i) {
        const auto& t = run.records[i];
        os << i << ',' << p.n << ',' << p.L << ',' << fmt_double(p.alpha) << ',' << p.m << ',' << p.Z << ','
           << p.M << ',' << t.k << ',' << fmt_double(p.d) << ',' << t.false_alarms << ',' << t.misses << ','
           << (t.exact_recovery ? 1 : 0) << ',' << t.criterion_failures << ',' << t.decode_failures << ','
           << t.slots_decoded_ok << ',' << t.slots_total << ',' << t.parity_collisions << ','
           << t.ops.parity_check_mul_adds << '\n';
    }
    return os.str();
}

}  // namespace gtcc
