#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gtcc/gt_core.hpp"
#include "gtcc/params.hpp"
#include "gtcc/trial_record.hpp"

namespace gtcc {

/// 95% (by default) Wilson score interval for a binomial proportion.
struct WilsonInterval {
    double lo = 0.0;
    double hi = 0.0;
};
WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.959963984540054);

int default_thread_count();

/// Runs fn(0..count-1) across threads and returns results in index order, so
/// output never depends on scheduling. Trial i must seed its own Rng from
/// derive_seed(master, i).
std::vector<std::uint64_t> trial_seeds(std::uint64_t master, std::int64_t count);
void parallel_for_index(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn);

/// Stable text form for doubles in CSV output.
std::string fmt_double(double v);

// ---- group testing runs ----

struct GroupTestRun {
    ExperimentParams params;
    std::vector<GtTrialResult> trials;
};
GroupTestRun run_grouptest_many(const ExperimentParams& p, std::int64_t trials, int threads);

/// trial,n,L,alpha,m,Z,M,d,false_alarms,misses,exact_recovery
std::string grouptest_csv(const GroupTestRun& run);

// ---- sweeps ----

enum class SweepAxis { N, L, Alpha, M, Lambda };
SweepAxis sweep_axis_from_string(const std::string& s);
std::string to_string(SweepAxis axis);

struct SweepSpec {
    SweepAxis axis = SweepAxis::Alpha;
    std::vector<double> values;
    std::int64_t trials_per_point = 1;
    ExperimentParams base;
    int threads = 0;
};

struct SweepRow {
    double point = 0.0;
    std::int64_t trials = 0;
    std::int64_t errors = 0;
    double error_rate = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    double mean_false_alarms = 0.0;
    double mean_misses = 0.0;
    std::int64_t total_false_alarms = 0;
    std::int64_t total_misses = 0;
};
std::vector<SweepRow> run_grouptest_sweep(const SweepSpec& spec);

/// axis,point,trials,errors,error_rate,wilson_lo,wilson_hi,mean_false_alarms,mean_misses
std::string sweep_csv(SweepAxis axis, std::span<const SweepRow> rows);

// ---- theory vs simulation ----

struct TheoryRow {
    std::string quantity;
    double theory = 0.0;
    double empirical = 0.0;
    double std_err = 0.0;
    double z_score = 0.0;
};
/// Rows: mu_f, mu_m, p_epsilon, p_one_reliable, p_one_unreliable. Standard
/// errors are across-trial (one clustered sample per trial).
std::vector<TheoryRow> run_theory_comparison(const ExperimentParams& p, std::int64_t trials, int threads);

/// quantity,theory,empirical,std_err,z_score
std::string theory_csv(std::span<const TheoryRow> rows);

// ---- reconstruction-criterion coverage ----

struct ReconstructionCoverage {
    std::int64_t trials = 0;
    std::int64_t failed_trials = 0;  // some unreliable worker had no qualifying row
    double failure_fraction = 0.0;
    std::int64_t rows_total = 0;
    std::int64_t rows_qualifying = 0;  // exactly one unreliable member plus an outside member
    double per_row_empirical = 0.0;    // per fixed unreliable worker
    double per_row_theory = 0.0;       // q(1-q)^(L-1) (1-(1-q)^(n-L))
    double z_score = 0.0;
};
ReconstructionCoverage run_reconstruction_coverage(const ExperimentParams& p, std::int64_t trials, int threads);

// ---- pipeline runs ----

struct PipelineRun {
    ExperimentParams params;
    std::uint64_t field_prime = 0;
    std::int64_t r = 0;
    std::int64_t c = 0;
    std::vector<TrialRecord> records;
};
PipelineRun run_pipeline_many(const ExperimentParams& p, std::uint64_t field_prime, std::int64_t r,
                              std::int64_t c, std::int64_t trials, int threads);

/// trial,n,L,alpha,m,Z,M,k,d,false_alarms,misses,exact_recovery,criterion_failures,
/// decode_failures,slots_decoded_ok,slots_total,parity_collisions,parity_check_mul_adds
std::string pipeline_csv(const PipelineRun& run);

}  // namespace gtcc
