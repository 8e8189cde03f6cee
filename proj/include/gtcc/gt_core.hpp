#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gtcc/bitmatrix.hpp"
#include "gtcc/params.hpp"
#include "gtcc/rng.hpp"

namespace gtcc {

struct SlotRange {
    std::int64_t begin = 0;
    std::int64_t end = 0;
};

/// M x n binary test design: row j selects the workers taking part in test j.
/// Rows are grouped into Z slots of m consecutive tests.
struct ContactMatrix {
    BitMatrix bits;
    std::int64_t m = 0;
    std::int64_t Z = 0;
    SlotRange slot_rows(std::int64_t z) const { return {z * m, (z + 1) * m}; }
};

/// Contact matrix with the slot-z block of every unreliable-but-unattacked
/// worker's column zeroed; models which selections actually expose a worker.
struct SamplingMatrix {
    BitMatrix bits;
    std::int64_t m = 0;
    std::int64_t Z = 0;
    SlotRange slot_rows(std::int64_t z) const { return {z * m, (z + 1) * m}; }
};

/// The static unreliable set plus the per-slot attacked subsets.
struct AttackSchedule {
    std::vector<std::uint32_t> unreliable;               // sorted
    std::vector<std::vector<std::uint32_t>> attacked;    // one sorted subset per slot

    bool is_unreliable(std::uint32_t w) const;
    /// Bit mask of the unreliable indicator vector over n workers.
    std::vector<std::uint64_t> indicator_mask(std::int64_t n) const;
};

/// Sorted uniform L-subset of {0..n-1}.
std::vector<std::uint32_t> sample_worker_subset(int n, int L, Rng& rng);

/// Fill with i.i.d. Bernoulli(q) bits. Gap-skip sampling, so sparse designs
/// cost O(q * rows * cols) draws; the produced distribution is the exact
/// per-entry Bernoulli product.
void fill_bernoulli(BitMatrix& bits, double q, Rng& rng);

ContactMatrix generate_contact_matrix(const ExperimentParams& p, Rng& rng);

/// Each unreliable worker lands in the slot-t attacked set independently with
/// probability alpha, for every t in [0, T).
AttackSchedule sample_attacks(const ExperimentParams& p, std::vector<std::uint32_t> unreliable, Rng& rng);

/// Generic slot layout variant used by tests with non-uniform slot sizes:
/// slot z covers rows [slot_begin[z], slot_begin[z+1]).
BitMatrix derive_sampling_bits(const BitMatrix& contact, std::span<const std::int64_t> slot_begin,
                               const AttackSchedule& schedule);

SamplingMatrix derive_sampling_matrix(const ContactMatrix& contact, const AttackSchedule& schedule);

/// y_i = OR_j (bits[i][j] AND x[j]).
std::vector<std::uint8_t> evaluate_tests(const BitMatrix& bits, std::span<const std::uint64_t> x_mask);

enum class SlotScore : std::uint8_t { Zero = 0, Epsilon = 1, One = 2 };

/// Three-way per-slot score rule: One when the column is nonzero and has no
/// position with a 1 where the outcome is 0, Epsilon when the column is all
/// zero, Zero otherwise.
SlotScore classify_slot(std::span<const std::uint8_t> column_bits, std::span<const std::uint8_t> y_slot);
double slot_score_value(std::span<const std::uint8_t> column_bits, std::span<const std::uint8_t> y_slot,
                        double epsilon);

/// Per-worker, per-slot score codes plus totals. A worker's total is
/// ones(w) + epsilon * epsilon_count(w), accumulated in double.
class ScoreTable {
public:
    ScoreTable() = default;
    ScoreTable(int n, std::int64_t Z, double epsilon);

    int workers() const { return n_; }
    std::int64_t slots() const { return Z_; }
    double epsilon() const { return eps_; }

    SlotScore code(std::uint32_t w, std::int64_t z) const {
        return static_cast<SlotScore>(codes_[static_cast<size_t>(z) * n_ + w]);
    }
    void set_code(std::uint32_t w, std::int64_t z, SlotScore s);

    std::uint32_t ones(std::uint32_t w) const { return ones_[w]; }
    std::uint32_t epsilon_count(std::uint32_t w) const { return eps_count_[w]; }
    double total(std::uint32_t w) const {
        return static_cast<double>(ones_[w]) + eps_ * static_cast<double>(eps_count_[w]);
    }

private:
    int n_ = 0;
    std::int64_t Z_ = 0;
    double eps_ = 0.0;
    std::vector<std::uint8_t> codes_;
    std::vector<std::uint32_t> ones_;
    std::vector<std::uint32_t> eps_count_;
};

/// Score every worker in every slot of y against the contact design.
ScoreTable score_all_workers(const ContactMatrix& contact, std::span<const std::uint8_t> y, double epsilon);

/// Workers with total score >= d, inclusive at equality (totals within 1e-9
/// of d count as reaching it). Returns a sorted list.
std::vector<std::uint32_t> threshold_decode(const ScoreTable& scores, double d);

/// One full group-testing trial: draw the unreliable set, contact matrix and
/// schedule, evaluate, score, decode, and compare against the ground truth.
struct GtTrialResult {
    std::vector<std::uint32_t> unreliable;
    std::vector<std::uint32_t> estimated;
    std::int64_t false_alarms = 0;
    std::int64_t misses = 0;
    bool exact = false;

    // aggregates for theory comparisons, over (worker, slot) pairs
    double sum_score_reliable = 0.0;
    double sum_score_unreliable = 0.0;
    std::int64_t ones_reliable = 0;
    std::int64_t ones_unreliable = 0;
    std::int64_t epsilon_slots = 0;  // over all workers
};
GtTrialResult run_grouptest_trial(const ExperimentParams& p, Rng& rng);

/// False-alarm / miss counts of an estimate against the true sorted set.
struct SetDiff {
    std::int64_t false_alarms = 0;
    std::int64_t misses = 0;
};
SetDiff compare_sets(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> estimate);

}  // namespace gtcc
