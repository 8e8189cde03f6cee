#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "gtcc/coding.hpp"
#include "gtcc/field.hpp"
#include "gtcc/gt_core.hpp"
#include "gtcc/params.hpp"
#include "gtcc/trial_record.hpp"

namespace gtcc {

/// All n worker replies for one time slot: worker w's returned vector is the
/// s values at [w*s, (w+1)*s). truth_attacked is ground truth for oracles and
/// is never consulted by the decoder-side operations.
struct SlotResponses {
    std::int64_t t = 0;
    std::int64_t n = 0;
    std::int64_t s = 0;
    std::vector<u64> values;
    std::vector<std::uint8_t> truth_attacked;

    std::span<const u64> response(std::uint32_t w) const {
        return {values.data() + static_cast<std::int64_t>(w) * s, static_cast<size_t>(s)};
    }
    std::span<u64> response(std::uint32_t w) {
        return {values.data() + static_cast<std::int64_t>(w) * s, static_cast<size_t>(s)};
    }
};

/// Single-worker view of a slot (unit-test convenience).
struct WorkerResponse {
    std::uint32_t worker = 0;
    std::int64_t slot = 0;
    std::span<const u64> vector;
    bool truth_attacked = false;
};
WorkerResponse response_view(const SlotResponses& slot, std::uint32_t w);

/// One compute round: every worker multiplies its share by v_t; workers
/// attacked in slot t add a uniform nonzero noise vector over F^s, drawn
/// independently per worker.
SlotResponses worker_round(const EncodedShares& shares, std::span<const u64> v_t,
                           const AttackSchedule& schedule, std::int64_t t, Rng& rng);

/// Field linear combination of the returned vectors over the support of
/// parity row i. Touches exactly |support| * s multiply-adds, which is what
/// the counter records.
std::vector<u64> parity_check(const ParityMatrix& parity, std::int64_t row, const SlotResponses& slot,
                              OpCounters* ops = nullptr);

struct IdentificationResult {
    std::vector<std::uint8_t> y_hat;           // length M, emulated test outcomes
    std::vector<std::uint32_t> estimated_set;  // sorted
    ScoreTable scores;
};

/// Emulate every test of the first Z slots with the parity-check function
/// (row j is checked in its own slot's response set), then score and apply
/// the threshold decoder.
IdentificationResult identify(const ParityMatrix& parity, std::span<const SlotResponses> slots,
                              const ExperimentParams& p, OpCounters* ops = nullptr);

/// Smallest row index whose support meets the estimated set exactly in {w}
/// and contains at least one worker outside the estimated set.
std::optional<std::int64_t> find_reconstruction_row(const ParityMatrix& parity, std::uint32_t w,
                                                    std::span<const std::uint32_t> estimated_sorted);

/// Recover worker w's correct product from one slot of responses via the
/// parity row i: (M_{i,w})^{-1} (M_{i,w} a~_w - parity_check(i)). Exact
/// whenever every other member of the row's support returned a correct
/// result in this slot.
std::vector<u64> reconstruct_result(const ParityMatrix& parity, std::int64_t row, std::uint32_t w,
                                    const SlotResponses& slot, OpCounters* ops = nullptr);

/// Stack the systematic workers' responses (reconstructed where estimated
/// unreliable) and strip padding down to rows_out values. Returns nullopt if
/// some estimated systematic worker has no reconstruction available.
std::optional<std::vector<u64>> decode_product(const GeneratorMatrix& g, const SlotResponses& slot,
                                               std::span<const std::uint32_t> estimated_sorted,
                                               const std::map<std::uint32_t, std::vector<u64>>& reconstructions,
                                               std::int64_t rows_out);

/// Instance objects a pipeline trial builds; exposed for tests and share dumps.
struct PipelineArtifacts {
    std::optional<ContactMatrix> contact;
    std::optional<ParityMatrix> parity;
    std::optional<GeneratorMatrix> generator;
    std::optional<EncodedShares> shares;
    std::optional<FieldMatrix> source;
    std::optional<AttackSchedule> schedule;
    std::optional<IdentificationResult> identification;
};

/// End-to-end trial: build the code, encode a random r x c matrix, run T
/// compute rounds, identify over the first Z slots, reconstruct every flagged
/// worker, decode all T products, and compare against ground truth.
TrialRecord run_pipeline_trial(const ExperimentParams& p, const PrimeField& field, std::int64_t r,
                               std::int64_t c, std::uint64_t trial_seed,
                               PipelineArtifacts* artifacts = nullptr);

}  // namespace gtcc
