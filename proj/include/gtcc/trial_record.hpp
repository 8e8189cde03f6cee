#pragma once

#include <cstdint>

namespace gtcc {

/// Multiply-add accounting for the server-side field work.
struct OpCounters {
    std::uint64_t parity_check_calls = 0;
    std::uint64_t parity_check_mul_adds = 0;
    std::uint64_t reconstruct_calls = 0;

    OpCounters& operator+=(const OpCounters& o) {
        parity_check_calls += o.parity_check_calls;
        parity_check_mul_adds += o.parity_check_mul_adds;
        reconstruct_calls += o.reconstruct_calls;
        return *this;
    }
};

/// Outcome of one end-to-end pipeline trial.
struct TrialRecord {
    std::uint64_t trial_index = 0;
    std::uint64_t seed = 0;
    std::int64_t k = 0;

    std::int64_t false_alarms = 0;
    std::int64_t misses = 0;
    bool exact_recovery = false;  // false_alarms == 0 && misses == 0

    std::int64_t criterion_failures = 0;   // flagged workers with no reconstruction row
    std::int64_t decode_failures = 0;      // slots where decoding had to abort
    std::int64_t slots_decoded_ok = 0;     // slots whose decoded product matched the ground truth
    std::int64_t slots_total = 0;
    std::int64_t parity_collisions = 0;    // y_hat_j = 0 while the ideal y_j = 1
    std::int64_t zchannel_violations = 0;  // y_hat_j = 1 while the ideal y_j = 0 (never expected)

    OpCounters ops;
};

}  // namespace gtcc
