#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

namespace gtcc {

/// Ceiling/floor with a 1e-9 slop so ratios that are integral in exact
/// arithmetic (e.g. 3/0.15) are not pushed to the next integer by the
/// binary representation of their operands.
inline std::int64_t ceil_int(double x) { return static_cast<std::int64_t>(std::ceil(x - 1e-9)); }
inline std::int64_t floor_int(double x) { return static_cast<std::int64_t>(std::floor(x + 1e-9)); }

/// All scalars of one experiment.
///
/// q and epsilon are always derived (q = theta/L, epsilon = theta*alpha), so
/// the coupling between them holds by construction. d is the decision
/// threshold of the score decoder, (1+eta) times the expected total score of
/// a reliable worker.
struct ExperimentParams {
    int n = 0;               // worker count
    int L = 0;               // unreliable worker count
    double alpha = 0.0;      // per-slot attack probability
    double theta = 0.15;     // test density parameter, q = theta/L
    double eta = 1.0;        // threshold margin
    double beta = 1.0;       // target error exponent (informational when m,Z are explicit)
    double lambda = 0.0;     // slot multiplier, Z = ceil(lambda * ln(n) / alpha)
    double q = 0.0;          // Bernoulli density of the contact matrix
    double epsilon = 0.0;    // empty-column slot score
    std::int64_t m = 0;      // tests per slot
    std::int64_t Z = 0;      // tested slots
    std::int64_t M = 0;      // total tests, m * Z
    std::int64_t T = 0;      // total time slots, >= Z
    double d = 0.0;          // decision threshold
    std::uint64_t seed = 0;

    /// Guarantee-scale parameter selection: q = theta/L, m = ceil(L/theta),
    /// lambda = (1+beta)/0.015 unless overridden, Z = ceil(lambda ln(n)/alpha).
    static ExperimentParams select(int n, int L, double alpha, double beta, double theta = 0.15,
                                   double eta = 1.0, std::optional<double> lambda_override = std::nullopt,
                                   std::uint64_t seed = 0);

    /// Explicit (m, Z) construction for runs where the guarantee-scale test
    /// count is not wanted (e.g. the coding pipeline needs M < n).
    /// T = 0 means "default to Z".
    static ExperimentParams with_explicit_tests(int n, int L, double alpha, double theta,
                                                std::int64_t m, std::int64_t Z, std::int64_t T = 0,
                                                double eta = 1.0, std::uint64_t seed = 0);

    /// Throws std::invalid_argument on any violated range or coupling.
    /// alpha = 0 is admitted (limiting runs with no attacks); then d = 0 and
    /// the d > 0 requirement is waived.
    void validate() const;

    /// 450 (1+beta) L ln(n) / alpha, the test-count budget the guarantee-scale
    /// selection stays under before rounding.
    double test_count_bound() const;

    /// Un-rounded m*Z product (L/theta) * (lambda ln(n) / alpha).
    double unrounded_test_count() const;

    /// False when M >= n: the parity code then has no message positions.
    bool coding_viable() const { return M < n; }
};

}  // namespace gtcc
