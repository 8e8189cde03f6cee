#pragma once

#include <cstdint>

#include "gtcc/params.hpp"

namespace gtcc {

/// Probability that one worker's per-slot test column is compatible with the
/// slot outcome when x unreliable workers are present, averaged over their
/// attack indicators:
///
///   sum_{l=0..x} C(x,l) alpha^l (1-alpha)^(x-l) (1 - q(1-q)^l)^m
///
/// Exact binomial weights up to x = 50, log-domain weights above.
double compat_prob(std::int64_t x, double q, std::int64_t m, double alpha);

/// (1-q)^m, the probability that a worker's slot column is all zero.
double empty_column_prob(double q, std::int64_t m);

/// Expected total scores over Z slots.
struct ExpectedScores {
    double reliable;    // E[I_w | w reliable]
    double unreliable;  // E[I_w | w unreliable]
};
ExpectedScores expected_scores(const ExperimentParams& p);

/// Decision threshold (1+eta) * E[I_w | reliable].
double decision_threshold(const ExperimentParams& p);

/// Closed-form bound checks on the compatibility probability, valid for
/// q*m <= 1:
///   lower:  (1-q)^m <= h_L
///   upper:  h_L <= (1-q)^m + m L q^2 alpha
///   diff:   h_L - (1-alpha) h_{L-1} <= alpha (1 - m q (1 - qL)/2)
/// Slacks are rhs - lhs; "ok" allows a 1e-12 relative tolerance.
struct CompatBoundsReport {
    double h_L = 0.0;
    double h_Lm1 = 0.0;
    double lower_slack = 0.0;
    double upper_slack = 0.0;
    double diff_slack = 0.0;
    bool lower_ok = false;
    bool upper_ok = false;
    bool diff_ok = false;
    bool all_ok() const { return lower_ok && upper_ok && diff_ok; }
};
CompatBoundsReport check_compat_bounds(int L, double q, std::int64_t m, double alpha);

}  // namespace gtcc
