#include "gtcc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gtcc {

namespace {

// (1-q)^e via log1p; exact at the edges.
double pow_one_minus(double q, double e) {
    if (e == 0.0) return 1.0;
    if (q <= 0.0) return 1.0;
    if (q >= 1.0) return 0.0;
    return std::exp(e * std::log1p(-q));
}

// (1 - q (1-q)^l)^m
double slot_pass_prob(double q, std::int64_t m, std::int64_t l) {
    const double hit = q * pow_one_minus(q, static_cast<double>(l));
    if (hit >= 1.0) return 0.0;
    return std::exp(static_cast<double>(m) * std::log1p(-hit));
}

}  // namespace

double empty_column_prob(double q, std::int64_t m) {
    return pow_one_minus(q, static_cast<double>(m));
}

double compat_prob(std::int64_t x, double q, std::int64_t m, double alpha) {
    if (x < 0) throw std::invalid_argument("compat_prob: x must be >= 0");
    if (m < 1) throw std::invalid_argument("compat_prob: m must be >= 1");
    if (q < 0.0 || q > 1.0 || alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("compat_prob: q, alpha must lie in [0,1]");

    if (q == 0.0) return 1.0;
    if (x == 0 || alpha == 0.0) return slot_pass_prob(q, m, 0);
    if (alpha == 1.0) return slot_pass_prob(q, m, x);

    double sum = 0.0;
    if (x <= 50) {
        double binom = 1.0;  // C(x, l), exact in double for x <= 50
        for (std::int64_t l = 0; l <= x; ++l) {
            const double w = binom * std::pow(alpha, static_cast<double>(l)) *
                             std::pow(1.0 - alpha, static_cast<double>(x - l));
            sum += w * slot_pass_prob(q, m, l);
            binom = binom * static_cast<double>(x - l) / static_cast<double>(l + 1);
        }
    } else {
        const double lx = std::lgamma(static_cast<double>(x) + 1.0);
        for (std::int64_t l = 0; l <= x; ++l) {
            const double lw = lx - std::lgamma(static_cast<double>(l) + 1.0) -
                              std::lgamma(static_cast<double>(x - l) + 1.0) +
                              static_cast<double>(l) * std::log(alpha) +
                              static_cast<double>(x - l) * std::log1p(-alpha);
            sum += std::exp(lw) * slot_pass_prob(q, m, l);
        }
    }
    return sum;
}

ExpectedScores expected_scores(const ExperimentParams& p) {
    const double empty = pow_one_minus(p.q, static_cast<double>(p.m));
    const double h_L = compat_prob(p.L, p.q, p.m, p.alpha);
    const double h_Lm1 = p.L >= 1 ? compat_prob(p.L - 1, p.q, p.m, p.alpha) : 1.0;
    const double z = static_cast<double>(p.Z);
    return ExpectedScores{
        z * (h_L - (1.0 - p.epsilon) * empty),
        z * (p.alpha + (1.0 - p.alpha) * h_Lm1 - (1.0 - p.epsilon) * empty),
    };
}

double decision_threshold(const ExperimentParams& p) {
    return (1.0 + p.eta) * expected_scores(p).reliable;
}

CompatBoundsReport check_compat_bounds(int L, double q, std::int64_t m, double alpha) {
    if (L < 1) throw std::invalid_argument("check_compat_bounds: L must be >= 1");
    if (q * static_cast<double>(m) > 1.0 + 1e-12)
        throw std::invalid_argument("check_compat_bounds: requires q*m <= 1");

    CompatBoundsReport r;
    r.h_L = compat_prob(L, q, m, alpha);
    r.h_Lm1 = compat_prob(L - 1, q, m, alpha);

    const double md = static_cast<double>(m);
    const double empty = pow_one_minus(q, md);
    const double upper = empty + md * static_cast<double>(L) * q * q * alpha;
    const double diff_lhs = r.h_L - (1.0 - alpha) * r.h_Lm1;
    const double diff_rhs = alpha * (1.0 - md * q * (1.0 - q * static_cast<double>(L)) / 2.0);

    const auto ok = [](double lhs, double rhs) {
        const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
        return lhs <= rhs + 1e-12 * scale;
    };
    r.lower_slack = r.h_L - empty;
    r.lower_ok = ok(empty, r.h_L);
    r.upper_slack = upper - r.h_L;
    r.upper_ok = ok(r.h_L, upper);
    r.diff_slack = diff_rhs - diff_lhs;
    r.diff_ok = ok(diff_lhs, diff_rhs);
    return r;
}

}  // namespace gtcc
