#include "gtcc/params.hpp"

#include <cmath>
#include <stdexcept>

#include "gtcc/analysis.hpp"

namespace gtcc {

namespace {
constexpr double kZeta = 0.015;  // lambda = (1 + beta) / kZeta
}

ExperimentParams ExperimentParams::select(int n, int L, double alpha, double beta, double theta,
                                          double eta, std::optional<double> lambda_override,
                                          std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("select: n must be >= 2");
    if (L < 1 || L >= n) throw std::invalid_argument("select: need 1 <= L < n");
    if (alpha <= 0.0 || alpha > 1.0) throw std::invalid_argument("select: need 0 < alpha <= 1");
    if (beta <= 0.0) throw std::invalid_argument("select: need beta > 0");
    if (theta <= 0.0 || theta > 1.0) throw std::invalid_argument("select: need 0 < theta <= 1");

    ExperimentParams p;
    p.n = n;
    p.L = L;
    p.alpha = alpha;
    p.beta = beta;
    p.theta = theta;
    p.eta = eta;
    p.lambda = lambda_override ? *lambda_override : (1.0 + beta) / kZeta;
    p.q = theta / static_cast<double>(L);
    p.epsilon = theta * alpha;
    p.m = ceil_int(static_cast<double>(L) / theta);
    p.Z = ceil_int(p.lambda * std::log(static_cast<double>(n)) / alpha);
    p.M = p.m * p.Z;
    p.T = p.Z;
    p.seed = seed;
    p.d = decision_threshold(p);
    p.validate();
    return p;
}

ExperimentParams ExperimentParams::with_explicit_tests(int n, int L, double alpha, double theta,
                                                       std::int64_t m, std::int64_t Z, std::int64_t T,
                                                       double eta, std::uint64_t seed) {
    ExperimentParams p;
    p.n = n;
    p.L = L;
    p.alpha = alpha;
    p.theta = theta;
    p.eta = eta;
    p.beta = 0.0;
    p.q = theta / static_cast<double>(L);
    p.epsilon = theta * alpha;
    p.m = m;
    p.Z = Z;
    p.M = m * Z;
    p.T = T > 0 ? T : Z;
    p.seed = seed;
    p.lambda = alpha > 0.0 ? static_cast<double>(Z) * alpha / std::log(static_cast<double>(n)) : 0.0;
    p.d = decision_threshold(p);
    p.validate();
    return p;
}

void ExperimentParams::validate() const {
    if (n < 2) throw std::invalid_argument("params: n must be >= 2");
    if (L < 1 || L >= n) throw std::invalid_argument("params: need 1 <= L < n");
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("params: need 0 <= alpha <= 1");
    if (theta <= 0.0 || theta > 1.0) throw std::invalid_argument("params: need 0 < theta <= 1");
    if (eta < 0.0) throw std::invalid_argument("params: need eta >= 0");
    if (m < 1) throw std::invalid_argument("params: need m >= 1");
    if (Z < 1) throw std::invalid_argument("params: need Z >= 1");
    if (M != m * Z) throw std::invalid_argument("params: M must equal m*Z");
    if (T < Z) throw std::invalid_argument("params: need T >= Z");
    const double expect_q = theta / static_cast<double>(L);
    if (q != expect_q) throw std::invalid_argument("params: q must equal theta/L");
    if (epsilon != theta * alpha) throw std::invalid_argument("params: epsilon must equal theta*alpha");
    if (alpha > 0.0 && !(d > 0.0)) throw std::invalid_argument("params: need d > 0");
    if (d > static_cast<double>(Z) * (1.0 + eta) * (1.0 + 1e-9))
        throw std::invalid_argument("params: d exceeds Z*(1+eta)");
}

double ExperimentParams::test_count_bound() const {
    return 450.0 * (1.0 + beta) * static_cast<double>(L) * std::log(static_cast<double>(n)) / alpha;
}

double ExperimentParams::unrounded_test_count() const {
    return (static_cast<double>(L) / theta) * (lambda * std::log(static_cast<double>(n)) / alpha);
}

}  // namespace gtcc
