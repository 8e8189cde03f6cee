#include <doctest.h>

#include <array>
#include <cmath>
#include <numeric>

#include "gtcc/analysis.hpp"
#include "gtcc/gt_core.hpp"

using namespace gtcc;

namespace {

// The 3x5 two-slot design of the worked example: slot 1 has two tests, slot 2
// has one; workers 2 and 3 (0-based) are unreliable, worker 3 attacked in both
// slots, worker 2 never.
struct WorkedExample {
    BitMatrix contact{3, 5};
    AttackSchedule schedule;
    std::array<std::int64_t, 3> bounds{0, 2, 3};

    WorkedExample() {
        const int ones[][2] = {{0, 0}, {0, 3}, {1, 1}, {1, 2}, {2, 0}, {2, 1}, {2, 3}};
        for (auto [r, c] : ones) contact.set(r, c);
        schedule.unreliable = {2, 3};
        schedule.attacked = {{3}, {3}};
    }
};

BitMatrix expected_sampling() {
    BitMatrix s(3, 5);
    const int ones[][2] = {{0, 0}, {0, 3}, {1, 1}, {2, 0}, {2, 1}, {2, 3}};
    for (auto [r, c] : ones) s.set(r, c);
    return s;
}

}  // namespace

TEST_CASE("parameter selection worked example") {
    const auto p = ExperimentParams::select(1024, 8, 0.5, 1.0);
    CHECK(p.q == doctest::Approx(0.01875).epsilon(1e-12));
    CHECK(p.m == 54);
    CHECK(p.lambda == doctest::Approx(133.333333333).epsilon(1e-9));
    CHECK(p.Z == 1849);
    CHECK(p.epsilon == doctest::Approx(0.075).epsilon(1e-12));
    CHECK(p.M == 54 * 1849);
    CHECK(p.T == p.Z);
    CHECK(p.d > 0.0);
    CHECK(p.unrounded_test_count() <= p.test_count_bound());
}

TEST_CASE("integral L/theta rounds exactly") {
    const auto p = ExperimentParams::select(100, 3, 0.5, 1.0, 0.15);
    CHECK(p.m == 20);
}

TEST_CASE("unrounded test count stays under the selection bound") {
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        const int n = 10 + static_cast<int>(rng.uniform_below(5000));
        const int L = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n / 2)));
        const double alpha = 0.05 + 0.95 * rng.next_unit();
        const double beta = 0.1 + 3.0 * rng.next_unit();
        const auto p = ExperimentParams::select(n, L, alpha, beta);
        CHECK(p.unrounded_test_count() <= p.test_count_bound() * (1.0 + 1e-12));
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(ExperimentParams::select(1, 1, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ExperimentParams::select(10, 10, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ExperimentParams::select(10, 2, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ExperimentParams::select(10, 2, 1.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ExperimentParams::select(10, 2, 0.5, -1.0), std::invalid_argument);
    // M >= n is allowed for pure group testing but flagged for the coding path
    const auto p = ExperimentParams::select(16, 2, 0.9, 1.0);
    CHECK_FALSE(p.coding_viable());
}

TEST_CASE("bernoulli fill edge cases and density") {
    BitMatrix zeros(20, 30);
    Rng rng(1);
    fill_bernoulli(zeros, 0.0, rng);
    CHECK(zeros == BitMatrix(20, 30));

    BitMatrix ones(20, 30);
    fill_bernoulli(ones, 1.0, rng);
    for (int r = 0; r < 20; ++r)
        for (int c = 0; c < 30; ++c) CHECK(ones.get(r, c));

    BitMatrix sample(1000, 1000);
    fill_bernoulli(sample, 0.015, rng);
    std::int64_t count = 0;
    for (int r = 0; r < 1000; ++r)
        for (auto w : sample.row(r)) count += std::popcount(w);
    const double mean = 1e6 * 0.015;
    const double sd = std::sqrt(1e6 * 0.015 * 0.985);
    CHECK(std::abs(static_cast<double>(count) - mean) <= 4.0 * sd);
}

TEST_CASE("attack schedule edge cases and frequency") {
    auto p = ExperimentParams::with_explicit_tests(12, 3, 1.0, 0.3, 2, 5);
    Rng rng(2);
    const std::vector<std::uint32_t> bad{1, 5, 9};
    const auto all = sample_attacks(p, bad, rng);
    for (const auto& slot : all.attacked) CHECK(slot == bad);

    auto p0 = ExperimentParams::with_explicit_tests(12, 3, 0.0, 0.3, 2, 5);
    const auto none = sample_attacks(p0, bad, rng);
    for (const auto& slot : none.attacked) CHECK(slot.empty());

    auto pf = ExperimentParams::with_explicit_tests(12, 3, 0.3, 0.3, 1, 10000);
    const auto freq = sample_attacks(pf, bad, rng);
    std::array<std::int64_t, 3> hits{0, 0, 0};
    for (const auto& slot : freq.attacked) {
        for (std::uint32_t w : slot) {
            for (size_t i = 0; i < bad.size(); ++i)
                if (bad[i] == w) ++hits[i];
        }
    }
    const double sd = std::sqrt(10000 * 0.3 * 0.7);
    for (auto h : hits) CHECK(std::abs(static_cast<double>(h) - 3000.0) <= 4.0 * sd);
}

TEST_CASE("sampling matrix of the worked example") {
    WorkedExample ex;
    const BitMatrix s = derive_sampling_bits(ex.contact, ex.bounds, ex.schedule);
    CHECK(s == expected_sampling());
}

TEST_CASE("sampling is identity for empty or fully attacked sets") {
    WorkedExample ex;
    AttackSchedule empty;
    empty.attacked = {{}, {}};
    CHECK(derive_sampling_bits(ex.contact, ex.bounds, empty) == ex.contact);

    AttackSchedule always;
    always.unreliable = {2, 3};
    always.attacked = {{2, 3}, {2, 3}};
    CHECK(derive_sampling_bits(ex.contact, ex.bounds, always) == ex.contact);
}

TEST_CASE("sampling never exceeds contact and keeps reliable columns") {
    auto p = ExperimentParams::with_explicit_tests(40, 4, 0.5, 0.4, 5, 8);
    Rng rng(3);
    const auto bad = sample_worker_subset(p.n, p.L, rng);
    const auto contact = generate_contact_matrix(p, rng);
    const auto schedule = sample_attacks(p, bad, rng);
    const auto sampling = derive_sampling_matrix(contact, schedule);
    for (std::int64_t r = 0; r < p.M; ++r) {
        for (int w = 0; w < p.n; ++w) {
            CHECK(sampling.bits.get(r, w) <= contact.bits.get(r, w));
            if (!schedule.is_unreliable(static_cast<std::uint32_t>(w)))
                CHECK(sampling.bits.get(r, w) == contact.bits.get(r, w));
        }
    }
}

TEST_CASE("test evaluation on the worked example") {
    WorkedExample ex;
    const BitMatrix s = expected_sampling();
    const auto x = ex.schedule.indicator_mask(5);
    const auto y = evaluate_tests(s, x);
    CHECK(y == std::vector<std::uint8_t>{1, 0, 1});

    const std::vector<std::uint64_t> zero_mask(x.size(), 0);
    CHECK(evaluate_tests(s, zero_mask) == std::vector<std::uint8_t>{0, 0, 0});

    BitMatrix with_zero_row(2, 5);
    with_zero_row.set(0, 2);
    const auto y2 = evaluate_tests(with_zero_row, x);
    CHECK(y2[0] == 1);
    CHECK(y2[1] == 0);  // all-zero row never fires
}

TEST_CASE("slot score rule") {
    const std::vector<std::uint8_t> col10{1, 0}, col00{0, 0}, col01{0, 1}, y10{1, 0};
    CHECK(classify_slot(col10, y10) == SlotScore::One);
    CHECK(classify_slot(col00, y10) == SlotScore::Epsilon);
    CHECK(classify_slot(col01, y10) == SlotScore::Zero);
    CHECK(slot_score_value(col10, y10, 0.25) == 1.0);
    CHECK(slot_score_value(col00, y10, 0.25) == 0.25);
    CHECK(slot_score_value(col01, y10, 0.25) == 0.0);
}

TEST_CASE("threshold decode inclusivity") {
    ScoreTable t(1, 3, 0.1);
    t.set_code(0, 0, SlotScore::One);
    t.set_code(0, 1, SlotScore::Epsilon);
    t.set_code(0, 2, SlotScore::One);
    CHECK(t.total(0) == doctest::Approx(2.1));
    CHECK(threshold_decode(t, 2.0) == std::vector<std::uint32_t>{0});
    CHECK(threshold_decode(t, 2.1) == std::vector<std::uint32_t>{0});  // inclusive at equality
    CHECK(threshold_decode(t, 2.2).empty());

    ScoreTable zero(3, 2, 0.1);
    for (std::uint32_t w = 0; w < 3; ++w)
        for (std::int64_t z = 0; z < 2; ++z) zero.set_code(w, z, SlotScore::Zero);
    CHECK(threshold_decode(zero, 0.5).empty());
}

TEST_CASE("score table agrees with the per-column rule") {
    auto p = ExperimentParams::with_explicit_tests(30, 3, 0.5, 0.6, 4, 6);
    Rng rng(9);
    const auto bad = sample_worker_subset(p.n, p.L, rng);
    const auto contact = generate_contact_matrix(p, rng);
    const auto schedule = sample_attacks(p, bad, rng);
    const auto sampling = derive_sampling_matrix(contact, schedule);
    const auto y = evaluate_tests(sampling.bits, schedule.indicator_mask(p.n));
    const auto table = score_all_workers(contact, y, p.epsilon);

    for (std::int64_t z = 0; z < p.Z; ++z) {
        const auto range = contact.slot_rows(z);
        for (int w = 0; w < p.n; ++w) {
            std::vector<std::uint8_t> col, ys;
            for (std::int64_t j = range.begin; j < range.end; ++j) {
                col.push_back(contact.bits.get(j, w) ? 1 : 0);
                ys.push_back(y[static_cast<size_t>(j)]);
            }
            CHECK(table.code(static_cast<std::uint32_t>(w), z) == classify_slot(col, ys));
        }
    }
    for (int w = 0; w < p.n; ++w) {
        double total = 0.0;
        for (std::int64_t z = 0; z < p.Z; ++z) {
            const auto c = table.code(static_cast<std::uint32_t>(w), z);
            total += c == SlotScore::One ? 1.0 : (c == SlotScore::Epsilon ? p.epsilon : 0.0);
        }
        CHECK(table.total(static_cast<std::uint32_t>(w)) == doctest::Approx(total).epsilon(1e-12));
    }
}

TEST_CASE("scores are monotone in the outcome vector") {
    auto p = ExperimentParams::with_explicit_tests(16, 2, 0.5, 0.5, 4, 5);
    Rng rng(21);
    const auto contact = generate_contact_matrix(p, rng);
    std::vector<std::uint8_t> y(static_cast<size_t>(p.M));
    for (auto& b : y) b = rng.bernoulli(0.4) ? 1 : 0;
    const auto before = score_all_workers(contact, y, p.epsilon);
    for (int flip = 0; flip < 20; ++flip) {
        auto y2 = y;
        const auto pos = rng.uniform_below(static_cast<std::uint64_t>(p.M));
        if (y2[pos]) continue;
        y2[pos] = 1;
        const auto after = score_all_workers(contact, y2, p.epsilon);
        for (int w = 0; w < p.n; ++w) {
            for (std::int64_t z = 0; z < p.Z; ++z) {
                const auto cb = before.code(static_cast<std::uint32_t>(w), z);
                const auto ca = after.code(static_cast<std::uint32_t>(w), z);
                const auto value = [&](SlotScore s) {
                    return s == SlotScore::One ? 1.0 : (s == SlotScore::Epsilon ? p.epsilon : 0.0);
                };
                CHECK(value(ca) >= value(cb));
            }
        }
    }
}

TEST_CASE("empty design scores epsilon everywhere") {
    ContactMatrix contact;
    contact.m = 4;
    contact.Z = 6;
    contact.bits = BitMatrix(24, 10);  // no tests select anyone
    const std::vector<std::uint8_t> y(24, 0);
    const double eps = 0.35;
    const auto table = score_all_workers(contact, y, eps);
    for (std::uint32_t w = 0; w < 10; ++w) {
        CHECK(table.epsilon_count(w) == 6);
        CHECK(table.total(w) == 6 * eps);  // exact: accumulated as count * epsilon
    }
}

TEST_CASE("full trial determinism") {
    auto p = ExperimentParams::with_explicit_tests(60, 3, 0.6, 0.3, 10, 12, 0, 1.0, 777);
    Rng r1(p.seed), r2(p.seed);
    const auto a = run_grouptest_trial(p, r1);
    const auto b = run_grouptest_trial(p, r2);
    CHECK(a.unreliable == b.unreliable);
    CHECK(a.estimated == b.estimated);
    CHECK(a.false_alarms == b.false_alarms);
    CHECK(a.misses == b.misses);
    CHECK(a.sum_score_reliable == b.sum_score_reliable);
    CHECK(a.sum_score_unreliable == b.sum_score_unreliable);
}

TEST_CASE("unreliable workers outscore reliable ones in aggregate") {
    auto p = ExperimentParams::with_explicit_tests(60, 3, 0.5, 0.15, 20, 40);
    double rel = 0.0, unrel = 0.0;
    for (int i = 0; i < 1000; ++i) {
        Rng rng(derive_seed(4242, static_cast<std::uint64_t>(i)));
        const auto t = run_grouptest_trial(p, rng);
        rel += t.sum_score_reliable;
        unrel += t.sum_score_unreliable;
    }
    CHECK(unrel / (1000.0 * p.L) > rel / (1000.0 * (p.n - p.L)));
}

TEST_CASE("set comparison") {
    const std::vector<std::uint32_t> truth{1, 5}, est{1, 2};
    const auto d = compare_sets(truth, est);
    CHECK(d.false_alarms == 1);
    CHECK(d.misses == 1);
}
