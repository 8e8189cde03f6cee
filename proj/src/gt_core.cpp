#include "gtcc/gt_core.hpp"

#include <algorithm>
#include <stdexcept>

namespace gtcc {

bool AttackSchedule::is_unreliable(std::uint32_t w) const {
    return std::binary_search(unreliable.begin(), unreliable.end(), w);
}

std::vector<std::uint64_t> AttackSchedule::indicator_mask(std::int64_t n) const {
    std::vector<std::uint64_t> mask(static_cast<size_t>((n + 63) / 64), 0);
    for (std::uint32_t w : unreliable) mask[w / 64] |= 1ULL << (w & 63);
    return mask;
}

std::vector<std::uint32_t> sample_worker_subset(int n, int L, Rng& rng) {
    if (L < 0 || L > n) throw std::invalid_argument("sample_worker_subset: need 0 <= L <= n");
    std::vector<std::uint32_t> pool(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = static_cast<std::uint32_t>(i);
    for (int i = 0; i < L; ++i) {
        const auto j = i + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
    }
    pool.resize(static_cast<size_t>(L));
    std::sort(pool.begin(), pool.end());
    return pool;
}

void fill_bernoulli(BitMatrix& bits, double q, Rng& rng) {
    if (q <= 0.0) return;
    if (q >= 1.0) {
        bits.set_all();
        return;
    }
    const std::uint64_t total = static_cast<std::uint64_t>(bits.rows()) * static_cast<std::uint64_t>(bits.cols());
    const std::int64_t cols = bits.cols();
    std::uint64_t pos = rng.geometric_gap(q);
    while (pos < total) {
        bits.set(static_cast<std::int64_t>(pos / static_cast<std::uint64_t>(cols)),
                 static_cast<std::int64_t>(pos % static_cast<std::uint64_t>(cols)));
        const std::uint64_t gap = rng.geometric_gap(q);
        if (gap >= total - pos) break;
        pos += 1 + gap;
    }
}

ContactMatrix generate_contact_matrix(const ExperimentParams& p, Rng& rng) {
    ContactMatrix c;
    c.m = p.m;
    c.Z = p.Z;
    c.bits = BitMatrix(p.M, p.n);
    fill_bernoulli(c.bits, p.q, rng);
    return c;
}

AttackSchedule sample_attacks(const ExperimentParams& p, std::vector<std::uint32_t> unreliable, Rng& rng) {
    if (static_cast<int>(unreliable.size()) != p.L)
        throw std::invalid_argument("sample_attacks: unreliable set size must be L");
    AttackSchedule s;
    s.unreliable = std::move(unreliable);
    std::sort(s.unreliable.begin(), s.unreliable.end());
    s.attacked.resize(static_cast<size_t>(p.T));
    for (std::int64_t t = 0; t < p.T; ++t) {
        auto& slot = s.attacked[static_cast<size_t>(t)];
        for (std::uint32_t w : s.unreliable) {
            if (rng.bernoulli(p.alpha)) slot.push_back(w);
        }
    }
    return s;
}

BitMatrix derive_sampling_bits(const BitMatrix& contact, std::span<const std::int64_t> slot_begin,
                               const AttackSchedule& schedule) {
    if (slot_begin.size() < 2 || slot_begin.back() != contact.rows())
        throw std::invalid_argument("derive_sampling_bits: slot boundaries must cover all rows");
    const size_t Z = slot_begin.size() - 1;
    if (schedule.attacked.size() < Z)
        throw std::invalid_argument("derive_sampling_bits: schedule shorter than slot count");

    BitMatrix out = contact;
    for (size_t z = 0; z < Z; ++z) {
        const auto& hit = schedule.attacked[z];
        for (std::uint32_t w : schedule.unreliable) {
            if (std::binary_search(hit.begin(), hit.end(), w)) continue;  // attacked: column kept
            for (std::int64_t r = slot_begin[z]; r < slot_begin[z + 1]; ++r) out.clear(r, w);
        }
    }
    return out;
}

SamplingMatrix derive_sampling_matrix(const ContactMatrix& contact, const AttackSchedule& schedule) {
    std::vector<std::int64_t> bounds(static_cast<size_t>(contact.Z) + 1);
    for (std::int64_t z = 0; z <= contact.Z; ++z) bounds[static_cast<size_t>(z)] = z * contact.m;
    SamplingMatrix s;
    s.m = contact.m;
    s.Z = contact.Z;
    s.bits = derive_sampling_bits(contact.bits, bounds, schedule);
    return s;
}

std::vector<std::uint8_t> evaluate_tests(const BitMatrix& bits, std::span<const std::uint64_t> x_mask) {
    if (x_mask.size() != static_cast<size_t>(bits.words_per_row()))
        throw std::invalid_argument("evaluate_tests: mask width mismatch");
    std::vector<std::uint8_t> y(static_cast<size_t>(bits.rows()));
    for (std::int64_t i = 0; i < bits.rows(); ++i) y[static_cast<size_t>(i)] = bits.row_intersects(i, x_mask) ? 1 : 0;
    return y;
}

SlotScore classify_slot(std::span<const std::uint8_t> column_bits, std::span<const std::uint8_t> y_slot) {
    if (column_bits.size() != y_slot.size())
        throw std::invalid_argument("classify_slot: length mismatch");
    bool any = false;
    for (size_t j = 0; j < column_bits.size(); ++j) {
        if (!column_bits[j]) continue;
        any = true;
        if (!y_slot[j]) return SlotScore::Zero;
    }
    return any ? SlotScore::One : SlotScore::Epsilon;
}

double slot_score_value(std::span<const std::uint8_t> column_bits, std::span<const std::uint8_t> y_slot,
                        double epsilon) {
    switch (classify_slot(column_bits, y_slot)) {
        case SlotScore::One: return 1.0;
        case SlotScore::Epsilon: return epsilon;
        default: return 0.0;
    }
}

ScoreTable::ScoreTable(int n, std::int64_t Z, double epsilon)
    : n_(n), Z_(Z), eps_(epsilon), codes_(static_cast<size_t>(Z) * static_cast<size_t>(n), 0),
      ones_(static_cast<size_t>(n), 0), eps_count_(static_cast<size_t>(n), 0) {}

void ScoreTable::set_code(std::uint32_t w, std::int64_t z, SlotScore s) {
    auto& slot = codes_[static_cast<size_t>(z) * n_ + w];
    slot = static_cast<std::uint8_t>(s);
    if (s == SlotScore::One) ++ones_[w];
    if (s == SlotScore::Epsilon) ++eps_count_[w];
}

ScoreTable score_all_workers(const ContactMatrix& contact, std::span<const std::uint8_t> y, double epsilon) {
    if (y.size() != static_cast<size_t>(contact.bits.rows()))
        throw std::invalid_argument("score_all_workers: y length mismatch");
    const int n = static_cast<int>(contact.bits.cols());
    const size_t wpr = static_cast<size_t>(contact.bits.words_per_row());
    ScoreTable table(n, contact.Z, epsilon);
    std::vector<std::uint64_t> violated(wpr), present(wpr);
    for (std::int64_t z = 0; z < contact.Z; ++z) {
        std::fill(violated.begin(), violated.end(), 0);
        std::fill(present.begin(), present.end(), 0);
        const auto range = contact.slot_rows(z);
        for (std::int64_t j = range.begin; j < range.end; ++j) {
            const auto row = contact.bits.row(j);
            for (size_t i = 0; i < wpr; ++i) present[i] |= row[i];
            if (!y[static_cast<size_t>(j)]) {
                for (size_t i = 0; i < wpr; ++i) violated[i] |= row[i];
            }
        }
        for (int w = 0; w < n; ++w) {
            const std::uint64_t bit = 1ULL << (w & 63);
            SlotScore s;
            if (!(present[static_cast<size_t>(w / 64)] & bit)) {
                s = SlotScore::Epsilon;
            } else if (violated[static_cast<size_t>(w / 64)] & bit) {
                s = SlotScore::Zero;
            } else {
                s = SlotScore::One;
            }
            table.set_code(static_cast<std::uint32_t>(w), z, s);
        }
    }
    return table;
}

std::vector<std::uint32_t> threshold_decode(const ScoreTable& scores, double d) {
    std::vector<std::uint32_t> flagged;
    for (int w = 0; w < scores.workers(); ++w) {
        if (scores.total(static_cast<std::uint32_t>(w)) >= d - 1e-9)
            flagged.push_back(static_cast<std::uint32_t>(w));
    }
    return flagged;
}

SetDiff compare_sets(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> estimate) {
    SetDiff diff;
    for (std::uint32_t w : estimate) {
        if (!std::binary_search(truth.begin(), truth.end(), w)) ++diff.false_alarms;
    }
    for (std::uint32_t w : truth) {
        if (!std::binary_search(estimate.begin(), estimate.end(), w)) ++diff.misses;
    }
    return diff;
}

GtTrialResult run_grouptest_trial(const ExperimentParams& p, Rng& rng) {
    GtTrialResult r;
    r.unreliable = sample_worker_subset(p.n, p.L, rng);
    const ContactMatrix contact = generate_contact_matrix(p, rng);
    const AttackSchedule schedule = sample_attacks(p, r.unreliable, rng);
    const SamplingMatrix sampling = derive_sampling_matrix(contact, schedule);
    const auto y = evaluate_tests(sampling.bits, schedule.indicator_mask(p.n));
    const ScoreTable scores = score_all_workers(contact, y, p.epsilon);
    r.estimated = threshold_decode(scores, p.d);

    const SetDiff diff = compare_sets(r.unreliable, r.estimated);
    r.false_alarms = diff.false_alarms;
    r.misses = diff.misses;
    r.exact = diff.false_alarms == 0 && diff.misses == 0;

    for (int w = 0; w < p.n; ++w) {
        const auto uw = static_cast<std::uint32_t>(w);
        const bool bad = schedule.is_unreliable(uw);
        (bad ? r.sum_score_unreliable : r.sum_score_reliable) += scores.total(uw);
        (bad ? r.ones_unreliable : r.ones_reliable) += scores.ones(uw);
        r.epsilon_slots += scores.epsilon_count(uw);
    }
    return r;
}

}  // namespace gtcc
