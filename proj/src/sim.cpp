#include "gtcc/sim.hpp"

#include <algorithm>
#include <stdexcept>

namespace gtcc {

WorkerResponse response_view(const SlotResponses& slot, std::uint32_t w) {
    return WorkerResponse{w, slot.t, slot.response(w), slot.truth_attacked[w] != 0};
}

SlotResponses worker_round(const EncodedShares& shares, std::span<const u64> v_t,
                           const AttackSchedule& schedule, std::int64_t t, Rng& rng) {
    if (v_t.size() != static_cast<size_t>(shares.c)) throw std::invalid_argument("worker_round: bad v_t size");
    if (t < 0 || static_cast<size_t>(t) >= schedule.attacked.size())
        throw std::invalid_argument("worker_round: slot outside schedule");
    const PrimeField& f = shares.field;
    const std::int64_t s = shares.s;
    const std::int64_t c = shares.c;

    SlotResponses out;
    out.t = t;
    out.n = shares.n;
    out.s = s;
    out.values.assign(static_cast<size_t>(shares.n * s), 0);
    out.truth_attacked.assign(static_cast<size_t>(shares.n), 0);

    const auto& hit = schedule.attacked[static_cast<size_t>(t)];
    std::vector<u64> noise(static_cast<size_t>(s));
    for (std::int64_t w = 0; w < shares.n; ++w) {
        const auto share = shares.share(static_cast<std::uint32_t>(w));
        auto resp = out.response(static_cast<std::uint32_t>(w));
        for (std::int64_t u = 0; u < s; ++u) {
            u64 acc = 0;
            const u64* row = share.data() + u * c;
            for (std::int64_t v = 0; v < c; ++v) acc = f.add_raw(acc, f.mul_raw(row[v], v_t[static_cast<size_t>(v)]));
            resp[static_cast<size_t>(u)] = acc;
        }
        if (std::binary_search(hit.begin(), hit.end(), static_cast<std::uint32_t>(w))) {
            out.truth_attacked[static_cast<size_t>(w)] = 1;
            bool nonzero = false;
            do {
                nonzero = false;
                for (std::int64_t u = 0; u < s; ++u) {
                    noise[static_cast<size_t>(u)] = f.rand(rng).v;
                    if (noise[static_cast<size_t>(u)] != 0) nonzero = true;
                }
            } while (!nonzero);
            for (std::int64_t u = 0; u < s; ++u)
                resp[static_cast<size_t>(u)] = f.add_raw(resp[static_cast<size_t>(u)], noise[static_cast<size_t>(u)]);
        }
    }
    return out;
}

std::vector<u64> parity_check(const ParityMatrix& parity, std::int64_t row, const SlotResponses& slot,
                              OpCounters* ops) {
    if (slot.n != parity.cols()) throw std::invalid_argument("parity_check: responses missing for some workers");
    const PrimeField& f = parity.field();
    const std::int64_t s = slot.s;
    std::vector<u64> acc(static_cast<size_t>(s), 0);
    const auto sup = parity.support(row);
    const auto val = parity.values(row);
    for (size_t i = 0; i < sup.size(); ++i) {
        const auto resp = slot.response(sup[i]);
        const u64 coef = val[i];
        for (std::int64_t u = 0; u < s; ++u)
            acc[static_cast<size_t>(u)] = f.add_raw(acc[static_cast<size_t>(u)], f.mul_raw(coef, resp[static_cast<size_t>(u)]));
    }
    if (ops) {
        ops->parity_check_calls += 1;
        ops->parity_check_mul_adds += sup.size() * static_cast<std::uint64_t>(s);
    }
    return acc;
}

IdentificationResult identify(const ParityMatrix& parity, std::span<const SlotResponses> slots,
                              const ExperimentParams& p, OpCounters* ops) {
    if (parity.rows() != p.M || parity.cols() != p.n)
        throw std::invalid_argument("identify: parity shape does not match params");
    if (slots.size() < static_cast<size_t>(p.Z)) throw std::invalid_argument("identify: need Z slots");

    IdentificationResult out;
    out.y_hat.assign(static_cast<size_t>(p.M), 0);
    for (std::int64_t z = 0; z < p.Z; ++z) {
        const auto& slot = slots[static_cast<size_t>(z)];
        for (std::int64_t j = z * p.m; j < (z + 1) * p.m; ++j) {
            const auto g = parity_check(parity, j, slot, ops);
            const bool nonzero = std::any_of(g.begin(), g.end(), [](u64 v) { return v != 0; });
            out.y_hat[static_cast<size_t>(j)] = nonzero ? 1 : 0;
        }
    }
    ContactMatrix support{parity.support_bits(), p.m, p.Z};
    out.scores = score_all_workers(support, out.y_hat, p.epsilon);
    out.estimated_set = threshold_decode(out.scores, p.d);
    return out;
}

std::optional<std::int64_t> find_reconstruction_row(const ParityMatrix& parity, std::uint32_t w,
                                                    std::span<const std::uint32_t> estimated_sorted) {
    if (!std::binary_search(estimated_sorted.begin(), estimated_sorted.end(), w))
        throw std::invalid_argument("find_reconstruction_row: w is not in the estimated set");
    for (std::int64_t i = 0; i < parity.rows(); ++i) {
        const auto sup = parity.support(i);
        int in_set = 0;
        bool has_w = false;
        bool has_outside = false;
        for (std::uint32_t member : sup) {
            if (std::binary_search(estimated_sorted.begin(), estimated_sorted.end(), member)) {
                if (++in_set > 1) break;
                has_w = member == w;
            } else {
                has_outside = true;
            }
        }
        if (in_set == 1 && has_w && has_outside) return i;
    }
    return std::nullopt;
}

std::vector<u64> reconstruct_result(const ParityMatrix& parity, std::int64_t row, std::uint32_t w,
                                    const SlotResponses& slot, OpCounters* ops) {
    const u64 coef = parity.entry(row, w);
    if (coef == 0) throw std::invalid_argument("reconstruct_result: row does not involve worker w");
    const PrimeField& f = parity.field();
    const auto gamma = parity_check(parity, row, slot, ops);
    if (ops) ops->reconstruct_calls += 1;
    const u64 cinv = f.inv_raw(coef);
    const auto resp = slot.response(w);
    std::vector<u64> out(static_cast<size_t>(slot.s));
    for (std::int64_t u = 0; u < slot.s; ++u) {
        const u64 own = f.mul_raw(coef, resp[static_cast<size_t>(u)]);
        out[static_cast<size_t>(u)] = f.mul_raw(cinv, f.sub_raw(own, gamma[static_cast<size_t>(u)]));
    }
    return out;
}

std::optional<std::vector<u64>> decode_product(const GeneratorMatrix& g, const SlotResponses& slot,
                                               std::span<const std::uint32_t> estimated_sorted,
                                               const std::map<std::uint32_t, std::vector<u64>>& reconstructions,
                                               std::int64_t rows_out) {
    const std::int64_t s = slot.s;
    if (rows_out > g.k() * s) throw std::invalid_argument("decode_product: rows_out exceeds k*s");
    std::vector<u64> out(static_cast<size_t>(rows_out));
    const auto sys = g.systematic_positions();
    for (std::int64_t j = 0; j < g.k(); ++j) {
        const std::uint32_t w = sys[static_cast<size_t>(j)];
        std::span<const u64> src;
        if (std::binary_search(estimated_sorted.begin(), estimated_sorted.end(), w)) {
            const auto it = reconstructions.find(w);
            if (it == reconstructions.end()) return std::nullopt;
            src = it->second;
        } else {
            src = slot.response(w);
        }
        for (std::int64_t u = 0; u < s; ++u) {
            const std::int64_t rowi = j * s + u;
            if (rowi >= rows_out) break;
            out[static_cast<size_t>(rowi)] = src[static_cast<size_t>(u)];
        }
    }
    return out;
}

TrialRecord run_pipeline_trial(const ExperimentParams& p, const PrimeField& field, std::int64_t r,
                               std::int64_t c, std::uint64_t trial_seed, PipelineArtifacts* artifacts) {
    p.validate();
    if (!p.coding_viable()) throw std::invalid_argument("run_pipeline_trial: requires M < n");
    if (r < 1 || c < 1) throw std::invalid_argument("run_pipeline_trial: need r, c >= 1");

    TrialRecord rec;
    rec.seed = trial_seed;
    rec.slots_total = p.T;

    Rng rng(trial_seed);
    const auto unreliable = sample_worker_subset(p.n, p.L, rng);
    ContactMatrix contact = generate_contact_matrix(p, rng);
    AttackSchedule schedule = sample_attacks(p, unreliable, rng);
    CodeBuild code = build_code(contact, field, rng);
    rec.k = code.generator.k();

    FieldMatrix source = FieldMatrix::random(field, r, c, rng);
    const FieldMatrix padded = pad_rows(source, rec.k);
    EncodedShares shares = encode(padded, code.generator);

    std::vector<std::vector<u64>> vts(static_cast<size_t>(p.T));
    std::vector<SlotResponses> slots;
    slots.reserve(static_cast<size_t>(p.T));
    for (std::int64_t t = 0; t < p.T; ++t) {
        auto& v = vts[static_cast<size_t>(t)];
        v.resize(static_cast<size_t>(c));
        for (auto& x : v) x = field.rand(rng).v;
        slots.push_back(worker_round(shares, v, schedule, t, rng));
    }

    IdentificationResult ident =
        identify(code.parity, std::span<const SlotResponses>(slots.data(), static_cast<size_t>(p.Z)), p, &rec.ops);

    // Oracle-side comparison of the emulated outcomes against the ideal tests.
    const SamplingMatrix sampling = derive_sampling_matrix(contact, schedule);
    const auto y_ideal = evaluate_tests(sampling.bits, schedule.indicator_mask(p.n));
    for (std::int64_t j = 0; j < p.M; ++j) {
        const bool yh = ident.y_hat[static_cast<size_t>(j)] != 0;
        const bool yi = y_ideal[static_cast<size_t>(j)] != 0;
        if (!yh && yi) ++rec.parity_collisions;
        if (yh && !yi) ++rec.zchannel_violations;
    }

    const SetDiff diff = compare_sets(unreliable, ident.estimated_set);
    rec.false_alarms = diff.false_alarms;
    rec.misses = diff.misses;
    rec.exact_recovery = diff.false_alarms == 0 && diff.misses == 0;

    std::map<std::uint32_t, std::int64_t> recon_rows;
    for (std::uint32_t w : ident.estimated_set) {
        if (const auto row = find_reconstruction_row(code.parity, w, ident.estimated_set)) {
            recon_rows.emplace(w, *row);
        } else {
            ++rec.criterion_failures;
        }
    }

    for (std::int64_t t = 0; t < p.T; ++t) {
        std::map<std::uint32_t, std::vector<u64>> recons;
        for (const auto& [w, row] : recon_rows)
            recons.emplace(w, reconstruct_result(code.parity, row, w, slots[static_cast<size_t>(t)], &rec.ops));
        const auto decoded =
            decode_product(code.generator, slots[static_cast<size_t>(t)], ident.estimated_set, recons, r);
        if (!decoded) {
            ++rec.decode_failures;
            continue;
        }
        const auto truth = source.matvec(vts[static_cast<size_t>(t)]);
        if (*decoded == truth) ++rec.slots_decoded_ok;
    }

    if (artifacts) {
        artifacts->contact = contact;
        artifacts->parity = code.parity;
        artifacts->generator = code.generator;
        artifacts->shares = shares;
        artifacts->source = source;
        artifacts->schedule = schedule;
        artifacts->identification = ident;
    }
    return rec;
}

}  // namespace gtcc
