#include "gtcc/coding.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace gtcc {

namespace {

// Reduction strategies selected once per kernel invocation; keeps the general
// PrimeField::mul_raw dispatch out of the O(M^3) inner loops.
struct MersenneRed {
    u64 p;
    unsigned b;
    u64 mul(u64 x, u64 y) const {
        const u128 t = static_cast<u128>(x) * y;
        u64 r = (static_cast<u64>(t) & p) + static_cast<u64>(t >> b);
        r = (r & p) + (r >> b);
        return r >= p ? r - p : r;
    }
};
struct SmallRed {
    u64 p;
    u64 mul(u64 x, u64 y) const { return (x * y) % p; }
};
struct WideRed {
    u64 p;
    u64 mul(u64 x, u64 y) const { return static_cast<u64>(static_cast<u128>(x) * y % p); }
};

template <class Fn>
auto with_reducer(const PrimeField& f, Fn&& fn) {
    const u64 p = f.modulus();
    if ((p & (p + 1)) == 0) return fn(MersenneRed{p, static_cast<unsigned>(std::bit_width(p))});
    if (p < (1ULL << 32)) return fn(SmallRed{p});
    return fn(WideRed{p});
}

// In-place LU with first-nonzero pivoting over F_p. a is M x M row-major;
// perm[i] is the original index of the row that ended up at position i.
// Returns false when a column has no usable pivot (singular block).
template <class R>
bool lu_factor(const R& red_in, const PrimeField& f, std::vector<u64>& a, std::int64_t M,
               std::vector<std::int64_t>& perm) {
    const R red = red_in;  // register-resident copy; the matrix writes cannot alias it
    const u64 p = red.p;
    perm.resize(static_cast<size_t>(M));
    for (std::int64_t i = 0; i < M; ++i) perm[static_cast<size_t>(i)] = i;
    for (std::int64_t j = 0; j < M; ++j) {
        std::int64_t piv = -1;
        for (std::int64_t i = j; i < M; ++i) {
            if (a[static_cast<size_t>(i * M + j)] != 0) {
                piv = i;
                break;
            }
        }
        if (piv < 0) return false;
        if (piv != j) {
            std::swap_ranges(a.begin() + piv * M, a.begin() + (piv + 1) * M, a.begin() + j * M);
            std::swap(perm[static_cast<size_t>(piv)], perm[static_cast<size_t>(j)]);
        }
        const u64 dinv = f.inv_raw(a[static_cast<size_t>(j * M + j)]);
        for (std::int64_t i = j + 1; i < M; ++i) {
            const u64 l = red.mul(a[static_cast<size_t>(i * M + j)], dinv);
            a[static_cast<size_t>(i * M + j)] = l;
            if (l == 0) continue;
            const u64* src = a.data() + j * M;
            u64* dst = a.data() + i * M;
            for (std::int64_t c = j + 1; c < M; ++c) {
                const u64 t = red.mul(l, src[c]);
                const u64 d = dst[c];
                dst[c] = d >= t ? d - t : d + p - t;
            }
        }
    }
    return true;
}

// Solve (L U) X = X in place for unit-lower L stored below the diagonal of lu.
template <class R>
void solve_lower_unit(const R& red_in, const std::vector<u64>& lu, std::int64_t M, std::vector<u64>& x,
                      std::int64_t width) {
    const R red = red_in;
    const u64 p = red.p;
    for (std::int64_t i = 1; i < M; ++i) {
        u64* xi = x.data() + i * width;
        for (std::int64_t j = 0; j < i; ++j) {
            const u64 l = lu[static_cast<size_t>(i * M + j)];
            if (l == 0) continue;
            const u64* xj = x.data() + j * width;
            for (std::int64_t c = 0; c < width; ++c) {
                const u64 t = red.mul(l, xj[c]);
                const u64 d = xi[c];
                xi[c] = d >= t ? d - t : d + p - t;
            }
        }
    }
}

template <class R>
void solve_upper(const R& red_in, const PrimeField& f, const std::vector<u64>& lu, std::int64_t M,
                 std::vector<u64>& x, std::int64_t width) {
    const R red = red_in;
    const u64 p = red.p;
    for (std::int64_t i = M - 1; i >= 0; --i) {
        u64* xi = x.data() + i * width;
        for (std::int64_t j = i + 1; j < M; ++j) {
            const u64 u = lu[static_cast<size_t>(i * M + j)];
            if (u == 0) continue;
            const u64* xj = x.data() + j * width;
            for (std::int64_t c = 0; c < width; ++c) {
                const u64 t = red.mul(u, xj[c]);
                const u64 d = xi[c];
                xi[c] = d >= t ? d - t : d + p - t;
            }
        }
        const u64 dinv = f.inv_raw(lu[static_cast<size_t>(i * M + i)]);
        for (std::int64_t c = 0; c < width; ++c) xi[c] = red.mul(xi[c], dinv);
    }
}

// Cheap construction-time probe: a handful of (parity row, generator row)
// dot products that must vanish.
void spot_check_orthogonal(const ParityMatrix& parity, const GeneratorMatrix& g) {
    const std::int64_t M = parity.rows();
    const std::int64_t k = g.k();
    if (M == 0 || k == 0) return;
    const std::int64_t rows[3] = {0, M / 2, M - 1};
    const std::int64_t grows[3] = {0, k / 2, k - 1};
    const PrimeField& f = parity.field();
    for (std::int64_t i : rows) {
        for (std::int64_t j : grows) {
            const auto sup = parity.support(i);
            const auto val = parity.values(i);
            u64 acc = 0;
            for (size_t t = 0; t < sup.size(); ++t)
                acc = f.add_raw(acc, f.mul_raw(val[t], g.entry(j, sup[t])));
            if (acc != 0) throw std::logic_error("generator row not orthogonal to parity row");
        }
    }
}

// [I | R] construction: requires M < n and an invertible last-M-columns block.
std::optional<GeneratorMatrix> try_systematic(const ParityMatrix& parity) {
    const std::int64_t M = parity.rows();
    const std::int64_t n = parity.cols();
    const std::int64_t k = n - M;
    if (k <= 0) return std::nullopt;
    const PrimeField f = parity.field();

    std::vector<std::uint32_t> sys(static_cast<size_t>(k));
    for (std::int64_t i = 0; i < k; ++i) sys[static_cast<size_t>(i)] = static_cast<std::uint32_t>(i);
    std::vector<std::uint32_t> ppos(static_cast<size_t>(M));
    for (std::int64_t i = 0; i < M; ++i) ppos[static_cast<size_t>(i)] = static_cast<std::uint32_t>(k + i);

    if (M == 0) return GeneratorMatrix(f, n, std::move(sys), std::move(ppos), {});

    auto rblock_opt = with_reducer(f, [&](auto red) -> std::optional<std::vector<u64>> {
        std::vector<u64> h2(static_cast<size_t>(M * M), 0);
        std::size_t nnz_h1 = 0;
        for (std::int64_t i = 0; i < M; ++i) {
            const auto sup = parity.support(i);
            const auto val = parity.values(i);
            for (size_t t = 0; t < sup.size(); ++t) {
                if (sup[t] >= static_cast<std::uint32_t>(k)) {
                    h2[static_cast<size_t>(i * M + (sup[t] - k))] = val[t];
                } else {
                    ++nnz_h1;
                }
            }
        }
        std::vector<std::int64_t> perm;
        if (!lu_factor(red, f, h2, M, perm)) return std::nullopt;

        std::vector<u64> rblock(static_cast<size_t>(k * M), 0);
        const bool via_inverse =
            static_cast<double>(M) * M + static_cast<double>(nnz_h1) < static_cast<double>(M) * k;
        if (via_inverse) {
            // X <- H2^{-1} (identity right-hand side), then R = -(H1^T X^T).
            std::vector<u64> x(static_cast<size_t>(M * M), 0);
            for (std::int64_t i = 0; i < M; ++i)
                x[static_cast<size_t>(i * M + perm[static_cast<size_t>(i)])] = 1;
            solve_lower_unit(red, h2, M, x, M);
            solve_upper(red, f, h2, M, x, M);
            std::vector<u64> xt(static_cast<size_t>(M * M));
            for (std::int64_t i = 0; i < M; ++i)
                for (std::int64_t t = 0; t < M; ++t)
                    xt[static_cast<size_t>(t * M + i)] = x[static_cast<size_t>(i * M + t)];
            x.clear();
            x.shrink_to_fit();
            const auto rloc = red;
            const u64 p = rloc.p;
            for (std::int64_t t = 0; t < M; ++t) {
                const auto sup = parity.support(t);
                const auto val = parity.values(t);
                const u64* hrow = xt.data() + t * M;
                for (size_t u = 0; u < sup.size(); ++u) {
                    if (sup[u] >= static_cast<std::uint32_t>(k)) continue;
                    u64* rrow = rblock.data() + static_cast<std::int64_t>(sup[u]) * M;
                    const u64 v = val[u];
                    for (std::int64_t c = 0; c < M; ++c) {
                        const u64 s = rrow[c] + rloc.mul(v, hrow[c]);
                        rrow[c] = s >= p ? s - p : s;
                    }
                }
            }
            for (auto& v : rblock) v = v == 0 ? 0 : p - v;
        } else {
            // X <- H2^{-1} H1, then R = -X^T.
            std::vector<u64> x(static_cast<size_t>(M * k), 0);
            for (std::int64_t i = 0; i < M; ++i) {
                const std::int64_t orig = perm[static_cast<size_t>(i)];
                const auto sup = parity.support(orig);
                const auto val = parity.values(orig);
                for (size_t t = 0; t < sup.size(); ++t) {
                    if (sup[t] < static_cast<std::uint32_t>(k)) x[static_cast<size_t>(i * k + sup[t])] = val[t];
                }
            }
            solve_lower_unit(red, h2, M, x, k);
            solve_upper(red, f, h2, M, x, k);
            for (std::int64_t j = 0; j < k; ++j)
                for (std::int64_t i = 0; i < M; ++i)
                    rblock[static_cast<size_t>(j * M + i)] = f.neg_raw(x[static_cast<size_t>(i * k + j)]);
        }
        return rblock;
    });
    if (!rblock_opt) return std::nullopt;

    GeneratorMatrix g(f, n, std::move(sys), std::move(ppos), std::move(*rblock_opt));
    spot_check_orthogonal(parity, g);
    return g;
}

// Rank-revealing reduction of the full parity matrix; systematic positions
// are the pivot complement.
GeneratorMatrix build_fallback(const ParityMatrix& parity) {
    const std::int64_t M = parity.rows();
    const std::int64_t n = parity.cols();
    const PrimeField& f = parity.field();

    const FieldMatrix dense = parity.to_dense();
    std::vector<u64> a(static_cast<size_t>(M * n), 0);
    for (std::int64_t i = 0; i < M; ++i) {
        const auto r = dense.row(i);
        std::copy(r.begin(), r.end(), a.begin() + i * n);
    }

    std::vector<std::uint32_t> pivot_cols;
    std::int64_t rank = 0;
    for (std::int64_t col = 0; col < n && rank < M; ++col) {
        std::int64_t piv = -1;
        for (std::int64_t i = rank; i < M; ++i) {
            if (a[static_cast<size_t>(i * n + col)] != 0) {
                piv = i;
                break;
            }
        }
        if (piv < 0) continue;
        if (piv != rank)
            std::swap_ranges(a.begin() + piv * n, a.begin() + (piv + 1) * n, a.begin() + rank * n);
        const u64 dinv = f.inv_raw(a[static_cast<size_t>(rank * n + col)]);
        for (std::int64_t c = col; c < n; ++c)
            a[static_cast<size_t>(rank * n + c)] = f.mul_raw(a[static_cast<size_t>(rank * n + c)], dinv);
        for (std::int64_t i = 0; i < M; ++i) {
            if (i == rank) continue;
            const u64 factor = a[static_cast<size_t>(i * n + col)];
            if (factor == 0) continue;
            for (std::int64_t c = col; c < n; ++c)
                a[static_cast<size_t>(i * n + c)] =
                    f.sub_raw(a[static_cast<size_t>(i * n + c)], f.mul_raw(factor, a[static_cast<size_t>(rank * n + c)]));
        }
        pivot_cols.push_back(static_cast<std::uint32_t>(col));
        ++rank;
    }

    const std::int64_t k = n - rank;
    if (k <= 0) throw std::invalid_argument("build_generator: code has no message positions (rank = n)");

    std::vector<std::uint32_t> free_cols;
    free_cols.reserve(static_cast<size_t>(k));
    {
        size_t p = 0;
        for (std::int64_t col = 0; col < n; ++col) {
            if (p < pivot_cols.size() && pivot_cols[p] == static_cast<std::uint32_t>(col)) {
                ++p;
            } else {
                free_cols.push_back(static_cast<std::uint32_t>(col));
            }
        }
    }

    std::vector<u64> rblock(static_cast<size_t>(k) * pivot_cols.size(), 0);
    for (std::int64_t j = 0; j < k; ++j) {
        const std::uint32_t fcol = free_cols[static_cast<size_t>(j)];
        for (size_t t = 0; t < pivot_cols.size(); ++t)
            rblock[static_cast<size_t>(j) * pivot_cols.size() + t] =
                f.neg_raw(a[static_cast<size_t>(static_cast<std::int64_t>(t) * n + fcol)]);
    }

    GeneratorMatrix g(f, n, std::move(free_cols), std::move(pivot_cols), std::move(rblock));
    spot_check_orthogonal(parity, g);
    return g;
}

}  // namespace

ParityMatrix::ParityMatrix(const PrimeField& field, std::int64_t rows, std::int64_t cols,
                           std::vector<std::size_t> row_ptr, std::vector<std::uint32_t> cols_idx,
                           std::vector<u64> vals)
    : field_(field), rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)),
      cols_idx_(std::move(cols_idx)), vals_(std::move(vals)) {
    if (row_ptr_.size() != static_cast<size_t>(rows) + 1 || row_ptr_.front() != 0 ||
        row_ptr_.back() != vals_.size() || cols_idx_.size() != vals_.size())
        throw std::invalid_argument("ParityMatrix: inconsistent sparse layout");
    for (std::int64_t i = 0; i < rows_; ++i) {
        const auto sup = support(i);
        for (size_t t = 0; t < sup.size(); ++t) {
            if (sup[t] >= cols_ || (t > 0 && sup[t] <= sup[t - 1]))
                throw std::invalid_argument("ParityMatrix: support must be ascending and in range");
        }
    }
    for (u64 v : vals_) {
        if (v == 0 || v >= field_.modulus())
            throw std::invalid_argument("ParityMatrix: stored values must be nonzero canonical");
    }
}

u64 ParityMatrix::entry(std::int64_t i, std::uint32_t w) const {
    const auto sup = support(i);
    const auto it = std::lower_bound(sup.begin(), sup.end(), w);
    if (it == sup.end() || *it != w) return 0;
    return values(i)[static_cast<size_t>(it - sup.begin())];
}

BitMatrix ParityMatrix::support_bits() const {
    BitMatrix bits(rows_, cols_);
    for (std::int64_t i = 0; i < rows_; ++i) {
        for (std::uint32_t w : support(i)) bits.set(i, w);
    }
    return bits;
}

FieldMatrix ParityMatrix::to_dense() const {
    FieldMatrix m(field_, rows_, cols_);
    for (std::int64_t i = 0; i < rows_; ++i) {
        const auto sup = support(i);
        const auto val = values(i);
        for (size_t t = 0; t < sup.size(); ++t) m.at(i, sup[t]) = val[t];
    }
    return m;
}

ParityMatrix build_parity_matrix(const ContactMatrix& contact, const PrimeField& field, Rng& rng) {
    const std::int64_t M = contact.bits.rows();
    const std::int64_t n = contact.bits.cols();
    std::vector<std::size_t> row_ptr(static_cast<size_t>(M) + 1, 0);
    std::vector<std::uint32_t> cols_idx;
    std::vector<u64> vals;
    for (std::int64_t i = 0; i < M; ++i) {
        const auto row = contact.bits.row(i);
        for (size_t wi = 0; wi < row.size(); ++wi) {
            u64 word = row[wi];
            while (word) {
                const int b = std::countr_zero(word);
                word &= word - 1;
                const auto col = static_cast<std::uint32_t>(wi * 64 + static_cast<size_t>(b));
                if (col >= static_cast<std::uint32_t>(n)) break;
                cols_idx.push_back(col);
                vals.push_back(field.rand_nonzero(rng).v);
            }
        }
        row_ptr[static_cast<size_t>(i) + 1] = vals.size();
    }
    return ParityMatrix(field, M, n, std::move(row_ptr), std::move(cols_idx), std::move(vals));
}

GeneratorMatrix::GeneratorMatrix(const PrimeField& field, std::int64_t n,
                                 std::vector<std::uint32_t> systematic,
                                 std::vector<std::uint32_t> parity_positions, std::vector<u64> parity_block)
    : field_(field), n_(n), systematic_(std::move(systematic)), parity_pos_(std::move(parity_positions)),
      rblock_(std::move(parity_block)) {
    if (systematic_.empty()) throw std::invalid_argument("GeneratorMatrix: empty systematic set");
    if (systematic_.size() + parity_pos_.size() != static_cast<size_t>(n))
        throw std::invalid_argument("GeneratorMatrix: positions do not partition [n]");
    if (rblock_.size() != systematic_.size() * parity_pos_.size())
        throw std::invalid_argument("GeneratorMatrix: parity block shape mismatch");
    if (!std::is_sorted(systematic_.begin(), systematic_.end()) ||
        !std::is_sorted(parity_pos_.begin(), parity_pos_.end()))
        throw std::invalid_argument("GeneratorMatrix: position sets must be sorted");
}

bool GeneratorMatrix::identity_prefix() const {
    for (size_t i = 0; i < systematic_.size(); ++i) {
        if (systematic_[i] != static_cast<std::uint32_t>(i)) return false;
    }
    return true;
}

std::optional<std::int64_t> GeneratorMatrix::systematic_index(std::uint32_t w) const {
    const auto it = std::lower_bound(systematic_.begin(), systematic_.end(), w);
    if (it == systematic_.end() || *it != w) return std::nullopt;
    return static_cast<std::int64_t>(it - systematic_.begin());
}

u64 GeneratorMatrix::entry(std::int64_t j, std::uint32_t w) const {
    if (const auto idx = systematic_index(w)) return *idx == j ? 1 : 0;
    const auto it = std::lower_bound(parity_pos_.begin(), parity_pos_.end(), w);
    const auto idx = static_cast<size_t>(it - parity_pos_.begin());
    return rblock_[static_cast<size_t>(j) * parity_pos_.size() + idx];
}

std::vector<u64> GeneratorMatrix::row(std::int64_t j) const {
    std::vector<u64> out(static_cast<size_t>(n_), 0);
    out[systematic_[static_cast<size_t>(j)]] = 1;
    for (size_t idx = 0; idx < parity_pos_.size(); ++idx)
        out[parity_pos_[idx]] = rblock_[static_cast<size_t>(j) * parity_pos_.size() + idx];
    return out;
}

GeneratorMatrix build_generator(const ParityMatrix& parity) {
    if (auto g = try_systematic(parity)) return std::move(*g);
    return build_fallback(parity);
}

CodeBuild build_code(const ContactMatrix& contact, const PrimeField& field, Rng& rng, int max_attempts) {
    if (max_attempts < 1) max_attempts = 1;
    const bool h2_possible = contact.bits.rows() < contact.bits.cols();
    ParityMatrix parity = build_parity_matrix(contact, field, rng);
    for (int attempt = 1; h2_possible; ++attempt) {
        if (auto g = try_systematic(parity)) return CodeBuild{std::move(parity), std::move(*g), attempt, false};
        if (attempt >= max_attempts) break;
        parity = build_parity_matrix(contact, field, rng);
    }
    GeneratorMatrix g = build_fallback(parity);
    return CodeBuild{std::move(parity), std::move(g), h2_possible ? max_attempts : 1, true};
}

bool parity_orthogonal(const ParityMatrix& parity, const GeneratorMatrix& g) {
    const PrimeField& f = parity.field();
    for (std::int64_t i = 0; i < parity.rows(); ++i) {
        const auto sup = parity.support(i);
        const auto val = parity.values(i);
        for (std::int64_t j = 0; j < g.k(); ++j) {
            u64 acc = 0;
            for (size_t t = 0; t < sup.size(); ++t)
                acc = f.add_raw(acc, f.mul_raw(val[t], g.entry(j, sup[t])));
            if (acc != 0) return false;
        }
    }
    return true;
}

EncodedShares encode(const FieldMatrix& b, const GeneratorMatrix& g) {
    if (b.field() != g.field()) throw std::invalid_argument("encode: field mismatch");
    const std::int64_t k = g.k();
    if (b.rows() % k != 0)
        throw std::invalid_argument("encode: row count must be a multiple of k (pad_rows first)");
    const std::int64_t s = b.rows() / k;
    const std::int64_t c = b.cols();
    const PrimeField& f = b.field();

    EncodedShares out{f, g.n(), s, c, {}};
    out.shares.assign(static_cast<size_t>(g.n()), std::vector<u64>(static_cast<size_t>(s * c), 0));

    const auto sys = g.systematic_positions();
    for (std::int64_t j = 0; j < k; ++j) {
        auto& share = out.shares[sys[static_cast<size_t>(j)]];
        for (std::int64_t u = 0; u < s; ++u) {
            const auto src = b.row(j * s + u);
            std::copy(src.begin(), src.end(), share.begin() + u * c);
        }
    }
    const auto ppos = g.parity_positions();
    const size_t np = ppos.size();
    with_reducer(f, [&](auto red) {
        const auto rloc = red;
        const u64 p = rloc.p;
        for (size_t idx = 0; idx < np; ++idx) {
            auto& share = out.shares[ppos[idx]];
            for (std::int64_t j = 0; j < k; ++j) {
                const u64 coef = g.parity_entry(j, idx);
                if (coef == 0) continue;
                const u64* src = b.row(j * s).data();
                for (std::int64_t t = 0; t < s * c; ++t) {
                    const u64 sum = share[static_cast<size_t>(t)] + rloc.mul(coef, src[t]);
                    share[static_cast<size_t>(t)] = sum >= p ? sum - p : sum;
                }
            }
        }
        return 0;
    });
    return out;
}

}  // namespace gtcc
