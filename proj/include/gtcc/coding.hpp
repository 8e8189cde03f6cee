#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gtcc/field.hpp"
#include "gtcc/field_matrix.hpp"
#include "gtcc/gt_core.hpp"

namespace gtcc {

/// Field-valued parity-check matrix whose per-row support equals the contact
/// matrix support: entry (i,j) is zero exactly when the contact bit is zero,
/// and a uniform nonzero field value otherwise. Stored sparse by row.
class ParityMatrix {
public:
    ParityMatrix(const PrimeField& field, std::int64_t rows, std::int64_t cols,
                 std::vector<std::size_t> row_ptr, std::vector<std::uint32_t> cols_idx,
                 std::vector<u64> vals);

    const PrimeField& field() const { return field_; }
    std::int64_t rows() const { return rows_; }
    std::int64_t cols() const { return cols_; }
    std::size_t nonzeros() const { return vals_.size(); }

    std::span<const std::uint32_t> support(std::int64_t i) const {
        return {cols_idx_.data() + row_ptr_[static_cast<size_t>(i)],
                row_ptr_[static_cast<size_t>(i) + 1] - row_ptr_[static_cast<size_t>(i)]};
    }
    std::span<const u64> values(std::int64_t i) const {
        return {vals_.data() + row_ptr_[static_cast<size_t>(i)],
                row_ptr_[static_cast<size_t>(i) + 1] - row_ptr_[static_cast<size_t>(i)]};
    }

    /// Entry (i, w); zero when w is outside the row support.
    u64 entry(std::int64_t i, std::uint32_t w) const;

    /// The 0/1 support pattern as a bit matrix.
    BitMatrix support_bits() const;

    FieldMatrix to_dense() const;

private:
    PrimeField field_;
    std::int64_t rows_;
    std::int64_t cols_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> cols_idx_;
    std::vector<u64> vals_;
};

ParityMatrix build_parity_matrix(const ContactMatrix& contact, const PrimeField& field, Rng& rng);

/// Systematic generator of the code with parity-check matrix M^(p):
/// k rows, n columns, identity on the systematic position set S (|S| = k,
/// k = n - rank), arbitrary values on the remaining positions.
class GeneratorMatrix {
public:
    GeneratorMatrix(const PrimeField& field, std::int64_t n, std::vector<std::uint32_t> systematic,
                    std::vector<std::uint32_t> parity_positions, std::vector<u64> parity_block);

    const PrimeField& field() const { return field_; }
    std::int64_t k() const { return static_cast<std::int64_t>(systematic_.size()); }
    std::int64_t n() const { return n_; }

    std::span<const std::uint32_t> systematic_positions() const { return systematic_; }
    std::span<const std::uint32_t> parity_positions() const { return parity_pos_; }

    /// True when S = {0, ..., k-1}, i.e. the generator has the [I | R] layout.
    bool identity_prefix() const;

    u64 entry(std::int64_t j, std::uint32_t w) const;
    std::vector<u64> row(std::int64_t j) const;

    /// Entry at systematic row j and the idx-th parity position.
    u64 parity_entry(std::int64_t j, std::size_t idx) const {
        return rblock_[static_cast<std::size_t>(j) * parity_pos_.size() + idx];
    }

    /// Position of w in the systematic set, if systematic.
    std::optional<std::int64_t> systematic_index(std::uint32_t w) const;

private:
    PrimeField field_;
    std::int64_t n_;
    std::vector<std::uint32_t> systematic_;   // sorted
    std::vector<std::uint32_t> parity_pos_;   // sorted complement
    std::vector<u64> rblock_;                 // k x (n-k), row-major
};

/// Generator from a parity matrix. Uses the closed-form [I | R] construction
/// (R^T = -H2^{-1} H1 with H2 the last-M-columns block) when H2 is invertible;
/// otherwise falls back to a full nullspace computation, and the systematic
/// positions are the pivot complement instead of {0..k-1}.
/// Throws std::invalid_argument when the code has no message positions
/// (rank = n).
GeneratorMatrix build_generator(const ParityMatrix& parity);

/// Parity + generator for a contact matrix. When the last-columns block is
/// singular, the parity values are redrawn (same support) up to max_attempts
/// times before accepting the nullspace fallback.
struct CodeBuild {
    ParityMatrix parity;
    GeneratorMatrix generator;
    int attempts = 1;
    bool fallback = false;
};
CodeBuild build_code(const ContactMatrix& contact, const PrimeField& field, Rng& rng,
                     int max_attempts = 16);

/// Exhaustive check that M^(p) * G^T = 0.
bool parity_orthogonal(const ParityMatrix& parity, const GeneratorMatrix& g);

/// Per-worker shares W^(w) = sum_j G_{j,w} B_j, where B is split into k
/// horizontal blocks of s = rows/k rows each. The share at systematic
/// position j is exactly B_j.
struct EncodedShares {
    PrimeField field;
    std::int64_t n = 0;
    std::int64_t s = 0;
    std::int64_t c = 0;
    std::vector<std::vector<u64>> shares;  // n entries, each s*c row-major

    std::span<const u64> share(std::uint32_t w) const { return shares[w]; }
};
EncodedShares encode(const FieldMatrix& b, const GeneratorMatrix& g);

}  // namespace gtcc
