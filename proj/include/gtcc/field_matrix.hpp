#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "gtcc/field.hpp"
#include "gtcc/rng.hpp"

namespace gtcc {

/// Dense row-major matrix of canonical field values.
class FieldMatrix {
public:
    FieldMatrix(const PrimeField& field, std::int64_t rows, std::int64_t cols)
        : field_(field), rows_(rows), cols_(cols), a_(static_cast<size_t>(rows * cols), 0) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("FieldMatrix: negative shape");
    }

    static FieldMatrix random(const PrimeField& field, std::int64_t rows, std::int64_t cols, Rng& rng) {
        FieldMatrix m(field, rows, cols);
        for (auto& v : m.a_) v = field.rand(rng).v;
        return m;
    }

    const PrimeField& field() const { return field_; }
    std::int64_t rows() const { return rows_; }
    std::int64_t cols() const { return cols_; }

    u64& at(std::int64_t r, std::int64_t c) { return a_[static_cast<size_t>(r * cols_ + c)]; }
    u64 at(std::int64_t r, std::int64_t c) const { return a_[static_cast<size_t>(r * cols_ + c)]; }

    std::span<u64> row(std::int64_t r) { return {a_.data() + r * cols_, static_cast<size_t>(cols_)}; }
    std::span<const u64> row(std::int64_t r) const {
        return {a_.data() + r * cols_, static_cast<size_t>(cols_)};
    }

    std::vector<u64> matvec(std::span<const u64> v) const {
        if (v.size() != static_cast<size_t>(cols_)) throw std::invalid_argument("matvec: size mismatch");
        std::vector<u64> out(static_cast<size_t>(rows_), 0);
        for (std::int64_t r = 0; r < rows_; ++r) {
            u64 acc = 0;
            const auto rw = row(r);
            for (std::int64_t c = 0; c < cols_; ++c)
                acc = field_.add_raw(acc, field_.mul_raw(rw[static_cast<size_t>(c)], v[static_cast<size_t>(c)]));
            out[static_cast<size_t>(r)] = acc;
        }
        return out;
    }

    friend bool operator==(const FieldMatrix& x, const FieldMatrix& y) {
        return x.field_ == y.field_ && x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.a_ == y.a_;
    }

private:
    PrimeField field_;
    std::int64_t rows_;
    std::int64_t cols_;
    std::vector<u64> a_;
};

/// B extended with zero rows to the next multiple of k.
inline FieldMatrix pad_rows(const FieldMatrix& b, std::int64_t k) {
    if (k < 1) throw std::invalid_argument("pad_rows: k must be >= 1");
    const std::int64_t padded = (b.rows() + k - 1) / k * k;
    if (padded == b.rows()) return b;
    FieldMatrix out(b.field(), padded, b.cols());
    for (std::int64_t r = 0; r < b.rows(); ++r) {
        const auto src = b.row(r);
        auto dst = out.row(r);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

}  // namespace gtcc
