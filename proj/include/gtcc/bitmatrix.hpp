#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace gtcc {

/// Dense binary matrix, 64 column bits per word, row-major.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::int64_t rows, std::int64_t cols)
        : rows_(rows), cols_(cols), wpr_((cols + 63) / 64), words_(static_cast<size_t>(rows * wpr_), 0) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("BitMatrix: negative shape");
    }

    std::int64_t rows() const { return rows_; }
    std::int64_t cols() const { return cols_; }
    std::int64_t words_per_row() const { return wpr_; }

    bool get(std::int64_t r, std::int64_t c) const {
        return (words_[static_cast<size_t>(r * wpr_ + c / 64)] >> (c & 63)) & 1ULL;
    }
    void set(std::int64_t r, std::int64_t c) {
        words_[static_cast<size_t>(r * wpr_ + c / 64)] |= 1ULL << (c & 63);
    }
    void clear(std::int64_t r, std::int64_t c) {
        words_[static_cast<size_t>(r * wpr_ + c / 64)] &= ~(1ULL << (c & 63));
    }

    std::span<const std::uint64_t> row(std::int64_t r) const {
        return {words_.data() + r * wpr_, static_cast<size_t>(wpr_)};
    }
    std::span<std::uint64_t> row(std::int64_t r) {
        return {words_.data() + r * wpr_, static_cast<size_t>(wpr_)};
    }

    bool row_intersects(std::int64_t r, std::span<const std::uint64_t> mask) const {
        const auto rw = row(r);
        for (size_t i = 0; i < rw.size(); ++i) {
            if (rw[i] & mask[i]) return true;
        }
        return false;
    }

    void set_all() {
        for (std::int64_t r = 0; r < rows_; ++r) {
            auto rw = row(r);
            for (std::int64_t c = 0; c < cols_; ++c) rw[static_cast<size_t>(c / 64)] |= 1ULL << (c & 63);
        }
    }

    friend bool operator==(const BitMatrix& a, const BitMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.words_ == b.words_;
    }

private:
    std::int64_t rows_ = 0;
    std::int64_t cols_ = 0;
    std::int64_t wpr_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace gtcc
