#include "gtcc/io.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace gtcc {

namespace {

constexpr char kMagic[4] = {'G', 'T', 'F', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    std::array<char, 4> b;
    for (int i = 0; i < 4; ++i) b[static_cast<size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b.data(), 4);
}

void put_u64(std::ostream& os, u64 v) {
    std::array<char, 8> b;
    for (int i = 0; i < 8; ++i) b[static_cast<size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b.data(), 8);
}

std::uint32_t get_u32(std::istream& is) {
    std::array<unsigned char, 4> b;
    is.read(reinterpret_cast<char*>(b.data()), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[static_cast<size_t>(i)]) << (8 * i);
    return v;
}

u64 get_u64(std::istream& is) {
    std::array<unsigned char, 8> b;
    is.read(reinterpret_cast<char*>(b.data()), 8);
    u64 v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<u64>(b[static_cast<size_t>(i)]) << (8 * i);
    return v;
}

void write_header_and_data(std::ostream& os, u64 p, std::int64_t rows, std::int64_t cols,
                           std::span<const u64> data) {
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_u64(os, p);
    put_u64(os, static_cast<u64>(rows));
    put_u64(os, static_cast<u64>(cols));
    for (u64 v : data) put_u64(os, v);
}

}  // namespace

void write_field_matrix(const std::string& path, const FieldMatrix& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    std::vector<u64> data;
    data.reserve(static_cast<size_t>(m.rows() * m.cols()));
    for (std::int64_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        data.insert(data.end(), row.begin(), row.end());
    }
    write_header_and_data(os, m.field().modulus(), m.rows(), m.cols(), data);
    if (!os) throw std::runtime_error("write failed: " + path);
}

FieldMatrix read_field_matrix(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("bad matrix magic: " + path);
    const std::uint32_t version = get_u32(is);
    if (version != kVersion) throw std::runtime_error("unsupported matrix version: " + path);
    const u64 p = get_u64(is);
    const auto rows = static_cast<std::int64_t>(get_u64(is));
    const auto cols = static_cast<std::int64_t>(get_u64(is));
    if (!is || rows < 0 || cols < 0 || rows * cols > (1LL << 32))
        throw std::runtime_error("bad matrix header: " + path);
    PrimeField field(p);
    FieldMatrix m(field, rows, cols);
    for (std::int64_t r = 0; r < rows; ++r) {
        for (std::int64_t c = 0; c < cols; ++c) {
            const u64 v = get_u64(is);
            if (v >= p) throw std::runtime_error("non-canonical value in matrix file: " + path);
            m.at(r, c) = v;
        }
    }
    if (!is) throw std::runtime_error("truncated matrix file: " + path);
    return m;
}

void dump_shares(const std::string& dir, const EncodedShares& shares) {
    std::filesystem::create_directories(dir);
    for (std::int64_t w = 0; w < shares.n; ++w) {
        FieldMatrix m(shares.field, shares.s, shares.c);
        const auto src = shares.share(static_cast<std::uint32_t>(w));
        for (std::int64_t u = 0; u < shares.s; ++u) {
            for (std::int64_t v = 0; v < shares.c; ++v) m.at(u, v) = src[static_cast<size_t>(u * shares.c + v)];
        }
        char name[32];
        std::snprintf(name, sizeof(name), "share_%05lld.bin", static_cast<long long>(w));
        write_field_matrix((std::filesystem::path(dir) / name).string(), m);
    }
}

}  // namespace gtcc
