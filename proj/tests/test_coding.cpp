#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "gtcc/coding.hpp"
#include "gtcc/io.hpp"

using namespace gtcc;

namespace {

ContactMatrix random_contact(int rows, int cols, double q, Rng& rng) {
    ContactMatrix c;
    c.m = rows;
    c.Z = 1;
    c.bits = BitMatrix(rows, cols);
    fill_bernoulli(c.bits, q, rng);
    return c;
}

// Test-side row reduction, independent of the library's elimination code.
struct RrefOracle {
    std::int64_t rank = 0;
    std::vector<std::vector<u64>> basis;  // nullspace basis vectors, length n

    RrefOracle(const ParityMatrix& parity) {
        const PrimeField& f = parity.field();
        const std::int64_t M = parity.rows(), n = parity.cols();
        std::vector<std::vector<u64>> a(static_cast<size_t>(M), std::vector<u64>(static_cast<size_t>(n), 0));
        for (std::int64_t i = 0; i < M; ++i) {
            const auto sup = parity.support(i);
            const auto val = parity.values(i);
            for (size_t t = 0; t < sup.size(); ++t) a[static_cast<size_t>(i)][sup[t]] = val[t];
        }
        std::vector<std::int64_t> pivot_of_col(static_cast<size_t>(n), -1);
        std::int64_t r = 0;
        for (std::int64_t col = 0; col < n && r < M; ++col) {
            std::int64_t piv = -1;
            for (std::int64_t i = r; i < M; ++i) {
                if (a[static_cast<size_t>(i)][static_cast<size_t>(col)] != 0) {
                    piv = i;
                    break;
                }
            }
            if (piv < 0) continue;
            std::swap(a[static_cast<size_t>(piv)], a[static_cast<size_t>(r)]);
            const u64 dinv = f.inv_raw(a[static_cast<size_t>(r)][static_cast<size_t>(col)]);
            for (auto& v : a[static_cast<size_t>(r)]) v = f.mul_raw(v, dinv);
            for (std::int64_t i = 0; i < M; ++i) {
                if (i == r) continue;
                const u64 factor = a[static_cast<size_t>(i)][static_cast<size_t>(col)];
                if (factor == 0) continue;
                for (std::int64_t cidx = 0; cidx < n; ++cidx)
                    a[static_cast<size_t>(i)][static_cast<size_t>(cidx)] =
                        f.sub_raw(a[static_cast<size_t>(i)][static_cast<size_t>(cidx)],
                                  f.mul_raw(factor, a[static_cast<size_t>(r)][static_cast<size_t>(cidx)]));
            }
            pivot_of_col[static_cast<size_t>(col)] = r;
            ++r;
        }
        rank = r;
        for (std::int64_t col = 0; col < n; ++col) {
            if (pivot_of_col[static_cast<size_t>(col)] >= 0) continue;
            std::vector<u64> v(static_cast<size_t>(n), 0);
            v[static_cast<size_t>(col)] = 1;
            for (std::int64_t pc = 0; pc < n; ++pc) {
                const std::int64_t pr = pivot_of_col[static_cast<size_t>(pc)];
                if (pr < 0) continue;
                v[static_cast<size_t>(pc)] = f.neg_raw(a[static_cast<size_t>(pr)][static_cast<size_t>(col)]);
            }
            basis.push_back(std::move(v));
        }
    }
};

std::vector<u64> generator_combination(const GeneratorMatrix& g, std::span<const u64> target) {
    // A vector in span(G) must equal sum_j target[S_j] * G_j because the
    // systematic columns of G form an identity.
    const PrimeField& f = g.field();
    std::vector<u64> combo(static_cast<size_t>(g.n()), 0);
    const auto sys = g.systematic_positions();
    for (std::int64_t j = 0; j < g.k(); ++j) {
        const u64 coef = target[sys[static_cast<size_t>(j)]];
        if (coef == 0) continue;
        const auto row = g.row(j);
        for (std::int64_t w = 0; w < g.n(); ++w)
            combo[static_cast<size_t>(w)] =
                f.add_raw(combo[static_cast<size_t>(w)], f.mul_raw(coef, row[static_cast<size_t>(w)]));
    }
    return combo;
}

}  // namespace

TEST_CASE("parity support equals contact support") {
    PrimeField f(257);
    Rng rng(31);
    for (int i = 0; i < 20; ++i) {
        const auto contact = random_contact(12, 40, 0.2, rng);
        const auto parity = build_parity_matrix(contact, f, rng);
        CHECK(parity.support_bits() == contact.bits);
    }
}

TEST_CASE("parity edge patterns") {
    PrimeField f3(3);
    Rng rng(32);
    ContactMatrix zeros;
    zeros.m = 4;
    zeros.Z = 1;
    zeros.bits = BitMatrix(4, 6);
    const auto pz = build_parity_matrix(zeros, f3, rng);
    CHECK(pz.nonzeros() == 0);

    ContactMatrix ones;
    ones.m = 4;
    ones.Z = 1;
    ones.bits = BitMatrix(4, 6);
    ones.bits.set_all();
    const auto po = build_parity_matrix(ones, f3, rng);
    CHECK(po.nonzeros() == 24);
    for (std::int64_t i = 0; i < 4; ++i) {
        for (u64 v : po.values(i)) {
            CHECK(v >= 1);
            CHECK(v <= 2);
        }
    }
}

TEST_CASE("parity values are uniform over the nonzero elements") {
    PrimeField f7(7);
    Rng rng(33);
    ContactMatrix ones;
    ones.m = 100;
    ones.Z = 1;
    ones.bits = BitMatrix(100, 1000);
    ones.bits.set_all();
    const auto parity = build_parity_matrix(ones, f7, rng);
    std::vector<std::int64_t> counts(7, 0);
    for (std::int64_t i = 0; i < 100; ++i)
        for (u64 v : parity.values(i)) ++counts[static_cast<size_t>(v)];
    const double expected = 100000.0 / 6.0;
    double stat = 0.0;
    for (int v = 1; v <= 6; ++v) {
        const double diff = static_cast<double>(counts[static_cast<size_t>(v)]) - expected;
        stat += diff * diff / expected;
    }
    CHECK(counts[0] == 0);
    CHECK(stat <= 5.0 + 3.0 * std::sqrt(10.0));
}

TEST_CASE("generator orthogonality on random instances") {
    PrimeField f(257);
    Rng rng(34);
    for (int i = 0; i < 100; ++i) {
        const auto contact = random_contact(10, 50, 0.2, rng);
        const auto parity = build_parity_matrix(contact, f, rng);
        const auto g = build_generator(parity);
        CHECK(parity_orthogonal(parity, g));
    }
}

TEST_CASE("one-row parity generator") {
    PrimeField f(7);
    // row (3, 5): G = [1, -3*inv(5)] = [1, 5]
    ParityMatrix parity(f, 1, 2, {0, 2}, {0, 1}, {3, 5});
    const auto g = build_generator(parity);
    CHECK(g.k() == 1);
    CHECK(g.identity_prefix());
    CHECK(g.entry(0, 0) == 1);
    CHECK(g.entry(0, 1) == 5);
    CHECK(parity_orthogonal(parity, g));
}

TEST_CASE("generator against an independent nullspace oracle") {
    Rng rng(35);
    for (int i = 0; i < 60; ++i) {
        PrimeField f(i % 2 == 0 ? 257 : 65537);
        const auto contact = random_contact(2, 5, 0.45, rng);
        const auto parity = build_parity_matrix(contact, f, rng);
        const RrefOracle oracle(parity);
        if (oracle.rank == 5) continue;
        const auto g = build_generator(parity);
        CHECK(g.k() == 5 - oracle.rank);
        CHECK(parity_orthogonal(parity, g));
        for (const auto& v : oracle.basis) {
            CHECK(generator_combination(g, v) == v);  // mutual span membership
        }
    }
}

TEST_CASE("rank accounting on larger instances") {
    PrimeField f(65537);
    Rng rng(36);
    for (int i = 0; i < 25; ++i) {
        const auto contact = random_contact(8, 26, 0.25, rng);
        const auto parity = build_parity_matrix(contact, f, rng);
        const RrefOracle oracle(parity);
        if (oracle.rank == 26) continue;
        const auto g = build_generator(parity);
        CHECK(g.k() + oracle.rank == 26);
    }
}

TEST_CASE("forced-singular trailing block falls back to pivot-complement positions") {
    PrimeField f(257);
    Rng rng(37);
    // Column 3 never appears in any test, so the trailing 2x2 block is
    // singular for every redraw of the values.
    ContactMatrix contact;
    contact.m = 2;
    contact.Z = 1;
    contact.bits = BitMatrix(2, 4);
    contact.bits.set(0, 0);
    contact.bits.set(0, 1);
    contact.bits.set(0, 2);
    contact.bits.set(1, 1);
    contact.bits.set(1, 2);
    const auto built = build_code(contact, f, rng, 4);
    CHECK(built.fallback);
    CHECK(built.attempts == 4);
    CHECK(built.generator.k() == 2);
    CHECK_FALSE(built.generator.identity_prefix());
    CHECK(built.generator.systematic_positions()[1] == 3);
    CHECK(parity_orthogonal(built.parity, built.generator));
}

TEST_CASE("encode on the identity code copies blocks") {
    PrimeField f(257);
    ParityMatrix parity(f, 0, 4, {0}, {}, {});
    const auto g = build_generator(parity);
    CHECK(g.k() == 4);
    Rng rng(38);
    const auto b = FieldMatrix::random(f, 8, 3, rng);
    const auto shares = encode(b, g);
    CHECK(shares.s == 2);
    for (std::uint32_t w = 0; w < 4; ++w) {
        const auto sh = shares.share(w);
        for (std::int64_t u = 0; u < 2; ++u)
            for (std::int64_t v = 0; v < 3; ++v)
                CHECK(sh[static_cast<size_t>(u * 3 + v)] == b.at(w * 2 + u, v));
    }
}

TEST_CASE("encode matches the naive combination") {
    PrimeField f(65537);
    Rng rng(39);
    for (int i = 0; i < 30; ++i) {
        const auto contact = random_contact(2, 7, 0.4, rng);
        const auto built = build_code(contact, f, rng);
        const auto& g = built.generator;
        const std::int64_t k = g.k();
        const std::int64_t s = 2, c = 3;
        const auto b = FieldMatrix::random(f, k * s, c, rng);
        const auto shares = encode(b, g);
        for (std::uint32_t w = 0; w < 7; ++w) {
            std::vector<u64> expect(static_cast<size_t>(s * c), 0);
            for (std::int64_t j = 0; j < k; ++j) {
                const u64 coef = g.entry(j, w);
                for (std::int64_t u = 0; u < s; ++u)
                    for (std::int64_t v = 0; v < c; ++v)
                        expect[static_cast<size_t>(u * c + v)] = f.add_raw(
                            expect[static_cast<size_t>(u * c + v)], f.mul_raw(coef, b.at(j * s + u, v)));
            }
            CHECK(std::vector<u64>(shares.share(w).begin(), shares.share(w).end()) == expect);
        }

        const FieldMatrix zero(f, k * s, c);
        const auto zshares = encode(zero, g);
        for (std::uint32_t w = 0; w < 7; ++w)
            for (u64 v : zshares.share(w)) CHECK(v == 0);
    }
}

TEST_CASE("correct shares satisfy every parity row") {
    PrimeField f(2147483647ULL);
    Rng rng(40);
    for (int i = 0; i < 20; ++i) {
        const auto contact = random_contact(5, 17, 0.3, rng);
        const auto built = build_code(contact, f, rng);
        const std::int64_t k = built.generator.k();
        const std::int64_t s = 3, c = 2;
        const auto b = FieldMatrix::random(f, k * s, c, rng);
        const auto shares = encode(b, built.generator);
        std::vector<u64> v(static_cast<size_t>(c));
        for (auto& x : v) x = f.rand(rng).v;
        for (std::int64_t row = 0; row < 5; ++row) {
            std::vector<u64> acc(static_cast<size_t>(s), 0);
            const auto sup = built.parity.support(row);
            const auto val = built.parity.values(row);
            for (size_t t = 0; t < sup.size(); ++t) {
                // worker result a^(w) = share * v
                const auto sh = shares.share(sup[t]);
                for (std::int64_t u = 0; u < s; ++u) {
                    u64 prod = 0;
                    for (std::int64_t cc = 0; cc < c; ++cc)
                        prod = f.add_raw(prod, f.mul_raw(sh[static_cast<size_t>(u * c + cc)], v[static_cast<size_t>(cc)]));
                    acc[static_cast<size_t>(u)] =
                        f.add_raw(acc[static_cast<size_t>(u)], f.mul_raw(val[t], prod));
                }
            }
            for (u64 x : acc) CHECK(x == 0);
        }
    }
}

TEST_CASE("padding") {
    PrimeField f(257);
    Rng rng(41);
    const auto b = FieldMatrix::random(f, 7, 2, rng);
    const auto padded = pad_rows(b, 3);
    CHECK(padded.rows() == 9);
    for (std::int64_t r = 0; r < 7; ++r)
        for (std::int64_t c = 0; c < 2; ++c) CHECK(padded.at(r, c) == b.at(r, c));
    for (std::int64_t r = 7; r < 9; ++r)
        for (std::int64_t c = 0; c < 2; ++c) CHECK(padded.at(r, c) == 0);

    ParityMatrix parity(f, 0, 3, {0}, {}, {});
    const auto g = build_generator(parity);
    CHECK_THROWS_AS(encode(b, g), std::invalid_argument);
    CHECK_NOTHROW(encode(padded, g));
}

TEST_CASE("code construction is deterministic") {
    PrimeField f(257);
    Rng r1(77), r2(77);
    const auto c1 = random_contact(6, 20, 0.25, r1);
    const auto c2 = random_contact(6, 20, 0.25, r2);
    CHECK(c1.bits == c2.bits);
    const auto b1 = build_code(c1, f, r1);
    const auto b2 = build_code(c2, f, r2);
    CHECK(b1.parity.to_dense() == b2.parity.to_dense());
    CHECK(std::vector<std::uint32_t>(b1.generator.systematic_positions().begin(),
                                     b1.generator.systematic_positions().end()) ==
          std::vector<std::uint32_t>(b2.generator.systematic_positions().begin(),
                                     b2.generator.systematic_positions().end()));
    for (std::int64_t j = 0; j < b1.generator.k(); ++j) CHECK(b1.generator.row(j) == b2.generator.row(j));
}

TEST_CASE("matrix files round-trip") {
    const auto dir = std::filesystem::temp_directory_path() / "gtcc_io_test";
    std::filesystem::create_directories(dir);
    Rng rng(55);
    for (u64 p : {257ULL, 2147483647ULL}) {
        PrimeField f(p);
        const auto m = FieldMatrix::random(f, 5, 9, rng);
        const auto path = (dir / ("m" + std::to_string(p) + ".bin")).string();
        write_field_matrix(path, m);
        const auto back = read_field_matrix(path);
        CHECK(back == m);
    }
    // corrupted magic is rejected
    const auto bad = (dir / "bad.bin").string();
    {
        std::FILE* fp = std::fopen(bad.c_str(), "wb");
        std::fputs("NOPE", fp);
        std::fclose(fp);
    }
    CHECK_THROWS(read_field_matrix(bad));
    std::filesystem::remove_all(dir);
}
