#pragma once

#include <cstdint>
#include <stdexcept>

#include "gtcc/rng.hpp"

namespace gtcc {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

/// Element of a prime field, canonical representative in [0, p).
struct Fp {
    u64 v = 0;
    friend bool operator==(Fp a, Fp b) { return a.v == b.v; }
    friend bool operator!=(Fp a, Fp b) { return a.v != b.v; }
};

bool is_prime_u64(u64 n);

/// Arithmetic context for the prime field F_p, 3 <= p < 2^62.
///
/// The Fp-typed operations validate that their inputs are canonical for this
/// modulus and throw std::invalid_argument otherwise (an element carried over
/// from a larger field is caught this way). The *_raw variants skip that check
/// and are meant for inner loops that already hold canonical values.
class PrimeField {
public:
    static constexpr u64 kDefaultModulus = 2147483647ULL;  // 2^31 - 1
    static constexpr u64 kMaxModulus = (1ULL << 62) - 1;

    explicit PrimeField(u64 p);

    u64 modulus() const { return p_; }

    Fp zero() const { return Fp{0}; }
    Fp one() const { return Fp{1}; }
    Fp from_uint(u64 x) const { return Fp{x % p_}; }
    Fp from_int(std::int64_t x) const;

    Fp add(Fp a, Fp b) const { check(a); check(b); return Fp{add_raw(a.v, b.v)}; }
    Fp sub(Fp a, Fp b) const { check(a); check(b); return Fp{sub_raw(a.v, b.v)}; }
    Fp neg(Fp a) const { check(a); return Fp{neg_raw(a.v)}; }
    Fp mul(Fp a, Fp b) const { check(a); check(b); return Fp{mul_raw(a.v, b.v)}; }

    /// Multiplicative inverse by extended Euclid. Throws std::domain_error on 0.
    Fp inv(Fp a) const { check(a); return Fp{inv_raw(a.v)}; }

    Fp pow(Fp base, u64 e) const;

    /// Uniform over F_p.
    Fp rand(Rng& rng) const { return Fp{rng.uniform_below(p_)}; }

    /// Uniform over F_p \ {0}, by rejection of 0.
    Fp rand_nonzero(Rng& rng) const {
        u64 x;
        do {
            x = rng.uniform_below(p_);
        } while (x == 0);
        return Fp{x};
    }

    u64 add_raw(u64 a, u64 b) const {
        u64 s = a + b;
        if (s >= p_ || s < a) s -= p_;
        return s;
    }
    u64 sub_raw(u64 a, u64 b) const { return a >= b ? a - b : a + (p_ - b); }
    u64 neg_raw(u64 a) const { return a == 0 ? 0 : p_ - a; }

    u64 mul_raw(u64 a, u64 b) const {
        switch (red_) {
            case Reduction::Small:
                return (a * b) % p_;
            case Reduction::Mersenne: {
                const u128 t = static_cast<u128>(a) * b;
                u64 r = (static_cast<u64>(t) & p_) + static_cast<u64>(t >> mersenne_bits_);
                r = (r & p_) + (r >> mersenne_bits_);
                if (r >= p_) r -= p_;
                return r;
            }
            case Reduction::Wide:
            default:
                return static_cast<u64>(static_cast<u128>(a) * b % p_);
        }
    }

    u64 inv_raw(u64 a) const;

    friend bool operator==(const PrimeField& a, const PrimeField& b) { return a.p_ == b.p_; }
    friend bool operator!=(const PrimeField& a, const PrimeField& b) { return a.p_ != b.p_; }

private:
    enum class Reduction { Small, Mersenne, Wide };

    void check(Fp a) const {
        if (a.v >= p_) throw std::invalid_argument("field element not canonical for this modulus");
    }

    u64 p_;
    Reduction red_;
    unsigned mersenne_bits_ = 0;
};

}  // namespace gtcc
