#include "gtcc/field.hpp"

#include <bit>

namespace gtcc {

namespace {

u64 mulmod_u64(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

u64 powmod_u64(u64 base, u64 e, u64 m) {
    u64 r = 1 % m;
    base %= m;
    while (e) {
        if (e & 1) r = mulmod_u64(r, base, m);
        base = mulmod_u64(base, base, m);
        e >>= 1;
    }
    return r;
}

}  // namespace

// Deterministic Miller-Rabin; this base set is exact for all 64-bit inputs.
bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    const int s = std::countr_zero(n - 1);
    const u64 d = (n - 1) >> s;
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 0; i + 1 < s; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

PrimeField::PrimeField(u64 p) : p_(p) {
    if (p < 3) throw std::invalid_argument("field modulus must be >= 3");
    if (p > kMaxModulus) throw std::invalid_argument("field modulus must be < 2^62");
    if (!is_prime_u64(p)) throw std::invalid_argument("field modulus must be prime");
    if ((p & (p + 1)) == 0) {
        red_ = Reduction::Mersenne;
        mersenne_bits_ = static_cast<unsigned>(std::bit_width(p));
    } else if (p < (1ULL << 32)) {
        red_ = Reduction::Small;
    } else {
        red_ = Reduction::Wide;
    }
}

Fp PrimeField::from_int(std::int64_t x) const {
    if (x >= 0) return from_uint(static_cast<u64>(x));
    const u64 r = static_cast<u64>(-x) % p_;
    return Fp{r == 0 ? 0 : p_ - r};
}

Fp PrimeField::pow(Fp base, u64 e) const {
    check(base);
    u64 r = 1;
    u64 b = base.v;
    while (e) {
        if (e & 1) r = mul_raw(r, b);
        b = mul_raw(b, b);
        e >>= 1;
    }
    return Fp{r};
}

u64 PrimeField::inv_raw(u64 a) const {
    if (a == 0) throw std::domain_error("inverse of zero");
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = static_cast<std::int64_t>(p_), new_r = static_cast<std::int64_t>(a);
    while (new_r != 0) {
        const std::int64_t q = r / new_r;
        std::int64_t tmp = t - q * new_t;
        t = new_t;
        new_t = tmp;
        tmp = r - q * new_r;
        r = new_r;
        new_r = tmp;
    }
    if (t < 0) t += static_cast<std::int64_t>(p_);
    return static_cast<u64>(t);
}

}  // namespace gtcc
