// modarith.hpp
//
// Exact integer and modular arithmetic primitives.  Everything here is a
// total, pure function on 64-bit integers with 128-bit intermediates, so
// products never overflow for moduli up to 2^40 (the documented bound;
// larger moduli are rejected).

#pragma once

#include <optional>
#include <string>

#include "expsum/common.hpp"

namespace expsum {

// Largest accepted modulus.  With m < 2^40 every product of two reduced
// residues stays below 2^80 and fits an __int128 with room to spare.
inline constexpr i64 kMaxModulus = i64(1) << 40;

inline void check_modulus(i64 m) {
    if (m < 1) throw std::domain_error("modulus must be >= 1");
    if (m > kMaxModulus) throw std::domain_error("modulus exceeds the supported bound 2^40");
}

// x mod m in [0, m)
inline i64 mod_reduce(i64 x, i64 m) {
    check_modulus(m);
    i64 r = x % m;
    if (r < 0) r += m;
    return r;
}

inline i64 mulmod(i64 a, i64 b, i64 m) {
    return static_cast<i64>((static_cast<i128>(a) * b) % m);
}

// base^exp mod m, exp >= 0
inline i64 mod_pow(i64 base, i64 exp, i64 m) {
    check_modulus(m);
    if (exp < 0) throw std::invalid_argument("mod_pow: negative exponent");
    i64 b = mod_reduce(base, m);
    i64 acc = 1 % m;
    while (exp > 0) {
        if (exp & 1) acc = mulmod(acc, b, m);
        b = mulmod(b, b, m);
        exp >>= 1;
    }
    return acc;
}

// Extended gcd: returns g = gcd(a, b) and x with a*x == g (mod b).
inline i64 ext_gcd_inv(i64 a, i64 b, i64& inv_out) {
    i64 old_r = a, r = b;
    i64 old_s = 1, s = 0;
    while (r != 0) {
        const i64 q = old_r / r;
        const i64 tr = old_r - q * r;
        old_r = r;
        r = tr;
        const i64 ts = old_s - q * s;
        old_s = s;
        s = ts;
    }
    inv_out = old_s;
    return old_r;
}

// Multiplicative inverse of x mod m, or nullopt when gcd(x, m) > 1.
inline std::optional<i64> mod_inv(i64 x, i64 m) {
    check_modulus(m);
    if (m == 1) return 0;  // trivial group
    const i64 a = mod_reduce(x, m);
    i64 inv;
    if (ext_gcd_inv(a, m, inv) != 1) return std::nullopt;
    return mod_reduce(inv, m);
}

// Jacobi symbol (s/q) for odd q >= 1; 0 iff gcd(s, q) > 1.
inline int jacobi_symbol(i64 s, i64 q) {
    if (q < 1 || q % 2 == 0) throw std::invalid_argument("jacobi_symbol: q must be odd and positive");
    i64 a = mod_reduce(s, q);
    i64 n = q;
    int sign = 1;
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            const i64 r = n % 8;
            if (r == 3 || r == 5) sign = -sign;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) sign = -sign;
        a %= n;
    }
    return n == 1 ? sign : 0;
}

// Number of positive divisors.
inline i64 divisor_tau(i64 n) {
    if (n < 1) throw std::invalid_argument("divisor_tau: n must be >= 1");
    i64 tau = 1;
    for (i64 p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            i64 e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            tau *= e + 1;
        }
    }
    if (n > 1) tau *= 2;
    return tau;
}

// delta_n: 1 for odd n, 0 for even n
inline int parity_delta(i64 n) { return static_cast<int>(((n % 2) + 2) % 2); }

// epsilon_n: 1 when n == 1 (mod 4), i when n == 3 (mod 4); defined for odd n only
inline cplx epsilon_factor(i64 n) {
    const i64 r = mod_reduce(n, 4);
    if (r == 1) return {1.0, 0.0};
    if (r == 3) return {0.0, 1.0};
    throw std::invalid_argument("epsilon_factor: n must be odd");
}

// A value paired with its modulus, normalized into [0, m).
struct residue {
    i64 value = 0;
    i64 modulus = 1;

    static residue make(i64 x, i64 m) { return {mod_reduce(x, m), m}; }
};

}  // namespace expsum
