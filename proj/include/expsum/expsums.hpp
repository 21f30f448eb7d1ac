// expsums.hpp
//
// Complete exponential sums: the Kloosterman sum S(m,n;c), the quadratic
// Gauss sum G(s,t;q) (brute force and the classical closed form split by
// q mod 4), and the circle-method sum
//
//   S_q(c) = sum*_{a mod q} sum_{b mod (Z/q)^4} e_q( a(F(b) - N) + b.c ),
//
// with F(x) = x1^2 + ... + x4^2 and N = 4N', together with its reduction
// to a single Kloosterman sum.
//
// Every sum is evaluated in double-precision complex with compensated
// accumulation; the tolerance model is absolute error <= 1e-9 * (number of
// terms).  Brute-force evaluators are deliberately naive -- they are the
// oracles the closed forms are checked against.

#pragma once

#include <numeric>
#include <utility>
#include <vector>

#include "expsum/common.hpp"
#include "expsum/modarith.hpp"

namespace expsum {

struct kloosterman_params {
    i64 m = 0;
    i64 n = 0;
    i64 c = 1;  // c >= 1
};

struct gauss_params {
    i64 s = 1;
    i64 t = 0;
    i64 q = 1;  // q >= 1
};

struct sq_params {
    i64 q = 1;  // q >= 1
    ivec4 c{};  // integer 4-vector
    i64 N = 4;  // N == 0 mod 4, N = 4 N'
};

// Table of e_q(j) = exp(2 pi i j / q) for j in [0, q).
class root_table {
  public:
    explicit root_table(i64 q) : q_(q), roots_(static_cast<std::size_t>(q)) {
        check_modulus(q);
        for (i64 j = 0; j < q; ++j)
            roots_[static_cast<std::size_t>(j)] = unit_phase(static_cast<double>(j) / static_cast<double>(q));
    }
    i64 modulus() const { return q_; }
    const cplx& operator[](i64 idx) const { return roots_[static_cast<std::size_t>(idx)]; }

  private:
    i64 q_;
    std::vector<cplx> roots_;
};

// ---------------------------------------------------------------------------
// Kloosterman sums
// ---------------------------------------------------------------------------

// Evaluator for S(m,n;c) at fixed c: the unit/inverse pairs and the root
// table are built once (inverses by extended gcd), so sweeps over many
// (m,n) at the same modulus pay the O(c log c) setup a single time.
class kloosterman_evaluator {
  public:
    explicit kloosterman_evaluator(i64 c) : c_(c), roots_(c) {
        if (c < 1) throw std::invalid_argument("kloosterman: c must be >= 1");
        if (c == 1) {
            units_.emplace_back(0, 0);  // the single residue x = 0, gcd(0,1) = 1
            return;
        }
        for (i64 x = 1; x < c; ++x) {
            i64 inv;
            if (ext_gcd_inv(x, c, inv) != 1) continue;
            units_.emplace_back(x, mod_reduce(inv, c));
        }
    }

    cplx operator()(i64 m, i64 n) const {
        if (c_ == 1) return {1.0, 0.0};
        m = mod_reduce(m, c_);
        n = mod_reduce(n, c_);
        kahan_csum acc;
        for (const auto& [x, xb] : units_) {
            const i64 idx = static_cast<i64>((static_cast<i128>(m) * x + static_cast<i128>(n) * xb) % c_);
            acc.add(roots_[idx]);
        }
        return acc.value();
    }

    i64 modulus() const { return c_; }

  private:
    i64 c_;
    root_table roots_;
    std::vector<std::pair<i64, i64>> units_;
};

// S(m,n;c) by direct summation over units mod c.  The sum over the single
// residue x = 0 mod 1 gives S(m,n;1) = 1.
inline cplx kloosterman(const kloosterman_params& p) {
    return kloosterman_evaluator(p.c)(p.m, p.n);
}

// S(m,n;c) via twisted multiplicativity over a caller-supplied factorization
// of c: for coprime u, v,
//
//   S(m,n;uv) = S(m vbar, n vbar; u) * S(m ubar, n ubar; v),
//
// with vbar v == 1 (mod u) and ubar u == 1 (mod v).  Prime-power parts are
// evaluated by the brute-force sum.
inline cplx kloosterman_fast(const kloosterman_params& p, const std::vector<std::pair<i64, i64>>& factorization) {
    if (p.c < 1) throw std::invalid_argument("kloosterman_fast: c must be >= 1");
    std::vector<i64> parts;
    i128 prod = 1;
    for (const auto& [prime, exponent] : factorization) {
        if (prime < 2 || exponent < 1) throw std::invalid_argument("kloosterman_fast: bad factorization entry");
        i64 pe = 1;
        for (i64 k = 0; k < exponent; ++k) pe *= prime;
        for (i64 other : parts)
            if (std::gcd(other, pe) != 1) throw std::invalid_argument("kloosterman_fast: repeated prime");
        parts.push_back(pe);
        prod *= pe;
    }
    if (prod != p.c) throw std::invalid_argument("kloosterman_fast: factorization does not multiply to c");
    if (parts.empty()) return {1.0, 0.0};  // c = 1

    cplx result{1.0, 0.0};
    i64 m = p.m, n = p.n, rest = p.c;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const i64 u = parts[i];
        rest /= u;
        if (rest == 1) {
            result *= kloosterman({m, n, u});
            break;
        }
        const i64 vbar = *mod_inv(rest % u, u);
        const i64 ubar = *mod_inv(u % rest, rest);
        result *= kloosterman({mulmod(mod_reduce(m, u), vbar, u), mulmod(mod_reduce(n, u), vbar, u), u});
        m = mulmod(mod_reduce(m, rest), ubar, rest);
        n = mulmod(mod_reduce(n, rest), ubar, rest);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Quadratic Gauss sums
// ---------------------------------------------------------------------------

// G(s,t;q) = sum_{b mod q} e_q(s b^2 + t b), evaluated term by term.  An
// existing root table for modulus q may be supplied to amortize its setup
// across a sweep.
inline cplx gauss_bruteforce(const gauss_params& p, const root_table* shared = nullptr) {
    if (p.q < 1) throw std::invalid_argument("gauss_bruteforce: q must be >= 1");
    check_modulus(p.q);
    const i64 q = p.q;
    if (shared && shared->modulus() != q) throw std::invalid_argument("gauss_bruteforce: table modulus mismatch");
    const i64 s = mod_reduce(p.s, q);
    const i64 t = mod_reduce(p.t, q);
    const root_table own(shared ? 1 : q);
    const root_table& e = shared ? *shared : own;
    kahan_csum acc;
    // phase(b) = s b^2 + t b; second difference is 2s
    i64 idx = 0;
    i64 d = (s + t) % q;
    const i64 dd = (2 * s) % q;
    for (i64 b = 0; b < q; ++b) {
        acc.add(e[idx]);
        idx += d;
        if (idx >= q) idx -= q;
        d += dd;
        if (d >= q) d -= q;
    }
    return acc.value();
}

// Closed form of G(s,t;q) for gcd(s,q) = 1, split by q mod 4:
//
//   q odd:            eps_q sqrt(q) (s/q) e(-inv(4s) t^2 / q)
//   q = 2v, v odd:    2 delta_t eps_v sqrt(v) (2s/v) e(-inv(8s) t^2 / v)
//   4 | q:            (1+i) eps_s^{-1} (1-delta_t) sqrt(q) (q/s) e(-inv(s) t^2 / 4q)
//
// with inverses taken modulo the denominator of the phase.
inline cplx gauss_closed(const gauss_params& p) {
    if (p.q < 1) throw std::invalid_argument("gauss_closed: q must be >= 1");
    check_modulus(p.q);
    const i64 q = p.q;
    const i64 s = mod_reduce(p.s, q);
    if (q > 1 && std::gcd(s, q) != 1) throw std::invalid_argument("gauss_closed: requires gcd(s,q) = 1");
    if (q == 1) return {1.0, 0.0};

    if (q % 2 == 1) {
        const i64 inv4s = *mod_inv(4 * s % q, q);
        const i64 t2 = mulmod(mod_reduce(p.t, q), mod_reduce(p.t, q), q);
        const i64 num = mulmod(inv4s, t2, q);
        return epsilon_factor(q) * std::sqrt(static_cast<double>(q)) *
               static_cast<double>(jacobi_symbol(s, q)) * unit_phase(-static_cast<double>(num) / static_cast<double>(q));
    }
    if (q % 4 == 2) {
        const i64 v = q / 2;
        if (parity_delta(p.t) == 0) return {0.0, 0.0};
        const i64 inv8s = *mod_inv(mod_reduce(8 * s, v), v);
        const i64 t2 = mulmod(mod_reduce(p.t, v), mod_reduce(p.t, v), v);
        const i64 num = mulmod(inv8s, t2, v);
        return 2.0 * epsilon_factor(v) * std::sqrt(static_cast<double>(v)) *
               static_cast<double>(jacobi_symbol(2 * s, v)) *
               unit_phase(-static_cast<double>(num) / static_cast<double>(v));
    }
    // 4 | q; s is odd here
    if (parity_delta(p.t) == 1) return {0.0, 0.0};
    const i64 q4 = 4 * q;
    const i64 invs = *mod_inv(s, q4);
    const i64 t2 = mulmod(mod_reduce(p.t, q4), mod_reduce(p.t, q4), q4);
    const i64 num = mulmod(invs, t2, q4);
    const cplx eps_s_inv = std::conj(epsilon_factor(s));  // |eps_s| = 1
    return cplx{1.0, 1.0} * eps_s_inv * std::sqrt(static_cast<double>(q)) *
           static_cast<double>(jacobi_symbol(q, s)) * unit_phase(-static_cast<double>(num) / static_cast<double>(q4));
}

// ---------------------------------------------------------------------------
// The circle-method sum S_q(c)
// ---------------------------------------------------------------------------

// Literal double sum over a in (Z/q)^* and b in (Z/q)^4; O(q^5) time, meant
// as the oracle for sq_reduced at small q.  q above the guard is rejected.
inline cplx sq_bruteforce(const sq_params& p, i64 q_limit = 60) {
    if (p.q < 1) throw std::invalid_argument("sq_bruteforce: q must be >= 1");
    if (p.N % 4 != 0 || p.N <= 0) throw std::invalid_argument("sq_bruteforce: N must be a positive multiple of 4");
    if (p.q > q_limit) throw std::invalid_argument("sq_bruteforce: q exceeds the O(q^5) guard");
    const i64 q = p.q;
    if (q == 1) return {1.0, 0.0};
    const root_table e(q);
    ivec4 c{};
    for (int i = 0; i < 4; ++i) c[i] = mod_reduce(p.c[i], q);
    const i64 Nq = mod_reduce(p.N, q);
    const i64 two = 2 % q;

    kahan_csum acc;
    for (i64 a = 1; a < q; ++a) {
        if (std::gcd(a, q) != 1) continue;
        const i64 base = mod_reduce(-a * Nq, q);
        const i64 dd = mulmod(two, a, q);
        // phi_i(b) = a b^2 + c_i b accumulated with second differences
        i64 p1 = base, d1 = (a + c[0]) % q;
        for (i64 b1 = 0; b1 < q; ++b1) {
            i64 p2 = p1, d2 = (a + c[1]) % q;
            for (i64 b2 = 0; b2 < q; ++b2) {
                i64 p3 = p2, d3 = (a + c[2]) % q;
                for (i64 b3 = 0; b3 < q; ++b3) {
                    i64 idx = p3, d4 = (a + c[3]) % q;
                    for (i64 b4 = 0; b4 < q; ++b4) {
                        acc.add(e[idx]);
                        idx += d4;
                        if (idx >= q) idx -= q;
                        d4 += dd;
                        if (d4 >= q) d4 -= q;
                    }
                    p3 += d3;
                    if (p3 >= q) p3 -= q;
                    d3 += dd;
                    if (d3 >= q) d3 -= q;
                }
                p2 += d2;
                if (p2 >= q) p2 -= q;
                d2 += dd;
                if (d2 >= q) d2 -= q;
            }
            p1 += d1;
            if (p1 >= q) p1 -= q;
            d1 += dd;
            if (d1 >= q) d1 -= q;
        }
    }
    return acc.value();
}

// Closed form of S_q(c) via the Gauss-sum evaluation, dispatching on q mod 4:
//
//   q odd:        q^2 S(N', F(c); q)
//   q == 2 mod 4: 4 delta(c1 c2 c3 c4) q^2 S(2N', F(c)/2; q)
//   q == 0 mod 4: 0 when some c_i is odd, else -4 q^2 S(N, F(c'); q), c = 2c'
//
// where N = 4N' and F(c) = c1^2 + ... + c4^2.
inline cplx sq_reduced(const sq_params& p) {
    if (p.q < 1) throw std::invalid_argument("sq_reduced: q must be >= 1");
    if (p.N % 4 != 0 || p.N <= 0) throw std::invalid_argument("sq_reduced: N must be a positive multiple of 4");
    const i64 q = p.q;
    const i64 Nprime = p.N / 4;
    i64 fc = 0;
    for (int i = 0; i < 4; ++i) fc += p.c[i] * p.c[i];
    const double q2 = static_cast<double>(q) * static_cast<double>(q);

    if (q % 2 == 1) return q2 * kloosterman({Nprime, fc, q});

    if (q % 4 == 2) {
        for (int i = 0; i < 4; ++i)
            if (p.c[i] % 2 == 0) return {0.0, 0.0};
        // all c_i odd forces 4 | F(c)
        return 4.0 * q2 * kloosterman({2 * Nprime, fc / 2, q});
    }

    for (int i = 0; i < 4; ++i)
        if (p.c[i] % 2 != 0) return {0.0, 0.0};
    i64 fc_half = 0;
    for (int i = 0; i < 4; ++i) fc_half += (p.c[i] / 2) * (p.c[i] / 2);
    return -4.0 * q2 * kloosterman({p.N, fc_half, q});
}

// Trial-division factorization helper for the fast Kloosterman path.
inline std::vector<std::pair<i64, i64>> factorize(i64 n) {
    if (n < 1) throw std::invalid_argument("factorize: n must be >= 1");
    std::vector<std::pair<i64, i64>> out;
    for (i64 p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            i64 e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            out.emplace_back(p, e);
        }
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

}  // namespace expsum
