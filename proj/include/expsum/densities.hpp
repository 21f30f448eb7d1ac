// densities.hpp
//
// Local data for F(x) = x1^2+...+x4^2 = N:
//
//   * the smooth cap weights: the normalized bump w0, the cap weight
//     w(x) = w0(||x - xi||/eps) w0(2 xi.(x - xi)/eps^2), and the
//     three-variable weight psi_y obtained after solving the sphere
//     constraint for the normal coordinate;
//   * the archimedean density sigma_infinity = int_{R^3} psi_0, by nested
//     trapezoid quadrature with Richardson refinement;
//   * the non-archimedean densities
//       sigma_p = lim_k p^{-3k} #{x in (Z/p^k)^4 : F(x) == N mod p^k},
//     computed by counting mod p and lifting: nonsingular solutions lift at
//     the exact rate p^3 per level, singular ones descend to a scaled copy
//     of the same problem at N/p^2.  Normalized counts are held as exact
//     rationals and stabilization means two consecutive levels are equal
//     as rationals, not merely close;
//   * the truncated singular series prod_{p <= P} sigma_p with a reported
//     tail bound.

#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "expsum/common.hpp"
#include "expsum/modarith.hpp"

namespace expsum {

// identifier recorded in every output manifest; downstream constants
// (sigma_infinity, main terms) depend on this choice of bump
inline constexpr const char* kW0Identifier = "bump:c*exp(-1/(1-t^2)) on [-1,1], unit mass";

// 1 / int_{-1}^{1} exp(-1/(1-t^2)) dt, so that w0 has unit mass
// (verified against independent quadrature in the tests)
inline constexpr double kW0Norm = 2.2522836210435810105;

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

inline double w0_eval(double t) {
    const double t2 = t * t;
    if (t2 >= 1.0) return 0.0;
    return kW0Norm * std::exp(-1.0 / (1.0 - t2));
}

// w(x) = w0(||x - xi|| / eps) * w0(2 xi.(x - xi) / eps^2)
inline double weight_w(const vec4& x, const vec4& xi, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("weight_w: eps must be positive");
    vec4 d{};
    for (int i = 0; i < 4; ++i) d[i] = x[i] - xi[i];
    const double first = w0_eval(norm(d) / eps);
    if (first == 0.0) return 0.0;
    return first * w0_eval(2.0 * dot(xi, d) / (eps * eps));
}

// psi_y(x) for x in R^3: both factors of the cap weight expressed through
// u4 = (-1 + sqrt(1 + eps^2 (y - ||x||^2))) / eps.  Returns 0 where the
// square root would be imaginary; the supports of the factors never reach
// that region.
inline double psi_y(const vec3& x, double y, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("psi_y: eps must be positive");
    const double x2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    const double s = 1.0 + eps * eps * (y - x2);
    if (s < 0.0) return 0.0;
    const double rs = std::sqrt(s);
    const double first = w0_eval(2.0 / (eps * eps) * (rs - 1.0));
    if (first == 0.0) return 0.0;
    const double dev = (1.0 - rs) / eps;
    return first * w0_eval(std::sqrt(x2 + dev * dev));
}

// ---------------------------------------------------------------------------
// sigma_infinity = int_{[-1,1]^3} psi_0
// ---------------------------------------------------------------------------

namespace detail {

inline double trapezoid_psi0(double eps, i64 m, int threads) {
    const double h = 2.0 / static_cast<double>(m);
    auto slice = [&](std::size_t i) {
        const double x0 = -1.0 + h * static_cast<double>(i);
        const double w0x = (i == 0 || i == static_cast<std::size_t>(m)) ? 0.5 : 1.0;
        kahan_sum s;
        for (i64 j = 0; j <= m; ++j) {
            const double x1 = -1.0 + h * static_cast<double>(j);
            const double w1 = (j == 0 || j == m) ? 0.5 : 1.0;
            for (i64 k = 0; k <= m; ++k) {
                const double x2 = -1.0 + h * static_cast<double>(k);
                const double w2 = (k == 0 || k == m) ? 0.5 : 1.0;
                const double v = psi_y({x0, x1, x2}, 0.0, eps);
                if (v != 0.0) s.add(w0x * w1 * w2 * v);
            }
        }
        return s.value();
    };
    auto parts = parallel_map<double>(static_cast<std::size_t>(m) + 1, threads, slice);
    kahan_sum total;
    for (double part : parts) total.add(part);
    return total.value() * h * h * h;
}

}  // namespace detail

// Adaptive nested trapezoid with one Richardson extrapolation per level;
// converges when successive extrapolants agree to relative quad_tol.
inline double sigma_infinity(double eps, double quad_tol, int threads = 0, i64 m_start = 8, i64 m_max = 512) {
    if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("sigma_infinity: need 0 < eps <= 1");
    if (quad_tol <= 0.0) throw std::invalid_argument("sigma_infinity: quad_tol must be positive");
    const int workers = resolve_threads(threads);
    double t_prev = detail::trapezoid_psi0(eps, m_start, workers);
    double r_prev = 0.0;
    bool have_r = false;
    for (i64 m = 2 * m_start; m <= m_max; m *= 2) {
        const double t_cur = detail::trapezoid_psi0(eps, m, workers);
        const double r_cur = (4.0 * t_cur - t_prev) / 3.0;
        if (have_r && std::abs(r_cur - r_prev) <= quad_tol * std::abs(r_cur)) return r_cur;
        r_prev = r_cur;
        have_r = true;
        t_prev = t_cur;
    }
    throw non_convergence("sigma_infinity: refinement budget exhausted");
}

// ---------------------------------------------------------------------------
// Exact rationals for normalized counts
// ---------------------------------------------------------------------------

namespace detail {

inline i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        const i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

struct fraction {
    i128 num = 0;
    i128 den = 1;

    void reduce() {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const i128 g = gcd128(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }
    friend fraction operator+(fraction a, fraction b) {
        fraction r{a.num * b.den + b.num * a.den, a.den * b.den};
        r.reduce();
        return r;
    }
    friend fraction operator*(fraction a, fraction b) {
        fraction r{a.num * b.num, a.den * b.den};
        r.reduce();
        return r;
    }
    bool operator==(const fraction& o) const { return num * o.den == o.num * den; }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// #squares hitting each residue: r1[a] = #{t mod m : t^2 == a}
inline std::vector<i64> square_histogram(i64 m) {
    std::vector<i64> r1(static_cast<std::size_t>(m), 0);
    for (i64 t = 0; t < m; ++t) r1[static_cast<std::size_t>(mulmod(t, t, m))] += 1;
    return r1;
}

// honest O(p^2) pair-count by convolution of the squares histogram
inline std::vector<i64> two_square_counts_conv(i64 m) {
    const auto r1 = square_histogram(m);
    std::vector<i64> r2(static_cast<std::size_t>(m), 0);
    for (i64 a = 0; a < m; ++a) {
        if (!r1[static_cast<std::size_t>(a)]) continue;
        for (i64 b = 0; b < m; ++b)
            r2[static_cast<std::size_t>((a + b) % m)] += r1[static_cast<std::size_t>(a)] * r1[static_cast<std::size_t>(b)];
    }
    return r2;
}

// For odd prime p the pair count has a two-value shape:
//   #{(s,t): s^2+t^2 == a mod p} = p - chi(-1) + [a == 0] chi(-1) p.
// Used above the threshold where the O(p^2) convolution gets expensive;
// tested against the convolution on a band of primes.
inline constexpr i64 kConvCountThreshold = 256;

inline std::vector<i64> two_square_counts(i64 p) {
    if (p <= kConvCountThreshold) return two_square_counts_conv(p);
    const i64 chi = (p % 4 == 1) ? 1 : -1;
    std::vector<i64> r2(static_cast<std::size_t>(p), p - chi);
    r2[0] += chi * p;
    return r2;
}

// #{x in (Z/m)^4 : F(x) == M}, via the pair counts
inline i64 count_four_squares(i64 m, i64 M, bool prime_fast = false) {
    const i64 Mm = mod_reduce(M, m);
    const auto r2 = prime_fast ? two_square_counts(m) : two_square_counts_conv(m);
    i64 cnt = 0;
    for (i64 s = 0; s < m; ++s) cnt += r2[static_cast<std::size_t>(s)] * r2[static_cast<std::size_t>(mod_reduce(Mm - s, m))];
    return cnt;
}

// primitive (not all coordinates even) count mod 2^k, literal loop, k <= 3
inline i64 count_primitive_mod_2k(i64 k, i64 M) {
    const i64 m = i64(1) << k;
    const i64 Mm = mod_reduce(M, m);
    i64 cnt = 0;
    for (i64 a = 0; a < m; ++a)
        for (i64 b = 0; b < m; ++b)
            for (i64 c = 0; c < m; ++c)
                for (i64 d = 0; d < m; ++d) {
                    if (((a | b | c | d) & 1) == 0) continue;
                    if ((a * a + b * b + c * c + d * d) % m == Mm) ++cnt;
                }
    return cnt;
}

// Normalized count sigma^(k)(M) = p^{-3k} #{x mod p^k : F(x) == M}, exact.
//
// Odd p: every primitive solution mod p is nonsingular and lifts at rate
// p^3, so
//   sigma^(k)(M) = Cprim(1,M)/p^3 + [p^2 | M] p^{-2} sigma^(k-2)(M/p^2),
// with sigma^(0) = 1 and sigma^(1) = C(1,M)/p^3.
//
// p = 2: primitive solutions lift at rate 8 only from level 3 on (the
// gradient 2x has 2-adic valuation 1), so levels k <= 2 are counted
// directly and Cprim(k) = 8^{k-3} Cprim(3, M mod 8) for k >= 3.
inline fraction sigma_level(i64 p, i64 k, i64 M) {
    if (k == 0) return {1, 1};
    const i128 p3 = static_cast<i128>(p) * p * p;
    if (p == 2) {
        if (k <= 2) {
            const i64 m = i64(1) << k;
            fraction f{count_four_squares(m, M), 1};
            for (i64 i = 0; i < k; ++i) f.den *= 8;
            f.reduce();
            return f;
        }
        fraction prim{count_primitive_mod_2k(3, M), 512};
        prim.reduce();
        if (M % 4 == 0) {
            fraction rest = sigma_level(2, k - 2, M / 4);
            rest.den *= 4;
            rest.reduce();
            return prim + rest;
        }
        return prim;
    }
    const i64 c1 = count_four_squares(p, M, /*prime_fast=*/true);
    if (k == 1) {
        fraction f{c1, p3};
        f.reduce();
        return f;
    }
    const i64 cprim = c1 - (M % p == 0 ? 1 : 0);
    fraction prim{cprim, p3};
    prim.reduce();
    if (M % (p * p) == 0) {
        fraction rest = sigma_level(p, k - 2, M / (p * p));
        rest.den *= static_cast<i128>(p) * p;
        rest.reduce();
        return prim + rest;
    }
    return prim;
}

inline bool is_prime(i64 n) {
    if (n < 2) return false;
    for (i64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// sigma_p and the singular series
// ---------------------------------------------------------------------------

struct density_report {
    i64 p = 0;
    i64 k_star = 0;  // first level whose normalized count equals the next one
    double value = 0.0;
};

inline density_report sigma_p(i64 p, i64 N, i64 k_max) {
    if (!detail::is_prime(p)) throw std::invalid_argument("sigma_p: p must be prime");
    if (N < 1) throw std::invalid_argument("sigma_p: N must be >= 1");
    if (k_max < 2) throw std::invalid_argument("sigma_p: k_max must be >= 2");
    detail::fraction prev = detail::sigma_level(p, 1, N);
    for (i64 k = 1; k < k_max; ++k) {
        const detail::fraction next = detail::sigma_level(p, k + 1, N);
        if (next == prev) return {p, k, prev.to_double()};
        prev = next;
    }
    throw not_stabilized("sigma_p: no stabilization up to k_max=" + std::to_string(k_max) +
                         " for p=" + std::to_string(p) + ", N=" + std::to_string(N));
}

struct singular_series_result {
    double value = 0.0;
    i64 prime_cutoff = 0;
    double tail_bound = 0.0;
    std::vector<density_report> factors;
};

// explicit constant in the reported tail bound C * P^{-1/2 + delta'}
inline constexpr double kTailConstant = 4.0;

// prod_{p <= P} sigma_p, the primes evaluated concurrently and the product
// folded in ascending prime order.  delta_prime is the small exponent in
// the reported tail bound; stabilization failures propagate.
inline singular_series_result singular_series(i64 N, i64 prime_cutoff, double delta_prime = 0.05, i64 k_max = 24,
                                              int threads = 0) {
    if (prime_cutoff < 3) throw std::invalid_argument("singular_series: prime cutoff must be >= 3");
    std::vector<i64> primes;
    for (i64 p = 2; p <= prime_cutoff; ++p)
        if (detail::is_prime(p)) primes.push_back(p);

    singular_series_result out;
    out.prime_cutoff = prime_cutoff;
    out.factors = parallel_map<density_report>(primes.size(), resolve_threads(threads),
                                               [&](std::size_t i) { return sigma_p(primes[i], N, k_max); });
    double prod = 1.0;
    for (const auto& rep : out.factors) prod *= rep.value;
    out.value = prod;
    out.tail_bound = kTailConstant * std::abs(prod) * std::pow(static_cast<double>(prime_cutoff), -0.5 + delta_prime);
    return out;
}

}  // namespace expsum
