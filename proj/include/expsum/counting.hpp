// counting.hpp
//
// Direct evaluation of the weighted cap count
//
//   Sigma(w) = sum_{x in Z^4, F(x) = N} w(x / sqrt(N)),   N = 4 r^2,
//
// by enumerating x1,x2,x3 in the box ||x - sqrt(N) xi||_inf <= eps sqrt(N)
// (the support of the first weight factor) and solving for x4 with a
// perfect-square test; the second weight factor acts as a filter.  The
// weighted count is compared against the main term
//
//   eps^3 N sigma_infinity S / 2
//
// together with the unit-constant error budget
// eps^4 N + eps^{5/2} N^{3/4} + eps N^{1/2} (a diagnostic, not a bound).

#pragma once

#include <vector>

#include "expsum/common.hpp"
#include "expsum/densities.hpp"
#include "expsum/sphere.hpp"

namespace expsum {

struct sigma_w_query {
    i64 r = 1;    // N = 4 r^2
    vec4 xi{};    // unit direction
    double eps = 1.0;
    int two_adic_valuation = 0;  // v_2(r), recorded because the density
                                 // bounds assume it stays bounded

    i64 N() const { return 4 * r * r; }
};

inline sigma_w_query make_sigma_w_query(i64 r, const vec4& xi, double eps) {
    if (r < 1) throw std::invalid_argument("sigma_w: r must be >= 1");
    if (!is_unit(xi)) throw std::invalid_argument("sigma_w: xi must be a unit vector (tolerance 1e-9)");
    if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("sigma_w: need 0 < eps <= 1");
    const double Q = eps * 2.0 * static_cast<double>(r);
    if (Q < 1.0) throw std::invalid_argument("sigma_w: need eps * sqrt(N) >= 1");
    return {r, xi, eps, two_adic_valuation(r)};
}

// Exact finite sum over the cap.  Candidate triples are sharded by x1
// slice and nonzero weights are folded in lexicographic point order, so
// the floating result is bit-identical for any thread count (and to a
// full-sphere pass that visits points in the same order).
inline double sigma_w(const sigma_w_query& q, int threads = 0, i64 box_guard = 400000000) {
    const i64 N = q.N();
    const double rootN = 2.0 * static_cast<double>(q.r);
    const double Q = q.eps * rootN;

    std::array<i64, 4> lo{}, hi{};
    for (int i = 0; i < 4; ++i) {
        lo[i] = static_cast<i64>(std::ceil(rootN * q.xi[i] - Q));
        hi[i] = static_cast<i64>(std::floor(rootN * q.xi[i] + Q));
    }
    i64 triples = 1;
    for (int i = 0; i < 3; ++i) {
        const i64 span = std::max<i64>(0, hi[i] - lo[i] + 1);
        if (span > 0 && triples > box_guard / span) throw resource_limit("sigma_w: enumeration box too large");
        triples *= span;
    }

    auto slice = [&](std::size_t si) {
        const i64 x1 = lo[0] + static_cast<i64>(si);
        std::vector<double> weights;
        const i64 r1 = N - x1 * x1;
        if (r1 < 0) return weights;
        for (i64 x2 = lo[1]; x2 <= hi[1]; ++x2) {
            const i64 r2 = r1 - x2 * x2;
            if (r2 < 0) continue;
            for (i64 x3 = lo[2]; x3 <= hi[2]; ++x3) {
                const i64 r3 = r2 - x3 * x3;
                if (r3 < 0) continue;
                const i64 t = isqrt64(r3);
                if (t * t != r3) continue;
                const i64 cands[2] = {-t, t};
                const int ncand = (t == 0) ? 1 : 2;  // emit x4 in ascending order
                for (int ci = 0; ci < ncand; ++ci) {
                    const i64 x4 = cands[ci];
                    if (x4 < lo[3] || x4 > hi[3]) continue;
                    const vec4 scaled{static_cast<double>(x1) / rootN, static_cast<double>(x2) / rootN,
                                      static_cast<double>(x3) / rootN, static_cast<double>(x4) / rootN};
                    const double w = weight_w(scaled, q.xi, q.eps);
                    if (w != 0.0) weights.push_back(w);
                }
            }
        }
        return weights;
    };

    const std::size_t slices = static_cast<std::size_t>(std::max<i64>(0, hi[0] - lo[0] + 1));
    auto parts = parallel_map<std::vector<double>>(slices, resolve_threads(threads), slice);
    kahan_sum acc;
    for (const auto& part : parts)
        for (double w : part) acc.add(w);
    return acc.value();
}

// main term of the asymptotic: eps^3 N sigma_infinity S / 2
inline double main_term(const sigma_w_query& q, double singular_series_value, double s_inf) {
    const double N = static_cast<double>(q.N());
    return 0.5 * q.eps * q.eps * q.eps * N * s_inf * singular_series_value;
}

struct main_term_comparison {
    double sigma_w = 0.0;
    double main_term = 0.0;
    double ratio = 0.0;
    double error_budget = 0.0;  // eps^4 N + eps^{5/2} N^{3/4} + eps N^{1/2}, unit constants
    double budget_ratio = 0.0;  // error_budget / (eps^3 N): the unit-constant normalization
};

inline main_term_comparison compare(const sigma_w_query& q, const singular_series_result& densities, double s_inf,
                                    int threads = 0) {
    const double N = static_cast<double>(q.N());
    const double eps = q.eps;
    main_term_comparison out;
    out.sigma_w = sigma_w(q, threads);
    out.main_term = main_term(q, densities.value, s_inf);
    out.ratio = out.sigma_w / out.main_term;
    out.error_budget = std::pow(eps, 4.0) * N + std::pow(eps, 2.5) * std::pow(N, 0.75) + eps * std::sqrt(N);
    out.budget_ratio = out.error_budget / (eps * eps * eps * N);
    return out;
}

}  // namespace expsum
