// linnik.hpp
//
// Partial sums of normalized Kloosterman sums over a residue class with an
// exponential twist,
//
//   L(X) = sum_{c == a mod k, c <= X} S(m,n;c)/c * e(2 sqrt(mn) alpha / c),
//
// together with checkpointed traces and a least-squares growth-exponent
// fit of log|L(X)| against log X.  A fitted slope near 0 is the X^eps
// regime; slope 1/2 is what the termwise Weil bound allows.
//
// Only mn > 0 is supported: the application always has m n > 0 and the
// branch of sqrt(mn) for mn < 0 is not pinned down, so those queries are
// rejected rather than guessed at.

#pragma once

#include <ostream>
#include <vector>

#include "expsum/expsums.hpp"

namespace expsum {

struct linnik_query {
    i64 m = 1;        // nonzero, m*n > 0
    i64 n = 1;
    i64 k = 1;        // residue modulus, k >= 1
    i64 a = 0;        // residue class, 0 <= a < k
    double alpha = 0.0;
    double bound_B = 1.0;  // |alpha| <= B, B >= 1
    i64 X = 1;        // summation limit, X >= 1
};

struct sum_checkpoint {
    i64 x = 0;
    cplx value{};
    double weil_envelope = 0.0;  // sum_{c <= x} tau(c) sqrt(gcd(m,n,c)) / sqrt(c) over the class
};

struct partial_sum_trace {
    std::vector<sum_checkpoint> checkpoints;
    bool selberg_range = false;  // sqrt(|mn|) > X
};

struct growth_fit {
    double slope = 0.0;
    std::size_t used = 0;
    std::size_t dropped = 0;  // checkpoints with |L| < 1e-12
};

inline constexpr i64 kLinnikRangeCeiling = 5000000;  // sieve + value storage guard

inline void validate(const linnik_query& q) {
    if (q.m == 0 || q.n == 0 || static_cast<double>(q.m) * static_cast<double>(q.n) <= 0.0)
        throw std::invalid_argument("linnik: m*n must be positive (mn < 0 is out of scope)");
    if (q.k < 1) throw std::invalid_argument("linnik: k must be >= 1");
    if (q.a < 0 || q.a >= q.k) throw std::invalid_argument("linnik: need 0 <= a < k");
    if (q.X < 1) throw std::invalid_argument("linnik: X must be >= 1");
    if (q.X > kLinnikRangeCeiling) throw resource_limit("linnik: X exceeds the configured ceiling");
    if (q.bound_B < 1.0) throw std::invalid_argument("linnik: B must be >= 1");
    if (std::abs(q.alpha) > q.bound_B) throw std::invalid_argument("linnik: |alpha| must be <= B");
}

namespace detail {

// Kloosterman values S(m,n;c) for every c in the class, evaluated in
// parallel but consumed strictly in ascending c, so the reduction order
// (and hence the output bits) does not depend on scheduling.
inline std::vector<std::pair<i64, double>> class_kloosterman_values(const linnik_query& q, int threads) {
    std::vector<i64> cs;
    for (i64 c = (q.a == 0 ? q.k : q.a); c <= q.X; c += q.k) cs.push_back(c);
    // smallest-prime-factor sieve feeds the factored fast path
    std::vector<i64> spf(static_cast<std::size_t>(q.X) + 1, 0);
    for (i64 i = 2; i <= q.X; ++i)
        if (spf[i] == 0)
            for (i64 j = i; j <= q.X; j += i)
                if (spf[j] == 0) spf[j] = i;
    auto values = parallel_map<double>(cs.size(), resolve_threads(threads), [&](std::size_t i) {
        i64 c = cs[i];
        std::vector<std::pair<i64, i64>> fact;
        i64 rest = c;
        while (rest > 1) {
            const i64 p = spf[rest];
            i64 e = 0;
            while (rest % p == 0) {
                rest /= p;
                ++e;
            }
            fact.emplace_back(p, e);
        }
        return kloosterman_fast({q.m, q.n, c}, fact).real();
    });
    std::vector<std::pair<i64, double>> out(cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i) out[i] = {cs[i], values[i]};
    return out;
}

}  // namespace detail

// The full partial sum L(X).
inline cplx twisted_linnik_sum(const linnik_query& q, int threads = 0) {
    validate(q);
    const double root_mn = std::sqrt(static_cast<double>(q.m) * static_cast<double>(q.n));
    kahan_csum acc;
    for (const auto& [c, s] : detail::class_kloosterman_values(q, threads))
        acc.add(s / static_cast<double>(c) * unit_phase(2.0 * root_mn * q.alpha / static_cast<double>(c)));
    return acc.value();
}

// Running partial sums at logarithmically spaced checkpoints
// X_i = round(X^{i/K}), deduplicated so checkpoints are strictly increasing.
inline partial_sum_trace linnik_trace(const linnik_query& q, int num_checkpoints, int threads = 0) {
    validate(q);
    if (num_checkpoints < 2) throw std::invalid_argument("linnik_trace: need at least 2 checkpoints");
    std::vector<i64> marks;
    for (int i = 1; i <= num_checkpoints; ++i) {
        const double t = std::pow(static_cast<double>(q.X),
                                  static_cast<double>(i) / static_cast<double>(num_checkpoints));
        const i64 x = std::max<i64>(1, static_cast<i64>(std::llround(t)));
        if (marks.empty() || x > marks.back()) marks.push_back(x);
    }
    marks.back() = q.X;

    partial_sum_trace trace;
    trace.selberg_range = std::sqrt(std::abs(static_cast<double>(q.m) * static_cast<double>(q.n))) >
                          static_cast<double>(q.X);
    const double root_mn = std::sqrt(static_cast<double>(q.m) * static_cast<double>(q.n));
    const i64 g_mn = std::gcd(std::abs(q.m), std::abs(q.n));

    kahan_csum acc;
    kahan_sum envelope;
    std::size_t mark_idx = 0;
    const auto values = detail::class_kloosterman_values(q, threads);
    std::size_t vi = 0;
    for (i64 x = 1; x <= q.X && mark_idx < marks.size(); ++x) {
        if (vi < values.size() && values[vi].first == x) {
            acc.add(values[vi].second / static_cast<double>(x) *
                    unit_phase(2.0 * root_mn * q.alpha / static_cast<double>(x)));
            envelope.add(static_cast<double>(divisor_tau(x)) *
                         std::sqrt(static_cast<double>(std::gcd(g_mn, x))) / std::sqrt(static_cast<double>(x)));
            ++vi;
        }
        if (x == marks[mark_idx]) {
            trace.checkpoints.push_back({x, acc.value(), envelope.value()});
            ++mark_idx;
        }
    }
    return trace;
}

// Least-squares slope of log|L(X_i)| vs log X_i over the trace tail.
inline growth_fit growth_exponent(const partial_sum_trace& trace, double tail_fraction) {
    if (tail_fraction <= 0.0 || tail_fraction > 1.0)
        throw std::invalid_argument("growth_exponent: tail_fraction must be in (0, 1]");
    const std::size_t total = trace.checkpoints.size();
    const std::size_t take = std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(tail_fraction * total)));
    const std::size_t start = take >= total ? 0 : total - take;

    growth_fit fit;
    std::vector<double> lx, ly;
    for (std::size_t i = start; i < total; ++i) {
        const auto& cp = trace.checkpoints[i];
        const double mag = std::abs(cp.value);
        if (mag < 1e-12) {
            ++fit.dropped;
            continue;
        }
        lx.push_back(std::log(static_cast<double>(cp.x)));
        ly.push_back(std::log(mag));
    }
    fit.used = lx.size();
    if (fit.used < 3) throw insufficient_data("growth_exponent: fewer than 3 usable checkpoints in the tail");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double nn = static_cast<double>(lx.size());
    fit.slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    return fit;
}

// CSV schema: X,re,im,abs,weil_envelope
inline void write_trace_csv(std::ostream& os, const partial_sum_trace& trace) {
    os << "X,re,im,abs,weil_envelope\n";
    char buf[256];
    for (const auto& cp : trace.checkpoints) {
        std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g\n", static_cast<long long>(cp.x),
                      cp.value.real(), cp.value.imag(), std::abs(cp.value), cp.weil_envelope);
        os << buf;
    }
}

}  // namespace expsum
