// sphere.hpp
//
// Integer points on the 3-sphere F(x) = x1^2+x2^2+x3^2+x4^2 = n, spherical
// cap gaps around target directions, and sampling estimators for the
// largest empty-cap volume lambda(r) and the covering exponent
//
//   K = log(#points) / log(vol(S^3) / lambda),   vol(S^3) = 2 pi^2.
//
// lambda is estimated from below by sampling directions (a cap of radius
// eps has volume (4 pi/3) eps^3 to leading order, we drop the O(eps^5)
// correction), so the K estimate carries a second-order bias and is
// treated as exploratory output.  Also hosts the tangent-frame
// construction e4 = xi and the truncation-set membership test used by the
// error analysis.

#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "expsum/common.hpp"

namespace expsum {

inline constexpr double kVolS3 = 2.0 * kPi * kPi;

// Integer square root by Newton iteration with exactness verification:
// isqrt(k)^2 <= k < (isqrt(k)+1)^2.
inline i64 isqrt64(i64 n) {
    if (n < 0) throw std::invalid_argument("isqrt64: negative input");
    if (n == 0) return 0;
    i64 x = static_cast<i64>(std::sqrt(static_cast<double>(n)));
    for (int it = 0; it < 64; ++it) {
        const i64 nx = (x + n / x) / 2;
        if (nx >= x) break;
        x = nx;
    }
    while (x > 0 && x * x > n) --x;
    while ((x + 1) * (x + 1) <= n) ++x;
    return x;
}

struct sphere_point_set {
    i64 n = 0;                 // squared radius
    std::vector<ivec4> points;  // full orbit, lexicographically ordered
};

struct cap_report {
    vec4 xi{};
    i64 n = 0;
    double eps_min = 0.0;
    ivec4 nearest{};
};

struct tangent_frame {
    std::array<vec4, 4> e{};  // e[3] = xi, e[0..2] span the tangent space
};

struct cover_row {
    i64 n = 0;
    std::size_t count = 0;
    double lambda_hat = 0.0;
    double k_hat = 0.0;
    bool skipped = false;
    std::string reason;
};

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

// All integer solutions of F(x) = n, emitted in lexicographic order.  The
// outer coordinate is sharded across workers and slices are concatenated
// in slice order, so the output is identical for any thread count.
inline sphere_point_set enumerate_sphere(i64 n, int threads = 1, i64 ceiling = 1000000) {
    if (n < 1) throw std::invalid_argument("enumerate_sphere: n must be >= 1");
    if (n > ceiling) throw resource_limit("enumerate_sphere: n exceeds the configured ceiling");
    const i64 s1 = isqrt64(n);
    const auto slice = [n](i64 x1) {
        std::vector<ivec4> pts;
        const i64 r1 = n - x1 * x1;
        const i64 s2 = isqrt64(r1);
        for (i64 x2 = -s2; x2 <= s2; ++x2) {
            const i64 r2 = r1 - x2 * x2;
            const i64 s3 = isqrt64(r2);
            for (i64 x3 = -s3; x3 <= s3; ++x3) {
                const i64 r3 = r2 - x3 * x3;
                const i64 t = isqrt64(r3);
                if (t * t != r3) continue;
                if (t == 0) {
                    pts.push_back({x1, x2, x3, 0});
                } else {
                    pts.push_back({x1, x2, x3, -t});
                    pts.push_back({x1, x2, x3, t});
                }
            }
        }
        return pts;
    };
    const std::size_t slices = static_cast<std::size_t>(2 * s1 + 1);
    auto parts = parallel_map<std::vector<ivec4>>(slices, resolve_threads(threads),
                                                  [&](std::size_t i) { return slice(static_cast<i64>(i) - s1); });
    sphere_point_set out;
    out.n = n;
    for (auto& part : parts) out.points.insert(out.points.end(), part.begin(), part.end());
    return out;
}

// Classical four-square count 8 * sum_{d | n, 4 !| d} d; independent
// cross-oracle for enumerate_sphere.
inline i64 jacobi_r4(i64 n) {
    if (n < 1) throw std::invalid_argument("jacobi_r4: n must be >= 1");
    i64 s = 0;
    for (i64 d = 1; d * d <= n; ++d) {
        if (n % d != 0) continue;
        const i64 e = n / d;
        if (d % 4 != 0) s += d;
        if (e != d && e % 4 != 0) s += e;
    }
    return 8 * s;
}

// ---------------------------------------------------------------------------
// Cap gaps and covering estimators
// ---------------------------------------------------------------------------

inline cap_report cap_gap(const vec4& xi, const sphere_point_set& sphere) {
    if (!is_unit(xi)) throw std::invalid_argument("cap_gap: xi must be a unit vector (tolerance 1e-9)");
    if (sphere.points.empty()) throw empty_sphere("cap_gap: no lattice points on F(x) = " + std::to_string(sphere.n));
    const double rs = std::sqrt(static_cast<double>(sphere.n));
    double best = std::numeric_limits<double>::infinity();
    ivec4 bestp{};
    for (const ivec4& p : sphere.points) {
        double d2 = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double di = static_cast<double>(p[i]) / rs - xi[i];
            d2 += di * di;
        }
        if (d2 < best) {
            best = d2;
            bestp = p;
        }
    }
    return {xi, sphere.n, std::sqrt(best), bestp};
}

inline cap_report cap_gap(const vec4& xi, i64 n) { return cap_gap(xi, enumerate_sphere(n)); }

// leading-order volume of a cap of Euclidean radius eps
inline double cap_volume(double eps) { return 4.0 * kPi / 3.0 * eps * eps * eps; }

// Sampling lower bound for lambda(r): max over uniformly drawn directions
// of the empty-cap volume around the direction.
inline double lambda_estimate(const sphere_point_set& sphere, i64 num_samples, u64 seed) {
    if (num_samples < 1) throw std::invalid_argument("lambda_estimate: num_samples must be >= 1");
    if (sphere.points.empty()) throw empty_sphere("lambda_estimate: empty sphere");
    rng64 rng(seed);
    double best = 0.0;
    for (i64 s = 0; s < num_samples; ++s) {
        const cap_report rep = cap_gap(rng.unit4(), sphere);
        best = std::max(best, cap_volume(rep.eps_min));
    }
    return best;
}

inline double lambda_estimate(i64 n, i64 num_samples, u64 seed) {
    return lambda_estimate(enumerate_sphere(n), num_samples, seed);
}

inline int two_adic_valuation(i64 n) {
    int v = 0;
    while (n % 2 == 0) {
        n /= 2;
        ++v;
    }
    return v;
}

// K estimates per n.  Spheres that are empty or fail the 2-adic filter are
// skipped and reported rather than aborting the batch.
inline std::vector<cover_row> covering_exponent_estimate(const std::vector<i64>& n_values, i64 num_samples,
                                                         u64 seed, int max_two_adic = 0, int threads = 0) {
    auto run_one = [&](std::size_t i) {
        const i64 n = n_values[i];
        cover_row row;
        row.n = n;
        if (two_adic_valuation(n) > max_two_adic) {
            row.skipped = true;
            row.reason = "2-adic valuation above filter";
            return row;
        }
        const sphere_point_set sphere = enumerate_sphere(n);
        if (sphere.points.empty()) {
            row.skipped = true;
            row.reason = "empty sphere";
            return row;
        }
        row.count = sphere.points.size();
        row.lambda_hat = lambda_estimate(sphere, num_samples, seed + static_cast<u64>(n));
        row.k_hat = std::log(static_cast<double>(row.count)) / std::log(kVolS3 / row.lambda_hat);
        return row;
    };
    return parallel_map<cover_row>(n_values.size(), resolve_threads(threads), run_one);
}

// ---------------------------------------------------------------------------
// Tangent frame and the truncation set
// ---------------------------------------------------------------------------

// Orthonormal frame with e4 = xi; the seed basis is the standard basis with
// the coordinate of largest |xi_i| removed, then Gram-Schmidt (applied
// twice to push the residual to machine precision).  Deterministic in xi.
inline tangent_frame make_tangent_frame(const vec4& xi) {
    if (!is_unit(xi)) throw std::invalid_argument("make_tangent_frame: xi must be a unit vector");
    int drop = 0;
    for (int i = 1; i < 4; ++i)
        if (std::abs(xi[i]) > std::abs(xi[drop])) drop = i;

    tangent_frame f;
    std::vector<vec4> basis;
    basis.push_back(xi);
    for (int i = 0; i < 4; ++i) {
        if (i == drop) continue;
        vec4 v{};
        v[i] = 1.0;
        basis.push_back(v);
    }
    for (std::size_t pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < 4; ++i) {
            vec4& v = basis[i];
            for (std::size_t j = 0; j < i; ++j) {
                const double proj = dot(v, basis[j]);
                for (int k = 0; k < 4; ++k) v[k] -= proj * basis[j][k];
            }
            const double nv = norm(v);
            if (nv < 1e-12) throw std::invalid_argument("make_tangent_frame: degenerate seed basis");
            for (int k = 0; k < 4; ++k) v[k] /= nv;
        }
    f.e[0] = basis[1];
    f.e[1] = basis[2];
    f.e[2] = basis[3];
    f.e[3] = basis[0];  // = xi up to normalization noise
    return f;
}

// Membership in the truncation set: ||c|| <= N^delta / eps and
// max{|c_hat_1|, |c_hat_2|, |c_hat_3|, eps |c_hat_4|} <= N^delta, with
// c_hat the coordinates of c in the tangent frame of xi.
inline bool in_truncation_set(const ivec4& c, const vec4& xi, double eps, i64 N, double delta) {
    if (eps <= 0.0 || delta <= 0.0) throw std::invalid_argument("in_truncation_set: eps and delta must be positive");
    const double ndelta = std::pow(static_cast<double>(N), delta);
    const vec4 cd{static_cast<double>(c[0]), static_cast<double>(c[1]), static_cast<double>(c[2]),
                  static_cast<double>(c[3])};
    if (norm(cd) > ndelta / eps) return false;
    const tangent_frame f = make_tangent_frame(xi);
    const double h1 = std::abs(dot(cd, f.e[0]));
    const double h2 = std::abs(dot(cd, f.e[1]));
    const double h3 = std::abs(dot(cd, f.e[2]));
    const double h4 = std::abs(dot(cd, f.e[3]));
    return std::max(std::max(h1, h2), std::max(h3, eps * h4)) <= ndelta;
}

}  // namespace expsum
