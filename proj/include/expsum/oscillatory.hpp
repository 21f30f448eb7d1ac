// oscillatory.hpp
//
// Numerical side of the stationary-phase expansion
//
//   int_{R^n} e^{i lambda ||x||^2} phi(x) dx
//     = lambda^{-n/2} sum_{j<=N} a_j lambda^{-j} + O(lambda^{-n/2-N-1}),
//
//   a_j = (i pi)^{n/2} ((i/4)^j / j!) (Delta^j phi)(0).
//
// The quadrature oracle integrates dimension by dimension on panels sized
// to the local phase gradient (so every panel sees a bounded amount of
// phase), 15-point Gauss-Legendre per panel, and refines the phase budget
// until two successive refinements agree.  Expansion coefficients come
// from composed central-difference Laplacians at the origin with one
// Richardson extrapolation.

#pragma once

#include <functional>
#include <map>
#include <vector>

#include "expsum/common.hpp"

namespace expsum {

// phi receives a pointer to n doubles
using phi_fn = std::function<double(const double*)>;

struct phase_expansion {
    int n = 1;
    int order = 0;
    std::vector<cplx> terms;           // a_0 .. a_order
    double remainder_exponent = 0.0;   // n/2 + order + 1
};

struct decay_row {
    double lambda = 0.0;
    double abs_error = 0.0;
};

struct decay_table {
    int n = 1;
    int order = 0;
    std::vector<decay_row> rows;
    double slope = 0.0;  // fitted log-log decay exponent of the remainder
};

namespace detail {

// 15-point Gauss-Legendre nodes/weights on [-1, 1]
inline constexpr double kGL15Node[15] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272, -0.7244177313601700,
    -0.5709721726085388, -0.3941513470775634, -0.2011940939974345, 0.0,
    0.2011940939974345,  0.3941513470775634,  0.5709721726085388,  0.7244177313601700,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
inline constexpr double kGL15Weight[15] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719, 0.1395706779261543,
    0.1662692058169939, 0.1861610000155622, 0.1984314853271116, 0.2025782419255613,
    0.1984314853271116, 0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

// Panel boundaries on [-R, R] such that lambda * x^2 advances by at most
// `theta` radians per panel, with a hard cap on panel width.
inline std::vector<double> phase_panels(double lambda, double radius, double theta) {
    std::vector<double> right{0.0};
    const double width_cap = 0.5;
    double x = 0.0;
    while (x < radius) {
        double nxt = std::sqrt(x * x + theta / lambda);
        nxt = std::min({nxt, x + width_cap, radius});
        right.push_back(nxt);
        x = nxt;
    }
    std::vector<double> pts;
    for (std::size_t i = right.size(); i-- > 1;) pts.push_back(-right[i]);
    for (double v : right) pts.push_back(v);
    return pts;
}

template <class G>
cplx integrate_panels(const std::vector<double>& pts, G&& g) {
    kahan_csum acc;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double mid = 0.5 * (pts[i] + pts[i + 1]);
        const double half = 0.5 * (pts[i + 1] - pts[i]);
        cplx panel{0.0, 0.0};
        for (int k = 0; k < 15; ++k) panel += kGL15Weight[k] * g(mid + half * kGL15Node[k]);
        acc.add(half * panel);
    }
    return acc.value();
}

// One full pass at a fixed phase budget; recursion peels off one
// coordinate at a time, innermost first.
inline cplx oscillatory_pass(const phi_fn& phi, int n, double lambda, double radius, double theta) {
    const std::vector<double> pts = phase_panels(lambda, radius, theta);
    double coords[3] = {0.0, 0.0, 0.0};
    std::function<cplx(int)> level = [&](int d) -> cplx {
        return integrate_panels(pts, [&](double t) -> cplx {
            coords[d] = t;
            const cplx osc = std::polar(1.0, lambda * t * t);
            if (d == n - 1) return osc * phi(coords);
            return osc * level(d + 1);
        });
    };
    return level(0);
}

}  // namespace detail

// Quadrature oracle for the n-dimensional oscillatory integral, n <= 3.
// phi must decay rapidly inside ||x||_inf <= radius (caller contract).
inline cplx oscillatory_integral(const phi_fn& phi, int n, double lambda, double quad_tol, double radius = 8.0) {
    if (n < 1 || n > 3) throw std::invalid_argument("oscillatory_integral: n must be 1, 2 or 3");
    if (lambda <= 0.0) throw std::invalid_argument("oscillatory_integral: lambda must be positive");
    if (quad_tol <= 0.0) throw std::invalid_argument("oscillatory_integral: quad_tol must be positive");

    const auto pass_cost = [&](double theta) {
        return std::pow(15.0 * static_cast<double>(detail::phase_panels(lambda, radius, theta).size()),
                        static_cast<double>(n));
    };
    double theta = kTwoPi;
    if (pass_cost(theta) > 4e8) throw non_convergence("oscillatory_integral: phase resolution exceeds the budget");
    cplx prev = detail::oscillatory_pass(phi, n, lambda, radius, theta);
    for (int refine = 0; refine < 6; ++refine) {
        theta *= 0.5;
        if (pass_cost(theta) > 4e8) throw non_convergence("oscillatory_integral: refinement budget exhausted");
        const cplx cur = detail::oscillatory_pass(phi, n, lambda, radius, theta);
        if (std::abs(cur - prev) <= quad_tol * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    throw non_convergence("oscillatory_integral: no convergence within the refinement budget");
}

// Coefficients a_j for j = 0..order via composed central-difference
// Laplacian stencils at the origin, one Richardson extrapolation.  The
// base step is 1e-2; orders 3 and 4 use a larger step because the 2j-th
// difference quotient amplifies rounding by h^{-2j} (with h = 1e-2 the
// order-4 quotient would carry no correct digits in double precision).
inline phase_expansion expansion_terms(const phi_fn& phi, int n, int order) {
    if (n < 1 || n > 3) throw std::invalid_argument("expansion_terms: n must be 1, 2 or 3");
    if (order < 0 || order > 4) throw std::invalid_argument("expansion_terms: order must be in [0, 4]");

    auto laplacian_power = [&](int j, double h) -> double {
        std::map<std::array<int, 3>, double> coef{{{0, 0, 0}, 1.0}};
        for (int rep = 0; rep < j; ++rep) {
            std::map<std::array<int, 3>, double> next;
            for (const auto& [off, c] : coef) {
                for (int d = 0; d < n; ++d) {
                    std::array<int, 3> up = off, dn = off;
                    ++up[d];
                    --dn[d];
                    next[up] += c;
                    next[dn] += c;
                }
                next[off] -= 2.0 * static_cast<double>(n) * c;
            }
            coef.swap(next);
        }
        kahan_sum s;
        for (const auto& [off, c] : coef) {
            const double x[3] = {off[0] * h, off[1] * h, off[2] * h};
            s.add(c * phi(x));
        }
        return s.value() / std::pow(h, 2.0 * j);
    };

    phase_expansion out;
    out.n = n;
    out.order = order;
    out.remainder_exponent = 0.5 * n + order + 1.0;
    const cplx front = std::pow(cplx(0.0, kPi), 0.5 * n);
    double factorial = 1.0;
    for (int j = 0; j <= order; ++j) {
        if (j > 0) factorial *= j;
        const double h = (j <= 2) ? 1e-2 : 4.6e-2;
        const double d1 = laplacian_power(j, h);
        const double d2 = laplacian_power(j, 0.5 * h);
        const double lap = (4.0 * d2 - d1) / 3.0;  // Richardson: kills the h^2 term
        out.terms.push_back(front * std::pow(cplx(0.0, 0.25), j) / factorial * lap);
    }
    return out;
}

// Remainder decay check: |quadrature - truncated expansion| per lambda
// (grid entries evaluated concurrently), plus the fitted log-log slope.
inline decay_table verify_expansion(const phi_fn& phi, int n, int order, const std::vector<double>& lambda_grid,
                                    double quad_tol = 1e-9, double radius = 8.0, int threads = 0) {
    if (lambda_grid.size() < 3) throw std::invalid_argument("verify_expansion: need at least 3 lambda values");
    if (lambda_grid.front() < 10.0) throw std::invalid_argument("verify_expansion: lambda_grid must start at >= 10");
    for (std::size_t i = 0; i + 1 < lambda_grid.size(); ++i)
        if (lambda_grid[i] >= lambda_grid[i + 1])
            throw std::invalid_argument("verify_expansion: lambda_grid must be increasing");

    const phase_expansion exp = expansion_terms(phi, n, order);
    decay_table table;
    table.n = n;
    table.order = order;
    table.rows = parallel_map<decay_row>(lambda_grid.size(), resolve_threads(threads), [&](std::size_t i) {
        const double lam = lambda_grid[i];
        const cplx quad = oscillatory_integral(phi, n, lam, quad_tol, radius);
        cplx model{0.0, 0.0};
        for (int j = 0; j <= order; ++j) model += exp.terms[static_cast<std::size_t>(j)] * std::pow(lam, -j);
        model *= std::pow(lam, -0.5 * n);
        return decay_row{lam, std::abs(quad - model)};
    });
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& row : table.rows) {
        const double lx = std::log(row.lambda);
        const double ly = std::log(std::max(row.abs_error, 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double nn = static_cast<double>(table.rows.size());
    table.slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    return table;
}

}  // namespace expsum
