#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "expsum/expsums.hpp"
#include "oracles.hpp"

using namespace expsum;

namespace {
double weil_bound(i64 m, i64 n, i64 c) {
    const i64 g = std::gcd(std::gcd(std::abs(m), std::abs(n)), c);
    return static_cast<double>(divisor_tau(c)) * std::sqrt(static_cast<double>(g)) *
           std::sqrt(static_cast<double>(c));
}
}  // namespace

TEST_CASE("kloosterman pinned values") {
    CHECK(kloosterman({1, 1, 1}) == cplx(1.0, 0.0));
    // c = 3: e(2/3) + e(4/3) = -1
    CHECK(std::abs(kloosterman({1, 1, 3}) - cplx(-1.0, 0.0)) < 1e-12);
    // c = 2: single term x = 1, e(2/2) = 1
    CHECK(std::abs(kloosterman({1, 1, 2}) - cplx(1.0, 0.0)) < 1e-12);
}

TEST_CASE("kloosterman agrees with the exhaustive-inverse oracle") {
    for (i64 c : {1, 2, 3, 4, 5, 6, 7, 8, 9, 12, 16, 25, 36, 49, 101})
        for (i64 m : {0, 1, 5})
            for (i64 n : {1, 7})
                CHECK(std::abs(kloosterman({m, n, c}) - oracle::kloosterman_naive(m, n, c)) < 1e-9);
}

TEST_CASE("kloosterman realness and symmetry") {
    for (i64 c = 1; c <= 300; ++c) {
        const cplx v = kloosterman({3, 5, c});
        CHECK(std::abs(v.imag()) <= 1e-9 * static_cast<double>(c));
        const cplx w = kloosterman({5, 3, c});
        CHECK(std::abs(v - w) <= 1e-9 * static_cast<double>(c));
    }
}

TEST_CASE("twist identity S(A,tB;q) = S(tA,B;q)") {
    std::mt19937_64 rng(42);
    for (i64 q = 1; q <= 200; ++q) {
        for (int rep = 0; rep < 3; ++rep) {
            const i64 A = static_cast<i64>(rng() % 50) + 1;
            const i64 B = static_cast<i64>(rng() % 50) + 1;
            i64 t = static_cast<i64>(rng() % q) + 1;
            while (std::gcd(t, q) != 1) ++t;
            CHECK(std::abs(kloosterman({A, t * B, q}) - kloosterman({t * A, B, q})) < 1e-8 * std::sqrt(static_cast<double>(q)) + 1e-9);
        }
    }
}

TEST_CASE("Weil bound at unit-test scale") {
    for (i64 c = 1; c <= 300; ++c)
        for (i64 m : {-7, 1, 4})
            for (i64 n : {1, 12}) {
                const cplx v = kloosterman({m, n, c});
                CHECK(std::abs(v) <= weil_bound(m, n, c) + 1e-6);
            }
}

TEST_CASE("kloosterman_fast matches brute force") {
    CHECK(std::abs(kloosterman_fast({1, 1, 15}, {{3, 1}, {5, 1}}) - kloosterman({1, 1, 15})) < 1e-8 * std::sqrt(15.0));
    CHECK(std::abs(kloosterman_fast({1, 1, 4}, {{2, 2}}) - kloosterman({1, 1, 4})) < 1e-8 * 2.0);
    CHECK(std::abs(kloosterman_fast({2, 3, 7}, {{7, 1}}) - kloosterman({2, 3, 7})) < 1e-12);
    std::mt19937_64 rng(7);
    for (i64 c = 1; c <= 200; ++c) {
        const i64 m = static_cast<i64>(rng() % 1000) - 500;
        const i64 n = static_cast<i64>(rng() % 1000) - 500;
        CHECK(std::abs(kloosterman_fast({m, n, c}, factorize(c)) - kloosterman({m, n, c})) <=
              1e-8 * std::sqrt(static_cast<double>(c)));
    }
    CHECK_THROWS_AS(kloosterman_fast({1, 1, 12}, {{2, 1}, {3, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(kloosterman_fast({1, 1, 12}, {{2, 2}, {3, 1}, {5, 1}}), std::invalid_argument);
}

TEST_CASE("gauss_bruteforce pinned values and oracle") {
    CHECK(gauss_bruteforce({1, 0, 1}) == cplx(1.0, 0.0));
    CHECK(std::abs(gauss_bruteforce({1, 0, 4}) - cplx(2.0, 2.0)) < 1e-12);
    CHECK(std::abs(gauss_bruteforce({1, 1, 2}) - cplx(2.0, 0.0)) < 1e-12);
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        const i64 q = static_cast<i64>(rng() % 80) + 1;
        const i64 s = static_cast<i64>(rng() % 200) - 100;
        const i64 t = static_cast<i64>(rng() % 200) - 100;
        CHECK(std::abs(gauss_bruteforce({s, t, q}) - oracle::gauss_naive(((s % q) + q) % q, ((t % q) + q) % q, q)) <
              1e-9 * static_cast<double>(q));
    }
}

TEST_CASE("gauss_closed pinned values") {
    CHECK(std::abs(gauss_closed({1, 0, 5}) - cplx(std::sqrt(5.0), 0.0)) < 1e-12);
    CHECK(std::abs(gauss_closed({1, 1, 2}) - cplx(2.0, 0.0)) < 1e-12);
    CHECK(std::abs(gauss_closed({1, 0, 4}) - cplx(2.0, 2.0)) < 1e-12);
    CHECK_THROWS_AS(gauss_closed({3, 0, 9}), std::invalid_argument);
}

TEST_CASE("gauss_closed == gauss_bruteforce across q mod 4 classes") {
    for (i64 q = 1; q <= 60; ++q) {
        const double tol = 1e-9 * std::sqrt(static_cast<double>(q)) + 1e-12;
        for (i64 s = 0; s < q || (q == 1 && s == 0); ++s) {
            if (q > 1 && std::gcd(s, q) != 1) continue;
            for (i64 t = -q; t <= q; ++t)
                CHECK(std::abs(gauss_closed({s, t, q}) - gauss_bruteforce({s, t, q})) <= tol);
            if (q == 1) break;
        }
    }
}

TEST_CASE("sq_bruteforce pinned values and oracle") {
    CHECK(sq_bruteforce({1, {0, 0, 0, 0}, 4}) == cplx(1.0, 0.0));
    // q = 2, c = 0, N = 4: the 16-term inner sum cancels exactly
    CHECK(std::abs(sq_bruteforce({2, {0, 0, 0, 0}, 4})) < 1e-12);
    CHECK(std::abs(sq_bruteforce({3, {1, 0, 0, 0}, 4}) - cplx(-9.0, 0.0)) < 1e-9);
    std::mt19937_64 rng(13);
    for (i64 q = 1; q <= 9; ++q)
        for (int rep = 0; rep < 3; ++rep) {
            std::array<i64, 4> c{};
            for (auto& x : c) x = static_cast<i64>(rng() % 21) - 10;
            const i64 N = 4 * (static_cast<i64>(rng() % 30) + 1);
            CHECK(std::abs(sq_bruteforce({q, {c[0], c[1], c[2], c[3]}, N}) - oracle::sq_naive(q, c, N)) <
                  1e-9 * std::pow(static_cast<double>(q), 5.0) + 1e-10);
        }
    CHECK_THROWS_AS(sq_bruteforce({61, {0, 0, 0, 0}, 4}), std::invalid_argument);
    CHECK_THROWS_AS(sq_bruteforce({3, {0, 0, 0, 0}, 5}), std::invalid_argument);
}

TEST_CASE("sq_reduced pinned values") {
    CHECK(std::abs(sq_reduced({3, {1, 0, 0, 0}, 4}) - cplx(-9.0, 0.0)) < 1e-9);
    CHECK(std::abs(sq_reduced({3, {1, 0, 0, 0}, 4}) - 9.0 * kloosterman({1, 1, 3})) < 1e-9);
    CHECK(sq_reduced({4, {1, 1, 1, 1}, 4}) == cplx(0.0, 0.0));
    CHECK(sq_reduced({2, {2, 0, 0, 0}, 4}) == cplx(0.0, 0.0));
}

TEST_CASE("sq_reduced == sq_bruteforce at unit-test scale") {
    std::mt19937_64 rng(17);
    for (i64 q = 1; q <= 20; ++q)
        for (int rep = 0; rep < 8; ++rep) {
            ivec4 c{};
            for (auto& x : c) x = static_cast<i64>(rng() % 21) - 10;
            const i64 N = (rep % 2 == 0) ? 4 : 100;
            const cplx brute = sq_bruteforce({q, c, N});
            const cplx closed = sq_reduced({q, c, N});
            const double scale = std::max(1.0, std::abs(brute));
            CHECK(std::abs(brute - closed) <= 1e-6 * scale);
        }
}
