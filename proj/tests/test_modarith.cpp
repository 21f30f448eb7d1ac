#include <catch2/catch_amalgamated.hpp>

#include "expsum/modarith.hpp"
#include "oracles.hpp"

using namespace expsum;

TEST_CASE("mod_pow agrees with repeated multiplication") {
    CHECK(mod_pow(2, 10, 1000) == 24);
    CHECK(mod_pow(2, 10, 1000) == oracle::pow_mod_naive(2, 10, 1000));
    CHECK(mod_pow(5, 0, 7) == 1);
    CHECK(mod_pow(3, 1, 7) == 3);
    for (i64 base : {-9, -2, 0, 1, 7, 123})
        for (i64 exp : {0, 1, 2, 5, 13})
            for (i64 m : {1, 2, 7, 97, 1000})
                CHECK(mod_pow(base, exp, m) == oracle::pow_mod_naive(base, exp, m));
}

TEST_CASE("mod_inv finds inverses exactly when coprime") {
    CHECK(mod_inv(3, 7) == oracle::inv_search(3, 7));
    CHECK(mod_inv(3, 7) == 5);
    for (i64 m = 2; m <= 40; ++m) CHECK(mod_inv(1, m) == 1);
    CHECK(mod_inv(1, 1) == 0);  // trivial group: the residue 0 represents 1 mod 1
    CHECK_FALSE(mod_inv(2, 4).has_value());
    for (i64 m = 1; m <= 60; ++m)
        for (i64 x = 0; x < m; ++x) {
            const auto inv = mod_inv(x, m);
            if (std::gcd(x, m) == 1) {
                REQUIRE(inv.has_value());
                CHECK(mulmod(*inv, x, m) == 1 % m);
            } else {
                CHECK_FALSE(inv.has_value());
            }
        }
}

TEST_CASE("jacobi_symbol matches Legendre products and Euler's criterion") {
    CHECK(jacobi_symbol(2, 15) == 1);
    CHECK(jacobi_symbol(2, 15) == oracle::legendre_euler(2, 3) * oracle::legendre_euler(2, 5));
    for (i64 q : {1, 3, 9, 15, 45, 99}) CHECK(jacobi_symbol(1, q) == 1);
    CHECK(jacobi_symbol(3, 9) == 0);
    CHECK_THROWS_AS(jacobi_symbol(3, 10), std::invalid_argument);

    // complete multiplicativity in the top argument, exhaustively for q <= 99
    for (i64 q = 1; q <= 99; q += 2)
        for (i64 s1 = 0; s1 < q; ++s1)
            for (i64 s2 = 0; s2 < q; ++s2)
                CHECK(jacobi_symbol(s1 * s2, q) == jacobi_symbol(s1, q) * jacobi_symbol(s2, q));

    // Euler criterion at odd primes
    for (i64 p : {3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101})
        for (i64 s = 0; s < p; ++s) CHECK(jacobi_symbol(s, p) == oracle::legendre_euler(s, p));
}

TEST_CASE("divisor_tau") {
    CHECK(divisor_tau(12) == 6);
    CHECK(divisor_tau(12) == oracle::tau_scan(12));
    CHECK(divisor_tau(1) == 1);
    for (i64 p : {2, 3, 5, 7, 101, 997}) CHECK(divisor_tau(p) == 2);
    for (i64 n = 1; n <= 500; ++n) CHECK(divisor_tau(n) == oracle::tau_scan(n));
}

TEST_CASE("epsilon_factor case table") {
    CHECK(epsilon_factor(5) == cplx(1.0, 0.0));
    CHECK(epsilon_factor(3) == cplx(0.0, 1.0));
    CHECK(epsilon_factor(1) == cplx(1.0, 0.0));
    CHECK(epsilon_factor(-1) == cplx(0.0, 1.0));  // -1 == 3 (mod 4)
    CHECK_THROWS_AS(epsilon_factor(4), std::invalid_argument);
    CHECK(parity_delta(7) == 1);
    CHECK(parity_delta(-4) == 0);
    CHECK(parity_delta(-3) == 1);
}

TEST_CASE("modulus guard rejects out-of-range moduli") {
    CHECK_THROWS_AS(mod_pow(2, 3, 0), std::domain_error);
    CHECK_THROWS_AS(mod_reduce(1, (i64(1) << 40) + 1), std::domain_error);
    CHECK(mod_reduce(-3, 7) == 4);
    CHECK(residue::make(-3, 7).value == 4);
}
