#include "doctest.h"

#include <cmath>

#include "gfcond/special.hpp"

#include "oracles.hpp"

using namespace gfcond;

TEST_CASE("gamma upper tail, integer shape") {
    CHECK(gamma_upper(1, 0.0) == doctest::Approx(1.0));
    CHECK(gamma_upper(1, 2.5) == doctest::Approx(std::exp(-2.5)).epsilon(1e-13));
    // shape 2 at 2: 3 e^-2, cross-checked against the quadrature oracle
    double q = gamma_upper(2, 2.0);
    CHECK(q == doctest::Approx(3.0 * std::exp(-2.0)).epsilon(1e-13));
    CHECK(q == doctest::Approx(1.0 - oracles::gamma_cdf(2, 1.0, 2.0)).epsilon(1e-8));
    CHECK(gamma_upper(4, 700.0) > 0.0);  // stays finite deep in the tail
    CHECK_THROWS(gamma_upper(0, 1.0));
}

TEST_CASE("gamma cdf vs quadrature oracle") {
    for (int shape : {1, 2, 3}) {
        for (double x : {0.3, 1.0, 4.5}) {
            CHECK(gamma_cdf(shape, 1.0, x) ==
                  doctest::Approx(oracles::gamma_cdf(shape, 1.0, x)).epsilon(1e-7));
        }
    }
    CHECK(gamma_cdf(2, 0.5, 1.0) == doctest::Approx(oracles::gamma_cdf(2, 0.5, 1.0)).epsilon(1e-7));
}

TEST_CASE("inverse upper tail round-trips") {
    for (int shape : {1, 2, 5}) {
        for (double x : {0.1, 1.0, 8.0, 40.0}) {
            double lq = gamma_upper_log(shape, x);
            CHECK(gamma_upper_inverse_log(shape, lq, 0.0) == doctest::Approx(x).epsilon(1e-10));
        }
    }
    // x_min acts as a hard floor
    CHECK(gamma_upper_inverse_log(2, gamma_upper_log(2, 3.0), 3.0) ==
          doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS(gamma_upper_inverse_log(2, 0.5, 3.0));  // target above tail at x_min
}

TEST_CASE("hypoexponential tail") {
    // two modes 1.0 and 0.5 at t=5: 2 e^-5 - e^-10
    double p = hypoexponential_tail({1.0, 0.5}, 5.0);
    CHECK(p == doctest::Approx(0.013430494068408449).epsilon(1e-12));
    CHECK(hypoexponential_tail({1.0, 0.5}, 0.0) == doctest::Approx(1.0));
    CHECK(hypoexponential_tail({2.0}, 3.0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-13));
    CHECK_THROWS(hypoexponential_tail({1.0, 1.0}, 2.0));
    CHECK_THROWS(hypoexponential_tail({1.0, -0.5}, 2.0));
    CHECK_THROWS(hypoexponential_tail({}, 2.0));
}

TEST_CASE("distinct rates") {
    CHECK(distinct_rates({1.0, 0.5, 0.25}));
    CHECK_FALSE(distinct_rates({1.0, 1.0 + 1e-12}));
}

TEST_CASE("compensated summation") {
    KahanSum s;
    s.add(1.0);
    for (int i = 0; i < 1000000; ++i) s.add(1e-16);
    CHECK(s.value() == doctest::Approx(1.0 + 1e-10).epsilon(1e-12));
}

TEST_CASE("log_sum_exp") {
    CHECK(log_sum_exp({0.0, 0.0}) == doctest::Approx(std::log(2.0)));
    CHECK(log_sum_exp({-800.0, -801.0}) ==
          doctest::Approx(-800.0 + std::log1p(std::exp(-1.0))).epsilon(1e-12));
    CHECK(std::isinf(log_sum_exp({})));
}
