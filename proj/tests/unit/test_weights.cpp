#include "gmmd/error.hpp"
#include "gmmd/weights.hpp"

#include <doctest.h>

#include <cmath>

using namespace gmmd;

TEST_CASE("weight values") {
    const WeightScheme half(0.5);
    CHECK(weight(half, 1, 4) == 0.5);
    CHECK(weight(half, 2, 4) == 1.5);
    CHECK(weight(WeightScheme(1.0), 3, 3) == 0.0);
    CHECK(weight(WeightScheme::unit(), 3, 5) == 1.0);
    CHECK_THROWS_AS(weight(half, 0, 4), InputError);
    CHECK_THROWS_AS(weight(half, 5, 4), InputError);
}

TEST_CASE("gamma domain") {
    CHECK_THROWS_AS(WeightScheme(0.0), InputError);
    CHECK_THROWS_AS(WeightScheme(-0.1), InputError);
    CHECK_THROWS_AS(WeightScheme(1.0000001), InputError);
    CHECK_THROWS_AS(WeightScheme(std::nan("")), InputError);
    CHECK_NOTHROW(WeightScheme(1e-9));
    CHECK_NOTHROW(WeightScheme(1.0));
}

TEST_CASE("k squared limit") {
    CHECK(k_squared_limit(WeightScheme(1.0)) == 2.0);
    CHECK(k_squared_limit(WeightScheme(0.5)) == 1.25);
    CHECK(k_squared_limit(WeightScheme(1e-8)) == doctest::Approx(1.0));
    CHECK(k_squared_limit(WeightScheme::unit()) == 1.0);
}

TEST_CASE("validate_assumptions examples") {
    auto rep = validate_assumptions(WeightScheme(1.0), 100);
    CHECK(rep.tau_observed == 1.0);
    CHECK(rep.all_pass());

    rep = validate_assumptions(WeightScheme(1.0), 99);
    CHECK(rep.tau_observed == 1.0);
    CHECK(rep.all_pass());

    rep = validate_assumptions(WeightScheme(0.5), 10);
    CHECK(rep.c_k_observed == 1.5);
    CHECK(rep.all_pass());

    rep = validate_assumptions(WeightScheme(0.5), 1000000);
    CHECK(std::abs(rep.k_sq_sequence_tail - 1.25) <= 1e-6);
    CHECK(rep.k_sq_limit == 1.25);
    CHECK(rep.all_pass());

    CHECK_THROWS_AS(validate_assumptions(WeightScheme(0.5), 1), InputError);
}

TEST_CASE("unit weights fail only the second-moment assumption") {
    const auto rep = validate_assumptions(WeightScheme::unit(), 1000);
    CHECK(rep.mean_bounded);
    CHECK(rep.uniformly_bounded);
    CHECK_FALSE(rep.second_moment_limit);
    CHECK_FALSE(rep.all_pass());
}

TEST_CASE("partial sums agree with the closed forms at every length") {
    for (double gamma : {0.1, 0.37, 0.5, 0.9, 1.0}) {
        const WeightScheme w(gamma);
        double sum = 0.0;
        double sum_sq = 0.0;
        for (std::size_t r = 1; r <= 2001; ++r) {
            const double k = weight(w, r, r);
            CHECK(k >= 0.0);
            CHECK(k <= 1.0 + gamma);
            sum += k;
            sum_sq += k * k;
            const double rd = static_cast<double>(r);
            // Sum of weights is r for even r and r - gamma for odd r.
            CHECK(std::abs(sum - (r % 2 == 0 ? rd : rd - gamma)) <= 1e-9);
            CHECK(std::abs(sum_sq / rd - k_squared_limit(w)) <= k_squared_rate(w, r) + 1e-12);
        }
    }
}
