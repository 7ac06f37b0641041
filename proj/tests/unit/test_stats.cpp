#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "gradphi/stats.hpp"

using namespace gradphi;

TEST_SUITE("stats") {

TEST_CASE("power-law fits") {
    const std::vector<double> xs{1, 2, 4, 8};
    std::vector<double> sq, cst, noisy;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-0.01, 0.01);
    for (double x : xs) {
        sq.push_back(x * x);
        cst.push_back(5.0);
        noisy.push_back(3.0 / (x * x) * (1.0 + U(rng)));
    }
    const auto a = fit_power_law(xs, sq);
    CHECK(a.exponent == doctest::Approx(2.0));
    CHECK(a.r2 == doctest::Approx(1.0));
    CHECK(a.log_prefactor == doctest::Approx(0.0).scale(1.0));
    CHECK(fit_power_law(xs, cst).exponent == doctest::Approx(0.0).scale(1.0));
    const auto c = fit_power_law(xs, noisy);
    CHECK(std::abs(c.exponent + 2.0) < 0.1);
    CHECK(c.r2 <= 1.0);
    CHECK(c.residuals.size() == 4);
    CHECK_THROWS_AS(fit_power_law({1, 2}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law({1, 2, 3}, {1, -2, 3}), std::invalid_argument);
}

TEST_CASE("linear fit") {
    const auto f = fit_linear({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(f.exponent == doctest::Approx(2.0));
    CHECK(f.log_prefactor == doctest::Approx(1.0));
    CHECK(f.slope_se == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("mean, standard error and jackknife") {
    const auto m = mean_se({1, 2, 3, 4});
    CHECK(m.mean == 2.5);
    CHECK(m.variance == doctest::Approx(5.0 / 3.0));
    CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 12.0)));
    const auto j = variance_jackknife({1, 2, 3, 4});
    CHECK(j.mean == doctest::Approx(5.0 / 3.0));
    CHECK(j.se > 0.0);
    CHECK(variance_jackknife({2, 2, 2}).se == 0.0);
}

TEST_CASE("quantiles") {
    CHECK(quantile({3, 1, 2}, 0.5) == 2.0);
    CHECK(quantile({0, 10}, 0.25) == 2.5);
    CHECK(quantile({0, 10}, 1.0) == 10.0);
}

TEST_CASE("parallel_for covers each index once and rethrows") {
    for (int t : {1, 2, 4}) {
        std::vector<int> hits(100, 0);
        parallel_for(hits.size(), t, [&](std::size_t i) { hits[i] += 1; });
        for (int h : hits) CHECK(h == 1);
    }
    CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) {
                        if (i == 7) throw std::runtime_error("x");
                    }),
                    std::runtime_error);
    CHECK(resolve_threads(3) == 3);
    CHECK(resolve_threads(0) >= 1);
}

}
