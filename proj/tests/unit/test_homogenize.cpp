#include <doctest.h>

#include <cmath>

#include "gradphi/homogenize.hpp"
#include "oracles.hpp"

using namespace gradphi;

TEST_SUITE("homogenize") {

TEST_CASE("slope-path and constant-slope estimators agree on shared noise") {
    const Potential V = Potential::soft_quartic(0.5);
    const NoiseSource src(21, 0, 1.0);
    EstimatorOptions o;
    o.start = StartMode::corrector;
    const Slope p{0.4, -0.2};
    const auto a = estimate_tau(p, 4, V, 3, src, o);
    const auto b = estimate_tau(SlopePath({-100.0, -3.0}, {p, p}), 4, V, 3, src, o);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(a.mean[std::size_t(k)] - b.mean[std::size_t(k)]) <= 1e-12);
}

TEST_CASE("quadratic surface tension gradient is the identity") {
    const auto est = estimate_tau(Slope{0.5, 0.5}, 4, Potential::quadratic(), 40, NoiseSource(2, 0, 1.0));
    for (int a = 0; a < 2; ++a) {
        CHECK(std::abs(est.mean[std::size_t(a)] - 0.5) <= 3.0 * est.se[std::size_t(a)]);
        CHECK(est.se[std::size_t(a)] > 0.0);
    }
    const auto h = estimate_hessian(Slope{0.0, 0.0}, 4, Potential::quadratic(), 3, NoiseSource(2, 0, 1.0));
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) CHECK(h.mean[std::size_t(i * 2 + j)] == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0));
    }
    CHECK(h.positive);
}

TEST_CASE("Hessian is symmetric under swapping axes") {
    const Potential V = Potential::soft_quartic(0.5);
    const auto a = estimate_hessian(Slope{0.6, 0.0}, 4, V, 30, NoiseSource(5, 0, 1.0));
    const auto b = estimate_hessian(Slope{0.0, 0.6}, 4, V, 30, NoiseSource(6, 0, 1.0));
    auto close = [](double x, double sx, double y, double sy) { return std::abs(x - y) <= 4.0 * std::hypot(sx, sy); };
    CHECK(close(a.mean[0], a.se[0], b.mean[3], b.se[3]));
    CHECK(close(a.mean[3], a.se[3], b.mean[0], b.se[0]));
    CHECK(close(a.mean[1], a.se[1], b.mean[2], b.se[2]));
    for (double e : a.eigenvalues) {
        CHECK(e >= 1.0 - 4.0 * a.se[0]);
        CHECK(e <= 1.5 + 4.0 * a.se[0]);
    }
}

TEST_CASE("gaussian corrector variance matches the dense covariance recursion") {
    for (int L : {1, 2}) {
        const double dt = 0.1;
        const auto K = step_count(double(L * L), dt);
        CHECK(gaussian_corrector_variance(2, L, dt) ==
              doctest::Approx(oracle::dense_corrector_variance(2, 2 * L + 1, dt, K)).epsilon(1e-10));
    }
    CHECK(gaussian_corrector_variance(3, 1, 0.05) ==
          doctest::Approx(oracle::dense_corrector_variance(3, 3, 0.05, step_count(1.0, 0.05))).epsilon(1e-10));
}

TEST_CASE("corrector fluctuation estimator tracks the oracle") {
    const auto r = corrector_fluctuation_experiment({2, 4}, 2, Potential::quadratic(), 40, NoiseSource(3, 0, 1.0));
    for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(r.var_phi0[k] - r.oracle[k]) <= 4.0 * r.var_phi0_se[k]);
}

TEST_CASE("flux decay summary on synthetic samples") {
    // Averages with variance 1/ell^2 in both components.
    std::vector<std::vector<std::vector<double>>> samples;
    const std::vector<int> ells{1, 2, 4};
    for (int r = 0; r < 400; ++r) {
        std::vector<std::vector<double>> row;
        for (int l : ells) {
            const double s = ((r % 2) ? 1.0 : -1.0) / double(l);
            row.push_back({s, -s, 2 * s, 0.0});
        }
        samples.push_back(row);
    }
    const auto f = summarize_flux_decay(ells, 8, 2, samples);
    CHECK(f.fit.exponent == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(f.variance[0] == doctest::Approx(400.0 / 399.0));
}

TEST_CASE("excess of affine fields vanishes") {
    const TorusGrid g(2, 8);
    SpaceTimeField u(-64.0, 1.0, g.size());
    for (int n = 0; n <= 64; ++n) {
        Field s(g.size());
        for (std::size_t x = 0; x < g.size(); ++x) s[x] = 3.0 + 0.5 * g.coord(x, 0) - 2.0 * g.coord(x, 1);
        u.append(s);
    }
    const auto e = excess_decay(g, u, {2, 4, 8});
    for (double v : e.excess) CHECK(v <= 1e-10);
    CHECK(e.gradient_bound[0] > 0.0);
}

TEST_CASE("excess of a spike follows the closed form") {
    const TorusGrid g(2, 8);
    const double dt = 1.0;
    SpaceTimeField u(-64.0, dt, g.size());
    const std::size_t o = g.index(Point{});
    for (int n = 0; n <= 64; ++n) {
        Field s(g.size());
        for (std::size_t x = 0; x < g.size(); ++x) s[x] = 0.25 * g.coord(x, 0);
        if (n == 63) s[o] += 1.0;
        u.append(s);
    }
    const std::vector<int> ls{2, 4, 8};
    const auto e = excess_decay(g, u, ls);
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < ls.size(); ++k) {
        const double l = ls[k];
        // Trapezoid weights over (-l^2, 0]: l^2 in total, interior slice weight 1.
        const double ref = oracle::spike_affine_residual(2, ls[k], 1.0, l * l) / l;
        CHECK(e.excess[k] == doctest::Approx(ref).epsilon(1e-9));
        xs.push_back(l);
        ys.push_back(e.excess[k]);
    }
    CHECK(fit_power_law(xs, ys).exponent == doctest::Approx(-3.0).epsilon(0.05));
}

TEST_CASE("linearization residual vanishes for the quadratic potential") {
    const auto m = linearization_modulus(Slope{0.2, 0.0}, {Slope{0.6, 0.0}, Slope{0.3, 0.1}}, 3,
                                         Potential::quadratic(), 2, NoiseSource(1, 0, 1.0));
    for (const auto& r : m.rows) CHECK(r.mean <= 1e-10);
}

TEST_CASE("slope stability") {
    const auto s = slope_stability_check(SlopePath::constant({0.2, 0.0}), SlopePath::constant({0.2, 0.0}), 3,
                                         Potential::soft_quartic(0.5), NoiseSource(1, 0, 1.0));
    CHECK(s.residual == 0.0);
    CHECK(s.slope_gap == 0.0);
    const auto t = slope_stability_check(SlopePath::constant({0.2, 0.0}), SlopePath::constant({0.5, 0.0}), 3,
                                         Potential::soft_quartic(0.5), NoiseSource(1, 0, 1.0));
    CHECK(t.slope_gap == doctest::Approx(0.3));
    CHECK(t.fitted_C >= 0.0);
}

TEST_CASE("tabulated effective gradient is monotone") {
    const auto Ds = tabulate_effective_gradient(Potential::quadratic(), 2, 2, 4, NoiseSource(1, 0, 1.0));
    const auto& t = Ds.table();
    CHECK(t.front() == 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] >= t[i - 1]);
    CHECK(Ds.grid().back() == doctest::Approx(1.5));
}

}
