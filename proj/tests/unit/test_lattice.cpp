#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "gradphi/lattice.hpp"

using namespace gradphi;

TEST_SUITE("lattice") {

TEST_CASE("torus indexing round-trips and wraps") {
    for (int d = 2; d <= 4; ++d) {
        const TorusGrid g(d, 2);
        CHECK(g.size() == std::size_t(std::pow(5, d)));
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(g.index(g.point(i)) == i);
            for (int a = 0; a < d; ++a) {
                CHECK(g.backward(g.forward(i, a), a) == i);
                int axis = -1, sign = 0;
                CHECK(g.adjacent(i, g.forward(i, a), axis, sign));
                CHECK(axis == a);
                CHECK(sign == 1);
            }
        }
        Point p{};
        p[0] = 3;  // wraps to -2
        Point q{};
        q[0] = -2;
        CHECK(g.index(p) == g.index(q));
    }
}

TEST_CASE("box covers every site once when r >= L") {
    const TorusGrid g(2, 3);
    auto b = g.box(Point{}, 3);
    CHECK(b.size() == g.size());
    std::sort(b.begin(), b.end());
    CHECK(std::adjacent_find(b.begin(), b.end()) == b.end());
    CHECK(g.box(Point{}, 1).size() == 9);
}

TEST_CASE("edge fields are antisymmetric") {
    const TorusGrid g(2, 2);
    EdgeField f(2, g.size());
    for (std::size_t x = 0; x < g.size(); ++x) f.at(x, 1) = double(x) + 0.5;
    for (std::size_t x = 0; x < g.size(); ++x) {
        const std::size_t y = g.forward(x, 1);
        CHECK(f.directed(g, x, y) == -f.directed(g, y, x));
    }
}

TEST_CASE("summation by parts holds to round-off") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int d = 2; d <= 3; ++d) {
        const TorusGrid g(d, 3);
        Field u(g.size());
        EdgeField F(d, g.size());
        for (auto& v : u) v = U(rng);
        for (int a = 0; a < d; ++a) {
            for (std::size_t x = 0; x < g.size(); ++x) F.at(x, a) = U(rng);
        }
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t x = 0; x < g.size(); ++x) {
            lhs += u[x] * divergence(g, F, x);
            for (int a = 0; a < d; ++a) rhs += grad(g, u, x, g.forward(x, a)) * F.at(x, a);
        }
        CHECK(std::abs(lhs + rhs) <= 1e-12);
        // div grad = Laplacian
        const EdgeField G = gradient_field(g, u);
        for (std::size_t x = 0; x < g.size(); ++x) CHECK(divergence(g, G, x) == doctest::Approx(laplacian(g, u, x)));
    }
}

TEST_CASE("grad rejects non-edges") {
    const TorusGrid g(2, 2);
    Field u(g.size(), 0.0);
    CHECK_THROWS_AS(grad(g, u, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(1, 2), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(5, 2), std::invalid_argument);
}

TEST_CASE("dirichlet domain classifies sites") {
    const DirichletDomain D(2, 4);
    CHECK(D.size() == 25);
    CHECK(D.interior().size() == 9);
    CHECK(D.corners().size() == 4);
    CHECK(D.boundary().size() == 12);
    CHECK(D.eps() == 0.25);
    for (std::size_t i = 0; i < D.size(); ++i) CHECK(D.index(D.point(i)) == i);
    const DirichletDomain D3(3, 3);
    CHECK(D3.interior().size() == 8);
    CHECK(D3.boundary().size() == 6 * 4);
}

TEST_CASE("step counts are exact on multiples") {
    CHECK(step_count(1.0, 0.1) == 10);
    CHECK(step_count(1.0, 0.125) == 8);
    CHECK(step_count(1.05, 0.1) == 11);
    CHECK(step_count(0.0, 0.1) == 0);
}

TEST_CASE("triadic partition tiles the cylinder") {
    CHECK(pow3(0) == 1);
    CHECK(pow3(4) == 81);
    for (int d = 2; d <= 3; ++d) {
        for (int m = 0; m <= 2; ++m) {
            const auto cells = partition_cells(m, 2, d);
            const double expect = std::pow(3.0, double(d * (2 - m))) * std::pow(9.0, 2 - m);
            CHECK(double(cells.size()) == expect);
        }
    }
}

TEST_CASE("cylinder average of a constant field") {
    const TorusGrid g(2, 2);
    SpaceTimeField f(-4.0, 0.5, g.size());
    for (int n = 0; n <= 8; ++n) f.append(Field(g.size(), 2.5));
    CHECK(cylinder_average(f, g, Cylinder::standard(2)) == doctest::Approx(2.5).epsilon(1e-14));
    Cylinder Q = Cylinder::standard(1);
    CHECK(Q.site_count(g) == 9);
    CHECK(Q.volume(g) == doctest::Approx(9.0));
}

}
