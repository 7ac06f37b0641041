#include <doctest.h>

#include <cmath>
#include <set>

#include <boost/math/special_functions/erf.hpp>

#include "gradphi/noise.hpp"

using namespace gradphi;

TEST_SUITE("noise") {

// Known-answer vectors distributed with the Random123 library.
TEST_CASE("philox4x32-10 known answers") {
    using A = Philox4x32;
    CHECK(philox4x32_10(A{0, 0, 0, 0}, {0, 0}) == A{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32_10(A{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          A{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32_10(A{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          A{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("inverse normal cdf agrees with boost") {
    for (double p : {1e-300, 1e-100, 1e-20, 1e-8, 1e-3, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.9, 0.975, 1 - 1e-9}) {
        const double ref = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
        CHECK(inverse_normal_cdf(p) == doctest::Approx(ref).epsilon(1e-14).scale(1.0));
    }
    CHECK(inverse_normal_cdf(0.5) == 0.0);
    CHECK(inverse_normal_cdf(0.25) == doctest::Approx(-inverse_normal_cdf(0.75)).epsilon(1e-14));
}

TEST_CASE("increments are pure functions of their coordinates") {
    const NoiseSource a(7, 3, 0.01), b(7, 3, 0.01);
    CHECK(a.increment(12, 99) == b.increment(12, 99));
    CHECK(a.increment(12, -5) == b.increment(12, -5));
    CHECK(a.increment(12, 4) != a.increment(12, -5));
    CHECK(a.increment(12, 4) != a.with_replica(4).increment(12, 4));
    CHECK(a.increment(12, 4) != a.with_stream(Stream::initial).increment(12, 4));
    CHECK(a.increment(12, 4) != NoiseSource(8, 3, 0.01).increment(12, 4));
    CHECK(a.brownian(1, 2) == doctest::Approx(0.1 * a.increment(1, 2)));
}

TEST_CASE("increments have standard normal moments") {
    const NoiseSource s(123, 0, 1.0);
    const int n = 200000;
    double m1 = 0, m2 = 0, m4 = 0;
    for (int k = 0; k < n; ++k) {
        const double z = s.increment(std::uint32_t(k % 97), k / 97);
        m1 += z;
        m2 += z * z;
        m4 += z * z * z * z;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    // 5 standard errors: sd(z) = 1, sd(z^2) = sqrt(2), sd(z^4) = sqrt(96).
    CHECK(std::abs(m1) < 5.0 / std::sqrt(n));
    CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("site keys are injective on a box") {
    for (int d = 2; d <= 4; ++d) {
        const TorusGrid g(d, d == 4 ? 3 : 6);
        const auto keys = torus_site_keys(g);
        std::set<std::uint32_t> uniq(keys.begin(), keys.end());
        CHECK(uniq.size() == g.size());
    }
}

TEST_CASE("mean subtraction") {
    const TorusGrid g(2, 3);
    const auto keys = torus_site_keys(g);
    const NoiseSource s(1, 0, 1.0);
    const auto v = mean_subtracted(s, keys, 5);
    double sum = 0.0;
    for (double x : v) sum += x;
    CHECK(std::abs(sum) < 1e-12);
    std::vector<double> out(keys.size());
    s.fill(keys, 5, out);
    CHECK(out[3] == s.increment(keys[3], 5));
}

}
