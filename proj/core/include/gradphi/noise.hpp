// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
//
// Counter-based Gaussian increments. A draw is a pure function of
// (seed, stream, replica, site key, step), so trajectories do not depend on
// the order in which sites, replicas or threads are visited.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gradphi/lattice.hpp"

namespace gradphi {

using Philox4x32 = std::array<std::uint32_t, 4>;

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
inline Philox4x32 philox4x32_10(Philox4x32 ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint64_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        const std::uint64_t p0 = M0 * ctr[0];
        const std::uint64_t p1 = M1 * ctr[2];
        ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
               std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

// Wichura's AS241 (PPND16), relative accuracy about 1e-16.
inline double inverse_normal_cdf(double p) {
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num = ((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                                6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                              1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                            1.3314166789178437745e2) * r + 3.3871328727963666080e0;
        const double den = ((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                                3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                              5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                            4.2313330701600911252e1) * r + 1.0;
        return q * num / den;
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num = ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                            4.63033784615654529590e0) * r + 1.42343711074968357734e0;
        const double den = ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                            2.05319162663775882187e0) * r + 1.0;
        val = num / den;
    } else {
        r -= 5.0;
        const double num = ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                            5.46378491116411436990e0) * r + 6.65790464350110377720e0;
        const double den = ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                            5.99832206555887937690e-1) * r + 1.0;
        val = num / den;
    }
    return q < 0.0 ? -val : val;
}

// Independent families of draws under one seed.
enum class Stream : std::uint32_t {
    dynamics = 0,     // Brownian increments of the lattice dynamics
    initial = 1,      // initial-condition samples (GFF modes)
    scalar = 2,       // one-dimensional processes (occupation experiments)
};

class NoiseSource {
public:
    NoiseSource(std::uint64_t seed, std::uint32_t replica, double dt, Stream stream = Stream::dynamics);

    std::uint64_t seed() const { return seed_; }
    std::uint32_t replica() const { return replica_; }
    double dt() const { return dt_; }
    Stream stream() const { return stream_; }

    NoiseSource with_replica(std::uint32_t r) const { return NoiseSource(seed_, r, dt_, stream_); }
    NoiseSource with_stream(Stream s) const { return NoiseSource(seed_, replica_, dt_, s); }
    NoiseSource with_dt(double dt) const { return NoiseSource(seed_, replica_, dt, stream_); }

    // Standard normal for (site, step). Negative steps set the side flag, so
    // the two halves of a two-sided Brownian motion never share draws.
    double increment(std::uint32_t site, std::int64_t step) const {
        const std::uint64_t mag = step < 0 ? std::uint64_t(-(step + 1)) : std::uint64_t(step);
        const std::uint32_t side = step < 0 ? 0x80000000u : 0u;
        const Philox4x32 out = philox4x32_10(
            {site, replica_, std::uint32_t(mag), (std::uint32_t(mag >> 32) & 0x7fffffffu) | side}, key_);
        const std::uint64_t bits = (std::uint64_t(out[0]) << 32) | out[1];
        const double u = (double(bits >> 11) + 0.5) * 0x1.0p-53;
        return inverse_normal_cdf(u);
    }

    double brownian(std::uint32_t site, std::int64_t step) const { return std::sqrt(dt_) * increment(site, step); }

    void fill(std::span<const std::uint32_t> sites, std::int64_t step, std::span<double> out) const;

private:
    std::uint64_t seed_;
    std::uint32_t replica_;
    double dt_;
    Stream stream_;
    std::array<std::uint32_t, 2> key_;
};

// Packs lattice coordinates into a 32-bit site key: 10 bits per axis for
// d <= 3 (coordinates in [-512, 511]), 8 bits per axis for d = 4.
std::uint32_t site_key(const Point& x, int d);
std::vector<std::uint32_t> torus_site_keys(const TorusGrid& g);

// Increments minus their spatial mean.
std::vector<double> mean_subtracted(const NoiseSource& src, std::span<const std::uint32_t> sites, std::int64_t step);
void subtract_mean(std::span<double> values);

}  // namespace gradphi
