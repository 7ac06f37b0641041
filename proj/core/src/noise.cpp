// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include "gradphi/noise.hpp"

#include <stdexcept>

namespace gradphi {

namespace {

// splitmix64 finalizer, only used to spread (seed, stream) over the key.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

NoiseSource::NoiseSource(std::uint64_t seed, std::uint32_t replica, double dt, Stream stream)
    : seed_(seed), replica_(replica), dt_(dt), stream_(stream) {
    const std::uint64_t k = mix64(seed ^ mix64(std::uint64_t(stream) + 1));
    key_ = {std::uint32_t(k), std::uint32_t(k >> 32)};
}

void NoiseSource::fill(std::span<const std::uint32_t> sites, std::int64_t step, std::span<double> out) const {
    for (std::size_t i = 0; i < sites.size(); ++i) out[i] = increment(sites[i], step);
}

std::uint32_t site_key(const Point& x, int d) {
    const int bits = d <= 3 ? 10 : 8;
    const int half = 1 << (bits - 1);
    std::uint32_t key = 0;
    for (int a = 0; a < d; ++a) {
        const int c = x[a] + half;
        if (c < 0 || c >= 2 * half) throw std::out_of_range("site coordinate does not fit the noise key");
        key = (key << bits) | std::uint32_t(c);
    }
    return key;
}

std::vector<std::uint32_t> torus_site_keys(const TorusGrid& g) {
    std::vector<std::uint32_t> keys(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) keys[i] = site_key(g.point(i), g.dim());
    return keys;
}

void subtract_mean(std::span<double> values) {
    double s = 0.0;
    for (double v : values) s += v;
    const double m = s / double(values.size());
    for (double& v : values) v -= m;
}

std::vector<double> mean_subtracted(const NoiseSource& src, std::span<const std::uint32_t> sites, std::int64_t step) {
    if (sites.size() < 2) throw std::invalid_argument("mean subtraction needs at least two sites");
    std::vector<double> out(sites.size());
    src.fill(sites, step, out);
    subtract_mean(out);
    return out;
}

}  // namespace gradphi
