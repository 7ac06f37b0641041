// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include "gradphi/occupation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gradphi/dynamics.hpp"
#include "gradphi/error.hpp"

namespace gradphi {

ProcessSpec ProcessSpec::from_json(const nlohmann::json& j) {
    ProcessSpec s;
    const std::string kind = j.value("process", std::string("brownian"));
    if (kind == "brownian") {
        s.kind = Kind::brownian;
    } else if (kind == "edge" || kind == "edge_gradient") {
        s.kind = Kind::edge_gradient;
    } else {
        throw ConfigError("unknown process '" + kind + "'");
    }
    s.horizon = j.value("horizon", 1.0);
    s.dt = j.value("dt", s.kind == Kind::brownian ? 1e-4 : 1e-3);
    if (j.contains("potential")) s.potential = j.at("potential");
    s.dim = j.value("dim", 2);
    s.L = j.value("L", 8);
    s.slope = j.value("slope", std::vector<double>{});
    s.axis = j.value("axis", 0);
    if (!(s.horizon > 0.0) || !(s.dt > 0.0)) throw ConfigError("horizon and dt must be positive");
    if (s.axis < 0 || s.axis >= s.dim) throw ConfigError("edge axis outside the dimension");
    return s;
}

nlohmann::json ProcessSpec::to_json() const {
    return {{"process", kind == Kind::brownian ? "brownian" : "edge"},
            {"horizon", horizon},
            {"dt", dt},
            {"potential", potential},
            {"dim", dim},
            {"L", L},
            {"slope", slope},
            {"axis", axis}};
}

std::vector<double> simulate_path(const ProcessSpec& spec, const NoiseSource& src) {
    const std::int64_t steps = step_count(spec.horizon, spec.dt);
    std::vector<double> path;
    path.reserve(std::size_t(steps + 1));
    if (spec.kind == ProcessSpec::Kind::brownian) {
        const auto s = src.with_stream(Stream::scalar);
        const double amp = std::sqrt(spec.dt);
        double x = 0.0;
        path.push_back(x);
        for (std::int64_t k = 0; k < steps; ++k) {
            x += amp * s.increment(0, k);
            path.push_back(x);
        }
        return path;
    }
    const Potential V = Potential::from_json(spec.potential);
    const TorusGrid g(spec.dim, spec.L);
    Slope p = spec.slope.empty() ? Slope(std::size_t(spec.dim), 0.0) : spec.slope;
    if (int(p.size()) != spec.dim) throw ConfigError("slope dimension differs from dim");
    const std::size_t o = g.index(Point{});
    const std::size_t e = g.forward(o, spec.axis);
    const double pa = p[std::size_t(spec.axis)];
    RunOptions opt;
    opt.dt = spec.dt;
    opt.record_stride = 0;
    opt.observer = [&](std::int64_t, double, std::span<const double> u) { path.push_back(pa + u[e] - u[o]); };
    run_stationary_periodic(g, p, V, src.with_stream(Stream::dynamics), double(spec.L) * double(spec.L),
                            double(steps) * spec.dt, opt);
    return path;
}

double occupation_time(std::span<const double> path, double dt, double eps) {
    if (path.empty()) return 0.0;
    // Count in half units so that the sum is exact.
    std::int64_t halves = 0;
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (std::abs(path[k]) < eps) halves += (k == 0 || k + 1 == path.size()) ? 1 : 2;
    }
    return 0.5 * double(halves) * dt;
}

IntervalSet::IntervalSet(std::vector<std::pair<double, double>> pieces) {
    if (pieces.size() > 32) throw std::invalid_argument("at most 32 intervals");
    std::vector<std::pair<double, double>> v;
    for (auto& p : pieces) {
        if (p.second > p.first) v.push_back(p);
    }
    std::sort(v.begin(), v.end());
    for (auto& p : v) {
        if (!pieces_.empty() && p.first <= pieces_.back().second) {
            pieces_.back().second = std::max(pieces_.back().second, p.second);
        } else {
            pieces_.push_back(p);
        }
    }
}

bool IntervalSet::contains(double x) const {
    for (const auto& p : pieces_) {
        if (x >= p.first && x < p.second) return true;
    }
    return false;
}

double IntervalSet::measure() const {
    double m = 0.0;
    for (const auto& p : pieces_) m += p.second - p.first;
    return m;
}

double occupation_time(std::span<const double> path, double dt, const IntervalSet& A) {
    std::int64_t halves = 0;
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (A.contains(path[k])) halves += (k == 0 || k + 1 == path.size()) ? 1 : 2;
    }
    return 0.5 * double(halves) * dt;
}

nlohmann::json OccupationReport::to_json() const {
    return {{"eps", eps},
            {"mean", mean},
            {"se", se},
            {"q90", q90},
            {"replicas", replicas},
            {"horizon", horizon},
            {"fit", fit.to_json()},
            {"relative_intercept", relative_intercept}};
}

OccupationReport occupation_experiment(const ProcessSpec& spec, const std::vector<double>& eps, int replicas,
                                       const NoiseSource& src, int threads) {
    if (eps.size() < 3) throw std::invalid_argument("occupation fit needs at least three thresholds");
    if (replicas < 2) throw std::invalid_argument("need at least two replicas");
    std::vector<std::vector<double>> occ(eps.size(), std::vector<double>(static_cast<std::size_t>(replicas)));
    parallel_for(std::size_t(replicas), threads, [&](std::size_t r) {
        const auto path = simulate_path(spec, src.with_replica(std::uint32_t(r)));
        for (std::size_t k = 0; k < eps.size(); ++k) occ[k][r] = occupation_time(path, spec.dt, eps[k]);
    });
    OccupationReport rep;
    rep.eps = eps;
    rep.replicas = replicas;
    rep.horizon = spec.horizon;
    for (std::size_t k = 0; k < eps.size(); ++k) {
        const auto m = mean_se(occ[k]);
        rep.mean.push_back(m.mean);
        rep.se.push_back(m.se);
        std::vector<double> scaled(occ[k]);
        for (double& v : scaled) v /= eps[k] > 0.0 ? eps[k] : 1.0;
        rep.q90.push_back(quantile(std::move(scaled), 0.9));
    }
    rep.fit = fit_linear(eps, rep.mean);
    double avg = 0.0;
    for (double m : rep.mean) avg += m;
    avg /= double(rep.mean.size());
    rep.relative_intercept = avg > 0.0 ? std::abs(rep.fit.log_prefactor) / avg : 0.0;
    return rep;
}

MeanSE occupation_on_set(const ProcessSpec& spec, const IntervalSet& A, int replicas, const NoiseSource& src,
                         int threads) {
    if (replicas < 1) throw std::invalid_argument("need at least one replica");
    std::vector<double> occ(static_cast<std::size_t>(replicas));
    parallel_for(std::size_t(replicas), threads, [&](std::size_t r) {
        const auto path = simulate_path(spec, src.with_replica(std::uint32_t(r)));
        occ[r] = occupation_time(path, spec.dt, A);
    });
    return mean_se(occ);
}

}  // namespace gradphi
