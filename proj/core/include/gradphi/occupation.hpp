// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradphi/noise.hpp"
#include "gradphi/stats.hpp"

namespace gradphi {

// The scalar process whose occupation is measured: a standard Brownian
// motion from 0, or the gradient p_axis + u(e_axis) - u(0) of the stationary
// slope-p dynamic.
struct ProcessSpec {
    enum class Kind { brownian, edge_gradient };
    Kind kind = Kind::brownian;
    double horizon = 1.0;
    double dt = 1e-4;
    nlohmann::json potential = {{"kind", "quadratic"}};
    int dim = 2;
    int L = 8;
    std::vector<double> slope;  // empty means 0
    int axis = 0;

    static ProcessSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// Sampled path X(k dt), k = 0..horizon/dt.
std::vector<double> simulate_path(const ProcessSpec& spec, const NoiseSource& src);

// Trapezoid rule for int 1{|X| < eps} dt over the sampled path.
double occupation_time(std::span<const double> path, double dt, double eps);

// Finite union of intervals, normalized to disjoint sorted pieces.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::vector<std::pair<double, double>> pieces);

    bool contains(double x) const;
    double measure() const;
    const std::vector<std::pair<double, double>>& pieces() const { return pieces_; }

private:
    std::vector<std::pair<double, double>> pieces_;  // half-open [a, b)
};

double occupation_time(std::span<const double> path, double dt, const IntervalSet& A);

struct OccupationReport {
    std::vector<double> eps;
    std::vector<double> mean, se, q90;  // q90: 90% quantile of occupation / eps
    int replicas = 0;
    double horizon = 1.0;
    FitResult fit;                 // mean = a + b eps
    double relative_intercept = 0.0;  // |a| / (mean of the means)

    nlohmann::json to_json() const;
};

OccupationReport occupation_experiment(const ProcessSpec& spec, const std::vector<double>& eps, int replicas,
                                       const NoiseSource& src, int threads = 1);

MeanSE occupation_on_set(const ProcessSpec& spec, const IntervalSet& A, int replicas, const NoiseSource& src,
                         int threads = 1);

}  // namespace gradphi
