// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

namespace gradphi {

struct FitResult {
    double exponent = 0.0;      // slope of the fit
    double log_prefactor = 0.0; // intercept of the fit
    double r2 = 1.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
    std::vector<double> residuals;

    nlohmann::json to_json() const;
};

// Ordinary least squares y = a + b x.
FitResult fit_linear(const std::vector<double>& xs, const std::vector<double>& ys);

// Least squares on (log x, log y); needs >= 3 strictly positive points.
FitResult fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys);

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    double variance = 0.0;  // unbiased sample variance
    std::size_t n = 0;
};

MeanSE mean_se(const std::vector<double>& xs);

// Sample variance with its delete-one jackknife standard error.
MeanSE variance_jackknife(const std::vector<double>& xs);

// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> xs, double q);

// Runs task(r) for r = 0..count-1 on `threads` workers (0 = hardware).
// Results are written by index, so aggregation order never depends on the
// schedule. The first exception is rethrown after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

int resolve_threads(int threads);

}  // namespace gradphi
