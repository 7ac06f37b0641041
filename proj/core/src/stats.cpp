// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include "gradphi/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace gradphi {

nlohmann::json FitResult::to_json() const {
    return {{"exponent", exponent}, {"log_prefactor", log_prefactor}, {"r2", r2},
            {"slope_se", slope_se}, {"intercept_se", intercept_se},   {"residuals", residuals}};
}

FitResult fit_linear(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("fit needs at least two points");
    const double n = double(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit needs distinct abscissae");
    FitResult f;
    f.exponent = sxy / sxx;
    f.log_prefactor = my - f.exponent * mx;
    double sse = 0.0;
    f.residuals.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        f.residuals[i] = ys[i] - (f.log_prefactor + f.exponent * xs[i]);
        sse += f.residuals[i] * f.residuals[i];
    }
    f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    if (xs.size() > 2) {
        const double s2 = sse / (n - 2.0);
        f.slope_se = std::sqrt(s2 / sxx);
        f.intercept_se = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    }
    return f;
}

FitResult fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 3) throw std::invalid_argument("power-law fit needs at least three points");
    std::vector<double> lx(xs.size()), ly(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw std::invalid_argument("power-law fit needs positive data");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    return fit_linear(lx, ly);
}

MeanSE mean_se(const std::vector<double>& xs) {
    MeanSE m;
    m.n = xs.size();
    if (xs.empty()) return m;
    for (double x : xs) m.mean += x;
    m.mean /= double(xs.size());
    if (xs.size() < 2) return m;
    double s = 0.0;
    for (double x : xs) s += (x - m.mean) * (x - m.mean);
    m.variance = s / double(xs.size() - 1);
    m.se = std::sqrt(m.variance / double(xs.size()));
    return m;
}

MeanSE variance_jackknife(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n < 3) throw std::invalid_argument("jackknife needs at least three samples");
    double s1 = 0.0, s2 = 0.0;
    for (double x : xs) {
        s1 += x;
        s2 += x * x;
    }
    auto var_of = [](double a, double b, double k) { return (b - a * a / k) / (k - 1.0); };
    MeanSE out;
    out.n = n;
    out.mean = var_of(s1, s2, double(n));
    std::vector<double> loo(n);
    double mloo = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        loo[i] = var_of(s1 - xs[i], s2 - xs[i] * xs[i], double(n - 1));
        mloo += loo[i];
    }
    mloo /= double(n);
    double acc = 0.0;
    for (double v : loo) acc += (v - mloo) * (v - mloo);
    out.se = std::sqrt(double(n - 1) / double(n) * acc);
    out.variance = out.se * out.se;
    return out;
}

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::sort(xs.begin(), xs.end());
    const double pos = std::clamp(q, 0.0, 1.0) * double(xs.size() - 1);
    const std::size_t i = std::size_t(pos);
    if (i + 1 >= xs.size()) return xs.back();
    const double w = pos - double(i);
    return (1.0 - w) * xs[i] + w * xs[i + 1];
}

int resolve_threads(int threads) {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
    const int workers = std::min<int>(resolve_threads(threads), int(std::max<std::size_t>(count, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first;
    std::mutex mu;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first) first = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

}  // namespace gradphi
