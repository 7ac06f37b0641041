// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace oracle {

namespace {

constexpr double kPi = std::numbers::pi;

// Visits every frequency tuple m != 0 of the side-n torus.
template <class F>
void for_frequencies(int d, int n, F&& f) {
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= std::size_t(n);
    std::vector<int> m(static_cast<std::size_t>(d));
    for (std::size_t i = 1; i < total; ++i) {
        std::size_t rem = i;
        double lam = 0.0;
        for (int a = 0; a < d; ++a) {
            m[std::size_t(a)] = int(rem % std::size_t(n));
            rem /= std::size_t(n);
            lam += 2.0 - 2.0 * std::cos(2.0 * kPi * m[std::size_t(a)] / n);
        }
        f(m, lam);
    }
}

double phase(const std::vector<int>& m, const std::vector<int>& h, int n) {
    double th = 0.0;
    for (std::size_t a = 0; a < m.size(); ++a) th += 2.0 * kPi * double(m[a]) * double(h[a]) / double(n);
    return std::cos(th);
}

}  // namespace

double spectral_heat_kernel(int d, int n, double dt, std::int64_t k, const std::vector<int>& offset) {
    double s = 0.0;
    for_frequencies(d, n, [&](const std::vector<int>& m, double lam) {
        s += std::pow(1.0 - dt * lam, double(k)) * phase(m, offset, n);
    });
    return s / std::pow(double(n), d);
}

double scheme_gff_covariance(int d, int n, double dt, std::int64_t K, const std::vector<int>& h) {
    double s = 0.0;
    for_frequencies(d, n, [&](const std::vector<int>& m, double lam) {
        const double r = 1.0 - dt * lam;
        const double r2K = std::pow(r * r, double(K));
        // Initial variance decays as r^{2K}; each step adds 2 dt r^{2j}.
        double added = 0.0;
        for (std::int64_t j = 0; j < K; ++j) added += 2.0 * dt * std::pow(r * r, double(j));
        s += (r2K / lam + added) * phase(m, h, n);
    });
    return s / std::pow(double(n), d);
}

double gff_covariance(int d, int n, const std::vector<int>& h) {
    double s = 0.0;
    for_frequencies(d, n, [&](const std::vector<int>& m, double lam) { s += phase(m, h, n) / lam; });
    return s / std::pow(double(n), d);
}

double dense_corrector_variance(int d, int n, double dt, std::int64_t K) {
    int S = 1;
    for (int a = 0; a < d; ++a) S *= n;
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(S, S);
    for (int x = 0; x < S; ++x) {
        int stride = 1;
        for (int a = d - 1; a >= 0; --a) {
            const int c = (x / stride) % n;
            const int up = x + ((c + 1) % n - c) * stride;
            const int dn = x + ((c + n - 1) % n - c) * stride;
            M(x, x) -= 2.0 * dt;
            M(x, up) += dt;
            M(x, dn) += dt;
            stride *= n;
        }
    }
    const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(S, S) - Eigen::MatrixXd::Constant(S, S, 1.0 / S);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(S, S);
    for (std::int64_t k = 0; k < K; ++k) C = M * C * M.transpose() + 2.0 * dt * P;
    return C.trace() / S;
}

double dense_dual_norm(int d, int side, int nt, double h, const std::vector<double>& values) {
    int S = 1;
    for (int a = 0; a < d; ++a) S *= side;
    if (values.size() != std::size_t(S) * std::size_t(nt)) throw std::invalid_argument("size");
    // A = side^{-2} I - Dirichlet Laplacian (zero outside the box).
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(S, S) / double(side * side);
    for (int x = 0; x < S; ++x) {
        int rem = x, stride = 1;
        std::vector<int> c(static_cast<std::size_t>(d));
        for (int a = d - 1; a >= 0; --a) {
            c[std::size_t(a)] = rem % side;
            rem /= side;
        }
        for (int a = d - 1; a >= 0; --a) {
            A(x, x) += 2.0;
            if (c[std::size_t(a)] + 1 < side) A(x, x + stride) -= 1.0;
            if (c[std::size_t(a)] > 0) A(x, x - stride) -= 1.0;
            stride *= side;
        }
    }
    const Eigen::MatrixXd Ainv = A.inverse();
    // v_0 = 0; v_1..v_nt free. Quadratic form sum_n h [v_n A v_n + dv_n A^{-1} dv_n / h^2].
    const int N = S * nt;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
    for (int n = 0; n < nt; ++n) {
        K.block(n * S, n * S, S, S) += h * A;
        // (v_n - v_{n-1}) term.
        K.block(n * S, n * S, S, S) += Ainv / h;
        if (n > 0) {
            K.block((n - 1) * S, (n - 1) * S, S, S) += Ainv / h;
            K.block(n * S, (n - 1) * S, S, S) -= Ainv / h;
            K.block((n - 1) * S, n * S, S, S) -= Ainv / h;
        }
    }
    const double vol = h * double(nt) * double(S);
    Eigen::VectorXd f(N);
    for (int i = 0; i < N; ++i) f(i) = values[std::size_t(i)];
    // sup (h/vol) f.v / sqrt(K/vol) = sqrt(h^2/vol f K^{-1} f).
    const Eigen::VectorXd y = K.ldlt().solve(f);
    return std::sqrt(h * h / vol * f.dot(y));
}

std::vector<double> dense_path_eigenvalues(int n) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        M(i, i) = 2.0;
        if (i + 1 < n) M(i, i + 1) = M(i + 1, i) = -1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const auto ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

std::vector<double> brownian_occupation(const std::vector<double>& eps, double T, double dt, int replicas,
                                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    const auto steps = std::int64_t(std::llround(T / dt));
    std::vector<double> acc(eps.size(), 0.0);
    const double amp = std::sqrt(dt);
    for (int r = 0; r < replicas; ++r) {
        double x = 0.0;
        for (std::int64_t k = 0; k <= steps; ++k) {
            const double w = (k == 0 || k == steps) ? 0.5 * dt : dt;
            for (std::size_t i = 0; i < eps.size(); ++i) {
                if (std::abs(x) < eps[i]) acc[i] += w;
            }
            if (k < steps) x += amp * z(rng);
        }
    }
    for (double& a : acc) a /= double(replicas);
    return acc;
}

double spike_affine_residual(int d, int l, double w, double W) {
    // On the symmetric box the coordinate regressors are orthogonal to the
    // constant and vanish at the origin, so only the mean is removed.
    const double N = std::pow(2.0 * l + 1.0, d);
    const double total = N * W;
    return std::sqrt(w * (1.0 - w / total) / total);
}

}  // namespace oracle
