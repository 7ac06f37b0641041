// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include "gradphi/norms.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gradphi {

namespace {

// Trapezoid weights of the slices n0..n1 (in units of dt).
std::vector<double> trapezoid(std::size_t n0, std::size_t n1) {
    std::vector<double> w(n1 - n0 + 1, 1.0);
    if (n0 == n1) return w;
    w.front() = 0.5;
    w.back() = 0.5;
    return w;
}

}  // namespace

double lp_norm(const SpaceTimeField& f, const TorusGrid& g, const Cylinder& Q, double p, bool normalized) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm requires p >= 1");
    const std::size_t n0 = f.nearest_slice(Q.t_lo), n1 = f.nearest_slice(Q.t_hi);
    const auto sites = g.box(Q.center, Q.radius);
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t n = n0; n <= n1; ++n) {
            const auto s = f.slice(n);
            for (auto x : sites) m = std::max(m, std::abs(s[x]));
        }
        return m;
    }
    const auto w = trapezoid(n0, n1);
    double acc = 0.0;
    for (std::size_t n = n0; n <= n1; ++n) {
        const auto s = f.slice(n);
        double row = 0.0;
        for (auto x : sites) row += std::pow(std::abs(s[x]), p);
        acc += w[n - n0] * row;
    }
    // A single slice is treated as a unit-duration sample.
    const double dt = n0 == n1 ? 1.0 : f.dt();
    acc *= dt;
    if (normalized) acc /= (n0 == n1 ? 1.0 : double(n1 - n0) * f.dt()) * double(sites.size());
    return std::pow(acc, 1.0 / p);
}

double holder_seminorm(const SpaceTimeField& f, const TorusGrid& g, const Cylinder& Q, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
    const std::size_t n0 = f.nearest_slice(Q.t_lo), n1 = f.nearest_slice(Q.t_hi);
    const auto sites = g.box(Q.center, Q.radius);
    const int d = g.dim();
    // Lift coordinates relative to the box center so that wrapped boxes
    // measure distances without jumps.
    std::vector<std::array<double, kMaxDim>> pos(sites.size());
    const int r = (Q.radius < 0 || Q.radius >= g.radius()) ? g.radius() : Q.radius;
    const int w = 2 * r + 1;
    for (std::size_t k = 0; k < sites.size(); ++k) {
        std::size_t rem = k;
        for (int a = d - 1; a >= 0; --a) {
            pos[k][a] = double(int(rem % std::size_t(w)) - r);
            rem /= std::size_t(w);
        }
    }
    double best = 0.0;
    for (std::size_t n = n0; n <= n1; ++n) {
        for (std::size_t m = n; m <= n1; ++m) {
            const double dtm = std::pow(std::abs(f.time(m) - f.time(n)), alpha / 2.0);
            const auto a = f.slice(n), b = f.slice(m);
            for (std::size_t i = 0; i < sites.size(); ++i) {
                for (std::size_t j = (m == n ? i + 1 : 0); j < sites.size(); ++j) {
                    double dist2 = 0.0;
                    for (int ax = 0; ax < d; ++ax) dist2 += (pos[i][ax] - pos[j][ax]) * (pos[i][ax] - pos[j][ax]);
                    const double den = dtm + std::pow(std::sqrt(dist2), alpha);
                    if (den <= 0.0) continue;
                    best = std::max(best, std::abs(a[sites[i]] - b[sites[j]]) / den);
                }
            }
        }
    }
    return best;
}

ParabolicSample ParabolicSample::zeros(int dim, int side, int nt, double h) {
    if (dim < 1 || side < 1 || nt < 1 || !(h > 0.0)) throw std::invalid_argument("bad parabolic sample shape");
    ParabolicSample s;
    s.dim = dim;
    s.side = side;
    s.nt = nt;
    s.h = h;
    s.values.assign(std::size_t(nt) * s.sites(), 0.0);
    return s;
}

std::size_t ParabolicSample::sites() const {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= std::size_t(side);
    return n;
}

double ParabolicSample::normalized_l2() const {
    double acc = 0.0;
    for (double v : values) acc += v * v;
    return std::sqrt(acc / double(values.size()));
}

double multiscale_estimate(const ParabolicSample& f) {
    if (f.values.size() != std::size_t(f.nt) * f.sites()) throw std::invalid_argument("sample size mismatch");
    double total = f.normalized_l2();
    const std::size_t S = f.sites();
    for (int k = 0;; ++k) {
        const std::int64_t side_k = pow3(k);
        const double dur_k = double(side_k * side_k);
        if (side_k > f.side || dur_k > f.duration() * (1.0 + 1e-12)) break;
        const int per_axis = int(f.side / side_k);
        // Slices per time cell; cells shorter than a slice see one slice.
        const int r = std::max(1, int(std::llround(dur_k / f.h)));
        const int t_cells = f.nt / r;
        std::size_t spatial = 1;
        for (int a = 0; a < f.dim; ++a) spatial *= std::size_t(per_axis);
        std::vector<double> sums(std::size_t(t_cells) * spatial, 0.0);
        const int first = f.nt - t_cells * r;  // align cells to the final time
        for (int n = first; n < f.nt; ++n) {
            const int tc = (n - first) / r;
            for (std::size_t x = 0; x < S; ++x) {
                std::size_t rem = x, cell = 0;
                bool inside = true;
                std::size_t mult = 1;
                for (int a = f.dim - 1; a >= 0; --a) {
                    const int c = int(rem % std::size_t(f.side));
                    rem /= std::size_t(f.side);
                    const int ci = c / int(side_k);
                    if (ci >= per_axis) {
                        inside = false;
                        break;
                    }
                    cell += std::size_t(ci) * mult;
                    mult *= std::size_t(per_axis);
                }
                if (inside) sums[std::size_t(tc) * spatial + cell] += f.at(n, x);
            }
        }
        double cells_per = double(r);
        for (int a = 0; a < f.dim; ++a) cells_per *= double(side_k);
        double ms = 0.0;
        for (double s : sums) ms += (s / cells_per) * (s / cells_per);
        ms /= double(sums.size());
        total += double(side_k) * std::sqrt(ms);
    }
    return total;
}

double hminus1_par_multiscale(const ParabolicSample& f, int m) {
    if (m < 0) throw std::invalid_argument("scale exponent must be nonnegative");
    const std::int64_t side = pow3(m);
    if (f.side != side || std::abs(f.duration() - double(side * side)) > 1e-9 * double(side * side)) {
        throw std::invalid_argument("sample is not the triadic cylinder of this scale");
    }
    return multiscale_estimate(f);
}

std::vector<double> dirichlet_sine_basis(int n) {
    std::vector<double> B(std::size_t(n) * std::size_t(n));
    const double c = std::sqrt(2.0 / double(n + 1));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            B[std::size_t(i) * n + j] = c * std::sin(std::numbers::pi * double(i + 1) * double(j + 1) / double(n + 1));
        }
    }
    return B;
}

double dirichlet_path_eigenvalue(int n, int j) {
    return 2.0 - 2.0 * std::cos(std::numbers::pi * double(j + 1) / double(n + 1));
}

DualNormResult hminus1_par_exact(const ParabolicSample& f) {
    if (f.values.size() != std::size_t(f.nt) * f.sites()) throw std::invalid_argument("sample size mismatch");
    const int n = f.side, d = f.dim;
    const std::size_t S = f.sites();
    const auto B = dirichlet_sine_basis(n);
    // Spatial analysis of every slice (the basis is symmetric).
    std::vector<double> hat = f.values;
    std::vector<double> buf(static_cast<std::size_t>(n)), res(static_cast<std::size_t>(n));
    for (int t = 0; t < f.nt; ++t) {
        double* slice = hat.data() + std::size_t(t) * S;
        std::size_t stride = 1;
        for (int a = d - 1; a >= 0; --a) {
            for (std::size_t base = 0; base < S; ++base) {
                if ((base / stride) % std::size_t(n) != 0) continue;
                for (int i = 0; i < n; ++i) buf[i] = slice[base + std::size_t(i) * stride];
                for (int i = 0; i < n; ++i) {
                    double acc = 0.0;
                    for (int j = 0; j < n; ++j) acc += B[std::size_t(i) * n + j] * buf[j];
                    res[i] = acc;
                }
                for (int i = 0; i < n; ++i) slice[base + std::size_t(i) * stride] = res[i];
            }
            stride *= std::size_t(n);
        }
    }
    const double Lside = double(n);
    const double inv_h2 = 1.0 / (f.h * f.h);
    const int T = f.nt;
    std::vector<double> diag(T), off(T), rhs(T), c(T);
    double acc = 0.0;
    for (std::size_t mode = 0; mode < S; ++mode) {
        double mu = 0.0;
        std::size_t rem = mode;
        for (int a = 0; a < d; ++a) {
            mu += dirichlet_path_eigenvalue(n, int(rem % std::size_t(n)));
            rem /= std::size_t(n);
        }
        const double alpha = 1.0 / (Lside * Lside) + mu;
        // M = alpha I + (1/alpha) D^T D, D = (I - shift)/h with v_0 = 0.
        for (int t = 0; t < T; ++t) {
            diag[t] = alpha + (t == T - 1 ? 1.0 : 2.0) * inv_h2 / alpha;
            off[t] = -inv_h2 / alpha;
            rhs[t] = hat[std::size_t(t) * S + mode];
        }
        // Thomas algorithm on the symmetric tridiagonal system.
        c[0] = off[0] / diag[0];
        rhs[0] /= diag[0];
        for (int t = 1; t < T; ++t) {
            const double m = diag[t] - off[t - 1] * c[t - 1];
            c[t] = off[t] / m;
            rhs[t] = (rhs[t] - off[t - 1] * rhs[t - 1]) / m;
        }
        for (int t = T - 2; t >= 0; --t) rhs[t] -= c[t] * rhs[t + 1];
        for (int t = 0; t < T; ++t) acc += hat[std::size_t(t) * S + mode] * rhs[t];
    }
    DualNormResult out;
    out.value = std::sqrt(std::max(0.0, acc * f.h / f.volume()));
    out.converged = std::isfinite(out.value);
    out.iterations = 1;
    return out;
}

}  // namespace gradphi
