// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "gradphi/homogenize.hpp"

namespace gradphi {

double bspline_bump(double s) {
    const double a = std::abs(s);
    if (a >= 2.0) return 0.0;
    if (a >= 1.0) return (2.0 - a) * (2.0 - a) * (2.0 - a) / 6.0;
    return 2.0 / 3.0 - a * a + 0.5 * a * a * a;
}

namespace {

bool has_forward_stencil(const DirichletDomain& D, const Point& k) {
    for (int a = 0; a < D.dim(); ++a) {
        if (k[a] < 0 || k[a] + 1 > D.cells(a)) return false;
    }
    return true;
}

bool in_boundary_layer(const DirichletDomain& D, const Point& y, int L_sites) {
    for (int a = 0; a < D.dim(); ++a) {
        if (y[a] <= L_sites || D.cells(a) - y[a] <= L_sites) return true;
    }
    return false;
}

// Slices of a record with time in (hi - T, hi], clipped to the record.
std::vector<std::size_t> slices_in(const SpaceTimeField& f, double hi, double T) {
    std::vector<std::size_t> out;
    const double tol = 1e-9 * f.dt();
    for (std::size_t n = 0; n < f.slices(); ++n) {
        const double t = f.time(n);
        if (t > hi - T + tol && t <= hi + tol) out.push_back(n);
    }
    // A window before the first slice falls back to the first slice.
    if (out.empty() && f.slices() > 0 && hi + tol >= f.time(0)) out.push_back(0);
    return out;
}

std::vector<std::size_t> box_sites(const DirichletDomain& D, const Point& c, int r, bool stencil) {
    std::vector<std::size_t> out;
    for (std::size_t x = 0; x < D.size(); ++x) {
        const Point k = D.point(x);
        bool in = true;
        for (int a = 0; a < D.dim() && in; ++a) in = std::abs(k[a] - c[a]) <= r;
        if (in && (!stencil || has_forward_stencil(D, k))) out.push_back(x);
    }
    return out;
}

// Index of the smallest Z_kappa time >= t.
std::size_t z_index(double t, double k2) {
    return std::size_t(std::max(0.0, std::floor(-t / k2 + 1e-9)));
}

}  // namespace

double TwoScaleExpansion::phi_at(std::size_t j, std::size_t n, const Point& x) const {
    if (phi.empty()) return 0.0;
    Point z{};
    const int R = 2 * L_sites;
    for (int a = 0; a < D->dim(); ++a) {
        z[a] = x[a] - Y[j][a];
        if (std::abs(z[a]) > R) return 0.0;
    }
    return phi[j].slice(n)[local.index(z)];
}

Slope TwoScaleExpansion::gradient_average(double t_hi, double T, const Point& center, int r) const {
    const int d = D->dim();
    Slope acc(std::size_t(d), 0.0);
    const auto ns = slices_in(ubar, t_hi, T);
    const auto xs = box_sites(*D, center, r, true);
    if (ns.empty() || xs.empty()) return acc;
    for (std::size_t n : ns) {
        const auto u = ubar.slice(n);
        for (std::size_t x : xs) {
            for (int a = 0; a < d; ++a) acc[a] += (u[x + D->stride(a)] - u[x]) / eps;
        }
    }
    for (double& v : acc) v /= double(ns.size() * xs.size());
    return acc;
}

double TwoScaleExpansion::gradient_gap(std::size_t n, std::size_t x, int a) const {
    const std::size_t x1 = x + D->stride(a);
    const auto ws = w.slice(n);
    double s = (ws[x1] - ws[x]) / eps;
    const Point k0 = D->point(x), k1 = D->point(x1);
    for (std::size_t j = 0; j < Y.size(); ++j) {
        const double c = 0.5 * (chi[j][x] + chi[j][x1]);
        if (c == 0.0) continue;
        const double gv = xi[j][n][a] + (phi_at(j, n, k1) - phi_at(j, n, k0));
        s -= c * gv;
    }
    return s;
}

double TwoScaleExpansion::remainder(std::size_t n, std::size_t x, int a) const {
    const std::size_t x1 = x + D->stride(a);
    const auto u = ubar.slice(n);
    double s = (u[x1] - u[x]) / eps;
    const Point k0 = D->point(x), k1 = D->point(x1);
    for (std::size_t j = 0; j < Y.size(); ++j) {
        const double c0 = chi[j][x], c1 = chi[j][x1];
        if (c0 == 0.0 && c1 == 0.0) continue;
        s -= 0.5 * (c0 + c1) * xi[j][n][a];
        s += (c1 - c0) * 0.5 * (phi_at(j, n, k0) + phi_at(j, n, k1));
    }
    return s;
}

TwoScaleExpansion build_two_scale(const DirichletDomain& D, const SpaceTimeField& ubar, const Potential& V,
                                  const NoiseSource& src, const TwoScaleOptions& opt) {
    const int d = D.dim();
    const double eps = D.eps();
    if (ubar.sites() != D.size() || ubar.slices() < 2) throw std::invalid_argument("homogenized field does not match");
    const double kappa = opt.kappa > 0.0 ? opt.kappa : std::sqrt(eps);
    if (!(kappa > eps && kappa < 1.0)) throw std::invalid_argument("mesoscale must lie in (eps, 1)");
    TwoScaleExpansion X;
    X.D = &D;
    X.eps = eps;
    X.L_sites = std::max(1, int(std::floor(kappa / eps + 1e-9)));
    X.kappa = double(X.L_sites) * eps;
    X.ubar = ubar;
    const int Ls = X.L_sites;

    // Centers and the tensor partition of unity.
    std::vector<std::vector<int>> centers(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
        for (int c = Ls; c <= D.cells(a) - 1; c += Ls) centers[a].push_back(c);
        if (centers[a].empty()) throw std::invalid_argument("mesoscale too large for the domain");
    }
    std::vector<std::vector<double>> w1(static_cast<std::size_t>(d));  // per axis: [center][coordinate]
    for (int a = 0; a < d; ++a) {
        const int n = D.cells(a) + 1;
        auto& w = w1[a];
        w.assign(centers[a].size() * std::size_t(n), 0.0);
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (std::size_t c = 0; c < centers[a].size(); ++c) {
                const double b = bspline_bump(double(k - centers[a][c]) / double(Ls));
                w[c * std::size_t(n) + std::size_t(k)] = b;
                s += b;
            }
            if (!(s > 0.0)) throw std::logic_error("partition of unity has a gap");
            for (std::size_t c = 0; c < centers[a].size(); ++c) w[c * std::size_t(n) + std::size_t(k)] /= s;
        }
    }
    std::vector<std::size_t> idx(std::size_t(d), 0);
    for (;;) {
        Point y{};
        for (int a = 0; a < d; ++a) y[a] = centers[a][idx[a]];
        X.Y.push_back(y);
        std::vector<double> c(D.size());
        for (std::size_t x = 0; x < D.size(); ++x) {
            const Point k = D.point(x);
            double v = 1.0;
            for (int a = 0; a < d; ++a) v *= w1[a][idx[a] * std::size_t(D.cells(a) + 1) + std::size_t(k[a])];
            c[x] = v;
        }
        X.chi.push_back(std::move(c));
        int a = d - 1;
        while (a >= 0 && ++idx[a] == centers[a].size()) idx[a--] = 0;
        if (a < 0) break;
    }

    // Z_kappa times and the local slopes.
    const double k2 = X.kappa * X.kappa;
    for (std::size_t j = 0;; ++j) {
        const double t = -double(j) * k2;
        if (t <= -1.0 + 1e-12) break;
        X.z_times.push_back(t);
    }
    const std::size_t S = ubar.slices();
    X.xi.assign(X.Y.size(), std::vector<Slope>(S, Slope(std::size_t(d), 0.0)));
    std::vector<std::map<std::size_t, Slope>> cell_xi(X.Y.size());
    for (std::size_t j = 0; j < X.Y.size(); ++j) {
        if (in_boundary_layer(D, X.Y[j], Ls)) continue;
        for (std::size_t n = 0; n < S; ++n) {
            const std::size_t zi = std::min(z_index(ubar.time(n), k2), X.z_times.size() - 1);
            auto it = cell_xi[j].find(zi);
            if (it == cell_xi[j].end()) {
                it = cell_xi[j].emplace(zi, X.gradient_average(X.z_times[zi], 4.0 * k2, X.Y[j], 2 * Ls)).first;
            }
            X.xi[j][n] = it->second;
        }
    }

    // Correctors on tori of radius 2 L_sites around each center.
    X.local = TorusGrid(d, 2 * Ls);
    const double N2 = 1.0 / (eps * eps);
    const double dt = opt.dt > 0.0 ? opt.dt : stable_dt(d, V.c_plus());
    if (std::abs(ubar.dt() - double(opt.record_stride) * dt * eps * eps) > 1e-12 * ubar.dt()) {
        throw std::invalid_argument("corrector record grid does not match the homogenized record");
    }
    if (!opt.zero_correctors) {
        X.phi.resize(X.Y.size());
        for (std::size_t j = 0; j < X.Y.size(); ++j) {
            // Piece for Z cell zi covers (t_{zi+1}, t_{zi}] in macroscopic time.
            std::vector<double> breaks;
            std::vector<Slope> slopes;
            for (std::size_t zi = X.z_times.size(); zi-- > 0;) {
                const double lo = zi + 1 < X.z_times.size() ? X.z_times[zi + 1] : -1.0;
                std::size_t n_rep = 0;
                bool found = false;
                for (std::size_t n = 0; n < S && !found; ++n) {
                    const double t = ubar.time(n);
                    if (t > lo + 1e-12 && std::min(z_index(t, k2), X.z_times.size() - 1) == zi) {
                        n_rep = n;
                        found = true;
                    }
                }
                breaks.push_back(breaks.empty() ? -N2 : lo * N2);
                slopes.push_back(found ? X.xi[j][n_rep] : Slope(std::size_t(d), 0.0));
            }
            RunOptions o;
            o.dt = dt;
            o.record_stride = opt.record_stride;
            for (int a = 0; a < d; ++a) o.key_offset[a] = X.Y[j][a];
            X.phi[j] = run_corrector(X.local, -N2, 0.0, SlopePath(breaks, slopes), V, src, o);
            if (X.phi[j].slices() != S) throw std::invalid_argument("corrector record length differs from the homogenized record");
        }
    }

    // w = ubar + eps sum chi_y phi_y.
    X.w = ubar;
    if (!X.phi.empty()) {
        const int R = 2 * Ls;
        for (std::size_t j = 0; j < X.Y.size(); ++j) {
            const auto sites = box_sites(D, X.Y[j], R, false);
            for (std::size_t n = 0; n < S; ++n) {
                auto ws = X.w.slice(n);
                for (std::size_t x : sites) {
                    const double c = X.chi[j][x];
                    if (c != 0.0) ws[x] += eps * c * X.phi_at(j, n, D.point(x));
                }
            }
        }
    }
    return X;
}

ErrorTerms error_terms(const TwoScaleExpansion& X, std::size_t time_index, std::size_t center) {
    if (time_index >= X.z_times.size() || center >= X.Y.size()) throw std::out_of_range("cell outside Z_kappa");
    const DirichletDomain& D = *X.D;
    const int d = D.dim();
    const int Ls = X.L_sites;
    const double k2 = X.kappa * X.kappa;
    ErrorTerms E;
    E.t = X.z_times[time_index];
    E.y = X.Y[center];
    const Slope xi_z = X.gradient_average(E.t, 4.0 * k2, E.y, 2 * Ls);
    std::vector<std::size_t> spatial;
    for (std::size_t j = 0; j < X.Y.size(); ++j) {
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) r2 += double(X.Y[j][a] - E.y[a]) * double(X.Y[j][a] - E.y[a]);
        if (r2 <= double(Ls) * double(Ls) + 1e-9) spatial.push_back(j);
    }
    const std::size_t lo = time_index == 0 ? 0 : time_index - 1;
    const std::size_t hi = std::min(time_index + 1, X.z_times.size() - 1);
    for (std::size_t ti = lo; ti <= hi; ++ti) {
        for (std::size_t j : spatial) {
            const double t = X.z_times[ti];
            const Slope xi_n = X.gradient_average(t, 4.0 * k2, X.Y[j], 2 * Ls);
            // ||grad ubar - xi_{z'}|| over z' + Q_kappa.
            const auto ns = slices_in(X.ubar, t, k2);
            const auto xs = box_sites(D, X.Y[j], Ls, true);
            double acc = 0.0;
            for (std::size_t n : ns) {
                const auto u = X.ubar.slice(n);
                for (std::size_t x : xs) {
                    for (int a = 0; a < d; ++a) {
                        const double e = (u[x + D.stride(a)] - u[x]) / X.eps - xi_n[a];
                        acc += e * e;
                    }
                }
            }
            if (!ns.empty() && !xs.empty()) E.gradient += std::sqrt(acc / double(ns.size() * xs.size()));
            double s = 0.0;
            for (int a = 0; a < d; ++a) s += (xi_z[a] - xi_n[a]) * (xi_z[a] - xi_n[a]);
            E.slope += std::sqrt(s);
        }
    }
    if (!X.phi.empty()) {
        const auto ns = slices_in(X.ubar, E.t, k2);
        const auto xs = box_sites(D, E.y, Ls, false);
        for (std::size_t j : spatial) {
            double acc = 0.0;
            for (std::size_t n : ns) {
                for (std::size_t x : xs) {
                    const double v = X.phi_at(j, n, D.point(x));
                    acc += v * v;
                }
            }
            if (!ns.empty() && !xs.empty()) E.corrector += X.eps / X.kappa * std::sqrt(acc / double(ns.size() * xs.size()));
        }
    }
    return E;
}

double error_aggregate(const TwoScaleExpansion& X) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < X.Y.size(); ++j) {
        if (in_boundary_layer(*X.D, X.Y[j], X.L_sites)) continue;
        for (std::size_t ti = 0; ti < X.z_times.size(); ++ti) {
            const double e = error_terms(X, ti, j).total();
            acc += e * e;
            ++count;
        }
    }
    return count ? acc / double(count) : 0.0;
}

double flux_weak_norm(const TwoScaleExpansion& X, const Potential& V, const EffectiveGradient& Ds) {
    const DirichletDomain& D = *X.D;
    const int d = D.dim();
    for (int a = 1; a < d; ++a) {
        if (D.cells(a) != D.cells(0)) throw std::invalid_argument("flux norm needs a cubic domain");
    }
    const int side = D.cells(0) - 1;
    const std::size_t S = X.ubar.slices();
    auto sample = ParabolicSample::zeros(d, side, int(S - 1), X.ubar.dt() / (X.eps * X.eps));
    std::vector<std::vector<Slope>> dsxi(X.Y.size(), std::vector<Slope>(S));
    for (std::size_t j = 0; j < X.Y.size(); ++j) {
        for (std::size_t n = 0; n < S; ++n) dsxi[j][n] = Ds(X.xi[j][n]);
    }
    for (std::size_t n = 1; n < S; ++n) {
        std::size_t cell = 0;
        for (std::size_t x : D.interior()) {
            const Point k = D.point(x);
            double f = 0.0;
            for (std::size_t j = 0; j < X.Y.size(); ++j) {
                for (int a = 0; a < d; ++a) {
                    const std::size_t x1 = x + D.stride(a);
                    const double dchi = (X.chi[j][x1] - X.chi[j][x]) / X.eps;
                    if (dchi == 0.0) continue;
                    Point k1 = k;
                    k1[a] += 1;
                    const double gv = X.xi[j][n][a] + X.phi_at(j, n, k1) - X.phi_at(j, n, k);
                    f += dchi * (V.first(gv) - dsxi[j][n][a]);
                }
            }
            sample.at(int(n - 1), cell++) = f;
        }
    }
    return X.eps * multiscale_estimate(sample);
}

}  // namespace gradphi
