// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include "gradphi/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gradphi/error.hpp"

namespace gradphi {

EdgeSeries::EdgeSeries(EdgeField constant) : slices_(0.0, 1.0) { slices_.append(std::move(constant)); }

EdgeSeries::EdgeSeries(TimeEdgeField slices) : slices_(std::move(slices)) {}

EdgeSeries EdgeSeries::uniform(const TorusGrid& g, double value) {
    return EdgeSeries(EdgeField(g.dim(), g.size(), value));
}

const EdgeField& EdgeSeries::at(double t) const {
    if (empty()) throw std::logic_error("empty edge series");
    if (slices_.slices() == 1) return slices_.slice(0);
    const double r = (t - slices_.t0()) / slices_.dt();
    const auto n = std::int64_t(std::floor(r + 1e-9));
    return slices_.slice(std::size_t(std::clamp<std::int64_t>(n, 0, std::int64_t(slices_.slices()) - 1)));
}

double EdgeSeries::min() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < slices_.slices(); ++n) {
        for (double v : slices_.slice(n).raw()) m = std::min(m, v);
    }
    return m;
}

double EdgeSeries::max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < slices_.slices(); ++n) {
        for (double v : slices_.slice(n).raw()) m = std::max(m, v);
    }
    return m;
}

double div_a_grad(const TorusGrid& g, const EdgeField& a, std::span<const double> u, std::size_t x) {
    double s = 0.0;
    for (int ax = 0; ax < g.dim(); ++ax) {
        const std::size_t f = g.forward(x, ax), b = g.backward(x, ax);
        s += a.at(x, ax) * (u[f] - u[x]) - a.at(b, ax) * (u[x] - u[b]);
    }
    return s;
}

namespace {

void check_environment(const TorusGrid& g, const Environment& a, double dt) {
    if (a.empty() || a.sites() != g.size()) throw std::invalid_argument("environment does not match the grid");
    if (!(a.min() > 0.0)) throw std::invalid_argument("environment must be positive");
    check_stable(dt, g.dim(), a.max());
}

// u <- u + dt (div a grad u + rhs)
void explicit_step(const TorusGrid& g, const EdgeField& a, Field& u, Field& next, double dt, const double* rhs) {
    for (std::size_t x = 0; x < g.size(); ++x) {
        next[x] = u[x] + dt * (div_a_grad(g, a, u, x) + (rhs ? rhs[x] : 0.0));
    }
    u.swap(next);
}

}  // namespace

double HeatKernelTable::at(double t, std::size_t x) const {
    if (t < s - 1e-12) return 0.0;
    return values.slice(values.nearest_slice(t))[x];
}

HeatKernelTable heat_kernel(const TorusGrid& g, const Environment& a, double s, std::size_t y, double t_end,
                            double dt) {
    check_environment(g, a, dt);
    if (y >= g.size()) throw std::out_of_range("source site outside the grid");
    if (t_end < s) throw std::invalid_argument("kernel horizon before the source time");
    HeatKernelTable P;
    P.s = s;
    P.y = y;
    P.values = SpaceTimeField(s, dt, g.size());
    Field u(g.size(), -1.0 / double(g.size())), next(g.size());
    u[y] += 1.0;
    P.values.append(u);
    const std::int64_t steps = step_count(t_end - s, dt);
    for (std::int64_t k = 0; k < steps; ++k) {
        explicit_step(g, a.at(s + double(k) * dt), u, next, dt, nullptr);
        P.values.append(u);
    }
    return P;
}

namespace {

void check_forcing(const TorusGrid& g, const SpaceTimeField& f) {
    if (f.sites() != g.size()) throw std::invalid_argument("forcing does not match the grid");
    for (std::size_t n = 0; n < f.slices(); ++n) {
        double s = 0.0, m = 0.0;
        for (double v : f.slice(n)) {
            s += v;
            m = std::max(m, std::abs(v));
        }
        if (std::abs(s) > 1e-10 * std::max(1.0, m * double(g.size()))) {
            throw std::invalid_argument("forcing must have zero spatial sum on every slice");
        }
    }
}

}  // namespace

SpaceTimeField duhamel_solve(const TorusGrid& g, const Environment& a, const SpaceTimeField& f) {
    check_forcing(g, f);
    const double dt = f.dt();
    check_environment(g, a, dt);
    const std::size_t slices = f.slices();
    SpaceTimeField u(f.t0(), dt, slices, g.size());
    if (slices < 2) return u;
    const double t_end = f.time(slices - 1);
    for (std::size_t m = 0; m + 1 < slices; ++m) {
        const auto fm = f.slice(m);
        for (std::size_t y = 0; y < g.size(); ++y) {
            if (fm[y] == 0.0) continue;
            const auto P = heat_kernel(g, a, f.time(m + 1), y, t_end, dt);
            // Kernel slice j sits at t_{m+1+j}.
            for (std::size_t j = 0; j < P.values.slices(); ++j) {
                auto un = u.slice(m + 1 + j);
                const auto pj = P.values.slice(j);
                for (std::size_t x = 0; x < g.size(); ++x) un[x] += dt * fm[y] * pj[x];
            }
        }
    }
    return u;
}

SpaceTimeField direct_solve(const TorusGrid& g, const Environment& a, const SpaceTimeField& f) {
    check_forcing(g, f);
    const double dt = f.dt();
    check_environment(g, a, dt);
    SpaceTimeField out(f.t0(), dt, g.size());
    Field u(g.size(), 0.0), next(g.size());
    out.append(u);
    for (std::size_t n = 0; n + 1 < f.slices(); ++n) {
        explicit_step(g, a.at(f.time(n)), u, next, dt, f.slice(n).data());
        out.append(u);
    }
    return out;
}

SpaceTimeField solve_linear_parabolic(const TorusGrid& g, const Environment& a, const EdgeSeries& F, Boundary bc,
                                      const Field& init, double s_lo, double s_hi, double dt,
                                      std::size_t record_stride) {
    check_environment(g, a, dt);
    if (init.size() != g.size()) throw std::invalid_argument("initial field has the wrong size");
    if (!F.empty() && F.sites() != g.size()) throw std::invalid_argument("edge forcing does not match the grid");
    const std::int64_t steps = step_count(s_hi - s_lo, dt);
    if (record_stride == 0 || steps % std::int64_t(record_stride) != 0) {
        throw std::invalid_argument("record stride must divide the step count");
    }
    std::vector<char> pinned(g.size(), 0);
    if (bc == Boundary::dirichlet) {
        for (std::size_t x = 0; x < g.size(); ++x) {
            for (int ax = 0; ax < g.dim(); ++ax) {
                if (std::abs(g.coord(x, ax)) == g.radius()) pinned[x] = 1;
            }
        }
    }
    SpaceTimeField out(s_lo, dt * double(record_stride), g.size());
    Field u = init, next(g.size()), rhs(g.size(), 0.0);
    out.append(u);
    for (std::int64_t k = 0; k < steps; ++k) {
        const double t = s_lo + double(k) * dt;
        if (!F.empty()) {
            const EdgeField& Ft = F.at(t);
            for (std::size_t x = 0; x < g.size(); ++x) rhs[x] = divergence(g, Ft, x);
        }
        explicit_step(g, a.at(t), u, next, dt, F.empty() ? nullptr : rhs.data());
        if (bc == Boundary::dirichlet) {
            for (std::size_t x = 0; x < g.size(); ++x) {
                if (pinned[x]) u[x] = init[x];
            }
        }
        if ((k + 1) % std::int64_t(record_stride) == 0) out.append(u);
    }
    return out;
}

LinearizedCorrector::LinearizedCorrector(const TorusGrid& g, const Potential& V, Slope p, Slope xi)
    : g_(&g), V_(&V), p_(std::move(p)), xi_(std::move(xi)), w_(g.size(), 0.0), next_(g.size()),
      a_(g.dim(), g.size()) {
    if (int(p_.size()) != g.dim() || int(xi_.size()) != g.dim()) {
        throw std::invalid_argument("slope dimension differs from the grid");
    }
}

void LinearizedCorrector::update_coefficients(std::span<const double> v) {
    const TorusGrid& g = *g_;
    V_->visit([&](auto ev) {
        for (int ax = 0; ax < g.dim(); ++ax) {
            const auto* fw = g.forward_table(ax);
            auto vals = a_.axis_values(ax);
            for (std::size_t x = 0; x < g.size(); ++x) vals[x] = ev.d2(p_[ax] + v[fw[x]] - v[x]);
        }
    });
}

void LinearizedCorrector::step(std::span<const double> v, double dt) {
    const TorusGrid& g = *g_;
    update_coefficients(v);
    for (std::size_t x = 0; x < g.size(); ++x) {
        double src = 0.0;
        for (int ax = 0; ax < g.dim(); ++ax) src += xi_[ax] * (a_.at(x, ax) - a_.at(g.backward(x, ax), ax));
        next_[x] = w_[x] + dt * (div_a_grad(g, a_, w_, x) + src);
    }
    w_.swap(next_);
}

SpaceTimeField solve_linearized_corrector(const TorusGrid& g, const Potential& V, const SpaceTimeField& v,
                                          const Slope& p, const Slope& xi) {
    if (v.sites() != g.size()) throw std::invalid_argument("trajectory does not match the grid");
    if (v.slices() == 0) throw std::invalid_argument("empty trajectory");
    check_stable(v.dt(), g.dim(), V.c_plus());
    LinearizedCorrector w(g, V, p, xi);
    SpaceTimeField out(v.t0(), v.dt(), g.size());
    out.append(w.value());
    for (std::size_t n = 0; n + 1 < v.slices(); ++n) {
        w.step(v.slice(n), v.dt());
        out.append(w.value());
    }
    return out;
}

EffectiveGradient EffectiveGradient::identity(int d) {
    EffectiveGradient e;
    e.d_ = d;
    e.identity_ = true;
    return e;
}

EffectiveGradient EffectiveGradient::radial(int d, std::vector<double> s, std::vector<double> g) {
    if (s.size() != g.size() || s.size() < 2) throw std::invalid_argument("radial table needs matching grids");
    if (s.front() != 0.0) throw std::invalid_argument("radial grid must start at 0");
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (!(s[i] > s[i - 1])) throw std::invalid_argument("radial grid must increase");
        if (g[i] < g[i - 1]) throw std::invalid_argument("radial profile must be nondecreasing");
    }
    EffectiveGradient e;
    e.d_ = d;
    e.identity_ = false;
    e.s_ = std::move(s);
    e.g_ = std::move(g);
    e.g_.front() = 0.0;
    return e;
}

void EffectiveGradient::apply(const double* p, double* out) const {
    if (identity_) {
        for (int a = 0; a < d_; ++a) out[a] = p[a];
        return;
    }
    double r2 = 0.0;
    for (int a = 0; a < d_; ++a) r2 += p[a] * p[a];
    const double r = std::sqrt(r2);
    if (r == 0.0) {
        for (int a = 0; a < d_; ++a) out[a] = 0.0;
        return;
    }
    double gr;
    if (r >= s_.back()) {
        if (r > s_.back()) clamped_->fetch_add(1, std::memory_order_relaxed);
        gr = g_.back();
    } else {
        const auto it = std::upper_bound(s_.begin(), s_.end(), r);
        const std::size_t i = std::size_t(it - s_.begin()) - 1;
        const double w = (r - s_[i]) / (s_[i + 1] - s_[i]);
        gr = (1.0 - w) * g_[i] + w * g_[i + 1];
    }
    for (int a = 0; a < d_; ++a) out[a] = gr * p[a] / r;
}

Slope EffectiveGradient::operator()(const Slope& p) const {
    if (int(p.size()) != d_) throw std::invalid_argument("slope dimension differs from the map");
    Slope out(p.size());
    apply(p.data(), out.data());
    return out;
}

double EffectiveGradient::lipschitz() const {
    if (identity_) return 1.0;
    double L = 0.0;
    for (std::size_t i = 1; i < s_.size(); ++i) {
        L = std::max(L, (g_[i] - g_[i - 1]) / (s_[i] - s_[i - 1]));
        L = std::max(L, g_[i] / s_[i]);
    }
    return L;
}

namespace {

bool full_stencil(const DirichletDomain& D, const Point& k) {
    for (int a = 0; a < D.dim(); ++a) {
        if (k[a] < 0 || k[a] + 1 > D.cells(a)) return false;
    }
    return true;
}

void forward_gradient(const DirichletDomain& D, std::span<const double> u, std::size_t x, double* grad) {
    const double inv = 1.0 / D.eps();
    for (int a = 0; a < D.dim(); ++a) grad[a] = (u[x + D.stride(a)] - u[x]) * inv;
}

}  // namespace

double homogenized_divergence(const EffectiveGradient& Ds, const DirichletDomain& D, std::span<const double> u,
                              std::size_t x) {
    const int d = D.dim();
    const Point k = D.point(x);
    std::array<double, kMaxDim> gx{}, gb{}, fx{}, fb{};
    if (!full_stencil(D, k)) throw std::invalid_argument("site lacks a forward stencil");
    forward_gradient(D, u, x, gx.data());
    Ds.apply(gx.data(), fx.data());
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        Point kb = k;
        kb[i] -= 1;
        if (!full_stencil(D, kb)) throw std::invalid_argument("site lacks a backward stencil");
        const std::size_t b = x - D.stride(i);
        forward_gradient(D, u, b, gb.data());
        Ds.apply(gb.data(), fb.data());
        s += fx[i] - fb[i];
    }
    return s / D.eps();
}

double homogenized_stable_dt(const EffectiveGradient& Ds, const DirichletDomain& D) {
    return D.eps() * D.eps() / (8.0 * double(D.dim()) * Ds.lipschitz());
}

SpaceTimeField solve_homogenized(const EffectiveGradient& Ds, const DirichletDomain& D, const PinnedBoundary& pins,
                                 std::size_t record_stride) {
    const double dt = pins.h;
    if (dt > homogenized_stable_dt(Ds, D) * (1.0 + 1e-12)) {
        throw NumericalError("time step exceeds the stability bound of the homogenized scheme");
    }
    if (Ds.dim() != D.dim()) throw std::invalid_argument("effective gradient dimension differs from the domain");
    if (pins.initial.size() != D.size()) throw std::invalid_argument("boundary table does not match the domain");
    if (record_stride == 0 || pins.steps % std::int64_t(record_stride) != 0) {
        throw std::invalid_argument("record stride must divide the step count");
    }
    const int d = D.dim();
    const double inv = 1.0 / D.eps();
    // Fluxes live on every site with a full forward stencil.
    std::vector<std::size_t> flux_sites;
    for (std::size_t x = 0; x < D.size(); ++x) {
        if (full_stencil(D, D.point(x))) flux_sites.push_back(x);
    }
    std::vector<double> flux(std::size_t(d) * D.size(), 0.0);
    Field u = pins.initial, next = u;
    SpaceTimeField out(-1.0, dt * double(record_stride), D.size());
    out.append(u);
    std::array<double, kMaxDim> gr{}, fl{};
    for (std::int64_t k = 0; k < pins.steps; ++k) {
        for (std::size_t x : flux_sites) {
            forward_gradient(D, u, x, gr.data());
            Ds.apply(gr.data(), fl.data());
            for (int a = 0; a < d; ++a) flux[std::size_t(a) * D.size() + x] = fl[a];
        }
        for (std::size_t x : D.interior()) {
            double s = 0.0;
            for (int a = 0; a < d; ++a) {
                const double* F = flux.data() + std::size_t(a) * D.size();
                s += F[x] - F[x - D.stride(a)];
            }
            next[x] = u[x] + dt * inv * s;
        }
        const auto row = pins.row(k + 1);
        for (std::size_t j = 0; j < pins.sites.size(); ++j) next[pins.sites[j]] = row[j];
        u.swap(next);
        if ((k + 1) % std::int64_t(record_stride) == 0) out.append(u);
    }
    return out;
}

SpaceTimeField solve_homogenized(const EffectiveGradient& Ds, const DirichletDomain& D, const BoundaryDatum& f,
                                 double dt, std::size_t record_stride) {
    return solve_homogenized(Ds, D, pin_boundary(D, f, dt), record_stride);
}

double phi_CL(double C, int L, int d, double t, double r) {
    const double tt = std::max(t, 1.0);
    const double spatial = t > 0.0 ? std::exp(-r / (C * std::sqrt(t))) : (r == 0.0 ? 1.0 : 0.0);
    return C * std::pow(tt, -0.5 * double(d)) * spatial * std::exp(-t / (C * double(L) * double(L)));
}

NashAronsonFit nash_aronson_fit(const TorusGrid& g, const HeatKernelTable& P) {
    const int L = g.side();
    const double shift = 1.0 / double(g.size());
    const Point y = g.point(P.y);
    std::vector<double> dist(g.size());
    for (std::size_t x = 0; x < g.size(); ++x) {
        const Point px = g.point(x);
        double r2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            int dx = std::abs(px[a] - y[a]);
            dx = std::min(dx, g.side() - dx);
            r2 += double(dx) * double(dx);
        }
        dist[x] = std::sqrt(r2);
    }
    NashAronsonFit fit;
    fit.min_shifted = std::numeric_limits<double>::infinity();
    std::size_t last = 0;
    for (std::size_t n = 0; n < P.values.slices(); ++n) {
        if (P.values.time(n) - P.s > double(L) * double(L) + 1e-9) break;
        last = n;
        for (double v : P.values.slice(n)) fit.min_shifted = std::min(fit.min_shifted, v + shift);
    }
    for (double C = 1.0; C <= 64.0; C *= 2.0) {
        bool ok = true;
        for (std::size_t n = 0; n <= last && ok; ++n) {
            const double t = P.values.time(n) - P.s;
            const auto s = P.values.slice(n);
            for (std::size_t x = 0; x < g.size(); ++x) {
                if (s[x] + shift > phi_CL(C, L, g.dim(), t, dist[x]) + 1e-12) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) {
            fit.C = C;
            fit.found = true;
            break;
        }
    }
    return fit;
}

}  // namespace gradphi
