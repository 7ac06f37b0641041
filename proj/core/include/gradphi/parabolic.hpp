// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
//
// Explicit solvers for discrete linear and nonlinear parabolic equations.
#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "gradphi/dynamics.hpp"
#include "gradphi/lattice.hpp"
#include "gradphi/potential.hpp"

namespace gradphi {

// Edge coefficients piecewise constant in time: slice n acts on
// [t0 + n dt, t0 + (n+1) dt); a single slice acts forever.
class EdgeSeries {
public:
    EdgeSeries() = default;
    explicit EdgeSeries(EdgeField constant);
    explicit EdgeSeries(TimeEdgeField slices);
    static EdgeSeries uniform(const TorusGrid& g, double value);

    bool empty() const { return slices_.slices() == 0; }
    const EdgeField& at(double t) const;
    double min() const;
    double max() const;
    std::size_t sites() const { return empty() ? 0 : slices_.slice(0).sites(); }

private:
    TimeEdgeField slices_;
};

using Environment = EdgeSeries;

// div(a grad u)(x) on the torus.
double div_a_grad(const TorusGrid& g, const EdgeField& a, std::span<const double> u, std::size_t x);

struct HeatKernelTable {
    double s = 0.0;
    std::size_t y = 0;
    SpaceTimeField values;  // slice n is P(s + n dt, . ; s, y)

    // Zero before the source time.
    double at(double t, std::size_t x) const;
};

// P_a(., . ; s, y) from delta_y - 1/|Lambda| by explicit stepping up to t_end.
HeatKernelTable heat_kernel(const TorusGrid& g, const Environment& a, double s, std::size_t y, double t_end,
                            double dt);

// u(t_n) = dt sum_{m<n} sum_y P(t_n, . ; t_{m+1}, y) f(t_m, y), the Duhamel
// form of the explicit scheme. f needs zero spatial sum on every slice; u
// starts from 0 at f.t0().
SpaceTimeField duhamel_solve(const TorusGrid& g, const Environment& a, const SpaceTimeField& f);

// Direct explicit stepping of d_t u - div a grad u = f from u(f.t0()) = 0.
SpaceTimeField direct_solve(const TorusGrid& g, const Environment& a, const SpaceTimeField& f);

enum class Boundary { periodic, dirichlet };

// d_t w - div a grad w = div F with w(s_lo) = init. Dirichlet pins the outer
// layer of the box (some coordinate equal to +-L) to its initial values.
SpaceTimeField solve_linear_parabolic(const TorusGrid& g, const Environment& a, const EdgeSeries& F, Boundary bc,
                                      const Field& init, double s_lo, double s_hi, double dt,
                                      std::size_t record_stride = 1);

// One explicit step of the linearized corrector equation
// d_t w - div a grad w = div a xi, a = V''(p + grad v).
class LinearizedCorrector {
public:
    LinearizedCorrector(const TorusGrid& g, const Potential& V, Slope p, Slope xi);

    void step(std::span<const double> v, double dt);
    const Field& value() const { return w_; }
    // a on the edges of the last slice seen by step().
    const EdgeField& coefficients() const { return a_; }
    void update_coefficients(std::span<const double> v);

private:
    const TorusGrid* g_;
    const Potential* V_;
    Slope p_, xi_;
    Field w_, next_;
    EdgeField a_;
};

// w_{L,p,xi} along a recorded trajectory (stride 1) of the slope-p dynamic.
SpaceTimeField solve_linearized_corrector(const TorusGrid& g, const Potential& V, const SpaceTimeField& v,
                                          const Slope& p, const Slope& xi);

// p -> D_p sigma_bar: the identity, or a radial map g(|p|) p/|p| tabulated
// on a grid of |p| values. Evaluations beyond the table are clamped and
// counted.
class EffectiveGradient {
public:
    static EffectiveGradient identity(int d);
    static EffectiveGradient radial(int d, std::vector<double> s, std::vector<double> g);

    int dim() const { return d_; }
    bool is_identity() const { return identity_; }
    void apply(const double* p, double* out) const;
    Slope operator()(const Slope& p) const;
    double lipschitz() const;
    std::uint64_t clamped() const { return clamped_ ? clamped_->load() : 0; }
    const std::vector<double>& grid() const { return s_; }
    const std::vector<double>& table() const { return g_; }

private:
    int d_ = 1;
    bool identity_ = true;
    std::vector<double> s_, g_;
    std::shared_ptr<std::atomic<std::uint64_t>> clamped_ = std::make_shared<std::atomic<std::uint64_t>>(0);
};

// eps^{-1} sum_i [Dsigma_i(grad u(x)) - Dsigma_i(grad u(x - eps e_i))] with
// forward difference gradients on the closed grid.
double homogenized_divergence(const EffectiveGradient& Ds, const DirichletDomain& D, std::span<const double> u,
                              std::size_t x);

// Explicit stepping of d_t u = div Ds(grad u) on D with every non-interior
// site pinned to the table. pins.h is the macroscopic step.
SpaceTimeField solve_homogenized(const EffectiveGradient& Ds, const DirichletDomain& D, const PinnedBoundary& pins,
                                 std::size_t record_stride = 1);
SpaceTimeField solve_homogenized(const EffectiveGradient& Ds, const DirichletDomain& D, const BoundaryDatum& f,
                                 double dt, std::size_t record_stride = 1);
double homogenized_stable_dt(const EffectiveGradient& Ds, const DirichletDomain& D);

// C (t v 1)^{-d/2} exp(-r / (C sqrt t)) exp(-t / (C L^2)).
double phi_CL(double C, int L, int d, double t, double r);

struct NashAronsonFit {
    double C = 0.0;  // 0 when no grid value works
    bool found = false;
    double min_shifted = 0.0;  // min of P + 1/|Lambda| over t - s <= L^2
};

// Smallest C in {1, 2, 4, ..., 64} with P + 1/|Lambda| <= Phi_{C,L} for
// t - s <= L^2, distances taken on the torus.
NashAronsonFit nash_aronson_fit(const TorusGrid& g, const HeatKernelTable& P);

}  // namespace gradphi
