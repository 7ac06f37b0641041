// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo estimators built on the periodic dynamic: finite-volume
// surface tension gradient and Hessian, flux and corrector fluctuations,
// linearization, excess decay and the two-scale expansion.
#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradphi/dynamics.hpp"
#include "gradphi/norms.hpp"
#include "gradphi/parabolic.hpp"
#include "gradphi/stats.hpp"

namespace gradphi {

// stationary: run_stationary_periodic observed on Q_L (constant slopes only);
// corrector: from 0 at -L^2 on the radius-L torus.
enum class StartMode { stationary, corrector };

struct EstimatorOptions {
    double dt = 0.0;  // 0 selects stable_dt
    int threads = 1;
    StartMode start = StartMode::stationary;
    double burn_in = -1.0;  // negative selects L^2 (non-quadratic stationary start)
};

struct FluxEstimate {
    SlopePath slope;
    int L = 0;
    int replicas = 0;
    Slope mean, se;
    std::vector<Slope> samples;  // per replica

    nlohmann::json to_json() const;
};

// Mean and SE over replicas of (V'(q + grad phi))_{Q_{L/2}}.
FluxEstimate estimate_tau(const Slope& p, int L, const Potential& V, int replicas, const NoiseSource& src,
                          const EstimatorOptions& opt = {});
FluxEstimate estimate_tau(const SlopePath& q, int L, const Potential& V, int replicas, const NoiseSource& src,
                          const EstimatorOptions& opt = {});

struct HessianEstimate {
    Slope p;
    int L = 0;
    int replicas = 0;
    std::vector<double> mean, se;  // d x d, entry [i*d + j] = d_i tau_j
    std::vector<double> eigenvalues;
    bool positive = false;

    nlohmann::json to_json() const;
};

// d_i tau_L(p) = E[(V''(p + grad v)(e_i + grad w_{L,p,e_i}))_{Q_{L/2}}] with v and
// w started from 0 at -L^2.
HessianEstimate estimate_hessian(const Slope& p, int L, const Potential& V, int replicas, const NoiseSource& src,
                                 const EstimatorOptions& opt = {});

// Per-replica cylinder averages for every scale: samples[r][k] holds the
// flux average then the gradient average (2d values) over Q_{ells[k]}.
struct FluxDecayResult {
    std::vector<int> ells;
    int L = 0;
    int replicas = 0;
    std::vector<double> variance, variance_se;            // flux, mean over components
    std::vector<double> grad_variance, grad_variance_se;  // gradient
    FitResult fit, grad_fit;

    nlohmann::json to_json() const;
};

FluxDecayResult summarize_flux_decay(const std::vector<int>& ells, int L, int d,
                                     const std::vector<std::vector<std::vector<double>>>& samples);
FluxDecayResult flux_decay_experiment(const std::vector<int>& ells, int L, const Potential& V, const Slope& p,
                                      int replicas, const NoiseSource& src, const EstimatorOptions& opt = {});

struct CorrectorFluctuation {
    int d = 2;
    std::vector<int> Ls;
    int replicas = 0;
    std::vector<double> var_phi0, var_phi0_se;  // E phi(0)^2 via the spatial mean of phi(0,.)^2
    std::vector<double> l2, l2_se;              // ||phi||^2 averaged over Q_L
    std::vector<double> grad_q999;              // 99.9th percentile of |grad phi(0,e)|
    std::vector<double> oracle;                 // Gaussian value (quadratic V)
    FitResult fit, oracle_fit;                  // against log L

    nlohmann::json to_json() const;
};

// E phi(0)^2 for the quadratic corrector started from 0 at -L^2 on the radius-L
// torus, exact for the explicit scheme with step dt.
double gaussian_corrector_variance(int d, int L, double dt);

CorrectorFluctuation corrector_fluctuation_experiment(const std::vector<int>& Ls, int d, const Potential& V,
                                                      int replicas, const NoiseSource& src,
                                                      const EstimatorOptions& opt = {});

struct SlopeStability {
    double residual = 0.0;  // ||grad phi_1 - grad phi_2|| averaged over Q_L
    double norm1 = 0.0, norm2 = 0.0;
    double slope_gap = 0.0;  // sup_t |q1(t) - q2(t)|
    double fitted_C = 0.0;   // (residual - (norm1 + norm2)/L)_+ / slope_gap

    nlohmann::json to_json() const;
};

SlopeStability slope_stability_check(const SlopePath& q1, const SlopePath& q2, int L, const Potential& V,
                                     const NoiseSource& src, const EstimatorOptions& opt = {});

struct ModulusRow {
    double distance = 0.0;
    double mean = 0.0, se = 0.0;              // residual
    double ratio_mean = 0.0, ratio_se = 0.0;  // residual / distance
};

struct ModulusEstimate {
    Slope p;
    int L = 0;
    int replicas = 0;
    std::vector<ModulusRow> rows;

    nlohmann::json to_json() const;
};

// Residual ||grad phi(q) - grad phi(p) - grad w_{L,p,q-p}|| averaged over Q_L,
// coupled noise, correctors from 0 at -L^2.
ModulusEstimate linearization_modulus(const Slope& p, const std::vector<Slope>& qs, int L, const Potential& V,
                                      int replicas, const NoiseSource& src, const EstimatorOptions& opt = {});

struct ExcessProfile {
    std::vector<int> ls;
    std::vector<double> excess;         // (1/l) inf_affine ||u - l||_{L2avg(Q_l)}
    std::vector<double> gradient_bound; // (1/l) ||u - (u)_{Q_l}||_{L2avg(Q_l)}

    nlohmann::json to_json() const;
};

// Streaming weighted least squares over the regressors (1, x_1, ..., x_d) on
// Q_l = (t_end - l^2, t_end] x Lambda_l, trapezoid weights in time.
class ExcessAccumulator {
public:
    ExcessAccumulator(const TorusGrid& g, std::vector<int> ls, double t_end, double dt);
    void observe(double t, std::span<const double> u);
    ExcessProfile result() const;

private:
    struct Sums {
        std::vector<double> xtx;  // (d+1)^2
        std::vector<double> xty;  // d+1
        double yy = 0.0, y = 0.0, w = 0.0;
    };
    const TorusGrid* g_;
    std::vector<int> ls_;
    double t_end_, dt_;
    std::vector<std::vector<std::size_t>> boxes_;
    std::vector<Sums> sums_;
};

ExcessProfile excess_decay(const TorusGrid& g, const SpaceTimeField& u, const std::vector<int>& ls);

// Radial D_p sigma_bar table from axis evaluations of tau_L at |p| in
// {0, 0.25, ..., 1.5}, made nondecreasing.
EffectiveGradient tabulate_effective_gradient(const Potential& V, int d, int L, int replicas, const NoiseSource& src,
                                              const EstimatorOptions& opt = {});

// Two-scale expansion on the Dirichlet box.
struct TwoScaleOptions {
    double kappa = 0.0;             // 0 selects eps^{1/2}
    double dt = 0.0;                // unit-lattice step of the correctors; 0 selects stable_dt
    std::size_t record_stride = 1;  // must match ubar's record stride
    bool zero_correctors = false;
};

struct TwoScaleExpansion {
    const DirichletDomain* D = nullptr;
    double eps = 0.0, kappa = 0.0;
    int L_sites = 1;  // floor(kappa/eps); kappa is snapped to L_sites * eps
    std::vector<Point> Y;  // site indices of the centers
    SpaceTimeField ubar;
    std::vector<std::vector<double>> chi;  // per center, on every domain site
    TorusGrid local{2, 1};                 // radius 2 L_sites
    std::vector<SpaceTimeField> phi;       // per center, slices aligned with ubar
    std::vector<std::vector<Slope>> xi;    // per center, per slice (boundary layer -> 0)
    std::vector<double> z_times;           // Z_kappa times, 0, -kappa^2, ...
    SpaceTimeField w;

    // Corrector of center j at domain site x (0 outside its torus).
    double phi_at(std::size_t j, std::size_t n, const Point& x) const;
    // (grad w - sum chi_y grad v_y) and the assembled remainder
    // (grad ubar - sum chi_y xi_y) + eps sum grad chi_y * mean(phi_y) on the
    // edge (x, x + e_a), for sites with a forward stencil.
    double gradient_gap(std::size_t n, std::size_t x, int a) const;
    double remainder(std::size_t n, std::size_t x, int a) const;
    // Average of grad ubar over (t_hi - T, t_hi] x (center + Lambda_r), clipped.
    Slope gradient_average(double t_hi, double T, const Point& center, int r) const;
};

TwoScaleExpansion build_two_scale(const DirichletDomain& D, const SpaceTimeField& ubar, const Potential& V,
                                  const NoiseSource& src, const TwoScaleOptions& opt = {});

// Cubic B-spline bump on [-2, 2].
double bspline_bump(double s);

struct ErrorTerms {
    double t = 0.0;
    Point y{};
    double gradient = 0.0, slope = 0.0, corrector = 0.0;
    double total() const { return gradient + slope + corrector; }
};

ErrorTerms error_terms(const TwoScaleExpansion& X, std::size_t time_index, std::size_t center);
// (1/|Z|) sum_z E_z^2 over cells whose center is outside the boundary layer.
double error_aggregate(const TwoScaleExpansion& X);

// eps * multiscale estimate of sum_y grad chi_y . (V'(grad v_y) - Ds(xi_y)) on
// the interior box.
double flux_weak_norm(const TwoScaleExpansion& X, const Potential& V, const EffectiveGradient& Ds);

}  // namespace gradphi
