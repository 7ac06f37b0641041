// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
//
// Euler-Maruyama integrators for the lattice Langevin dynamics.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradphi/lattice.hpp"
#include "gradphi/noise.hpp"
#include "gradphi/potential.hpp"

namespace gradphi {

// Piecewise constant slope, slopes[i] on [breaks[i], breaks[i+1]); the last
// piece extends to +infinity.
class SlopePath {
public:
    SlopePath() = default;
    SlopePath(std::vector<double> breaks, std::vector<Slope> slopes);
    static SlopePath constant(Slope p);
    static SlopePath from_json(const nlohmann::json& j, int d);

    const Slope& at(double t) const;
    bool covers(double t_lo) const { return !breaks_.empty() && breaks_.front() <= t_lo; }
    bool is_constant() const { return slopes_.size() == 1; }
    int dim() const { return slopes_.empty() ? 0 : int(slopes_.front().size()); }
    const std::vector<double>& breaks() const { return breaks_; }
    const std::vector<Slope>& slopes() const { return slopes_; }
    nlohmann::json to_json() const;

private:
    std::vector<double> breaks_;
    std::vector<Slope> slopes_;
};

// Largest step for which the explicit drift step is contractive.
double stable_dt(int d, double c_plus);
void check_stable(double dt, int d, double c_plus);

struct SimConfig {
    nlohmann::json potential = {{"kind", "quadratic"}};
    int dim = 2;
    int radius = 8;
    double dt = 0.0;  // 0 selects stable_dt
    double horizon = 0.0;
    SlopePath slope = SlopePath::constant({0.0, 0.0});
    std::uint64_t seed = 1;
    int replicas = 1;
    double burn_in = -1.0;  // negative selects L^2

    double resolved_dt() const;
    void validate() const;
    nlohmann::json to_json() const;
    static SimConfig from_json(const nlohmann::json& j);
};

using SliceObserver = std::function<void(std::int64_t n, double t, std::span<const double> u)>;

struct RunOptions {
    double dt = 0.0;                // 0 selects stable_dt
    std::size_t record_stride = 1;  // 0 records nothing
    SliceObserver observer;         // called on every slice, including the first
    double noise_scale = 1.0;       // 0 switches the noise off (diagnostics only)
    Point key_offset{};             // added to torus coordinates for noise keys
};

// Periodic dynamic d(phi) = div V'(q + grad phi) dt + sqrt(2) dB with the
// noise's spatial mean removed, started from `init` at s_lo.
SpaceTimeField run_periodic(const TorusGrid& g, const Potential& V, const SlopePath& q, double s_lo, double s_hi,
                            const Field& init, const NoiseSource& src, const RunOptions& opt = {});

// Corrector phi_Q(.;q): zero at s_lo.
SpaceTimeField run_corrector(const TorusGrid& g, double s_lo, double s_hi, const SlopePath& q, const Potential& V,
                             const NoiseSource& src, const RunOptions& opt = {});

// Stationary slope-p dynamic observed on (-window, 0]. Quadratic potentials
// start from an exact GFF sample; others from zero at -window - burn_in.
SpaceTimeField run_stationary_periodic(const TorusGrid& g, const Slope& p, const Potential& V, const NoiseSource& src,
                                       double burn_in, double window, const RunOptions& opt = {});

// Real orthonormal eigenbasis of the periodic Laplacian on the side-n cycle:
// index 0 is the constant, 2k-1 and 2k are cos and sin of frequency k.
std::vector<double> real_fourier_basis(int n);  // n*n, entry [c*n + m], c = coordinate + L
double cycle_eigenvalue(int n, int m);

// Mean-zero Gaussian free field on the torus, covariance (-Laplacian)^{-1}
// restricted to mean-zero functions.
Field sample_gff(const TorusGrid& g, const NoiseSource& src);

// Projection of a slice onto the tensor mode m (per-axis indices as above).
double mode_coefficient(const TorusGrid& g, std::span<const double> u, const Point& m);
double mode_eigenvalue(const TorusGrid& g, const Point& m);

SpaceTimeField run_gff_dynamic(const TorusGrid& g, double s_lo, double s_hi, const NoiseSource& src,
                               const RunOptions& opt = {});

// a(t,e) = int_0^1 V''(s grad v + (1-s) grad u) ds with 8-point
// Gauss-Legendre, clamped to [c_-, c_+]. Slopes are added to the gradients.
TimeEdgeField difference_environment(const TorusGrid& g, const SpaceTimeField& u, const SpaceTimeField& v,
                                     const Potential& V, const Slope& pu, const Slope& pv);

// Boundary datum of the hydrodynamic experiment, in macroscopic units.
struct BoundaryDatum {
    std::string name;
    std::function<double(double t, std::span<const double> x)> f;

    static BoundaryDatum named(const std::string& name, int d);
};

// f averaged over the cube x + [-eps, eps]^d (normalized), 8-point tensor
// Gauss-Legendre per axis.
double smoothed_datum(const BoundaryDatum& f, double t, std::span<const double> x, double eps);

// f~ on the parabolic boundary, tabulated at the macroscopic times -1 + k*h,
// k = 0..steps. Initial values cover every site; later rows cover boundary
// and corner sites only.
struct PinnedBoundary {
    double h = 0.0;
    std::int64_t steps = 0;
    std::vector<std::size_t> sites;  // boundary then corners
    std::vector<double> initial;     // all sites at t = -1
    std::vector<double> values;      // (steps + 1) x sites.size()

    std::span<const double> row(std::int64_t k) const {
        return {values.data() + std::size_t(k) * sites.size(), sites.size()};
    }
};
PinnedBoundary pin_boundary(const DirichletDomain& D, const BoundaryDatum& f, double h);

// Unit-lattice dynamic on the box with boundary pinned to f~/eps, observed
// in macroscopic variables u = eps v(t/eps^2, x/eps) on (-1, 0]. Sites are
// the DirichletDomain's closed grid; corners carry f~ for convenience.
// opt.dt is the unit-lattice step; the macroscopic step is opt.dt * eps^2.
SpaceTimeField run_dirichlet(const DirichletDomain& D, const BoundaryDatum& f, const Potential& V,
                             const NoiseSource& src, const RunOptions& opt = {});
SpaceTimeField run_dirichlet(const DirichletDomain& D, const PinnedBoundary& pins, const Potential& V,
                             const NoiseSource& src, const RunOptions& opt = {});

}  // namespace gradphi
