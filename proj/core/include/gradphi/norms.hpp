// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gradphi/lattice.hpp"

namespace gradphi {

struct NormReport {
    std::string name;
    double value = 0.0;
    bool normalized = false;
};

// (int sum_x |f|^p dt)^{1/p}, divided by |Q| inside the root when normalized;
// p = infinity gives the sup over slices in Q.
double lp_norm(const SpaceTimeField& f, const TorusGrid& g, const Cylinder& Q, double p, bool normalized);

// sup |f(t,x) - f(s,y)| / (|t-s|^{alpha/2} + |x-y|^alpha) over slices in Q,
// with |x-y| measured on the lifted box (no wrap).
double holder_seminorm(const SpaceTimeField& f, const TorusGrid& g, const Cylinder& Q, double alpha);

// Piecewise constant in time: cell n covers (t_lo + n h, t_lo + (n+1) h].
// Space is the box {0..side-1}^d, row-major, vanishing outside.
struct ParabolicSample {
    int dim = 2;
    int side = 1;
    int nt = 1;
    double h = 1.0;
    std::vector<double> values;

    static ParabolicSample zeros(int dim, int side, int nt, double h);
    std::size_t sites() const;
    double& at(int n, std::size_t x) { return values[std::size_t(n) * sites() + x]; }
    double at(int n, std::size_t x) const { return values[std::size_t(n) * sites() + x]; }
    double duration() const { return double(nt) * h; }
    double volume() const { return duration() * double(sites()); }
    double normalized_l2() const;
};

// ||f||_{L2avg} + sum_k 3^k (mean over level-k cells of (f)_cell^2)^{1/2},
// cells of spatial side 3^k and duration 3^{2k} tiled from the low spatial
// corner and from the final time; incomplete cells are dropped. Levels run
// up to the largest k whose cells fit.
double multiscale_estimate(const ParabolicSample& f);

// Same estimator on a triadic cylinder Q_{3^m}: side 3^m, duration 3^{2m}.
double hminus1_par_multiscale(const ParabolicSample& f, int m);

struct DualNormResult {
    double value = 0.0;
    bool converged = true;
    int iterations = 0;
};

// sup (1/|Q|) int sum f v over v vanishing at the initial time and outside the
// box, with ||v||^2 = ||v||^2/side^2 + ||grad v||^2 + ||d_t v||^2_{L2(H^-1)}
// (all averaged). Diagonalized in space by the Dirichlet sine basis, the
// maximizer solves one tridiagonal system in time per spatial mode.
DualNormResult hminus1_par_exact(const ParabolicSample& f);

// Dirichlet sine basis of the side-n path: entry [i*n + j].
std::vector<double> dirichlet_sine_basis(int n);
double dirichlet_path_eigenvalue(int n, int j);

}  // namespace gradphi
