// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reference computations used by the tests. They share no code with the
// library beyond plain data types.
#pragma once

#include <cstdint>
#include <vector>

namespace oracle {

// Explicit-scheme heat kernel with a = 1 on the side-n torus in d dims,
// P_k(x) = (1/n^d) sum_{m != 0} (1 - dt lambda_m)^k cos(2 pi m.(x - y) / n),
// with x - y given as integer offsets.
double spectral_heat_kernel(int d, int n, double dt, std::int64_t k, const std::vector<int>& offset);

// Covariance of the explicit GFF dynamic after K steps from a continuous GFF
// sample: (1/n^d) sum_{m != 0} V_m cos(2 pi m.h / n).
double scheme_gff_covariance(int d, int n, double dt, std::int64_t K, const std::vector<int>& h);
double gff_covariance(int d, int n, const std::vector<int>& h);

// E phi(0)^2 after K explicit steps from zero of the quadratic dynamic with
// mean-free noise, by iterating the dense covariance recursion.
double dense_corrector_variance(int d, int n, double dt, std::int64_t K);

// Dual norm by a dense solve of the full space-time quadratic form.
// values: nt slices of side^d sites, row-major.
double dense_dual_norm(int d, int side, int nt, double h, const std::vector<double>& values);

// Eigenvalues of the Dirichlet Laplacian on the side-n path (dense solve).
std::vector<double> dense_path_eigenvalues(int n);

// Mean Brownian occupation of (-eps, eps) up to time T, Euler grid dt,
// seeded mt19937_64, trapezoid rule.
std::vector<double> brownian_occupation(const std::vector<double>& eps, double T, double dt, int replicas,
                                        std::uint64_t seed);

// Weighted RMS residual of the affine least-squares fit to a unit spike at
// the origin of {-l..l}^d carried by one slice of time weight w, when all
// slices together weigh W.
double spike_affine_residual(int d, int l, double w, double W);

}  // namespace oracle
