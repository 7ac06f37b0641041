// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
//
// Lattice geometry: periodic boxes, Dirichlet boxes, space-time cylinders and
// the discrete calculus on them.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gradphi {

class Potential;

inline constexpr int kMaxDim = 4;
using Point = std::array<int, kMaxDim>;
using Field = std::vector<double>;
using Slope = std::vector<double>;

// Periodic box {-L..L}^d, row-major, last axis fastest.
class TorusGrid {
public:
    TorusGrid(int dim, int radius);

    int dim() const { return dim_; }
    int radius() const { return radius_; }
    int side() const { return 2 * radius_ + 1; }
    std::size_t size() const { return size_; }

    // Coordinates are wrapped into {-L..L}.
    std::size_t index(const Point& x) const;
    Point point(std::size_t i) const;
    int coord(std::size_t i, int axis) const;
    std::size_t stride(int axis) const { return strides_[axis]; }

    std::size_t forward(std::size_t i, int axis) const { return fwd_[axis * size_ + i]; }
    std::size_t backward(std::size_t i, int axis) const { return bwd_[axis * size_ + i]; }
    const std::uint32_t* forward_table(int axis) const { return fwd_.data() + axis * size_; }
    const std::uint32_t* backward_table(int axis) const { return bwd_.data() + axis * size_; }

    // If x ~ y, returns true and sets axis and sign with y = x + sign*e_axis.
    bool adjacent(std::size_t x, std::size_t y, int& axis, int& sign) const;

    // Sites of the wrapped box center + {-r..r}^d; r >= L gives every site once.
    std::vector<std::size_t> box(const Point& center, int r) const;

private:
    int dim_;
    int radius_;
    std::size_t size_;
    std::array<std::size_t, kMaxDim> strides_{};
    std::vector<std::uint32_t> fwd_;
    std::vector<std::uint32_t> bwd_;
};

TorusGrid make_torus(int d, int L);

// Values on positively oriented edges (x, x+e_i); the reverse edge carries the
// opposite sign, so antisymmetry holds by construction.
class EdgeField {
public:
    EdgeField() = default;
    EdgeField(int dim, std::size_t sites, double fill = 0.0);

    int dim() const { return dim_; }
    std::size_t sites() const { return sites_; }
    double& at(std::size_t x, int axis) { return values_[axis * sites_ + x]; }
    double at(std::size_t x, int axis) const { return values_[axis * sites_ + x]; }
    double directed(const TorusGrid& g, std::size_t x, std::size_t y) const;
    std::span<double> axis_values(int axis) { return {values_.data() + axis * sites_, sites_}; }
    std::span<const double> axis_values(int axis) const { return {values_.data() + axis * sites_, sites_}; }
    const std::vector<double>& raw() const { return values_; }

private:
    int dim_ = 0;
    std::size_t sites_ = 0;
    std::vector<double> values_;
};

// Constant vector field p(x,y) = p.(y - x).
EdgeField constant_edge_field(const TorusGrid& g, const Slope& p);
EdgeField gradient_field(const TorusGrid& g, std::span<const double> u);

double grad(const TorusGrid& g, std::span<const double> u, std::size_t x, std::size_t y);
double divergence(const TorusGrid& g, const EdgeField& f, std::size_t x);
double laplacian(const TorusGrid& g, std::span<const double> u, std::size_t x);
double nonlinear_div(const Potential& V, const Slope& q, const TorusGrid& g,
                     std::span<const double> u, std::size_t x);

// Box D = prod_i (0, n_i/N) sampled at mesh 1/N. Storage covers the closed
// grid {0..n_i}^d; sites with exactly one coordinate on the faces form the
// external vertex boundary, the rest of the faces are corners that only the
// homogenized operator touches.
class DirichletDomain {
public:
    enum class Kind : std::uint8_t { interior, boundary, corner };

    DirichletDomain(int dim, int N);
    DirichletDomain(int dim, int N, std::vector<int> cells);

    int dim() const { return dim_; }
    int mesh_count() const { return N_; }
    double eps() const { return 1.0 / N_; }
    int cells(int axis) const { return cells_[axis]; }
    std::size_t size() const { return size_; }
    std::size_t stride(int axis) const { return strides_[axis]; }

    Kind kind(std::size_t i) const { return kind_[i]; }
    bool contains(const Point& k) const;
    std::size_t index(const Point& k) const;
    Point point(std::size_t i) const;
    double position(std::size_t i, int axis) const;
    const std::vector<std::size_t>& interior() const { return interior_; }
    const std::vector<std::size_t>& boundary() const { return boundary_; }
    const std::vector<std::size_t>& corners() const { return corners_; }

private:
    int dim_;
    int N_;
    std::vector<int> cells_;
    std::array<std::size_t, kMaxDim> strides_{};
    std::size_t size_ = 0;
    std::vector<Kind> kind_;
    std::vector<std::size_t> interior_, boundary_, corners_;
};

// (u(y) - u(x)) / eps; throws unless x ~ y and both are interior or boundary.
double grad(const DirichletDomain& D, std::span<const double> u, std::size_t x, std::size_t y);

// (t_lo, t_hi) x (center + {-r..r}^d); radius < 0 means the whole torus.
struct Cylinder {
    double t_lo = -1.0;
    double t_hi = 0.0;
    Point center{};
    int radius = -1;

    static Cylinder standard(int L);  // Q_L = (-L^2, 0) x Lambda_L
    static Cylinder whole(double t_lo, double t_hi);
    double duration() const { return t_hi - t_lo; }
    std::size_t site_count(const TorusGrid& g) const;
    double volume(const TorusGrid& g) const { return duration() * double(site_count(g)); }
};

// Uniform-in-time record of site values. Slice n lives at t0 + n*dt.
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    SpaceTimeField(double t0, double dt, std::size_t sites);
    SpaceTimeField(double t0, double dt, std::size_t slices, std::size_t sites);

    double t0() const { return t0_; }
    double dt() const { return dt_; }
    double t_end() const { return t0_ + dt_ * double(slices() == 0 ? 0 : slices() - 1); }
    std::size_t sites() const { return sites_; }
    std::size_t slices() const { return sites_ == 0 ? 0 : data_.size() / sites_; }
    double time(std::size_t n) const { return t0_ + dt_ * double(n); }

    std::span<double> slice(std::size_t n) { return {data_.data() + n * sites_, sites_}; }
    std::span<const double> slice(std::size_t n) const { return {data_.data() + n * sites_, sites_}; }
    void append(std::span<const double> values);
    std::size_t nearest_slice(double t) const;
    const std::vector<double>& raw() const { return data_; }

private:
    double t0_ = 0.0;
    double dt_ = 1.0;
    std::size_t sites_ = 0;
    std::vector<double> data_;
};

// Number of explicit steps covering a horizon, ceil(h/dt) with a guard
// against round-off when h is an exact multiple of dt.
std::int64_t step_count(double horizon, double dt);

class TimeEdgeField {
public:
    TimeEdgeField() = default;
    TimeEdgeField(double t0, double dt) : t0_(t0), dt_(dt) {}

    double t0() const { return t0_; }
    double dt() const { return dt_; }
    std::size_t slices() const { return slices_.size(); }
    double time(std::size_t n) const { return t0_ + dt_ * double(n); }
    const EdgeField& slice(std::size_t n) const { return slices_[n]; }
    EdgeField& slice(std::size_t n) { return slices_[n]; }
    void append(EdgeField e) { slices_.push_back(std::move(e)); }
    std::size_t nearest_slice(double t) const;

private:
    double t0_ = 0.0;
    double dt_ = 1.0;
    std::vector<EdgeField> slices_;
};

// Space-time averages; time integrals use the trapezoid rule on the slices
// nearest to Q's end points.
double cylinder_average(const SpaceTimeField& f, const TorusGrid& g, const Cylinder& Q);
Slope cylinder_average(const TimeEdgeField& f, const TorusGrid& g, const Cylinder& Q);

// Triadic cells: a cell of scale m has spatial side 3^m and time length 3^{2m}.
// Q_{3^n} is (-3^{2n}, 0] x {-(3^n-1)/2 .. (3^n-1)/2}^d.
struct TriadicCell {
    std::int64_t t_end;  // cell covers (t_end - 3^{2m}, t_end]
    Point center;
};
std::vector<TriadicCell> partition_cells(int m, int n, int d);
std::int64_t pow3(int k);

}  // namespace gradphi
