// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include "gradphi/lattice.hpp"

#include <cmath>
#include <stdexcept>

#include "gradphi/potential.hpp"

namespace gradphi {

namespace {

int wrap(int c, int L) {
    const int n = 2 * L + 1;
    int r = (c + L) % n;
    if (r < 0) r += n;
    return r;
}

}  // namespace

TorusGrid::TorusGrid(int dim, int radius) : dim_(dim), radius_(radius) {
    if (dim < 2 || dim > kMaxDim) throw std::invalid_argument("torus dimension must be in [2, 4]");
    if (radius < 1) throw std::invalid_argument("torus radius must be >= 1");
    const std::size_t n = std::size_t(side());
    size_ = 1;
    for (int a = dim_ - 1; a >= 0; --a) {
        strides_[a] = size_;
        size_ *= n;
    }
    if (size_ > 0xffffffffu) throw std::invalid_argument("torus too large");
    fwd_.resize(dim_ * size_);
    bwd_.resize(dim_ * size_);
    for (std::size_t i = 0; i < size_; ++i) {
        for (int a = 0; a < dim_; ++a) {
            const std::size_t c = (i / strides_[a]) % n;
            const std::size_t up = c + 1 == n ? i - c * strides_[a] : i + strides_[a];
            const std::size_t dn = c == 0 ? i + (n - 1) * strides_[a] : i - strides_[a];
            fwd_[a * size_ + i] = std::uint32_t(up);
            bwd_[a * size_ + i] = std::uint32_t(dn);
        }
    }
}

std::size_t TorusGrid::index(const Point& x) const {
    std::size_t i = 0;
    for (int a = 0; a < dim_; ++a) i += std::size_t(wrap(x[a], radius_)) * strides_[a];
    return i;
}

Point TorusGrid::point(std::size_t i) const {
    Point p{};
    for (int a = 0; a < dim_; ++a) p[a] = coord(i, a);
    return p;
}

int TorusGrid::coord(std::size_t i, int axis) const {
    return int((i / strides_[axis]) % std::size_t(side())) - radius_;
}

bool TorusGrid::adjacent(std::size_t x, std::size_t y, int& axis, int& sign) const {
    for (int a = 0; a < dim_; ++a) {
        if (forward(x, a) == y) {
            axis = a;
            sign = 1;
            return true;
        }
        if (backward(x, a) == y) {
            axis = a;
            sign = -1;
            return true;
        }
    }
    return false;
}

std::vector<std::size_t> TorusGrid::box(const Point& center, int r) const {
    std::vector<std::size_t> out;
    if (r < 0 || r >= radius_) {
        out.resize(size_);
        for (std::size_t i = 0; i < size_; ++i) out[i] = i;
        return out;
    }
    const int w = 2 * r + 1;
    std::size_t count = 1;
    for (int a = 0; a < dim_; ++a) count *= std::size_t(w);
    out.reserve(count);
    Point off{};
    for (std::size_t k = 0; k < count; ++k) {
        std::size_t rem = k;
        for (int a = dim_ - 1; a >= 0; --a) {
            off[a] = center[a] - r + int(rem % std::size_t(w));
            rem /= std::size_t(w);
        }
        out.push_back(index(off));
    }
    return out;
}

TorusGrid make_torus(int d, int L) { return TorusGrid(d, L); }

EdgeField::EdgeField(int dim, std::size_t sites, double fill)
    : dim_(dim), sites_(sites), values_(std::size_t(dim) * sites, fill) {}

double EdgeField::directed(const TorusGrid& g, std::size_t x, std::size_t y) const {
    int axis = 0, sign = 0;
    if (!g.adjacent(x, y, axis, sign)) throw std::invalid_argument("edge endpoints are not adjacent");
    return sign > 0 ? at(x, axis) : -at(y, axis);
}

EdgeField constant_edge_field(const TorusGrid& g, const Slope& p) {
    EdgeField e(g.dim(), g.size());
    for (int a = 0; a < g.dim(); ++a) {
        for (auto& v : e.axis_values(a)) v = p.at(a);
    }
    return e;
}

EdgeField gradient_field(const TorusGrid& g, std::span<const double> u) {
    EdgeField e(g.dim(), g.size());
    for (int a = 0; a < g.dim(); ++a) {
        const auto* fw = g.forward_table(a);
        auto out = e.axis_values(a);
        for (std::size_t x = 0; x < g.size(); ++x) out[x] = u[fw[x]] - u[x];
    }
    return e;
}

double grad(const TorusGrid& g, std::span<const double> u, std::size_t x, std::size_t y) {
    int axis = 0, sign = 0;
    if (x >= g.size() || y >= g.size() || !g.adjacent(x, y, axis, sign)) {
        throw std::invalid_argument("grad: not an edge of the torus");
    }
    return u[y] - u[x];
}

double divergence(const TorusGrid& g, const EdgeField& f, std::size_t x) {
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) s += f.at(x, a) - f.at(g.backward(x, a), a);
    return s;
}

double laplacian(const TorusGrid& g, std::span<const double> u, std::size_t x) {
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) s += (u[g.forward(x, a)] - u[x]) + (u[g.backward(x, a)] - u[x]);
    return s;
}

double nonlinear_div(const Potential& V, const Slope& q, const TorusGrid& g,
                     std::span<const double> u, std::size_t x) {
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        s += V.first(q.at(a) + u[g.forward(x, a)] - u[x]);
        s += V.first(-q.at(a) + u[g.backward(x, a)] - u[x]);
    }
    return s;
}

DirichletDomain::DirichletDomain(int dim, int N) : DirichletDomain(dim, N, std::vector<int>(std::size_t(dim), N)) {}

DirichletDomain::DirichletDomain(int dim, int N, std::vector<int> cells)
    : dim_(dim), N_(N), cells_(std::move(cells)) {
    if (dim < 2 || dim > kMaxDim) throw std::invalid_argument("domain dimension must be in [2, 4]");
    if (N < 2) throw std::invalid_argument("mesh count N must be >= 2");
    if (int(cells_.size()) != dim) throw std::invalid_argument("one cell count per axis required");
    size_ = 1;
    for (int a = dim_ - 1; a >= 0; --a) {
        if (cells_[a] < 2) throw std::invalid_argument("box needs at least two cells per axis");
        strides_[a] = size_;
        size_ *= std::size_t(cells_[a] + 1);
    }
    kind_.resize(size_);
    for (std::size_t i = 0; i < size_; ++i) {
        const Point k = point(i);
        int on_face = 0;
        for (int a = 0; a < dim_; ++a) on_face += (k[a] == 0 || k[a] == cells_[a]) ? 1 : 0;
        Kind kd = on_face == 0 ? Kind::interior : on_face == 1 ? Kind::boundary : Kind::corner;
        kind_[i] = kd;
        (kd == Kind::interior ? interior_ : kd == Kind::boundary ? boundary_ : corners_).push_back(i);
    }
}

bool DirichletDomain::contains(const Point& k) const {
    for (int a = 0; a < dim_; ++a) {
        if (k[a] < 0 || k[a] > cells_[a]) return false;
    }
    return true;
}

std::size_t DirichletDomain::index(const Point& k) const {
    if (!contains(k)) throw std::out_of_range("point outside the closed box");
    std::size_t i = 0;
    for (int a = 0; a < dim_; ++a) i += std::size_t(k[a]) * strides_[a];
    return i;
}

Point DirichletDomain::point(std::size_t i) const {
    Point p{};
    for (int a = 0; a < dim_; ++a) p[a] = int((i / strides_[a]) % std::size_t(cells_[a] + 1));
    return p;
}

double DirichletDomain::position(std::size_t i, int axis) const {
    return double(point(i)[axis]) / double(N_);
}

double grad(const DirichletDomain& D, std::span<const double> u, std::size_t x, std::size_t y) {
    if (x >= D.size() || y >= D.size()) throw std::out_of_range("grad: site outside the domain");
    if (D.kind(x) == DirichletDomain::Kind::corner || D.kind(y) == DirichletDomain::Kind::corner) {
        throw std::invalid_argument("grad: endpoint is neither interior nor boundary");
    }
    const Point a = D.point(x), b = D.point(y);
    int diff = 0;
    for (int k = 0; k < D.dim(); ++k) diff += std::abs(a[k] - b[k]);
    if (diff != 1) throw std::invalid_argument("grad: endpoints are not adjacent");
    return (u[y] - u[x]) / D.eps();
}

Cylinder Cylinder::standard(int L) {
    Cylinder q;
    q.t_lo = -double(L) * double(L);
    q.t_hi = 0.0;
    q.radius = L;
    return q;
}

Cylinder Cylinder::whole(double t_lo, double t_hi) {
    Cylinder q;
    q.t_lo = t_lo;
    q.t_hi = t_hi;
    q.radius = -1;
    return q;
}

std::size_t Cylinder::site_count(const TorusGrid& g) const {
    if (radius < 0 || radius >= g.radius()) return g.size();
    std::size_t n = 1;
    for (int a = 0; a < g.dim(); ++a) n *= std::size_t(2 * radius + 1);
    return n;
}

SpaceTimeField::SpaceTimeField(double t0, double dt, std::size_t sites) : t0_(t0), dt_(dt), sites_(sites) {}

SpaceTimeField::SpaceTimeField(double t0, double dt, std::size_t slices, std::size_t sites)
    : t0_(t0), dt_(dt), sites_(sites), data_(slices * sites, 0.0) {}

void SpaceTimeField::append(std::span<const double> values) {
    if (values.size() != sites_) throw std::invalid_argument("slice size mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
}

std::size_t SpaceTimeField::nearest_slice(double t) const {
    const double r = std::round((t - t0_) / dt_);
    if (slices() == 0 || r < -1e-9 || r > double(slices() - 1) + 1e-9) {
        throw std::out_of_range("time outside the field's range");
    }
    return std::size_t(r);
}

std::size_t TimeEdgeField::nearest_slice(double t) const {
    const double r = std::round((t - t0_) / dt_);
    if (slices_.empty() || r < 0.0 || r > double(slices_.size() - 1)) {
        throw std::out_of_range("time outside the field's range");
    }
    return std::size_t(r);
}

std::int64_t step_count(double horizon, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    if (horizon <= 0.0) return 0;
    const double r = horizon / dt;
    const double nearest = std::round(r);
    if (std::abs(r - nearest) < 1e-9 * std::max(1.0, r)) return std::int64_t(nearest);
    return std::int64_t(std::ceil(r));
}

double cylinder_average(const SpaceTimeField& f, const TorusGrid& g, const Cylinder& Q) {
    if (f.sites() != g.size()) throw std::invalid_argument("field does not live on this grid");
    const std::size_t n0 = f.nearest_slice(Q.t_lo), n1 = f.nearest_slice(Q.t_hi);
    const auto sites = g.box(Q.center, Q.radius);
    auto slice_mean = [&](std::size_t n) {
        const auto s = f.slice(n);
        double acc = 0.0;
        for (auto x : sites) acc += s[x];
        return acc / double(sites.size());
    };
    if (n0 == n1) return slice_mean(n0);
    double acc = 0.5 * (slice_mean(n0) + slice_mean(n1));
    for (std::size_t n = n0 + 1; n < n1; ++n) acc += slice_mean(n);
    return acc / double(n1 - n0);
}

Slope cylinder_average(const TimeEdgeField& f, const TorusGrid& g, const Cylinder& Q) {
    const std::size_t n0 = f.nearest_slice(Q.t_lo), n1 = f.nearest_slice(Q.t_hi);
    const auto sites = g.box(Q.center, Q.radius);
    Slope out(std::size_t(g.dim()), 0.0);
    for (int a = 0; a < g.dim(); ++a) {
        auto slice_mean = [&](std::size_t n) {
            const auto v = f.slice(n).axis_values(a);
            double acc = 0.0;
            for (auto x : sites) acc += v[x];
            return acc / double(sites.size());
        };
        if (n0 == n1) {
            out[a] = slice_mean(n0);
            continue;
        }
        double acc = 0.5 * (slice_mean(n0) + slice_mean(n1));
        for (std::size_t n = n0 + 1; n < n1; ++n) acc += slice_mean(n);
        out[a] = acc / double(n1 - n0);
    }
    return out;
}

std::int64_t pow3(int k) {
    std::int64_t r = 1;
    for (int i = 0; i < k; ++i) r *= 3;
    return r;
}

std::vector<TriadicCell> partition_cells(int m, int n, int d) {
    if (m < 0 || n < 0) throw std::invalid_argument("scales must be nonnegative");
    if (m > n) throw std::invalid_argument("cell scale exceeds the cylinder scale");
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("bad dimension");
    const std::int64_t side = pow3(m), big = pow3(n);
    const std::int64_t per_axis = big / side;
    const std::int64_t t_cells = per_axis * per_axis;
    std::int64_t spatial = 1;
    for (int a = 0; a < d; ++a) spatial *= per_axis;
    std::vector<TriadicCell> out;
    out.reserve(std::size_t(t_cells * spatial));
    const std::int64_t first_center = -(big - 1) / 2 + (side - 1) / 2;
    for (std::int64_t j = 0; j < t_cells; ++j) {
        for (std::int64_t s = 0; s < spatial; ++s) {
            TriadicCell c{-j * side * side, Point{}};
            std::int64_t rem = s;
            for (int a = d - 1; a >= 0; --a) {
                c.center[a] = int(first_center + (rem % per_axis) * side);
                rem /= per_axis;
            }
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace gradphi
