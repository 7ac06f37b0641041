// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include "gradphi/dynamics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "gradphi/error.hpp"

namespace gradphi {

SlopePath::SlopePath(std::vector<double> breaks, std::vector<Slope> slopes)
    : breaks_(std::move(breaks)), slopes_(std::move(slopes)) {
    if (breaks_.empty() || breaks_.size() != slopes_.size()) {
        throw std::invalid_argument("slope path needs one slope per breakpoint");
    }
    for (std::size_t i = 1; i < breaks_.size(); ++i) {
        if (!(breaks_[i] > breaks_[i - 1])) throw std::invalid_argument("slope breakpoints must increase strictly");
        if (slopes_[i].size() != slopes_[0].size()) throw std::invalid_argument("slope dimensions differ");
    }
}

SlopePath SlopePath::constant(Slope p) {
    return SlopePath({-std::numeric_limits<double>::infinity()}, {std::move(p)});
}

SlopePath SlopePath::from_json(const nlohmann::json& j, int d) {
    auto read_slope = [d](const nlohmann::json& s) {
        auto v = s.get<std::vector<double>>();
        if (int(v.size()) != d) throw ConfigError("slope has the wrong dimension");
        return v;
    };
    if (j.is_array() && (j.empty() || j.front().is_number())) return constant(read_slope(j));
    if (j.is_array()) {
        std::vector<double> br;
        std::vector<Slope> sl;
        for (const auto& piece : j) {
            br.push_back(piece.at("t").get<double>());
            sl.push_back(read_slope(piece.at("slope")));
        }
        return SlopePath(std::move(br), std::move(sl));
    }
    throw ConfigError("slope must be a vector or a list of {t, slope} pieces");
}

const Slope& SlopePath::at(double t) const {
    if (breaks_.empty() || t < breaks_.front()) throw std::out_of_range("slope path does not cover this time");
    std::size_t i = 0;
    while (i + 1 < breaks_.size() && breaks_[i + 1] <= t) ++i;
    return slopes_[i];
}

nlohmann::json SlopePath::to_json() const {
    if (is_constant() && std::isinf(breaks_.front())) return slopes_.front();
    auto j = nlohmann::json::array();
    for (std::size_t i = 0; i < breaks_.size(); ++i) j.push_back({{"t", breaks_[i]}, {"slope", slopes_[i]}});
    return j;
}

double stable_dt(int d, double c_plus) { return 1.0 / (8.0 * double(d) * c_plus); }

void check_stable(double dt, int d, double c_plus) {
    if (!(dt > 0.0) || dt > stable_dt(d, c_plus) * (1.0 + 1e-12)) {
        throw NumericalError("time step exceeds the explicit stability bound 1/(8 d c+)");
    }
}

double SimConfig::resolved_dt() const {
    return dt > 0.0 ? dt : stable_dt(dim, Potential::from_json(potential).c_plus());
}

void SimConfig::validate() const {
    const auto V = Potential::from_json(potential);
    if (dim < 2) throw ConfigError("dimension must be >= 2");
    if (radius < 1) throw ConfigError("radius must be >= 1");
    if (replicas < 1) throw ConfigError("replicas must be >= 1");
    if (slope.dim() != dim) throw ConfigError("slope dimension differs from the grid dimension");
    check_stable(resolved_dt(), dim, V.c_plus());
}

nlohmann::json SimConfig::to_json() const {
    return {{"potential", potential}, {"grid", {{"dim", dim}, {"L", radius}}}, {"dt", dt}, {"horizon", horizon},
            {"slope", slope.to_json()}, {"seed", seed}, {"replicas", replicas}, {"burn_in", burn_in}};
}

SimConfig SimConfig::from_json(const nlohmann::json& j) {
    SimConfig c;
    if (!j.contains("potential")) throw ConfigError("missing \"potential\"");
    c.potential = j.at("potential");
    if (j.contains("grid")) {
        c.dim = j.at("grid").value("dim", 2);
        c.radius = j.at("grid").value("L", 8);
    }
    c.dt = j.value("dt", 0.0);
    c.horizon = j.value("horizon", 0.0);
    c.slope = j.contains("slope") ? SlopePath::from_json(j.at("slope"), c.dim) : SlopePath::constant(Slope(c.dim, 0.0));
    c.seed = j.value("seed", std::uint64_t(1));
    c.replicas = j.value("replicas", 1);
    c.burn_in = j.value("burn_in", -1.0);
    return c;
}

namespace {

std::size_t checked_record_count(std::int64_t steps, std::size_t stride) {
    if (stride == 0) return 0;
    if (steps % std::int64_t(stride) != 0) throw std::invalid_argument("record stride must divide the step count");
    return std::size_t(steps) / stride + 1;
}

template <class E>
void periodic_loop(const TorusGrid& g, const E& ev, const SlopePath& q, double s_lo, std::int64_t steps, double dt,
                   Field& u, const NoiseSource& src, const RunOptions& opt, SpaceTimeField* out) {
    const std::size_t n = g.size();
    const int d = g.dim();
    std::vector<std::uint32_t> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        Point x = g.point(i);
        for (int a = 0; a < d; ++a) x[a] += opt.key_offset[a];
        keys[i] = site_key(x, d);
    }
    Field next(n), flux(std::size_t(d) * n), xi(n, 0.0);
    const double amp = opt.noise_scale * std::sqrt(2.0 * dt);
    const bool noisy = opt.noise_scale != 0.0;
    std::array<const std::uint32_t*, kMaxDim> fw{}, bw{};
    for (int a = 0; a < d; ++a) {
        fw[a] = g.forward_table(a);
        bw[a] = g.backward_table(a);
    }
    for (std::int64_t k = 0; k < steps; ++k) {
        const double t = s_lo + double(k) * dt;
        const Slope& qs = q.at(t);
        for (int a = 0; a < d; ++a) {
            double* F = flux.data() + std::size_t(a) * n;
            const double qa = qs[a];
            const std::uint32_t* f = fw[a];
            for (std::size_t x = 0; x < n; ++x) F[x] = ev.d1(qa + u[f[x]] - u[x]);
        }
        if (noisy) {
            const std::int64_t kabs = std::llround(t / dt);
            double mean = 0.0;
            for (std::size_t x = 0; x < n; ++x) {
                xi[x] = src.increment(keys[x], kabs);
                mean += xi[x];
            }
            mean /= double(n);
            for (std::size_t x = 0; x < n; ++x) xi[x] -= mean;
        }
        for (std::size_t x = 0; x < n; ++x) {
            double drift = 0.0;
            for (int a = 0; a < d; ++a) {
                const double* F = flux.data() + std::size_t(a) * n;
                drift += F[x] - F[bw[a][x]];
            }
            next[x] = u[x] + dt * drift + amp * xi[x];
        }
        u.swap(next);
        const std::int64_t m = k + 1;
        if (out && opt.record_stride && m % std::int64_t(opt.record_stride) == 0) out->append(u);
        if (opt.observer) opt.observer(m, s_lo + double(m) * dt, u);
    }
}

}  // namespace

SpaceTimeField run_periodic(const TorusGrid& g, const Potential& V, const SlopePath& q, double s_lo, double s_hi,
                            const Field& init, const NoiseSource& src, const RunOptions& opt) {
    const double dt = opt.dt > 0.0 ? opt.dt : stable_dt(g.dim(), V.c_plus());
    check_stable(dt, g.dim(), V.c_plus());
    if (!(s_hi >= s_lo)) throw std::invalid_argument("empty time interval");
    if (!q.covers(s_lo)) throw std::invalid_argument("slope path does not cover the time interval");
    if (q.dim() != g.dim()) throw std::invalid_argument("slope dimension differs from the grid");
    if (init.size() != g.size()) throw std::invalid_argument("initial field has the wrong size");
    const std::int64_t steps = step_count(s_hi - s_lo, dt);
    const std::size_t records = checked_record_count(steps, opt.record_stride);
    SpaceTimeField out(s_lo, dt * double(std::max<std::size_t>(opt.record_stride, 1)), g.size());
    Field u = init;
    if (records) out.append(u);
    if (opt.observer) opt.observer(0, s_lo, u);
    V.visit([&](auto ev) { periodic_loop(g, ev, q, s_lo, steps, dt, u, src, opt, records ? &out : nullptr); });
    return out;
}

SpaceTimeField run_corrector(const TorusGrid& g, double s_lo, double s_hi, const SlopePath& q, const Potential& V,
                             const NoiseSource& src, const RunOptions& opt) {
    return run_periodic(g, V, q, s_lo, s_hi, Field(g.size(), 0.0), src, opt);
}

SpaceTimeField run_stationary_periodic(const TorusGrid& g, const Slope& p, const Potential& V, const NoiseSource& src,
                                       double burn_in, double window, const RunOptions& opt) {
    const double dt = opt.dt > 0.0 ? opt.dt : stable_dt(g.dim(), V.c_plus());
    const auto q = SlopePath::constant(p);
    Field init(g.size(), 0.0);
    if (V.is_quadratic()) {
        init = sample_gff(g, src);
    } else if (burn_in > 0.0) {
        RunOptions warm;
        warm.dt = dt;
        warm.record_stride = 0;
        warm.noise_scale = opt.noise_scale;
        warm.observer = [&init](std::int64_t, double, std::span<const double> u) {
            init.assign(u.begin(), u.end());
        };
        const double start = -window - double(step_count(burn_in, dt)) * dt;
        run_periodic(g, V, q, start, -window, init, src, warm);
    }
    RunOptions o = opt;
    o.dt = dt;
    return run_periodic(g, V, q, -window, 0.0, init, src, o);
}

std::vector<double> real_fourier_basis(int n) {
    const int L = (n - 1) / 2;
    std::vector<double> B(std::size_t(n) * std::size_t(n));
    const double c0 = 1.0 / std::sqrt(double(n)), c1 = std::sqrt(2.0 / double(n));
    for (int c = 0; c < n; ++c) {
        const double x = double(c - L);
        B[std::size_t(c) * n] = c0;
        for (int k = 1; k <= L; ++k) {
            const double th = 2.0 * std::numbers::pi * double(k) * x / double(n);
            B[std::size_t(c) * n + std::size_t(2 * k - 1)] = c1 * std::cos(th);
            B[std::size_t(c) * n + std::size_t(2 * k)] = c1 * std::sin(th);
        }
    }
    return B;
}

double cycle_eigenvalue(int n, int m) {
    if (m == 0) return 0.0;
    const int k = (m + 1) / 2;
    return 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * double(k) / double(n));
}

double mode_eigenvalue(const TorusGrid& g, const Point& m) {
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) s += cycle_eigenvalue(g.side(), m[a]);
    return s;
}

namespace {

// Applies B (n x n) along every axis of a row-major n^d tensor;
// transpose selects B^T (analysis) instead of B (synthesis).
void tensor_apply(const TorusGrid& g, const std::vector<double>& B, std::vector<double>& data, bool transpose) {
    const std::size_t n = std::size_t(g.side());
    std::vector<double> line(n), res(n);
    for (int a = 0; a < g.dim(); ++a) {
        const std::size_t s = g.stride(a);
        for (std::size_t base = 0; base < g.size(); ++base) {
            if ((base / s) % n != 0) continue;
            for (std::size_t i = 0; i < n; ++i) line[i] = data[base + i * s];
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += (transpose ? B[j * n + i] : B[i * n + j]) * line[j];
                res[i] = acc;
            }
            for (std::size_t i = 0; i < n; ++i) data[base + i * s] = res[i];
        }
    }
}

}  // namespace

Field sample_gff(const TorusGrid& g, const NoiseSource& src) {
    const NoiseSource modes = src.with_stream(Stream::initial);
    const int n = g.side();
    std::vector<double> coef(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        Point m{};
        std::size_t rem = i;
        for (int a = g.dim() - 1; a >= 0; --a) {
            m[a] = int(rem % std::size_t(n));
            rem /= std::size_t(n);
        }
        const double lam = mode_eigenvalue(g, m);
        if (lam == 0.0) continue;
        Point key{};
        for (int a = 0; a < g.dim(); ++a) key[a] = m[a] - g.radius();
        coef[i] = modes.increment(site_key(key, g.dim()), 0) / std::sqrt(lam);
    }
    tensor_apply(g, real_fourier_basis(n), coef, false);
    subtract_mean(coef);
    return coef;
}

double mode_coefficient(const TorusGrid& g, std::span<const double> u, const Point& m) {
    const auto B = real_fourier_basis(g.side());
    const std::size_t n = std::size_t(g.side());
    double acc = 0.0;
    for (std::size_t x = 0; x < g.size(); ++x) {
        double w = 1.0;
        for (int a = 0; a < g.dim(); ++a) {
            const std::size_t c = std::size_t(g.coord(x, a) + g.radius());
            w *= B[c * n + std::size_t(m[a])];
        }
        acc += w * u[x];
    }
    return acc;
}

SpaceTimeField run_gff_dynamic(const TorusGrid& g, double s_lo, double s_hi, const NoiseSource& src,
                               const RunOptions& opt) {
    return run_periodic(g, Potential::quadratic(), SlopePath::constant(Slope(std::size_t(g.dim()), 0.0)), s_lo, s_hi,
                        sample_gff(g, src), src, opt);
}

TimeEdgeField difference_environment(const TorusGrid& g, const SpaceTimeField& u, const SpaceTimeField& v,
                                     const Potential& V, const Slope& pu, const Slope& pv) {
    if (u.slices() != v.slices() || u.sites() != g.size() || v.sites() != g.size() ||
        std::abs(u.t0() - v.t0()) > 1e-12 || std::abs(u.dt() - v.dt()) > 1e-15) {
        throw std::invalid_argument("difference_environment: fields live on different cylinders");
    }
    using G8 = boost::math::quadrature::gauss<double, 8>;
    const auto& xs = G8::abscissa();
    const auto& ws = G8::weights();
    std::array<double, 8> s{}, w{};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        s[2 * i] = 0.5 * (1.0 + xs[i]);
        s[2 * i + 1] = 0.5 * (1.0 - xs[i]);
        w[2 * i] = w[2 * i + 1] = 0.5 * ws[i];
    }
    TimeEdgeField out(u.t0(), u.dt());
    const double lo = V.c_minus(), hi = V.c_plus();
    for (std::size_t n = 0; n < u.slices(); ++n) {
        const auto us = u.slice(n), vs = v.slice(n);
        EdgeField a(g.dim(), g.size());
        for (int ax = 0; ax < g.dim(); ++ax) {
            const auto* fw = g.forward_table(ax);
            auto vals = a.axis_values(ax);
            const double qu = pu.empty() ? 0.0 : pu[ax], qv = pv.empty() ? 0.0 : pv[ax];
            for (std::size_t x = 0; x < g.size(); ++x) {
                const double gu = qu + us[fw[x]] - us[x];
                const double gv = qv + vs[fw[x]] - vs[x];
                double acc = 0.0;
                for (int i = 0; i < 8; ++i) acc += w[i] * V.second(s[i] * gv + (1.0 - s[i]) * gu);
                vals[x] = std::clamp(acc, lo, hi);
            }
        }
        out.append(std::move(a));
    }
    return out;
}

BoundaryDatum BoundaryDatum::named(const std::string& name, int d) {
    if (name == "sine_product") {
        return {name, [d](double t, std::span<const double> x) {
                    double v = std::exp(t);
                    for (int a = 0; a < d; ++a) v *= std::sin(std::numbers::pi * x[a]);
                    return v;
                }};
    }
    if (name == "zero") return {name, [](double, std::span<const double>) { return 0.0; }};
    if (name == "tilt") {
        return {name, [d](double, std::span<const double> x) {
                    double v = 0.0;
                    for (int a = 0; a < d; ++a) v += x[a] / double(a + 1);
                    return v;
                }};
    }
    throw ConfigError("unknown boundary datum '" + name + "'");
}

double smoothed_datum(const BoundaryDatum& f, double t, std::span<const double> x, double eps) {
    using G8 = boost::math::quadrature::gauss<double, 8>;
    const auto& xs = G8::abscissa();
    const auto& ws = G8::weights();
    std::array<double, 8> node{}, weight{};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        node[2 * i] = xs[i];
        node[2 * i + 1] = -xs[i];
        weight[2 * i] = weight[2 * i + 1] = 0.5 * ws[i];
    }
    const int d = int(x.size());
    std::array<double, kMaxDim> y{};
    std::array<int, kMaxDim> idx{};
    double acc = 0.0;
    for (;;) {
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            y[a] = x[a] + eps * node[idx[a]];
            w *= weight[idx[a]];
        }
        acc += w * f.f(t, std::span<const double>(y.data(), std::size_t(d)));
        int a = d - 1;
        while (a >= 0 && ++idx[a] == 8) idx[a--] = 0;
        if (a < 0) break;
    }
    return acc;
}

PinnedBoundary pin_boundary(const DirichletDomain& D, const BoundaryDatum& f, double h) {
    if (!f.f) throw std::invalid_argument("missing boundary data");
    PinnedBoundary p;
    p.h = h;
    p.steps = step_count(1.0, h);
    p.sites = D.boundary();
    p.sites.insert(p.sites.end(), D.corners().begin(), D.corners().end());
    const int d = D.dim();
    std::vector<double> pos(static_cast<std::size_t>(d));
    auto eval = [&](std::size_t i, double t) {
        for (int a = 0; a < d; ++a) pos[a] = D.position(i, a);
        return smoothed_datum(f, t, pos, D.eps());
    };
    p.initial.resize(D.size());
    for (std::size_t i = 0; i < D.size(); ++i) p.initial[i] = eval(i, -1.0);
    p.values.resize(std::size_t(p.steps + 1) * p.sites.size());
    for (std::int64_t k = 0; k <= p.steps; ++k) {
        const double t = -1.0 + double(k) * h;
        for (std::size_t j = 0; j < p.sites.size(); ++j) p.values[std::size_t(k) * p.sites.size() + j] = eval(p.sites[j], t);
    }
    return p;
}

namespace {

template <class E>
void dirichlet_loop(const DirichletDomain& D, const E& ev, const PinnedBoundary& pins, std::int64_t steps, double dt,
                    const NoiseSource& src, const RunOptions& opt, SpaceTimeField* out) {
    const double eps = D.eps();
    const int d = D.dim();
    const double N2 = double(D.mesh_count()) * double(D.mesh_count());
    const double dt_macro = dt / N2;
    std::vector<double> v(D.size()), next(D.size());
    for (std::size_t i = 0; i < D.size(); ++i) v[i] = pins.initial[i] / eps;
    const auto& inner = D.interior();
    std::vector<std::uint32_t> keys(inner.size());
    for (std::size_t j = 0; j < inner.size(); ++j) keys[j] = site_key(D.point(inner[j]), d);
    std::array<std::size_t, kMaxDim> st{};
    for (int a = 0; a < d; ++a) st[a] = D.stride(a);
    const double amp = opt.noise_scale * std::sqrt(2.0 * dt);
    const bool noisy = opt.noise_scale != 0.0;
    std::vector<double> u(D.size());
    auto emit = [&](std::int64_t m) {
        for (std::size_t i = 0; i < D.size(); ++i) u[i] = eps * v[i];
        const auto row = pins.row(m);
        for (std::size_t j = 0; j < pins.sites.size(); ++j) u[pins.sites[j]] = row[j];
        if (out && opt.record_stride && m % std::int64_t(opt.record_stride) == 0) out->append(u);
        if (opt.observer) opt.observer(m, -1.0 + double(m) * dt_macro, u);
    };
    emit(0);
    next = v;
    for (std::int64_t k = 0; k < steps; ++k) {
        const std::int64_t kabs = std::llround((-N2 + double(k) * dt) / dt);
        for (std::size_t j = 0; j < inner.size(); ++j) {
            const std::size_t x = inner[j];
            double drift = 0.0;
            for (int a = 0; a < d; ++a) drift += ev.d1(v[x + st[a]] - v[x]) + ev.d1(v[x - st[a]] - v[x]);
            double val = v[x] + dt * drift;
            if (noisy) val += amp * src.increment(keys[j], kabs);
            next[x] = val;
        }
        const auto row = pins.row(k + 1);
        for (std::size_t j = 0; j < pins.sites.size(); ++j) next[pins.sites[j]] = row[j] / eps;
        v.swap(next);
        emit(k + 1);
    }
}

}  // namespace

SpaceTimeField run_dirichlet(const DirichletDomain& D, const PinnedBoundary& pins, const Potential& V,
                             const NoiseSource& src, const RunOptions& opt) {
    const double dt = opt.dt > 0.0 ? opt.dt : stable_dt(D.dim(), V.c_plus());
    check_stable(dt, D.dim(), V.c_plus());
    const double N2 = double(D.mesh_count()) * double(D.mesh_count());
    const std::int64_t steps = step_count(N2, dt);
    if (pins.steps != steps || std::abs(pins.h - dt / N2) > 1e-15 || pins.initial.size() != D.size()) {
        throw std::invalid_argument("boundary table does not match the time grid");
    }
    const std::size_t records = checked_record_count(steps, opt.record_stride);
    SpaceTimeField out(-1.0, dt / N2 * double(std::max<std::size_t>(opt.record_stride, 1)), D.size());
    V.visit([&](auto ev) { dirichlet_loop(D, ev, pins, steps, dt, src, opt, records ? &out : nullptr); });
    return out;
}

SpaceTimeField run_dirichlet(const DirichletDomain& D, const BoundaryDatum& f, const Potential& V,
                             const NoiseSource& src, const RunOptions& opt) {
    const double dt = opt.dt > 0.0 ? opt.dt : stable_dt(D.dim(), V.c_plus());
    const double N2 = double(D.mesh_count()) * double(D.mesh_count());
    return run_dirichlet(D, pin_boundary(D, f, dt / N2), V, src, opt);
}

}  // namespace gradphi
