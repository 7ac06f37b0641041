// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include "gradphi/homogenize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace gradphi {

namespace {

// Trapezoid weight of the slice at t inside (lo, hi], in units of dt.
double window_weight(double t, double lo, double hi, double dt) {
    const double tol = 1e-9 * dt;
    if (t < lo - tol || t > hi + tol) return 0.0;
    if (std::abs(t - lo) <= tol || std::abs(t - hi) <= tol) return 0.5;
    return 1.0;
}

Slope zeros(int d) { return Slope(std::size_t(d), 0.0); }

RunOptions quiet_options(double dt) {
    RunOptions o;
    o.dt = dt;
    o.record_stride = 0;
    return o;
}

double resolve_dt(const EstimatorOptions& opt, int d, const Potential& V) {
    return opt.dt > 0.0 ? opt.dt : stable_dt(d, V.c_plus());
}

// Flux and gradient averages of one trajectory over a cylinder, streamed.
class CylinderFlux {
public:
    CylinderFlux(const TorusGrid& g, int radius, double lo, double hi, double dt)
        : g_(&g), sites_(g.box(Point{}, radius)), lo_(lo), hi_(hi), dt_(dt),
          flux_(std::size_t(g.dim()), 0.0), grad_(std::size_t(g.dim()), 0.0) {}

    template <class E>
    void observe(const E& ev, const Slope& q, double t, std::span<const double> u) {
        const double w = window_weight(t, lo_, hi_, dt_);
        if (w == 0.0) return;
        for (int a = 0; a < g_->dim(); ++a) {
            const auto* fw = g_->forward_table(a);
            double sf = 0.0, sg = 0.0;
            for (std::size_t x : sites_) {
                const double e = q[a] + u[fw[x]] - u[x];
                sf += ev.d1(e);
                sg += e - q[a];
            }
            flux_[a] += w * sf;
            grad_[a] += w * sg;
        }
        weight_ += w * double(sites_.size());
    }

    Slope flux() const { return scaled(flux_); }
    Slope grad() const { return scaled(grad_); }

private:
    Slope scaled(const Slope& s) const {
        Slope out(s);
        for (double& v : out) v /= weight_;
        return out;
    }
    const TorusGrid* g_;
    std::vector<std::size_t> sites_;
    double lo_, hi_, dt_;
    Slope flux_, grad_;
    double weight_ = 0.0;
};

FluxEstimate summarize_flux(SlopePath q, int L, std::vector<Slope> samples) {
    FluxEstimate est;
    est.slope = std::move(q);
    est.L = L;
    est.replicas = int(samples.size());
    const std::size_t d = samples.empty() ? 0 : samples.front().size();
    est.mean.assign(d, 0.0);
    est.se.assign(d, 0.0);
    for (std::size_t a = 0; a < d; ++a) {
        std::vector<double> col(samples.size());
        for (std::size_t r = 0; r < samples.size(); ++r) col[r] = samples[r][a];
        const auto m = mean_se(col);
        est.mean[a] = m.mean;
        est.se[a] = m.se;
    }
    est.samples = std::move(samples);
    return est;
}

void check_replicas(int replicas) {
    if (replicas < 2) throw std::invalid_argument("estimators need at least two replicas");
}

}  // namespace

nlohmann::json FluxEstimate::to_json() const {
    return {{"slope", slope.to_json()}, {"L", L}, {"replicas", replicas}, {"mean", mean}, {"se", se}};
}

FluxEstimate estimate_tau(const Slope& p, int L, const Potential& V, int replicas, const NoiseSource& src,
                          const EstimatorOptions& opt) {
    if (opt.start == StartMode::corrector) return estimate_tau(SlopePath::constant(p), L, V, replicas, src, opt);
    check_replicas(replicas);
    const int d = int(p.size());
    const TorusGrid g(d, L);
    const double dt = resolve_dt(opt, d, V);
    const double half = double(L / 2) * double(L / 2);
    const double burn = opt.burn_in >= 0.0 ? opt.burn_in : double(L) * double(L);
    std::vector<Slope> samples(static_cast<std::size_t>(replicas));
    parallel_for(std::size_t(replicas), opt.threads, [&](std::size_t r) {
        CylinderFlux acc(g, L / 2, -half, 0.0, dt);
        RunOptions o = quiet_options(dt);
        V.visit([&](auto ev) {
            o.observer = [&](std::int64_t, double t, std::span<const double> u) { acc.observe(ev, p, t, u); };
            run_stationary_periodic(g, p, V, src.with_replica(std::uint32_t(r)), burn, half, o);
        });
        samples[r] = acc.flux();
    });
    return summarize_flux(SlopePath::constant(p), L, std::move(samples));
}

FluxEstimate estimate_tau(const SlopePath& q, int L, const Potential& V, int replicas, const NoiseSource& src,
                          const EstimatorOptions& opt) {
    check_replicas(replicas);
    const int d = q.dim();
    const TorusGrid g(d, L);
    const double dt = resolve_dt(opt, d, V);
    const double T = double(L) * double(L);
    const double half = double(L / 2) * double(L / 2);
    std::vector<Slope> samples(static_cast<std::size_t>(replicas));
    parallel_for(std::size_t(replicas), opt.threads, [&](std::size_t r) {
        CylinderFlux acc(g, L / 2, -half, 0.0, dt);
        RunOptions o = quiet_options(dt);
        V.visit([&](auto ev) {
            o.observer = [&](std::int64_t, double t, std::span<const double> u) { acc.observe(ev, q.at(t), t, u); };
            run_corrector(g, -T, 0.0, q, V, src.with_replica(std::uint32_t(r)), o);
        });
        samples[r] = acc.flux();
    });
    return summarize_flux(q, L, std::move(samples));
}

nlohmann::json HessianEstimate::to_json() const {
    return {{"p", p},          {"L", L},
            {"replicas", replicas}, {"mean", mean},
            {"se", se},        {"eigenvalues", eigenvalues},
            {"positive", positive}};
}

HessianEstimate estimate_hessian(const Slope& p, int L, const Potential& V, int replicas, const NoiseSource& src,
                                 const EstimatorOptions& opt) {
    check_replicas(replicas);
    const int d = int(p.size());
    const TorusGrid g(d, L);
    const double dt = resolve_dt(opt, d, V);
    const double T = double(L) * double(L);
    const double half = double(L / 2) * double(L / 2);
    const auto sites = g.box(Point{}, L / 2);
    const auto q = SlopePath::constant(p);
    std::vector<std::vector<double>> samples(static_cast<std::size_t>(replicas));
    parallel_for(std::size_t(replicas), opt.threads, [&](std::size_t r) {
        std::vector<LinearizedCorrector> ws;
        for (int i = 0; i < d; ++i) {
            Slope e = zeros(d);
            e[i] = 1.0;
            ws.emplace_back(g, V, p, e);
        }
        std::vector<double> acc(std::size_t(d * d), 0.0);
        double weight = 0.0;
        Field prev;
        RunOptions o = quiet_options(dt);
        o.observer = [&](std::int64_t m, double t, std::span<const double> u) {
            if (m > 0) {
                for (auto& w : ws) w.step(prev, dt);
            }
            prev.assign(u.begin(), u.end());
            const double wt = window_weight(t, -half, 0.0, dt);
            if (wt == 0.0) return;
            for (int j = 0; j < d; ++j) {
                const auto* fw = g.forward_table(j);
                for (std::size_t x : sites) {
                    const double a = V.second(p[j] + u[fw[x]] - u[x]);
                    for (int i = 0; i < d; ++i) {
                        const Field& w = ws[i].value();
                        acc[std::size_t(i * d + j)] += wt * a * ((i == j ? 1.0 : 0.0) + w[fw[x]] - w[x]);
                    }
                }
            }
            weight += wt * double(sites.size());
        };
        run_corrector(g, -T, 0.0, q, V, src.with_replica(std::uint32_t(r)), o);
        for (double& v : acc) v /= weight;
        samples[r] = std::move(acc);
    });
    HessianEstimate h;
    h.p = p;
    h.L = L;
    h.replicas = replicas;
    h.mean.assign(std::size_t(d * d), 0.0);
    h.se.assign(std::size_t(d * d), 0.0);
    for (std::size_t k = 0; k < h.mean.size(); ++k) {
        std::vector<double> col(samples.size());
        for (std::size_t r = 0; r < samples.size(); ++r) col[r] = samples[r][k];
        const auto m = mean_se(col);
        h.mean[k] = m.mean;
        h.se[k] = m.se;
    }
    Eigen::MatrixXd M(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) M(i, j) = 0.5 * (h.mean[std::size_t(i * d + j)] + h.mean[std::size_t(j * d + i)]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    h.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + d);
    h.positive = h.eigenvalues.front() > 0.0;
    return h;
}

nlohmann::json FluxDecayResult::to_json() const {
    return {{"ells", ells},
            {"L", L},
            {"replicas", replicas},
            {"variance", variance},
            {"variance_se", variance_se},
            {"grad_variance", grad_variance},
            {"grad_variance_se", grad_variance_se},
            {"fit", fit.to_json()},
            {"grad_fit", grad_fit.to_json()}};
}

FluxDecayResult summarize_flux_decay(const std::vector<int>& ells, int L, int d,
                                     const std::vector<std::vector<std::vector<double>>>& samples) {
    FluxDecayResult res;
    res.ells = ells;
    res.L = L;
    res.replicas = int(samples.size());
    for (std::size_t k = 0; k < ells.size(); ++k) {
        double v = 0.0, vse = 0.0, gv = 0.0, gse = 0.0;
        for (int a = 0; a < d; ++a) {
            std::vector<double> f(samples.size()), gr(samples.size());
            for (std::size_t r = 0; r < samples.size(); ++r) {
                f[r] = samples[r][k][std::size_t(a)];
                gr[r] = samples[r][k][std::size_t(d + a)];
            }
            const auto mf = variance_jackknife(f), mg = variance_jackknife(gr);
            v += mf.mean / double(d);
            vse += mf.se / double(d);
            gv += mg.mean / double(d);
            gse += mg.se / double(d);
        }
        res.variance.push_back(v);
        res.variance_se.push_back(vse);
        res.grad_variance.push_back(gv);
        res.grad_variance_se.push_back(gse);
    }
    std::vector<double> xs(ells.begin(), ells.end());
    auto positive = [](const std::vector<double>& ys) {
        return std::all_of(ys.begin(), ys.end(), [](double y) { return y > 0.0; });
    };
    if (xs.size() >= 3 && positive(res.variance)) res.fit = fit_power_law(xs, res.variance);
    if (xs.size() >= 3 && positive(res.grad_variance)) res.grad_fit = fit_power_law(xs, res.grad_variance);
    return res;
}

FluxDecayResult flux_decay_experiment(const std::vector<int>& ells, int L, const Potential& V, const Slope& p,
                                      int replicas, const NoiseSource& src, const EstimatorOptions& opt) {
    if (ells.size() < 3) throw std::invalid_argument("flux decay needs at least three scales");
    check_replicas(replicas);
    for (int l : ells) {
        if (l < 1 || l > L) throw std::invalid_argument("scales must lie in [1, L]");
    }
    const int d = int(p.size());
    const TorusGrid g(d, L);
    const double dt = resolve_dt(opt, d, V);
    const double T = double(L) * double(L);
    const auto q = SlopePath::constant(p);
    std::vector<std::vector<std::vector<double>>> samples(static_cast<std::size_t>(replicas));
    parallel_for(std::size_t(replicas), opt.threads, [&](std::size_t r) {
        std::vector<CylinderFlux> accs;
        for (int l : ells) accs.emplace_back(g, l, -double(l) * double(l), 0.0, dt);
        RunOptions o = quiet_options(dt);
        V.visit([&](auto ev) {
            o.observer = [&](std::int64_t, double t, std::span<const double> u) {
                for (auto& a : accs) a.observe(ev, p, t, u);
            };
            const auto s = src.with_replica(std::uint32_t(r));
            if (opt.start == StartMode::stationary) {
                const double lmax = double(*std::max_element(ells.begin(), ells.end()));
                const double burn = opt.burn_in >= 0.0 ? opt.burn_in : T;
                run_stationary_periodic(g, p, V, s, burn, lmax * lmax, o);
            } else {
                run_corrector(g, -T, 0.0, q, V, s, o);
            }
        });
        auto& row = samples[r];
        for (auto& a : accs) {
            auto f = a.flux();
            const auto gr = a.grad();
            f.insert(f.end(), gr.begin(), gr.end());
            row.push_back(std::move(f));
        }
    });
    return summarize_flux_decay(ells, L, d, samples);
}

nlohmann::json CorrectorFluctuation::to_json() const {
    return {{"d", d},
            {"Ls", Ls},
            {"replicas", replicas},
            {"var_phi0", var_phi0},
            {"var_phi0_se", var_phi0_se},
            {"l2", l2},
            {"l2_se", l2_se},
            {"grad_q999", grad_q999},
            {"oracle", oracle},
            {"fit", fit.to_json()},
            {"oracle_fit", oracle_fit.to_json()}};
}

double gaussian_corrector_variance(int d, int L, double dt) {
    const TorusGrid g(d, L);
    const int n = g.side();
    const std::int64_t K = step_count(double(L) * double(L), dt);
    std::vector<double> lam1(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) lam1[std::size_t(m)] = 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * double(m) / double(n));
    double acc = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        std::size_t rem = i;
        double lam = 0.0;
        for (int a = 0; a < d; ++a) {
            lam += lam1[rem % std::size_t(n)];
            rem /= std::size_t(n);
        }
        const double r = 1.0 - dt * lam;
        acc += 2.0 * dt * (1.0 - std::pow(r * r, double(K))) / (1.0 - r * r);
    }
    return acc / double(g.size());
}

CorrectorFluctuation corrector_fluctuation_experiment(const std::vector<int>& Ls, int d, const Potential& V,
                                                      int replicas, const NoiseSource& src,
                                                      const EstimatorOptions& opt) {
    check_replicas(replicas);
    CorrectorFluctuation out;
    out.d = d;
    out.Ls = Ls;
    out.replicas = replicas;
    const double dt = resolve_dt(opt, d, V);
    const auto q = SlopePath::constant(zeros(d));
    for (int L : Ls) {
        const TorusGrid g(d, L);
        const double T = double(L) * double(L);
        const std::int64_t steps = step_count(T, dt);
        std::vector<double> v0(static_cast<std::size_t>(replicas)), l2(static_cast<std::size_t>(replicas));
        std::vector<std::vector<double>> grads(static_cast<std::size_t>(replicas));
        parallel_for(std::size_t(replicas), opt.threads, [&](std::size_t r) {
            double acc = 0.0, wsum = 0.0;
            RunOptions o = quiet_options(dt);
            o.observer = [&](std::int64_t m, double t, std::span<const double> u) {
                const double w = window_weight(t, -T, 0.0, dt);
                double s = 0.0;
                for (double x : u) s += x * x;
                acc += w * s;
                wsum += w * double(u.size());
                if (m == steps) {
                    v0[r] = s / double(u.size());
                    auto& gr = grads[r];
                    gr.reserve(u.size() * std::size_t(d));
                    for (int a = 0; a < d; ++a) {
                        const auto* fw = g.forward_table(a);
                        for (std::size_t x = 0; x < u.size(); ++x) gr.push_back(std::abs(u[fw[x]] - u[x]));
                    }
                }
            };
            run_corrector(g, -T, 0.0, q, V, src.with_replica(std::uint32_t(r)), o);
            l2[r] = acc / wsum;
        });
        const auto m0 = mean_se(v0), m2 = mean_se(l2);
        out.var_phi0.push_back(m0.mean);
        out.var_phi0_se.push_back(m0.se);
        out.l2.push_back(m2.mean);
        out.l2_se.push_back(m2.se);
        std::vector<double> pooled;
        for (auto& gr : grads) pooled.insert(pooled.end(), gr.begin(), gr.end());
        out.grad_q999.push_back(quantile(std::move(pooled), 0.999));
        if (V.is_quadratic()) out.oracle.push_back(gaussian_corrector_variance(d, L, dt));
    }
    if (Ls.size() >= 2) {
        std::vector<double> lx;
        for (int L : Ls) lx.push_back(std::log(double(L)));
        out.fit = fit_linear(lx, out.var_phi0);
        if (!out.oracle.empty()) out.oracle_fit = fit_linear(lx, out.oracle);
    }
    return out;
}

nlohmann::json SlopeStability::to_json() const {
    return {{"residual", residual}, {"norm1", norm1}, {"norm2", norm2}, {"slope_gap", slope_gap},
            {"fitted_C", fitted_C}};
}

namespace {

double slope_gap(const SlopePath& a, const SlopePath& b, double lo, double hi) {
    std::vector<double> ts{lo};
    for (double t : a.breaks()) {
        if (t > lo && t < hi) ts.push_back(t);
    }
    for (double t : b.breaks()) {
        if (t > lo && t < hi) ts.push_back(t);
    }
    double gap = 0.0;
    for (double t : ts) {
        const auto& x = a.at(t);
        const auto& y = b.at(t);
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
        gap = std::max(gap, std::sqrt(s));
    }
    return gap;
}

}  // namespace

SlopeStability slope_stability_check(const SlopePath& q1, const SlopePath& q2, int L, const Potential& V,
                                     const NoiseSource& src, const EstimatorOptions& opt) {
    const int d = q1.dim();
    if (q2.dim() != d) throw std::invalid_argument("slope paths differ in dimension");
    const TorusGrid g(d, L);
    const double dt = resolve_dt(opt, d, V);
    const double T = double(L) * double(L);
    RunOptions o;
    o.dt = dt;
    const auto phi1 = run_corrector(g, -T, 0.0, q1, V, src, o);
    double diff = 0.0, n1 = 0.0, n2 = 0.0, wsum = 0.0;
    o.record_stride = 0;
    o.observer = [&](std::int64_t m, double t, std::span<const double> u) {
        const double w = window_weight(t, -T, 0.0, dt);
        const auto v = phi1.slice(static_cast<std::size_t>(m));
        double sd = 0.0, s1 = 0.0, s2 = 0.0;
        for (int a = 0; a < d; ++a) {
            const auto* fw = g.forward_table(a);
            for (std::size_t x = 0; x < g.size(); ++x) {
                const double e = (v[fw[x]] - v[x]) - (u[fw[x]] - u[x]);
                sd += e * e;
            }
        }
        for (std::size_t x = 0; x < g.size(); ++x) {
            s1 += v[x] * v[x];
            s2 += u[x] * u[x];
        }
        diff += w * sd;
        n1 += w * s1;
        n2 += w * s2;
        wsum += w * double(g.size());
    };
    run_corrector(g, -T, 0.0, q2, V, src, o);
    SlopeStability s;
    s.residual = std::sqrt(diff / wsum);
    s.norm1 = std::sqrt(n1 / wsum);
    s.norm2 = std::sqrt(n2 / wsum);
    s.slope_gap = slope_gap(q1, q2, -T, 0.0);
    const double excess = std::max(0.0, s.residual - (s.norm1 + s.norm2) / double(L));
    s.fitted_C = s.slope_gap > 0.0 ? excess / s.slope_gap : 0.0;
    return s;
}

nlohmann::json ModulusEstimate::to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows) {
        rs.push_back({{"distance", r.distance}, {"mean", r.mean}, {"se", r.se}, {"ratio_mean", r.ratio_mean},
                      {"ratio_se", r.ratio_se}});
    }
    return {{"p", p}, {"L", L}, {"replicas", replicas}, {"rows", rs}};
}

ModulusEstimate linearization_modulus(const Slope& p, const std::vector<Slope>& qs, int L, const Potential& V,
                                      int replicas, const NoiseSource& src, const EstimatorOptions& opt) {
    if (replicas < 1) throw std::invalid_argument("need at least one replica");
    const int d = int(p.size());
    const TorusGrid g(d, L);
    const double dt = resolve_dt(opt, d, V);
    const double T = double(L) * double(L);
    std::vector<double> dist(qs.size());
    for (std::size_t k = 0; k < qs.size(); ++k) {
        if (int(qs[k].size()) != d) throw std::invalid_argument("slope dimension mismatch");
        double s = 0.0;
        for (int a = 0; a < d; ++a) s += (qs[k][a] - p[a]) * (qs[k][a] - p[a]);
        dist[k] = std::sqrt(s);
    }
    std::vector<std::vector<double>> res(qs.size(), std::vector<double>(std::size_t(replicas), 0.0));
    parallel_for(std::size_t(replicas), opt.threads, [&](std::size_t r) {
        const auto s = src.with_replica(std::uint32_t(r));
        RunOptions o;
        o.dt = dt;
        const auto phip = run_corrector(g, -T, 0.0, SlopePath::constant(p), V, s, o);
        for (std::size_t k = 0; k < qs.size(); ++k) {
            Slope xi(static_cast<std::size_t>(d));
            for (int a = 0; a < d; ++a) xi[a] = qs[k][a] - p[a];
            LinearizedCorrector w(g, V, p, xi);
            double acc = 0.0, wsum = 0.0;
            RunOptions oq = quiet_options(dt);
            oq.observer = [&](std::int64_t m, double t, std::span<const double> u) {
                if (m > 0) w.step(phip.slice(std::size_t(m - 1)), dt);
                const double wt = window_weight(t, -T, 0.0, dt);
                const auto v = phip.slice(static_cast<std::size_t>(m));
                const Field& ww = w.value();
                double sd = 0.0;
                for (int a = 0; a < d; ++a) {
                    const auto* fw = g.forward_table(a);
                    for (std::size_t x = 0; x < g.size(); ++x) {
                        const double e = (u[fw[x]] - u[x]) - (v[fw[x]] - v[x]) - (ww[fw[x]] - ww[x]);
                        sd += e * e;
                    }
                }
                acc += wt * sd;
                wsum += wt * double(g.size());
            };
            run_corrector(g, -T, 0.0, SlopePath::constant(qs[k]), V, s, oq);
            res[k][r] = std::sqrt(acc / wsum);
        }
    });
    ModulusEstimate out;
    out.p = p;
    out.L = L;
    out.replicas = replicas;
    for (std::size_t k = 0; k < qs.size(); ++k) {
        ModulusRow row;
        row.distance = dist[k];
        const auto m = mean_se(res[k]);
        row.mean = m.mean;
        row.se = m.se;
        if (dist[k] > 0.0) {
            row.ratio_mean = m.mean / dist[k];
            row.ratio_se = m.se / dist[k];
        }
        out.rows.push_back(row);
    }
    return out;
}

nlohmann::json ExcessProfile::to_json() const {
    return {{"ls", ls}, {"excess", excess}, {"gradient_bound", gradient_bound}};
}

ExcessAccumulator::ExcessAccumulator(const TorusGrid& g, std::vector<int> ls, double t_end, double dt)
    : g_(&g), ls_(std::move(ls)), t_end_(t_end), dt_(dt) {
    const int d = g.dim();
    for (int l : ls_) {
        if (l < 1) throw std::invalid_argument("excess scales must be positive");
        boxes_.push_back(g.box(Point{}, l));
        Sums s;
        s.xtx.assign(std::size_t((d + 1) * (d + 1)), 0.0);
        s.xty.assign(std::size_t(d + 1), 0.0);
        sums_.push_back(std::move(s));
    }
}

void ExcessAccumulator::observe(double t, std::span<const double> u) {
    const int d = g_->dim();
    std::array<double, kMaxDim + 1> r{};
    r[0] = 1.0;
    for (std::size_t k = 0; k < ls_.size(); ++k) {
        const double l2 = double(ls_[k]) * double(ls_[k]);
        const double w = window_weight(t, t_end_ - l2, t_end_, dt_);
        if (w == 0.0) continue;
        Sums& s = sums_[k];
        for (std::size_t x : boxes_[k]) {
            const Point p = g_->point(x);
            for (int a = 0; a < d; ++a) r[std::size_t(a + 1)] = double(p[a]);
            const double y = u[x];
            for (int i = 0; i <= d; ++i) {
                s.xty[std::size_t(i)] += w * r[std::size_t(i)] * y;
                for (int j = 0; j <= d; ++j) s.xtx[std::size_t(i * (d + 1) + j)] += w * r[std::size_t(i)] * r[std::size_t(j)];
            }
            s.yy += w * y * y;
            s.y += w * y;
            s.w += w;
        }
    }
}

ExcessProfile ExcessAccumulator::result() const {
    const int d = g_->dim();
    ExcessProfile out;
    out.ls = ls_;
    for (std::size_t k = 0; k < ls_.size(); ++k) {
        const Sums& s = sums_[k];
        const double l = double(ls_[k]);
        if (s.w <= 0.0) throw std::invalid_argument("excess window saw no slices");
        Eigen::MatrixXd A(d + 1, d + 1);
        Eigen::VectorXd b(d + 1);
        for (int i = 0; i <= d; ++i) {
            b(i) = s.xty[std::size_t(i)];
            for (int j = 0; j <= d; ++j) A(i, j) = s.xtx[std::size_t(i * (d + 1) + j)];
        }
        const Eigen::VectorXd beta = A.ldlt().solve(b);
        const double rss = s.yy - beta.dot(b);
        out.excess.push_back(std::sqrt(std::max(0.0, rss / s.w)) / l);
        const double mean = s.y / s.w;
        out.gradient_bound.push_back(std::sqrt(std::max(0.0, s.yy / s.w - mean * mean)) / l);
    }
    return out;
}

ExcessProfile excess_decay(const TorusGrid& g, const SpaceTimeField& u, const std::vector<int>& ls) {
    if (u.sites() != g.size() || u.slices() == 0) throw std::invalid_argument("field does not match the grid");
    for (int l : ls) {
        if (double(l) * double(l) > u.t_end() - u.t0() + 1e-9) throw std::invalid_argument("record shorter than Q_l");
    }
    ExcessAccumulator acc(g, ls, u.t_end(), u.dt());
    for (std::size_t n = 0; n < u.slices(); ++n) acc.observe(u.time(n), u.slice(n));
    return acc.result();
}

EffectiveGradient tabulate_effective_gradient(const Potential& V, int d, int L, int replicas, const NoiseSource& src,
                                              const EstimatorOptions& opt) {
    std::vector<double> s, gv;
    for (int k = 0; k <= 6; ++k) {
        const double r = 0.25 * double(k);
        s.push_back(r);
        if (k == 0) {
            gv.push_back(0.0);
            continue;
        }
        Slope p = zeros(d);
        p[0] = r;
        const auto est = estimate_tau(p, L, V, replicas, src, opt);
        gv.push_back(std::max(gv.back(), est.mean[0]));
    }
    return EffectiveGradient::radial(d, std::move(s), std::move(gv));
}

}  // namespace gradphi
