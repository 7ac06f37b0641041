// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include "gradphi/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "gradphi/error.hpp"
#include "gradphi/homogenize.hpp"
#include "gradphi/occupation.hpp"
#include "gradphi/parabolic.hpp"

#ifndef GRADPHI_VERSION
#define GRADPHI_VERSION "0.0.0"
#endif

namespace gradphi {

const char* version() { return GRADPHI_VERSION; }

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    try {
        c.schema = j.value("schema", kSchema);
        if (c.schema != kSchema) throw ConfigError("unsupported config schema " + std::to_string(c.schema));
        c.experiment = j.value("experiment", std::string());
        if (j.contains("params")) {
            if (!j.at("params").is_object()) throw ConfigError("\"params\" must be an object");
            c.params = j.at("params");
        }
        c.seed = j.value("seed", std::uint64_t(1));
        c.replicas = j.value("replicas", 1);
        c.out_dir = j.value("out", std::string("out"));
        c.threads = j.value("threads", 0);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (c.replicas < 1) throw ConfigError("replicas must be positive");
    return c;
}

nlohmann::json ExperimentConfig::to_json() const {
    return {{"schema", schema}, {"experiment", experiment}, {"params", params}, {"seed", seed},
            {"replicas", replicas}, {"out", out_dir},         {"threads", threads}};
}

std::vector<std::string> experiment_names() {
    return {"corrector", "flux-decay", "surface-tension", "hessian", "linearize",
            "hydro",     "occupation", "excess",          "heatkernel", "gff"};
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(format_double(v));
    add_row(std::move(cells));
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw std::invalid_argument("row width differs from the header");
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::ostringstream os;
    auto line = [&os](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return os.str();
}

void CsvTable::write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << str();
}

bool ExperimentOutput::ok() const {
    for (const auto& [k, v] : checks.items()) {
        if (!v.get<bool>()) return false;
    }
    return true;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentOutput& out, double wall_seconds) {
    std::filesystem::create_directories(cfg.out_dir);
    out.table.write((std::filesystem::path(cfg.out_dir) / out.csv_name).string());
    nlohmann::json s = {{"schema", ExperimentConfig::kSchema},
                        {"experiment", cfg.experiment},
                        {"config", cfg.to_json()},
                        {"seed", cfg.seed},
                        {"version", version()},
                        {"wall_seconds", wall_seconds},
                        {"results", out.results},
                        {"checks", out.checks},
                        {"ok", out.ok()}};
    std::ofstream f(std::filesystem::path(cfg.out_dir) / "summary.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write summary.json");
    f << s.dump(2) << '\n';
}

nlohmann::json HydroResult::to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows) {
        rs.push_back({{"N", r.N},
                      {"eps", r.eps},
                      {"error_mean", r.error_mean},
                      {"error_se", r.error_se},
                      {"err_continuous", r.err_continuous},
                      {"two_scale_grad", r.two_scale_grad}});
    }
    return {{"rows", rs}, {"fit", fit.to_json()}, {"decreasing", decreasing}};
}

namespace {

std::size_t divisor_stride(std::int64_t steps, std::size_t target) {
    std::size_t s = std::max<std::size_t>(1, std::size_t(steps) / std::max<std::size_t>(target, 1));
    while (steps % std::int64_t(s) != 0) --s;
    return s;
}

// eps^d int sum_{interior} (u - v)^2 dt over a strided record, trapezoid.
double rescaled_l2(const DirichletDomain& D, const SpaceTimeField& u, const SpaceTimeField& v) {
    const double epsd = std::pow(D.eps(), D.dim());
    double acc = 0.0;
    for (std::size_t n = 0; n < u.slices(); ++n) {
        const double w = (n == 0 || n + 1 == u.slices()) ? 0.5 : 1.0;
        const auto a = u.slice(n), b = v.slice(n);
        double s = 0.0;
        for (std::size_t x : D.interior()) s += (a[x] - b[x]) * (a[x] - b[x]);
        acc += w * s;
    }
    return std::sqrt(epsd * u.dt() * acc);
}

}  // namespace

HydroResult hydro_limit_experiment(const std::vector<int>& Ns, int d, const Potential& V, int replicas,
                                   const NoiseSource& src, const HydroOptions& opt) {
    if (Ns.size() < 2) throw ConfigError("hydro needs at least two mesh sizes");
    if (replicas < 1) throw ConfigError("hydro needs at least one replica");
    const BoundaryDatum f = BoundaryDatum::named(opt.datum, d);
    EffectiveGradient Ds = EffectiveGradient::identity(d);
    if (!V.is_quadratic()) {
        EstimatorOptions eo;
        eo.threads = opt.threads;
        Ds = tabulate_effective_gradient(V, d, 8, 20, src.with_replica(1u << 20), eo);
    }
    HydroResult res;
    for (int N : Ns) {
        const DirichletDomain D(d, N);
        const double dt_unit = std::min(stable_dt(d, V.c_plus()), homogenized_stable_dt(Ds, D) * double(N) * double(N));
        const double h = dt_unit / (double(N) * double(N));
        const PinnedBoundary pins = pin_boundary(D, f, h);
        const std::size_t stride = divisor_stride(pins.steps, opt.target_slices);
        const SpaceTimeField ubar = solve_homogenized(Ds, D, pins, stride);
        // Exact continuous solution for the separable datum with the identity map.
        SpaceTimeField exact;
        const bool have_exact = opt.datum == "sine_product" && Ds.is_identity();
        if (have_exact) {
            exact = SpaceTimeField(ubar.t0(), ubar.dt(), ubar.slices(), D.size());
            for (std::size_t n = 0; n < ubar.slices(); ++n) {
                const double t = ubar.time(n);
                auto s = exact.slice(n);
                for (std::size_t x = 0; x < D.size(); ++x) {
                    double v = std::exp(-1.0 - double(d) * std::numbers::pi * std::numbers::pi * (t + 1.0));
                    for (int a = 0; a < d; ++a) v *= std::sin(std::numbers::pi * D.position(x, a));
                    s[x] = v;
                }
            }
        }
        const bool two_scale = N <= opt.two_scale_max_N;
        std::vector<double> err(static_cast<std::size_t>(replicas)), errc(static_cast<std::size_t>(replicas)), grad(static_cast<std::size_t>(replicas));
        parallel_for(std::size_t(replicas), opt.threads, [&](std::size_t r) {
            RunOptions ro;
            ro.dt = dt_unit;
            ro.record_stride = stride;
            ro.noise_scale = opt.noise_scale;
            const auto s = src.with_replica(std::uint32_t(r));
            const SpaceTimeField u = run_dirichlet(D, pins, V, s, ro);
            err[r] = rescaled_l2(D, u, ubar);
            if (have_exact) errc[r] = rescaled_l2(D, u, exact);
            if (two_scale) {
                TwoScaleOptions to;
                to.dt = dt_unit;
                to.record_stride = stride;
                const auto X = build_two_scale(D, ubar, V, s, to);
                double acc = 0.0;
                for (std::size_t n = 0; n < u.slices(); ++n) {
                    const double w = (n == 0 || n + 1 == u.slices()) ? 0.5 : 1.0;
                    const auto a = u.slice(n), b = X.w.slice(n);
                    double sum = 0.0;
                    for (std::size_t x : D.interior()) {
                        for (int ax = 0; ax < d; ++ax) {
                            const std::size_t y = x + D.stride(ax);
                            const double e = ((a[y] - a[x]) - (b[y] - b[x])) / D.eps();
                            sum += e * e;
                        }
                    }
                    acc += w * sum;
                }
                grad[r] = std::sqrt(std::pow(D.eps(), d) * u.dt() * acc);
            }
        });
        HydroRow row;
        row.N = N;
        row.eps = 1.0 / double(N);
        const auto m = mean_se(err);
        row.error_mean = m.mean;
        row.error_se = m.se;
        if (have_exact) row.err_continuous = mean_se(errc).mean;
        if (two_scale) row.two_scale_grad = mean_se(grad).mean;
        res.rows.push_back(row);
    }
    std::vector<HydroRow> sorted = res.rows;
    std::sort(sorted.begin(), sorted.end(), [](const HydroRow& a, const HydroRow& b) { return a.eps > b.eps; });
    res.decreasing = true;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (!(sorted[i].error_mean < sorted[i - 1].error_mean)) res.decreasing = false;
    }
    std::vector<double> xs, ys;
    for (const auto& r : res.rows) {
        xs.push_back(r.eps);
        const double corr = d == 2 ? 1.0 + std::sqrt(std::abs(std::log(r.eps))) : 1.0;
        ys.push_back(r.error_mean / corr);
    }
    if (xs.size() >= 3 && std::all_of(ys.begin(), ys.end(), [](double y) { return y > 0.0; })) {
        res.fit = fit_power_law(xs, ys);
    } else if (xs.size() == 2 && ys[0] > 0.0 && ys[1] > 0.0) {
        res.fit = fit_linear({std::log(xs[0]), std::log(xs[1])}, {std::log(ys[0]), std::log(ys[1])});
    }
    return res;
}

nlohmann::json GffStationarity::to_json() const {
    return {{"d", d},
            {"L", L},
            {"replicas", replicas},
            {"dt", dt},
            {"T", T},
            {"cov", cov},
            {"cov_se", cov_se},
            {"cov_scheme", cov_scheme},
            {"cov_continuous", cov_continuous},
            {"max_z", max_z},
            {"lambda", lambda},
            {"rate", rate},
            {"rate_se", rate_se},
            {"max_rate_rel", max_rate_rel}};
}

GffStationarity gff_stationarity_experiment(int d, int L, int replicas, const NoiseSource& src, double dt,
                                            int threads) {
    if (replicas < 2) throw std::invalid_argument("need at least two replicas");
    const TorusGrid g(d, L);
    const int n = g.side();
    GffStationarity out;
    out.d = d;
    out.L = L;
    out.replicas = replicas;
    out.dt = dt;
    out.T = 0.5 * double(L) * double(L);
    const std::int64_t K = step_count(out.T, dt);
    const std::size_t stride = divisor_stride(K, 64);
    const double H = dt * double(stride);

    // Mode index tuples and eigenvalue classes.
    std::vector<Point> modes;
    std::vector<double> lam;
    for (std::size_t i = 1; i < g.size(); ++i) {
        Point m{};
        std::size_t rem = i;
        for (int a = d - 1; a >= 0; --a) {
            m[a] = int(rem % std::size_t(n));
            rem /= std::size_t(n);
        }
        modes.push_back(m);
        lam.push_back(mode_eigenvalue(g, m));
    }
    std::map<long long, std::vector<std::size_t>> classes;
    for (std::size_t k = 0; k < modes.size(); ++k) classes[std::llround(lam[k] * 1e9)].push_back(k);
    std::vector<std::size_t> lag(classes.size());
    {
        std::size_t c = 0;
        for (const auto& [key, ks] : classes) {
            const double tau = 1.0 / lam[ks.front()];
            lag[c++] = std::max<std::size_t>(1, std::size_t(std::llround(tau / H)));
        }
    }

    std::vector<std::vector<double>> cov_r(static_cast<std::size_t>(replicas));
    std::vector<std::vector<double>> num_r(static_cast<std::size_t>(replicas)), den_r(static_cast<std::size_t>(replicas));
    parallel_for(std::size_t(replicas), threads, [&](std::size_t r) {
        RunOptions o;
        o.dt = dt;
        o.record_stride = stride;
        const auto phi = run_gff_dynamic(g, 0.0, out.T, src.with_replica(std::uint32_t(r)), o);
        const auto last = phi.slice(phi.slices() - 1);
        std::vector<double> c(g.size(), 0.0);
        for (std::size_t h = 0; h < g.size(); ++h) {
            const Point ph = g.point(h);
            double s = 0.0;
            for (std::size_t x = 0; x < g.size(); ++x) {
                Point px = g.point(x);
                for (int a = 0; a < d; ++a) px[a] += ph[a];
                s += last[x] * last[g.index(px)];
            }
            c[h] = s / double(g.size());
        }
        cov_r[r] = std::move(c);
        // Mode coefficients along the record.
        std::vector<std::vector<double>> a(modes.size(), std::vector<double>(phi.slices()));
        for (std::size_t t = 0; t < phi.slices(); ++t) {
            for (std::size_t k = 0; k < modes.size(); ++k) a[k][t] = mode_coefficient(g, phi.slice(t), modes[k]);
        }
        std::vector<double> nu(classes.size(), 0.0), de(classes.size(), 0.0);
        std::size_t ci = 0;
        for (const auto& [key, ks] : classes) {
            const std::size_t l = lag[ci];
            for (std::size_t k : ks) {
                for (std::size_t t = 0; t + l < phi.slices(); ++t) {
                    nu[ci] += a[k][t] * a[k][t + l];
                    de[ci] += a[k][t] * a[k][t];
                }
            }
            ++ci;
        }
        num_r[r] = std::move(nu);
        den_r[r] = std::move(de);
    });

    // Oracles: the explicit scheme's exact covariance from a continuous GFF
    // start, and the continuous GFF covariance itself.
    out.cov.assign(g.size(), 0.0);
    out.cov_se.assign(g.size(), 0.0);
    out.cov_scheme.assign(g.size(), 0.0);
    out.cov_continuous.assign(g.size(), 0.0);
    for (std::size_t h = 0; h < g.size(); ++h) {
        std::vector<double> col(static_cast<std::size_t>(replicas));
        for (std::size_t r = 0; r < col.size(); ++r) col[r] = cov_r[r][h];
        const auto m = mean_se(col);
        out.cov[h] = m.mean;
        out.cov_se[h] = m.se;
        const Point ph = g.point(h);
        double cs = 0.0, cc = 0.0;
        // Sum over frequencies (the mode tuples above index the real basis).
        for (std::size_t f = 1; f < g.size(); ++f) {
            double theta = 0.0, lk = 0.0;
            std::size_t rem = f;
            for (int a = d - 1; a >= 0; --a) {
                const double k = double(rem % static_cast<std::size_t>(n));
                rem /= static_cast<std::size_t>(n);
                theta += 2.0 * std::numbers::pi * k * double(ph[a]) / double(n);
                lk += 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k / double(n));
            }
            const double rr = 1.0 - dt * lk;
            const double r2K = std::pow(rr * rr, double(K));
            const double var_scheme = r2K / lk + 2.0 * dt * (1.0 - r2K) / (1.0 - rr * rr);
            cs += var_scheme * std::cos(theta);
            cc += std::cos(theta) / lk;
        }
        out.cov_scheme[h] = cs / double(g.size());
        out.cov_continuous[h] = cc / double(g.size());
        if (m.se > 0.0) out.max_z = std::max(out.max_z, std::abs(m.mean - out.cov_scheme[h]) / m.se);
    }
    std::size_t ci = 0;
    for (const auto& [key, ks] : classes) {
        double N = 0.0, Dn = 0.0;
        for (int r = 0; r < replicas; ++r) {
            N += num_r[std::size_t(r)][ci];
            Dn += den_r[std::size_t(r)][ci];
        }
        const double rho = N / Dn;
        double v = 0.0;
        for (int r = 0; r < replicas; ++r) {
            const double e = num_r[std::size_t(r)][ci] - rho * den_r[std::size_t(r)][ci];
            v += e * e;
        }
        const double rho_se = std::sqrt(v) / Dn;
        const double tau = double(lag[ci]) * H;
        const double lk = lam[ks.front()];
        // Decay of the scheme per step is (1 - dt lambda); invert that map.
        const double per_step = std::pow(std::max(rho, 1e-300), dt / tau);
        const double rec = (1.0 - per_step) / dt;
        const double rec_se = rho > 0.0 ? per_step * (dt / tau) * rho_se / rho / dt : 0.0;
        out.lambda.push_back(lk);
        out.rate.push_back(rec);
        out.rate_se.push_back(rec_se);
        out.max_rate_rel = std::max(out.max_rate_rel, std::abs(rec - lk) / lk);
        ++ci;
    }
    return out;
}

namespace {

const nlohmann::json& require(const nlohmann::json& p, const char* key) {
    if (!p.contains(key)) throw ConfigError(std::string("missing parameter \"") + key + "\"");
    return p.at(key);
}

template <class T>
T param(const nlohmann::json& p, const char* key, T fallback) {
    try {
        return p.value(key, fallback);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad parameter \"") + key + "\": " + e.what());
    }
}

Potential potential_of(const nlohmann::json& p) { return Potential::from_json(require(p, "potential")); }

Slope slope_of(const nlohmann::json& p, const char* key, int d) {
    Slope s = param(p, key, Slope(std::size_t(d), 0.0));
    if (int(s.size()) != d) throw ConfigError(std::string("\"") + key + "\" must have dim entries");
    return s;
}

EstimatorOptions estimator_options(const ExperimentConfig& cfg) {
    EstimatorOptions o;
    o.dt = param(cfg.params, "dt", 0.0);
    o.threads = cfg.threads;
    o.burn_in = param(cfg.params, "burn_in", -1.0);
    const std::string start = param(cfg.params, "start", std::string("stationary"));
    if (start == "stationary") {
        o.start = StartMode::stationary;
    } else if (start == "corrector") {
        o.start = StartMode::corrector;
    } else {
        throw ConfigError("start must be \"stationary\" or \"corrector\"");
    }
    return o;
}

ExperimentOutput run_corrector_fluct(const ExperimentConfig& cfg, const NoiseSource& src) {
    const auto& p = cfg.params;
    const Potential V = potential_of(p);
    const int d = param(p, "dim", 2);
    const auto Ls = param(p, "Ls", std::vector<int>{8, 16, 32});
    auto opt = estimator_options(cfg);
    const auto res = corrector_fluctuation_experiment(Ls, d, V, std::max(2, cfg.replicas), src, opt);
    ExperimentOutput out;
    out.csv_name = "corrector_fluct.csv";
    out.table = CsvTable({"L", "var_phi0", "var_phi0_se", "l2", "l2_se", "grad_q999", "oracle"});
    for (std::size_t k = 0; k < Ls.size(); ++k) {
        out.table.add_row({double(Ls[k]), res.var_phi0[k], res.var_phi0_se[k], res.l2[k], res.l2_se[k],
                           res.grad_q999[k], res.oracle.empty() ? -1.0 : res.oracle[k]});
    }
    out.results = res.to_json();
    if (d == 2 && Ls.size() >= 3) {
        out.checks["log_fit_r2"] = res.fit.r2 >= 0.9;
        if (!res.oracle.empty()) {
            out.checks["slope_vs_oracle"] =
                std::abs(res.fit.exponent - res.oracle_fit.exponent) <= 0.5 * std::abs(res.oracle_fit.exponent);
        }
    }
    if (d >= 3 && Ls.size() >= 2) {
        const double a = res.var_phi0[Ls.size() - 2], b = res.var_phi0.back();
        out.checks["bounded_growth"] = b < 1.25 * a;
    }
    return out;
}

ExperimentOutput run_flux_decay(const ExperimentConfig& cfg, const NoiseSource& src) {
    const auto& p = cfg.params;
    const Potential V = potential_of(p);
    const int d = param(p, "dim", 2);
    const int L = param(p, "L", 32);
    const auto ells = param(p, "ells", std::vector<int>{2, 4, 8, 16});
    const Slope q = slope_of(p, "slope", d);
    auto opt = estimator_options(cfg);
    if (!p.contains("start")) opt.start = StartMode::corrector;
    if (ells.size() < 3) throw ConfigError("flux-decay needs at least three scales");
    const auto res = flux_decay_experiment(ells, L, V, q, std::max(3, cfg.replicas), src, opt);
    ExperimentOutput out;
    out.csv_name = "flux_decay.csv";
    out.table = CsvTable({"ell", "variance", "variance_se", "grad_variance", "grad_variance_se"});
    for (std::size_t k = 0; k < ells.size(); ++k) {
        out.table.add_row(
            {double(ells[k]), res.variance[k], res.variance_se[k], res.grad_variance[k], res.grad_variance_se[k]});
    }
    out.results = res.to_json();
    out.checks["exponent_window"] = res.fit.exponent >= -double(d) - 0.7 && res.fit.exponent <= -double(d) + 0.7;
    out.checks["fit_r2"] = res.fit.r2 >= 0.9;
    return out;
}

ExperimentOutput run_surface_tension(const ExperimentConfig& cfg, const NoiseSource& src) {
    const auto& p = cfg.params;
    const Potential V = potential_of(p);
    const int d = param(p, "dim", 2);
    const int L = param(p, "L", 8);
    const auto slopes = param(p, "slopes", std::vector<std::vector<double>>{Slope(std::size_t(d), 0.0)});
    const auto opt = estimator_options(cfg);
    ExperimentOutput out;
    out.csv_name = "surface_tension.csv";
    std::vector<std::string> header;
    for (int a = 0; a < d; ++a) header.push_back("p_" + std::to_string(a + 1));
    for (int a = 0; a < d; ++a) header.push_back("tau_" + std::to_string(a + 1));
    for (int a = 0; a < d; ++a) header.push_back("se_" + std::to_string(a + 1));
    out.table = CsvTable(header);
    nlohmann::json rs = nlohmann::json::array();
    bool within = true;
    for (const auto& s : slopes) {
        if (int(s.size()) != d) throw ConfigError("slopes must have dim entries");
        const auto est = estimate_tau(s, L, V, std::max(2, cfg.replicas), src, opt);
        std::vector<double> row(s);
        row.insert(row.end(), est.mean.begin(), est.mean.end());
        row.insert(row.end(), est.se.begin(), est.se.end());
        out.table.add_row(row);
        rs.push_back(est.to_json());
        for (int a = 0; a < d; ++a) within = within && std::abs(est.mean[a] - s[a]) <= 3.0 * est.se[a];
    }
    out.results = {{"estimates", rs}};
    if (V.is_quadratic()) out.checks["quadratic_identity_3se"] = within;
    return out;
}

ExperimentOutput run_hessian(const ExperimentConfig& cfg, const NoiseSource& src) {
    const auto& p = cfg.params;
    const Potential V = potential_of(p);
    const int d = param(p, "dim", 2);
    const int L = param(p, "L", 8);
    const Slope q = slope_of(p, "slope", d);
    const auto h = estimate_hessian(q, L, V, std::max(2, cfg.replicas), src, estimator_options(cfg));
    ExperimentOutput out;
    out.csv_name = "hessian.csv";
    out.table = CsvTable({"i", "j", "mean", "se"});
    bool ident = true;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const std::size_t k = std::size_t(i * d + j);
            out.table.add_row({double(i + 1), double(j + 1), h.mean[k], h.se[k]});
            ident = ident && std::abs(h.mean[k] - (i == j ? 1.0 : 0.0)) <= 3.0 * h.se[k] + 1e-12;
        }
    }
    out.results = h.to_json();
    out.checks["positive"] = h.positive;
    if (V.is_quadratic()) out.checks["quadratic_identity_3se"] = ident;
    return out;
}

ExperimentOutput run_linearize(const ExperimentConfig& cfg, const NoiseSource& src) {
    const auto& p = cfg.params;
    const Potential V = potential_of(p);
    const int d = param(p, "dim", 2);
    const int L = param(p, "L", 8);
    const Slope base = slope_of(p, "slope", d);
    Slope dir = param(p, "direction", Slope{});
    if (dir.empty()) {
        dir.assign(std::size_t(d), 0.0);
        dir[0] = 1.0;
    }
    if (int(dir.size()) != d) throw ConfigError("direction must have dim entries");
    const auto dists = param(p, "distances", std::vector<double>{0.4, 0.2, 0.1});
    std::vector<Slope> qs;
    double nrm = 0.0;
    for (double v : dir) nrm += v * v;
    nrm = std::sqrt(nrm);
    for (double h : dists) {
        Slope q(base);
        for (int a = 0; a < d; ++a) q[a] += h * dir[a] / nrm;
        qs.push_back(q);
    }
    const auto m = linearization_modulus(base, qs, L, V, std::max(2, cfg.replicas), src, estimator_options(cfg));
    ExperimentOutput out;
    out.csv_name = "linearize.csv";
    out.table = CsvTable({"distance", "residual", "residual_se", "ratio", "ratio_se"});
    for (const auto& r : m.rows) out.table.add_row({r.distance, r.mean, r.se, r.ratio_mean, r.ratio_se});
    out.results = m.to_json();
    // Ratios must not grow as the distance shrinks, up to 2 combined SE.
    auto rows = m.rows;
    std::sort(rows.begin(), rows.end(), [](const ModulusRow& a, const ModulusRow& b) { return a.distance > b.distance; });
    bool trend = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double se = std::hypot(rows[i].ratio_se, rows[i - 1].ratio_se);
        trend = trend && rows[i].ratio_mean <= rows[i - 1].ratio_mean + 2.0 * se;
    }
    out.checks["ratio_nonincreasing_2se"] = trend;
    if (V.is_quadratic()) {
        bool tiny = true;
        for (const auto& r : m.rows) tiny = tiny && r.mean <= 1e-10;
        out.checks["quadratic_residual"] = tiny;
    }
    return out;
}

ExperimentOutput run_hydro(const ExperimentConfig& cfg, const NoiseSource& src) {
    const auto& p = cfg.params;
    const Potential V = potential_of(p);
    const int d = param(p, "dim", 2);
    const auto Ns = param(p, "Ns", std::vector<int>{4, 8, 16, 32});
    HydroOptions o;
    o.datum = param(p, "datum", std::string("sine_product"));
    o.noise_scale = param(p, "noise_scale", 1.0);
    o.threads = cfg.threads;
    o.two_scale_max_N = param(p, "two_scale_max_N", 0);
    o.target_slices = param(p, "target_slices", std::size_t(1024));
    const auto res = hydro_limit_experiment(Ns, d, V, cfg.replicas, src, o);
    ExperimentOutput out;
    out.csv_name = "hydro.csv";
    out.table = CsvTable({"N", "eps", "error_mean", "error_se", "err_continuous", "two_scale_grad"});
    for (const auto& r : res.rows) {
        out.table.add_row({double(r.N), r.eps, r.error_mean, r.error_se, r.err_continuous, r.two_scale_grad});
    }
    out.results = res.to_json();
    if (o.noise_scale != 0.0) {
        out.checks["decreasing"] = res.decreasing;
        out.checks["exponent_ge_0.3"] = res.fit.exponent >= 0.3;
    } else if (res.rows.front().err_continuous >= 0.0) {
        bool dec = true;
        for (std::size_t i = 1; i < res.rows.size(); ++i) {
            dec = dec && res.rows[i].err_continuous < res.rows[i - 1].err_continuous;
        }
        out.checks["discretization_decreasing"] = dec;
    }
    return out;
}

ExperimentOutput run_occupation(const ExperimentConfig& cfg, const NoiseSource& src) {
    const auto& p = cfg.params;
    if (p.value("process", std::string("brownian")) != "brownian") potential_of(p);
    const ProcessSpec spec = ProcessSpec::from_json(p);
    const auto eps = param(p, "eps", std::vector<double>{0.05, 0.1, 0.2});
    if (eps.size() < 3) throw ConfigError("occupation needs at least three thresholds");
    const auto rep = occupation_experiment(spec, eps, std::max(2, cfg.replicas), src, cfg.threads);
    ExperimentOutput out;
    out.csv_name = "occupation.csv";
    out.table = CsvTable({"epsilon", "mean_occupation", "stderr", "replicas"});
    for (std::size_t k = 0; k < eps.size(); ++k) {
        out.table.add_row({eps[k], rep.mean[k], rep.se[k], double(rep.replicas)});
    }
    out.results = rep.to_json();
    out.results["process"] = spec.to_json();
    out.checks["relative_intercept_le_0.1"] = rep.relative_intercept <= 0.1;
    out.checks["slope_positive"] = rep.fit.exponent > 0.0;
    return out;
}

ExperimentOutput run_excess(const ExperimentConfig& cfg, const NoiseSource& src) {
    const auto& p = cfg.params;
    const Potential V = potential_of(p);
    const int d = param(p, "dim", 2);
    const int L = param(p, "L", 32);
    const Slope q = slope_of(p, "slope", d);
    auto ls = param(p, "ls", std::vector<int>{4, 8, 16, 32});
    const double dt = param(p, "dt", 0.0) > 0.0 ? param(p, "dt", 0.0) : stable_dt(d, V.c_plus());
    const int lmax = *std::max_element(ls.begin(), ls.end());
    if (lmax > L || *std::min_element(ls.begin(), ls.end()) < 1) throw ConfigError("excess scales must lie in [1, L]");
    const TorusGrid g(d, L);
    const int R = std::max(2, cfg.replicas);
    std::vector<ExcessProfile> prof(static_cast<std::size_t>(R));
    parallel_for(std::size_t(R), cfg.threads, [&](std::size_t r) {
        ExcessAccumulator acc(g, ls, 0.0, dt);
        Field u(g.size());
        RunOptions o;
        o.dt = dt;
        o.record_stride = 0;
        o.observer = [&](std::int64_t, double t, std::span<const double> phi) {
            for (std::size_t x = 0; x < g.size(); ++x) {
                const Point px = g.point(x);
                double s = phi[x];
                for (int a = 0; a < d; ++a) s += q[a] * double(px[a]);
                u[x] = s;
            }
            acc.observe(t, u);
        };
        run_stationary_periodic(g, q, V, src.with_replica(std::uint32_t(r)), double(L) * double(L),
                                double(lmax) * double(lmax), o);
        prof[r] = acc.result();
    });
    ExperimentOutput out;
    out.csv_name = "excess.csv";
    out.table = CsvTable({"replica", "l", "excess", "gradient_bound"});
    for (int r = 0; r < R; ++r) {
        for (std::size_t k = 0; k < ls.size(); ++k) {
            out.table.add_row({double(r), double(ls[k]), prof[std::size_t(r)].excess[k],
                               prof[std::size_t(r)].gradient_bound[k]});
        }
    }
    // Decay between the two largest scales and the gradient-bound constant.
    std::vector<int> sorted = ls;
    std::sort(sorted.begin(), sorted.end());
    auto idx = [&](int l) { return std::size_t(std::find(ls.begin(), ls.end(), l) - ls.begin()); };
    int decays = 0;
    double C = 0.0;
    const int l_small = param(p, "l_bound", sorted.size() >= 3 ? sorted[sorted.size() - 3] : sorted.front());
    for (int r = 0; r < R; ++r) {
        const auto& pr = prof[std::size_t(r)];
        if (sorted.size() >= 2) {
            const double big = pr.excess[idx(sorted.back())], mid = pr.excess[idx(sorted[sorted.size() - 2])];
            const double ratio = double(sorted[sorted.size() - 2]) / double(sorted.back());
            if (mid <= big * std::sqrt(ratio) + 5.0) ++decays;
        }
        if (std::find(ls.begin(), ls.end(), l_small) != ls.end()) {
            const double lhs = pr.gradient_bound[idx(l_small)], base = pr.gradient_bound[idx(sorted.back())];
            C = std::max(C, lhs / (base + 1.0));
        }
    }
    const double frac = double(decays) / double(R);
    out.results = {{"decay_fraction", frac}, {"fitted_C", C}, {"l_bound", l_small}, {"replicas", R}};
    out.checks["decay_fraction_ge_0.8"] = frac >= 0.8;
    out.checks["fitted_C_le_20"] = C <= 20.0;
    return out;
}

ExperimentOutput run_heatkernel(const ExperimentConfig& cfg, const NoiseSource& src) {
    const auto& p = cfg.params;
    const int d = param(p, "dim", 2);
    const int L = param(p, "L", 8);
    const double contrast = param(p, "contrast", 1.0);
    if (!(contrast >= 1.0)) throw ConfigError("contrast must be >= 1");
    const TorusGrid g(d, L);
    // Random environment with values in [1, contrast], drawn from the initial stream.
    EdgeField a(d, g.size(), 1.0);
    const auto s = src.with_stream(Stream::initial);
    for (int ax = 0; ax < d; ++ax) {
        for (std::size_t x = 0; x < g.size(); ++x) {
            const double z = s.increment(std::uint32_t(ax * g.size() + x), 1);
            const double u01 = 0.5 * std::erfc(-z / std::sqrt(2.0));
            a.at(x, ax) = 1.0 + (contrast - 1.0) * u01;
        }
    }
    const double dt = param(p, "dt", stable_dt(d, contrast));
    const double side = double(g.side());
    const auto P = heat_kernel(g, EdgeSeries(a), 0.0, g.index(Point{}), side * side, dt);
    const auto fit = nash_aronson_fit(g, P);
    ExperimentOutput out;
    out.csv_name = "heat_kernel.csv";
    out.table = CsvTable({"t", "mass", "min_shifted", "value_at_source"});
    double worst_mass = 0.0, min_shift = 1e300;
    const std::size_t stride = std::max<std::size_t>(1, P.values.slices() / 256);
    for (std::size_t n = 0; n < P.values.slices(); ++n) {
        const auto sl = P.values.slice(n);
        double mass = 0.0, mn = 1e300;
        for (double v : sl) {
            mass += v;
            mn = std::min(mn, v + 1.0 / double(g.size()));
        }
        worst_mass = std::max(worst_mass, std::abs(mass));
        min_shift = std::min(min_shift, mn);
        if (n % stride == 0 || n + 1 == P.values.slices()) {
            out.table.add_row({P.values.time(n), mass, mn, sl[P.y]});
        }
    }
    out.results = {{"C", fit.C}, {"found", fit.found}, {"min_shifted", min_shift}, {"max_mass", worst_mass}};
    out.checks["nash_aronson_C_le_64"] = fit.found;
    out.checks["mass_conservation"] = worst_mass <= 1e-12;
    out.checks["nonnegativity"] = min_shift >= -1e-12;
    return out;
}

ExperimentOutput run_gff(const ExperimentConfig& cfg, const NoiseSource& src) {
    const auto& p = cfg.params;
    const int d = param(p, "dim", 2);
    const int L = param(p, "L", 4);
    const double dt = param(p, "dt", 1.0 / 64.0);
    const auto res = gff_stationarity_experiment(d, L, std::max(2, cfg.replicas), src, dt, cfg.threads);
    ExperimentOutput out;
    out.csv_name = "gff.csv";
    const TorusGrid g(d, L);
    std::vector<std::string> header;
    for (int a = 0; a < d; ++a) header.push_back("h_" + std::to_string(a + 1));
    for (const char* c : {"cov", "cov_se", "cov_scheme", "cov_continuous"}) header.push_back(c);
    out.table = CsvTable(header);
    for (std::size_t h = 0; h < g.size(); ++h) {
        const Point ph = g.point(h);
        std::vector<double> row;
        for (int a = 0; a < d; ++a) row.push_back(double(ph[a]));
        for (double v : {res.cov[h], res.cov_se[h], res.cov_scheme[h], res.cov_continuous[h]}) row.push_back(v);
        out.table.add_row(row);
    }
    out.results = res.to_json();
    out.checks["covariance_4se"] = res.max_z <= 4.0;
    out.checks["rates_within_10pct"] = res.max_rate_rel <= 0.1;
    return out;
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    const NoiseSource src(cfg.seed, 0, 1.0);
    try {
        if (cfg.experiment == "corrector") return run_corrector_fluct(cfg, src);
        if (cfg.experiment == "flux-decay") return run_flux_decay(cfg, src);
        if (cfg.experiment == "surface-tension") return run_surface_tension(cfg, src);
        if (cfg.experiment == "hessian") return run_hessian(cfg, src);
        if (cfg.experiment == "linearize") return run_linearize(cfg, src);
        if (cfg.experiment == "hydro") return run_hydro(cfg, src);
        if (cfg.experiment == "occupation") return run_occupation(cfg, src);
        if (cfg.experiment == "excess") return run_excess(cfg, src);
        if (cfg.experiment == "heatkernel") return run_heatkernel(cfg, src);
        if (cfg.experiment == "gff") return run_gff(cfg, src);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad parameter: ") + e.what());
    }
    throw ConfigError("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace gradphi
