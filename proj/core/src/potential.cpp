// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include "gradphi/potential.hpp"

#include <array>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "gradphi/error.hpp"

namespace gradphi {

namespace detail {

struct MollifiedData {
    std::shared_ptr<const Potential> base;
    double kappa;
};

double GenericEval::d1(double x) const { return V->first(x); }
double GenericEval::d2(double x) const { return V->second(x); }

}  // namespace detail

namespace {

using Gauss64 = boost::math::quadrature::gauss<double, 64>;

double bump(double s) {
    const double r = 1.0 - s * s;
    return r <= 0.0 ? 0.0 : std::exp(-1.0 / r);
}

// 64-point rule on [a,b], nodes ordered as in the Boost table (positive
// half mirrored), so results are reproducible.
template <class G>
double gauss64(double a, double b, G&& g) {
    const auto& xs = Gauss64::abscissa();
    const auto& ws = Gauss64::weights();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        s += ws[i] * (g(mid + half * xs[i]) + g(mid - half * xs[i]));
    }
    return s * half;
}

// Integrates eta(s) F(x - kappa s) over (-1,1) split at the pre-images of the
// base potential's breakpoints, normalized by the same quadrature of eta.
template <class F>
double convolve(const detail::MollifiedData& m, double x, F&& F_of) {
    std::array<double, 8> cuts{};
    std::size_t nc = 0;
    cuts[nc++] = -1.0;
    for (double b : m.base->breakpoints()) {
        const double s = (x - b) / m.kappa;
        if (s > -1.0 && s < 1.0 && nc < cuts.size() - 1) cuts[nc++] = s;
    }
    cuts[nc++] = 1.0;
    std::sort(cuts.begin(), cuts.begin() + nc);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + 1 < nc; ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (b - a <= 0.0) continue;
        num += gauss64(a, b, [&](double s) { return bump(s) * F_of(x - m.kappa * s); });
        den += gauss64(a, b, bump);
    }
    const double out = num / den;
    if (!std::isfinite(out)) throw NumericalError("mollifier quadrature produced a non-finite value");
    return out;
}

}  // namespace

Potential Potential::quadratic() { return Potential(Kind::quadratic, 0.0, 1.0, 1.0); }

Potential Potential::soft_quartic(double a) {
    if (!(a > 0.0)) throw std::invalid_argument("soft_quartic requires a > 0");
    return Potential(Kind::soft_quartic, a, 1.0, 1.0 + a);
}

Potential Potential::kinked(double b) {
    if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("kinked requires 0 < b < 1");
    return Potential(Kind::kinked, b, 1.0, 1.0 + b);
}

Potential Potential::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind")) throw ConfigError("potential needs a \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();
    Potential V = quadratic();
    if (kind == "quadratic") {
        V = quadratic();
    } else if (kind == "soft_quartic") {
        if (!j.contains("a")) throw ConfigError("soft_quartic needs \"a\"");
        V = soft_quartic(j.at("a").get<double>());
    } else if (kind == "kinked") {
        if (!j.contains("b")) throw ConfigError("kinked needs \"b\"");
        V = kinked(j.at("b").get<double>());
    } else {
        throw ConfigError("unknown potential kind '" + kind + "'");
    }
    if (j.contains("mollify")) V = mollify(V, j.at("mollify").get<double>());
    return V;
}

double Potential::value(double x) const {
    switch (kind_) {
    case Kind::quadratic: return 0.5 * x * x;
    case Kind::soft_quartic: return 0.5 * x * x + param_ * std::sqrt(1.0 + x * x);
    case Kind::kinked: {
        const double ax = std::abs(x);
        return 0.5 * x * x + param_ * (ax < 1.0 ? 0.5 * x * x : ax - 0.5);
    }
    case Kind::mollified:
        return convolve(*moll_, x, [&](double y) { return moll_->base->value(y); });
    }
    return 0.0;
}

double Potential::first(double x) const {
    if (kind_ == Kind::mollified) return convolve(*moll_, x, [&](double y) { return moll_->base->first(y); });
    return visit([x](auto e) { return e.d1(x); });
}

double Potential::second(double x) const {
    if (kind_ == Kind::mollified) return convolve(*moll_, x, [&](double y) { return moll_->base->second(y); });
    return visit([x](auto e) { return e.d2(x); });
}

double Potential::mollifier_width() const { return moll_ ? moll_->kappa : 0.0; }

std::string Potential::name() const {
    switch (kind_) {
    case Kind::quadratic: return "quadratic";
    case Kind::soft_quartic: return "soft_quartic";
    case Kind::kinked: return "kinked";
    case Kind::mollified: return moll_->base->name() + "_mollified";
    }
    return "unknown";
}

nlohmann::json Potential::to_json() const {
    if (kind_ == Kind::mollified) {
        auto j = moll_->base->to_json();
        j["mollify"] = moll_->kappa;
        return j;
    }
    nlohmann::json j{{"kind", name()}};
    if (kind_ == Kind::soft_quartic) j["a"] = param_;
    if (kind_ == Kind::kinked) j["b"] = param_;
    return j;
}

std::vector<double> Potential::breakpoints() const {
    if (kind_ == Kind::kinked) return {-1.0, 1.0};
    return {};
}

Potential mollify(const Potential& V, double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("mollify requires kappa > 0");
    if (V.kind() == Potential::Kind::mollified) throw std::invalid_argument("potential is already mollified");
    Potential out(Potential::Kind::mollified, V.parameter(), V.c_minus(), V.c_plus());
    out.moll_ = std::make_shared<const detail::MollifiedData>(
        detail::MollifiedData{std::make_shared<const Potential>(V), kappa});
    return out;
}

double lusin_measure(const Potential& V, double S, double kappa, double eps) {
    if (!(S >= 1.0)) throw std::invalid_argument("lusin_measure requires S >= 1");
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("lusin_measure requires eps in (0,1]");
    const Potential Vk = mollify(V, kappa);
    const double h = 1e-4;
    const auto n = static_cast<long>(std::llround(2.0 * S / h));
    const double step = 2.0 * S / double(n);
    long hits = 0;
    for (long i = 0; i < n; ++i) {
        const double x = -S + (double(i) + 0.5) * step;
        if (std::abs(V.second(x) - Vk.second(x)) >= eps) ++hits;
    }
    return double(hits) * step;
}

double fitted_second_derivative_lipschitz(const Potential& Vk, double S, double h) {
    const double kappa = Vk.mollifier_width();
    if (!(kappa > 0.0)) throw std::invalid_argument("expected a mollified potential");
    const auto n = static_cast<long>(std::llround(2.0 * S / h));
    double prev = Vk.second(-S), best = 0.0;
    for (long i = 1; i <= n; ++i) {
        const double x = -S + double(i) * h;
        const double cur = Vk.second(x);
        best = std::max(best, std::abs(cur - prev) * kappa / h);
        prev = cur;
    }
    return best;
}

}  // namespace gradphi
