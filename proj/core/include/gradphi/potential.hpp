// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gradphi {

class Potential;

namespace detail {

struct QuadraticEval {
    double d1(double x) const { return x; }
    double d2(double) const { return 1.0; }
};

struct SoftQuarticEval {
    double a;
    double d1(double x) const { return x + a * x / std::sqrt(1.0 + x * x); }
    double d2(double x) const {
        const double r = 1.0 + x * x;
        return 1.0 + a / (r * std::sqrt(r));
    }
};

struct KinkedEval {
    double b;
    double d1(double x) const { return x + b * std::clamp(x, -1.0, 1.0); }
    double d2(double x) const { return std::abs(x) < 1.0 ? 1.0 + b : 1.0; }
};

struct GenericEval {
    const Potential* V;
    double d1(double x) const;
    double d2(double x) const;
};

struct MollifiedData;

}  // namespace detail

// Symmetric uniformly convex interaction potential with its first two
// derivatives and ellipticity bounds c_- <= V'' <= c_+.
class Potential {
public:
    enum class Kind { quadratic, soft_quartic, kinked, mollified };

    static Potential quadratic();
    static Potential soft_quartic(double a);
    static Potential kinked(double b);
    static Potential from_json(const nlohmann::json& j);

    double value(double x) const;
    double first(double x) const;
    double second(double x) const;

    double c_minus() const { return c_minus_; }
    double c_plus() const { return c_plus_; }
    bool symmetric() const { return true; }
    Kind kind() const { return kind_; }
    bool is_quadratic() const { return kind_ == Kind::quadratic; }
    double parameter() const { return param_; }
    double mollifier_width() const;
    std::string name() const;
    nlohmann::json to_json() const;

    // Points where V'' jumps.
    std::vector<double> breakpoints() const;

    // Calls f with a small evaluator exposing inline d1/d2; hot loops are
    // instantiated once per potential family.
    template <class F>
    decltype(auto) visit(F&& f) const {
        switch (kind_) {
        case Kind::quadratic: return f(detail::QuadraticEval{});
        case Kind::soft_quartic: return f(detail::SoftQuarticEval{param_});
        case Kind::kinked: return f(detail::KinkedEval{param_});
        default: return f(detail::GenericEval{this});
        }
    }

private:
    friend Potential mollify(const Potential& V, double kappa);
    Potential(Kind k, double param, double cm, double cp) : kind_(k), param_(param), c_minus_(cm), c_plus_(cp) {}

    Kind kind_;
    double param_;
    double c_minus_;
    double c_plus_;
    std::shared_ptr<const detail::MollifiedData> moll_;
};

// V * eta_kappa with the standard bump, evaluated by 64-point Gauss-Legendre
// on each smooth piece of the integrand.
Potential mollify(const Potential& V, double kappa);

// |{x in [-S,S] : |V''(x) - V_kappa''(x)| >= eps}| at resolution 1e-4.
double lusin_measure(const Potential& V, double S, double kappa, double eps);

// Smallest C with |W(x) - W(y)| <= C |x-y| / kappa over consecutive points of
// a uniform grid on [-S, S], W = V_kappa''.
double fitted_second_derivative_lipschitz(const Potential& V_kappa, double S, double h);

}  // namespace gradphi
