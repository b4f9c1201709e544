/**
 * @file potentials.hpp
 * @brief Pointy interaction potentials W and velocity nonlinearities a.
 *
 * A pointy potential is even, Lipschitz and lambda-concave with a kink at the
 * origin. When its second derivative splits as W'' = -c delta_0 + w with a
 * continuous, integrable w, the decomposition record carries c and w so the
 * nonlinear flux can be built from A(W' * rho).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

namespace aggr {

/// W'' = -c delta_0 + w in the distributional sense.
struct Decomposition {
    double c = 1.0;
    std::function<double(double)> w;
    double w0 = 0.0;  ///< L1 norm of w
    /// x -> int_{-inf}^{x} w(y) dy
    std::function<double(double)> w_left_integral;

    /// int_a^b w(y) dy
    double integral(double a, double b) const { return w_left_integral(b) - w_left_integral(a); }

    /// Continuous part of W': W'(x) = -c H(x) + wtilde(x), wtilde(0) = c/2.
    double wtilde(double x) const { return w_left_integral(x) - w_left_integral(0.0) + 0.5 * c; }
};

struct PointyPotential {
    std::string name;
    std::function<double(double)> w_eval;
    /// W' away from the origin; never called at x == 0.
    std::function<double(double)> wprime_eval;
    double lambda = 0.0;
    double lip = 0.0;
    std::optional<Decomposition> decomposition;

    double operator()(double x) const { return w_eval(x); }
    double derivative(double x) const { return wprime_eval(x); }
    bool decomposed() const { return decomposition.has_value(); }

    const Decomposition &require_decomposition() const {
        if (!decomposition)
            throw std::invalid_argument("potential '" + name + "' has no W'' = -c delta + w decomposition");
        return *decomposition;
    }
};

struct VelocityLaw {
    std::string name;
    std::function<double(double)> a_eval;
    std::function<double(double)> a_antideriv;  ///< A with A(0) = 0
    double alpha = 1.0;                         ///< sup of a'
    bool is_identity = false;
    /// Scale on which a bends (distance to its nearest complex singularity).
    double length_scale = std::numeric_limits<double>::infinity();

    double operator()(double x) const { return a_eval(x); }
    double antiderivative(double x) const { return a_antideriv(x); }
};

/**
 * Mean of a over [u0, u1], i.e. (A(u1) - A(u0)) / (u1 - u0). Short intervals
 * use Gauss-Legendre on a instead, since differencing A loses the digits there.
 */
inline double interval_mean(const VelocityLaw &law, double u0, double u1) {
    const double du = u1 - u0;
    if (law.is_identity) return 0.5 * (u0 + u1);
    if (du == 0.0) return law(u0);
    if (std::abs(du) < 0.2 * law.length_scale)
        return boost::math::quadrature::gauss<double, 7>::integrate(law.a_eval, u0, u1) / du;
    return (law.antiderivative(u1) - law.antiderivative(u0)) / du;
}

enum class VelocityMode { linear, nonlinear };

inline std::string to_string(VelocityMode m) { return m == VelocityMode::linear ? "linear" : "nonlinear"; }

inline VelocityMode parse_mode(const std::string &s) {
    if (s == "linear") return VelocityMode::linear;
    if (s == "nonlinear") return VelocityMode::nonlinear;
    throw std::invalid_argument("unknown velocity mode '" + s + "'");
}

namespace detail {
inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }
}  // namespace detail

/// W(x) = -sigma |x|; W'' = -2 sigma delta_0.
inline PointyPotential make_abs_potential(double sigma, std::string name) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("abs potential requires sigma > 0");
    PointyPotential p;
    p.name = std::move(name);
    p.w_eval = [sigma](double x) { return -sigma * std::abs(x); };
    p.wprime_eval = [sigma](double x) { return -sigma * detail::sgn(x); };
    p.lambda = 0.0;
    p.lip = sigma;
    p.decomposition = Decomposition{2.0 * sigma, [](double) { return 0.0; }, 0.0, [](double) { return 0.0; }};
    return p;
}

/// W(x) = (exp(-|x|) - 1) / 2, the chemotaxis potential.
inline PointyPotential make_exp_pointy() {
    PointyPotential p;
    p.name = "exp_pointy";
    p.w_eval = [](double x) { return 0.5 * std::expm1(-std::abs(x)); };
    p.wprime_eval = [](double x) { return -0.5 * detail::sgn(x) * std::exp(-std::abs(x)); };
    p.lambda = 0.5;
    p.lip = 0.5;
    Decomposition d;
    d.c = 1.0;
    d.w = [](double x) { return 0.5 * std::exp(-std::abs(x)); };
    d.w0 = 1.0;
    d.w_left_integral = [](double x) { return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x); };
    p.decomposition = std::move(d);
    return p;
}

/**
 * Builtin potentials by name: "abs_half" (W = -|x|/2), "abs_scaled" (W = -sigma|x|)
 * and "exp_pointy" (W = (e^{-|x|} - 1)/2).
 */
inline PointyPotential make_builtin_potential(const std::string &name, double sigma = 0.0) {
    if (name == "abs_half") return make_abs_potential(0.5, "abs_half");
    if (name == "abs_scaled") return make_abs_potential(sigma, "abs_scaled");
    if (name == "exp_pointy") return make_exp_pointy();
    throw std::invalid_argument("unknown potential '" + name + "'");
}

/// "identity" or "atan" (a(x) = scale * atan(k x)).
inline VelocityLaw make_velocity_law(const std::string &name, double k = 0.0, double scale = 0.0) {
    VelocityLaw law;
    law.name = name;
    if (name == "identity") {
        law.a_eval = [](double x) { return x; };
        law.a_antideriv = [](double x) { return 0.5 * x * x; };
        law.alpha = 1.0;
        law.is_identity = true;
        return law;
    }
    if (name == "atan") {
        if (!(k > 0.0) || !(scale > 0.0)) throw std::invalid_argument("atan velocity law requires k > 0 and scale > 0");
        law.a_eval = [k, scale](double x) { return scale * std::atan(k * x); };
        law.a_antideriv = [k, scale](double x) {
            return scale * (x * std::atan(k * x) - std::log1p(k * k * x * x) / (2.0 * k));
        };
        law.alpha = scale * k;
        law.length_scale = 1.0 / k;
        return law;
    }
    throw std::invalid_argument("unknown velocity law '" + name + "'");
}

/// a(x) = (2/pi) atan(50 x), the law of presets 1 and 2.
inline VelocityLaw make_atan_law_50() { return make_velocity_law("atan", 50.0, 2.0 / std::numbers::pi); }

/**
 * Reach of the discrete argument u = W' * rho for a unit-mass state:
 * |u| <= |u_inf| + c + w0 with u_inf = c/2 - int_{-inf}^0 w.
 */
inline double argument_reach(const Decomposition &d) {
    const double u_inf = 0.5 * d.c - d.w_left_integral(0.0);
    return std::abs(u_inf) + d.c + d.w0;
}

/**
 * Uniform bound a_inf on the discrete velocities for unit mass. Linear: the
 * Lipschitz constant of W. Nonlinear: max |a| over [-R, R] with R from
 * argument_reach (a is nondecreasing, so only the endpoints matter).
 */
inline double velocity_sup_bound(const PointyPotential &pot, const VelocityLaw &law, VelocityMode mode) {
    if (mode == VelocityMode::linear) return pot.lip;
    const double reach = argument_reach(pot.require_decomposition());
    return std::max(std::abs(law(reach)), std::abs(law(-reach)));
}

}  // namespace aggr
