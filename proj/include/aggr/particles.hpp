/**
 * @file particles.hpp
 * @brief Sticky-particle solutions: atoms follow the aggregate ODE and merge on contact.
 *
 * Linear case:    x_i' = sum_{j != i} m_j W'(x_i - x_j).
 * Nonlinear case: m_i x_i' = -[A(W' * rho)]_{x_i} / c, using the one-sided traces
 *                 u(x_i+) = -c sum_{j <= i} m_j + sum_j m_j wtilde(x_i - x_j),
 *                 u(x_i-) = u(x_i+) + c m_i.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "aggr/measure.hpp"
#include "aggr/potentials.hpp"

namespace aggr::particles {

struct TrajectoryLog;

struct Particle {
    double x = 0.0;
    double m = 0.0;
};

/// Particles whose gap falls below this are merged.
inline constexpr double kContactTolerance = 1e-12;
/// Collision times are bracketed to this width.
inline constexpr double kCollisionTimeTolerance = 1e-13;
inline constexpr double kMaxStep = 0.01;

class ParticleSystem {
public:
    ParticleSystem(std::vector<Particle> particles, PointyPotential pot, VelocityLaw law, VelocityMode mode,
                   double time = 0.0)
        : pot_(std::move(pot)), law_(std::move(law)), mode_(mode), time_(time) {
        if (mode_ == VelocityMode::nonlinear) pot_.require_decomposition();
        std::vector<Atom> atoms;
        atoms.reserve(particles.size());
        for (const Particle &p : particles) {
            if (!(p.m > 0.0)) throw std::invalid_argument("ParticleSystem: masses must be positive");
            atoms.push_back({p.x, p.m});
        }
        // DiscreteMeasure sorts and merges coincident atoms.
        const DiscreteMeasure merged(std::move(atoms));
        for (const Atom &a : merged.atoms()) particles_.push_back({a.position, a.mass});
    }

    static ParticleSystem from_measure(const DiscreteMeasure &m, PointyPotential pot, VelocityLaw law,
                                       VelocityMode mode) {
        std::vector<Particle> ps;
        for (const Atom &a : m.atoms()) ps.push_back({a.position, a.mass});
        return ParticleSystem(std::move(ps), std::move(pot), std::move(law), mode);
    }

    std::span<const Particle> particles() const { return particles_; }
    std::size_t size() const { return particles_.size(); }
    double time() const { return time_; }
    VelocityMode mode() const { return mode_; }
    const PointyPotential &potential() const { return pot_; }
    const VelocityLaw &law() const { return law_; }

    double total_mass() const {
        double s = 0.0;
        for (const Particle &p : particles_) s += p.m;
        return s;
    }
    double center_of_mass() const {
        double s = 0.0;
        for (const Particle &p : particles_) s += p.m * p.x;
        return s / total_mass();
    }
    DiscreteMeasure measure() const {
        std::vector<Atom> atoms;
        atoms.reserve(particles_.size());
        for (const Particle &p : particles_) atoms.push_back({p.x, p.m});
        return DiscreteMeasure(std::move(atoms));
    }

private:
    friend ParticleSystem advance_to(ParticleSystem, double, TrajectoryLog *);

    std::vector<Particle> particles_;
    PointyPotential pot_;
    VelocityLaw law_;
    VelocityMode mode_;
    double time_ = 0.0;
};

enum class EventKind { sample, merge };

inline const char *to_string(EventKind k) { return k == EventKind::sample ? "sample" : "merge"; }

struct TrajectoryEvent {
    double time = 0.0;
    EventKind kind = EventKind::sample;
    DiscreteMeasure snapshot;
};

struct TrajectoryLog {
    std::vector<TrajectoryEvent> events;

    void record(double t, EventKind kind, DiscreteMeasure snap) { events.push_back({t, kind, std::move(snap)}); }

    std::size_t count(EventKind kind) const {
        return static_cast<std::size_t>(
            std::count_if(events.begin(), events.end(), [kind](const TrajectoryEvent &e) { return e.kind == kind; }));
    }
};

/// Rows `time,event,x_1..x_n,m_1..m_n`; n varies as particles merge.
inline void write_trajectory_csv(std::ostream &os, const TrajectoryLog &log) {
    char buf[64];
    os << "time,event,positions...,masses...\n";
    for (const TrajectoryEvent &e : log.events) {
        std::snprintf(buf, sizeof buf, "%.17g", e.time);
        os << buf << ',' << to_string(e.kind);
        for (const Atom &a : e.snapshot.atoms()) {
            std::snprintf(buf, sizeof buf, ",%.17g", a.position);
            os << buf;
        }
        for (const Atom &a : e.snapshot.atoms()) {
            std::snprintf(buf, sizeof buf, ",%.17g", a.mass);
            os << buf;
        }
        os << '\n';
    }
}

namespace detail {

inline void require_distinct(std::span<const double> x) {
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) throw std::invalid_argument("particle velocities: coincident or unordered particles");
}

// Velocities keyed on index order. Inside an RK4 stage a pair may touch or
// overshoot slightly; W' is then continued from the pre-contact side.
inline std::vector<double> linear_velocities(std::span<const double> x, std::span<const double> m,
                                             const PointyPotential &pot) {
    std::vector<double> v(x.size(), 0.0);
    // Pairwise accumulation keeps the total momentum at rounding level.
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double d = x[i] - x[j];
            const double f = pot.derivative(d < 0.0 ? d : -std::max(d, std::numeric_limits<double>::denorm_min()));
            v[i] += m[j] * f;
            v[j] -= m[i] * f;
        }
    return v;
}

inline std::vector<double> nonlinear_velocities(std::span<const double> x, std::span<const double> m,
                                                const PointyPotential &pot, const VelocityLaw &law) {
    const Decomposition &dec = pot.require_decomposition();
    const std::size_t n = x.size();
    std::vector<double> v(n);
    double left_mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        left_mass += m[i];
        double smooth = 0.0;
        for (std::size_t j = 0; j < n; ++j) smooth += m[j] * dec.wtilde(x[i] - x[j]);
        const double u_plus = -dec.c * left_mass + smooth;
        const double u_minus = u_plus + dec.c * m[i];
        // -(A(u+) - A(u-)) / (c m_i), with u- - u+ = c m_i.
        v[i] = interval_mean(law, u_plus, u_minus);
    }
    return v;
}

inline std::vector<double> velocities(std::span<const double> x, std::span<const double> m, const PointyPotential &pot,
                                      const VelocityLaw &law, VelocityMode mode) {
    return mode == VelocityMode::linear ? linear_velocities(x, m, pot) : nonlinear_velocities(x, m, pot, law);
}

/// Classical RK4 step of size h.
inline std::vector<double> rk4(std::span<const double> x, std::span<const double> m, const PointyPotential &pot,
                               const VelocityLaw &law, VelocityMode mode, double h) {
    const std::size_t n = x.size();
    auto eval = [&](const std::vector<double> &y) { return velocities(y, m, pot, law, mode); };
    std::vector<double> y(x.begin(), x.end()), tmp(n);
    const auto k1 = eval(y);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    const auto k2 = eval(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    const auto k3 = eval(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    const auto k4 = eval(tmp);
    for (std::size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return y;
}

inline double min_gap(std::span<const double> x) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < x.size(); ++i) g = std::min(g, x[i] - x[i - 1]);
    return g;
}

}  // namespace detail

inline std::vector<double> linear_velocities(const ParticleSystem &ps) {
    if (ps.mode() != VelocityMode::linear) throw std::invalid_argument("linear_velocities: system is nonlinear");
    std::vector<double> x, m;
    for (const Particle &p : ps.particles()) x.push_back(p.x), m.push_back(p.m);
    detail::require_distinct(x);
    return detail::linear_velocities(x, m, ps.potential());
}

inline std::vector<double> nonlinear_velocities(const ParticleSystem &ps) {
    std::vector<double> x, m;
    for (const Particle &p : ps.particles()) x.push_back(p.x), m.push_back(p.m);
    detail::require_distinct(x);
    return detail::nonlinear_velocities(x, m, ps.potential(), ps.law());
}

inline std::vector<double> velocities(const ParticleSystem &ps) {
    return ps.mode() == VelocityMode::linear ? linear_velocities(ps) : nonlinear_velocities(ps);
}

/**
 * Integrates to t_end with RK4 (h <= kMaxStep). A step that closes a gap is
 * replaced by a bracketed root search on the smallest gap as a function of the
 * step length; particles in contact at the root merge at their center of mass.
 */
inline ParticleSystem advance_to(ParticleSystem ps, double t_end, TrajectoryLog *log = nullptr) {
    if (!(t_end >= ps.time_)) throw std::invalid_argument("advance_to: t_end precedes the current time");
    std::vector<double> x, m;
    auto unpack = [&] {
        x.clear();
        m.clear();
        for (const Particle &p : ps.particles_) x.push_back(p.x), m.push_back(p.m);
    };
    auto stepper = [&](double h) { return detail::rk4(x, m, ps.pot_, ps.law_, ps.mode_, h); };

    unpack();
    const double eps = 1e-14 * std::max(1.0, std::abs(t_end));
    while (ps.time_ < t_end - eps) {
        double h = std::min(kMaxStep, t_end - ps.time_);
        std::vector<double> y = stepper(h);
        for (double xi : y)
            if (!std::isfinite(xi)) throw std::runtime_error("advance_to: non-finite particle state");
        const double gap = detail::min_gap(y);
        if (gap <= 0.0) {
            auto f = [&](double s) { return detail::min_gap(stepper(s)); };
            auto tol = [](double a, double b) { return std::abs(b - a) <= kCollisionTimeTolerance; };
            std::uintmax_t iters = 200;
            const double f0 = detail::min_gap(x);
            const auto bracket = boost::math::tools::toms748_solve(f, 0.0, h, f0, gap, tol, iters);
            h = bracket.second;
            y = stepper(h);
        }
        const bool jump_to_end = h == t_end - ps.time_;
        ps.time_ = jump_to_end ? t_end : ps.time_ + h;

        bool merged = false;
        std::vector<Particle> next;
        next.reserve(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (!next.empty() && y[i] - y[i - 1] <= kContactTolerance) {
                Particle &b = next.back();
                const double mass = b.m + m[i];
                b.x = (b.m * b.x + m[i] * y[i]) / mass;
                b.m = mass;
                merged = true;
            } else {
                next.push_back({y[i], m[i]});
            }
        }
        ps.particles_ = std::move(next);
        unpack();
        if (merged && log) log->record(ps.time_, EventKind::merge, ps.measure());
    }
    return ps;
}

}  // namespace aggr::particles
