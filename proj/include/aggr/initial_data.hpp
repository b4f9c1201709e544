/**
 * @file initial_data.hpp
 * @brief Initial densities: sums of Gaussian bumps or explicit atoms.
 */
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggr/measure.hpp"

namespace aggr {

/// amplitude * exp(-((x - center) / width)^2)
struct Bump {
    double amplitude = 1.0;
    double center = 0.0;
    double width = 1.0;

    double operator()(double x) const {
        const double y = (x - center) / width;
        return amplitude * std::exp(-y * y);
    }
    double mass() const { return amplitude * width * std::sqrt(std::numbers::pi); }
};

struct InitialData {
    std::vector<Bump> bumps;
    std::vector<Atom> atoms;
    /// Rescale to unit mass after projection.
    bool normalize = true;

    bool atomic() const { return bumps.empty(); }

    /// Unnormalized density of the bump sum.
    double density(double x) const {
        double s = 0.0;
        for (const Bump &b : bumps) s += b(x);
        return s;
    }

    double raw_mass() const {
        double s = 0.0;
        for (const Bump &b : bumps) s += b.mass();
        for (const Atom &a : atoms) s += a.mass;
        return s;
    }

    void validate() const {
        if (bumps.empty() && atoms.empty()) throw std::invalid_argument("initial data is empty");
        if (!bumps.empty() && !atoms.empty())
            throw std::invalid_argument("initial data mixes bumps and atoms");
        for (const Bump &b : bumps)
            if (!(b.width > 0.0) || !(b.amplitude >= 0.0))
                throw std::invalid_argument("bump needs width > 0 and amplitude >= 0");
        for (const Atom &a : atoms)
            if (!(a.mass >= 0.0)) throw std::invalid_argument("atom mass must be nonnegative");
    }
};

/// exp(-k (x - c)^2) written as a Bump.
inline Bump gaussian_rate(double amplitude, double center, double rate) {
    return {amplitude, center, 1.0 / std::sqrt(rate)};
}

/**
 * "init1": two bumps exp(-10(x -+ 0.7)^2).
 * "init2": exp(-10(x-1.25)^2) + 0.8 exp(-20 x^2) + exp(-10(x+1)^2).
 */
inline InitialData builtin_initial(const std::string &name) {
    InitialData d;
    if (name == "init1") {
        d.bumps = {gaussian_rate(1.0, 0.7, 10.0), gaussian_rate(1.0, -0.7, 10.0)};
    } else if (name == "init2") {
        d.bumps = {gaussian_rate(1.0, 1.25, 10.0), gaussian_rate(0.8, 0.0, 20.0), gaussian_rate(1.0, -1.0, 10.0)};
    } else {
        throw std::invalid_argument("unknown builtin initial data '" + name + "'");
    }
    d.normalize = true;
    return d;
}

}  // namespace aggr
