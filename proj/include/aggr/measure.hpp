/**
 * @file measure.hpp
 * @brief Finite atomic measures on the line, quantiles and the Wasserstein-1 distance.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aggr {

struct Atom {
    double position = 0.0;
    double mass = 0.0;
    bool operator==(const Atom &) const = default;
};

/// Atoms closer than this are merged on construction.
inline constexpr double kAtomMergeTolerance = 1e-12;

/// Finite nonnegative measure sum_k m_k delta_{x_k} with strictly increasing x_k.
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;

    /// Sorts, merges positions closer than kAtomMergeTolerance and drops zero masses.
    explicit DiscreteMeasure(std::vector<Atom> atoms) {
        for (const Atom &a : atoms) {
            if (!std::isfinite(a.position) || !std::isfinite(a.mass))
                throw std::invalid_argument("DiscreteMeasure: non-finite atom");
            if (a.mass < 0.0) throw std::invalid_argument("DiscreteMeasure: negative mass");
        }
        std::erase_if(atoms, [](const Atom &a) { return a.mass == 0.0; });
        std::stable_sort(atoms.begin(), atoms.end(),
                         [](const Atom &l, const Atom &r) { return l.position < r.position; });
        for (const Atom &a : atoms) {
            if (!atoms_.empty() && a.position - atoms_.back().position < kAtomMergeTolerance) {
                Atom &b = atoms_.back();
                const double m = b.mass + a.mass;
                b.position = (b.mass * b.position + a.mass * a.position) / m;
                b.mass = m;
            } else {
                atoms_.push_back(a);
            }
        }
        for (const Atom &a : atoms_) total_ += a.mass;
    }

    static DiscreteMeasure dirac(double x, double mass = 1.0) { return DiscreteMeasure({{x, mass}}); }

    std::span<const Atom> atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }
    double total_mass() const { return total_; }

    DiscreteMeasure shifted(double s) const {
        DiscreteMeasure out = *this;
        for (Atom &a : out.atoms_) a.position += s;
        return out;
    }

    bool operator==(const DiscreteMeasure &) const = default;

private:
    std::vector<Atom> atoms_;
    double total_ = 0.0;
};

/// Reconstruction rho_h = sum_i rho_i dx delta_{x_i} of cell densities.
inline DiscreteMeasure from_cells(double grid_origin, double dx, std::span<const double> densities) {
    if (!(dx > 0.0)) throw std::invalid_argument("from_cells: dx must be positive");
    std::vector<Atom> atoms;
    atoms.reserve(densities.size());
    for (std::size_t i = 0; i < densities.size(); ++i) {
        if (densities[i] < 0.0) throw std::invalid_argument("from_cells: negative density");
        if (densities[i] > 0.0)
            atoms.push_back({grid_origin + static_cast<double>(i) * dx, densities[i] * dx});
    }
    return DiscreteMeasure(std::move(atoms));
}

inline constexpr double kProbabilityTolerance = 1e-10;

/// Generalized inverse F^{-1}(z) = inf{x : F(x) > z} of a probability measure.
inline double quantile(const DiscreteMeasure &m, double z) {
    if (!(z > 0.0 && z < 1.0)) throw std::invalid_argument("quantile: z must lie in (0,1)");
    if (std::abs(m.total_mass() - 1.0) > kProbabilityTolerance)
        throw std::invalid_argument("quantile: not a probability measure");
    double cum = 0.0;
    for (const Atom &a : m.atoms()) {
        cum += a.mass;
        if (cum > z) return a.position;
    }
    return m.atoms().back().position;
}

/**
 * W1 distance as the L1 distance between quantile functions. Both quantiles are
 * piecewise constant, so the integral is exact over the merged breakpoints.
 */
inline double wasserstein1(const DiscreteMeasure &m1, const DiscreteMeasure &m2) {
    if (std::abs(m1.total_mass() - m2.total_mass()) > kProbabilityTolerance)
        throw std::invalid_argument("wasserstein1: total masses differ");
    const auto a = m1.atoms();
    const auto b = m2.atoms();
    if (a.empty() || b.empty()) return 0.0;

    std::size_t i = 0, j = 0;
    double cum_a = a[0].mass, cum_b = b[0].mass;
    double z = 0.0, dist = 0.0;
    while (i < a.size() && j < b.size()) {
        const double next = std::min(cum_a, cum_b);
        dist += (next - z) * std::abs(a[i].position - b[j].position);
        z = next;
        // Ties advance both sequences. A rounding-level residual at the end is dropped.
        const bool advance_a = cum_a <= cum_b;
        const bool advance_b = cum_b <= cum_a;
        if (advance_a && ++i < a.size()) cum_a += a[i].mass;
        if (advance_b && ++j < b.size()) cum_b += b[j].mass;
    }
    return dist;
}

/// M1 = sum m |x|.
inline double first_moment(const DiscreteMeasure &m) {
    double s = 0.0;
    for (const Atom &a : m.atoms()) s += a.mass * std::abs(a.position);
    return s;
}

/// CSV dump, one `position,mass` line per atom, 17 significant digits.
inline void write_atoms_csv(std::ostream &os, const DiscreteMeasure &m) {
    char buf[64];
    os << "position,mass\n";
    for (const Atom &a : m.atoms()) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", a.position, a.mass);
        os << buf;
    }
}

}  // namespace aggr
