#include <random>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include "aggr/measure.hpp"

using namespace aggr;

namespace {

DiscreteMeasure make(std::vector<Atom> atoms) { return DiscreteMeasure(std::move(atoms)); }

// Random probability measure with 1..8 atoms on [-5, 5].
DiscreteMeasure random_measure(std::mt19937_64 &rng) {
    std::uniform_int_distribution<int> count(1, 8);
    std::uniform_real_distribution<double> pos(-5.0, 5.0), w(0.05, 1.0);
    std::vector<Atom> atoms(static_cast<std::size_t>(count(rng)));
    double total = 0.0;
    for (Atom &a : atoms) {
        a = {pos(rng), w(rng)};
        total += a.mass;
    }
    for (Atom &a : atoms) a.mass /= total;
    return DiscreteMeasure(std::move(atoms));
}

// Midpoint Riemann sum of |F1^-1 - F2^-1| on n points.
double riemann_w1(const DiscreteMeasure &a, const DiscreteMeasure &b, int n) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
        const double z = (k + 0.5) / n;
        s += std::abs(quantile(a, z) - quantile(b, z));
    }
    return s / n;
}

}  // namespace

TEST(DiscreteMeasure, SortsAndMerges) {
    const auto m = make({{1.0, 0.25}, {-1.0, 0.5}, {1.0 + 1e-13, 0.25}, {3.0, 0.0}});
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m.atoms()[0], (Atom{-1.0, 0.5}));
    EXPECT_NEAR(m.atoms()[1].position, 1.0, 1e-12);
    EXPECT_EQ(m.atoms()[1].mass, 0.5);
    EXPECT_EQ(m.total_mass(), 1.0);
}

TEST(DiscreteMeasure, RejectsBadAtoms) {
    EXPECT_THROW(make({{0.0, -0.1}}), std::invalid_argument);
    EXPECT_THROW(make({{std::nan(""), 1.0}}), std::invalid_argument);
}

TEST(FromCells, Examples) {
    const double d1[] = {0.5, 0.0, 0.5};
    EXPECT_EQ(from_cells(0.0, 1.0, d1), make({{0.0, 0.5}, {2.0, 0.5}}));
    const double d2[] = {2.0};
    EXPECT_EQ(from_cells(0.0, 0.5, d2), make({{0.0, 1.0}}));
    const double d3[] = {0.0, 0.0, 0.0};
    const auto empty = from_cells(-1.0, 1.0, d3);
    EXPECT_TRUE(empty.empty());
    EXPECT_EQ(empty.total_mass(), 0.0);
    const double bad[] = {0.1, -0.1};
    EXPECT_THROW(from_cells(0.0, 1.0, bad), std::invalid_argument);
    EXPECT_THROW(from_cells(0.0, 0.0, d2), std::invalid_argument);
}

TEST(Quantile, Examples) {
    EXPECT_EQ(quantile(DiscreteMeasure::dirac(0.0), 0.7), 0.0);
    const auto pm = make({{-1.0, 0.5}, {1.0, 0.5}});
    EXPECT_EQ(quantile(pm, 0.25), -1.0);
    EXPECT_EQ(quantile(pm, 0.75), 1.0);
    EXPECT_EQ(quantile(make({{0.0, 0.5}, {2.0, 0.5}}), 0.5), 2.0);
}

TEST(Quantile, Errors) {
    const auto d = DiscreteMeasure::dirac(0.0);
    EXPECT_THROW(quantile(d, 0.0), std::invalid_argument);
    EXPECT_THROW(quantile(d, 1.0), std::invalid_argument);
    EXPECT_THROW(quantile(DiscreteMeasure::dirac(0.0, 0.5), 0.5), std::invalid_argument);
}

TEST(Quantile, NondecreasingInZ) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
        const auto m = random_measure(rng);
        double prev = -1e300;
        for (int k = 1; k < 1000; ++k) {
            const double q = quantile(m, k / 1000.0);
            EXPECT_GE(q, prev);
            prev = q;
        }
    }
}

TEST(Wasserstein1, Examples) {
    EXPECT_EQ(wasserstein1(DiscreteMeasure::dirac(-1.0), DiscreteMeasure::dirac(1.0)), 2.0);
    EXPECT_EQ(wasserstein1(make({{0.0, 0.5}, {2.0, 0.5}}), DiscreteMeasure::dirac(1.0)), 1.0);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        const auto m = random_measure(rng);
        EXPECT_EQ(wasserstein1(m, m), 0.0);
    }
}

TEST(Wasserstein1, MassMismatchThrows) {
    EXPECT_THROW(wasserstein1(DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(0.0, 0.9)), std::invalid_argument);
}

TEST(Wasserstein1, SymmetricAndPositive) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 500; ++t) {
        const auto a = random_measure(rng), b = random_measure(rng);
        const double ab = wasserstein1(a, b);
        EXPECT_NEAR(ab, wasserstein1(b, a), 1e-12);
        if (!(a == b)) {
            EXPECT_GT(ab, 0.0);
        }
    }
}

TEST(Wasserstein1, TriangleInequality) {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 1000; ++t) {
        const auto a = random_measure(rng), b = random_measure(rng), c = random_measure(rng);
        EXPECT_LE(wasserstein1(a, c), wasserstein1(a, b) + wasserstein1(b, c) + 1e-10);
    }
}

TEST(Wasserstein1, TranslationInvariant) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> shift(-3.0, 3.0);
    for (int t = 0; t < 200; ++t) {
        // Positions on a dyadic grid so that shifted coordinates and their differences are exact.
        auto dyadic = [](const DiscreteMeasure &m) {
            std::vector<Atom> atoms(m.atoms().begin(), m.atoms().end());
            for (Atom &x : atoms) x.position = std::ldexp(std::round(std::ldexp(x.position, 20)), -20);
            return DiscreteMeasure(std::move(atoms));
        };
        const auto a = dyadic(random_measure(rng)), b = dyadic(random_measure(rng));
        const double s = std::ldexp(std::round(std::ldexp(shift(rng), 10)), -10);
        EXPECT_EQ(wasserstein1(a.shifted(s), b.shifted(s)), wasserstein1(a, b));
        // Shifting one side alone moves W1 by at most |s|.
        EXPECT_LE(std::abs(wasserstein1(a.shifted(s), b) - wasserstein1(a, b)), std::abs(s) + 1e-12);
    }
}

TEST(Wasserstein1, MatchesRiemannOracle) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 10; ++t) {
        const auto a = random_measure(rng), b = random_measure(rng);
        EXPECT_NEAR(wasserstein1(a, b), riemann_w1(a, b, 1'000'000), 1e-4);
    }
}

TEST(FirstMoment, Examples) {
    EXPECT_EQ(first_moment(DiscreteMeasure::dirac(0.0)), 0.0);
    EXPECT_EQ(first_moment(make({{-1.0, 0.5}, {1.0, 0.5}})), 1.0);
    EXPECT_DOUBLE_EQ(first_moment(make({{-2.0, 0.25}, {3.0, 0.75}})), 2.75);
}

TEST(AtomsCsv, SeventeenDigits) {
    std::ostringstream os;
    write_atoms_csv(os, make({{0.1, 1.0 / 3.0}}));
    EXPECT_EQ(os.str(), "position,mass\n0.10000000000000001,0.33333333333333331\n");
}
