#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "aggr/particles.hpp"

using namespace aggr;
using namespace aggr::particles;

namespace {

const auto kAbsHalf = make_builtin_potential("abs_half");
const auto kId = make_velocity_law("identity");

ParticleSystem linear_system(std::vector<Particle> ps, const PointyPotential &pot = kAbsHalf) {
    return ParticleSystem(std::move(ps), pot, kId, VelocityMode::linear);
}

// n particles of random masses (total 1) at distinct random positions in [-2, 2].
std::vector<Particle> random_particles(std::mt19937_64 &rng, std::size_t n) {
    std::uniform_real_distribution<double> pos(-2.0, 2.0), w(0.2, 1.0);
    std::vector<Particle> ps(n);
    double total = 0.0;
    for (auto &p : ps) {
        p = {pos(rng), w(rng)};
        total += p.m;
    }
    for (auto &p : ps) p.m /= total;
    return ps;
}

std::vector<double> positions(const ParticleSystem &ps) {
    std::vector<double> x;
    for (const auto &p : ps.particles()) x.push_back(p.x);
    return x;
}

// u(y) = sum_j m_j W'(y - x_j), evaluated directly away from the atoms.
double direct_u(const ParticleSystem &ps, double y) {
    double u = 0.0;
    for (const auto &p : ps.particles()) u += p.m * ps.potential().derivative(y - p.x);
    return u;
}

}  // namespace

TEST(ParticleSystem, SortsMergesAndValidates) {
    const auto ps = linear_system({{1.0, 0.25}, {-1.0, 0.5}, {1.0, 0.25}});
    ASSERT_EQ(ps.size(), 2u);
    EXPECT_EQ(ps.particles()[0].x, -1.0);
    EXPECT_EQ(ps.particles()[1].m, 0.5);
    EXPECT_THROW(linear_system({{0.0, 0.0}}), std::invalid_argument);
    PointyPotential bare = kAbsHalf;
    bare.decomposition.reset();
    EXPECT_THROW(ParticleSystem({{0.0, 1.0}}, bare, kId, VelocityMode::nonlinear), std::invalid_argument);
}

TEST(LinearVelocities, Examples) {
    EXPECT_EQ(linear_velocities(linear_system({{-1.0, 0.5}, {1.0, 0.5}})), (std::vector<double>{0.25, -0.25}));
    EXPECT_EQ(linear_velocities(linear_system({{0.0, 1.0}}, make_exp_pointy())), (std::vector<double>{0.0}));
    EXPECT_EQ(linear_velocities(linear_system({{-1.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}})),
              (std::vector<double>{0.375, 0.0, -0.375}));
}

TEST(LinearVelocities, RejectsNonlinearSystem) {
    const ParticleSystem ps({{0.0, 1.0}}, kAbsHalf, kId, VelocityMode::nonlinear);
    EXPECT_THROW(linear_velocities(ps), std::invalid_argument);
}

TEST(NonlinearVelocities, IdentityLawExample) {
    const ParticleSystem ps({{-1.0, 0.5}, {1.0, 0.5}}, kAbsHalf, kId, VelocityMode::nonlinear);
    const auto v = nonlinear_velocities(ps);
    EXPECT_DOUBLE_EQ(v[0], 0.25);
    EXPECT_DOUBLE_EQ(v[1], -0.25);
}

TEST(NonlinearVelocities, AtanLawExample) {
    const auto law = make_atan_law_50();
    const ParticleSystem ps({{-1.0, 0.5}, {1.0, 0.5}}, kAbsHalf, law, VelocityMode::nonlinear);
    const auto v = nonlinear_velocities(ps);
    EXPECT_NEAR(v[0], 2.0 * law.antiderivative(0.5), 1e-14);
    EXPECT_NEAR(v[0], 0.8925604219551196, 1e-14);
    EXPECT_NEAR(v[1], -v[0], 1e-15);
}

TEST(NonlinearVelocities, SingleParticleIsAtRest) {
    for (const auto &pot : {kAbsHalf, make_exp_pointy(), make_builtin_potential("abs_scaled", 1.0 / 250.0)}) {
        for (const auto &law : {kId, make_atan_law_50()}) {
            const ParticleSystem ps({{0.3, 1.0}}, pot, law, VelocityMode::nonlinear);
            EXPECT_EQ(nonlinear_velocities(ps)[0], 0.0);
            // Brute force: A(u) just right of the atom minus just left, divided by -c m.
            const double eps = 1e-9;
            const double jump = law.antiderivative(direct_u(ps, 0.3 + eps)) - law.antiderivative(direct_u(ps, 0.3 - eps));
            EXPECT_NEAR(-jump / pot.require_decomposition().c, 0.0, 1e-7);
        }
    }
}

TEST(NonlinearVelocities, MatchBruteForceJump) {
    std::mt19937_64 rng(31);
    const double eps = 1e-9;
    for (const auto &pot : {kAbsHalf, make_exp_pointy(), make_builtin_potential("abs_scaled", 0.2)}) {
        const double c = pot.require_decomposition().c;
        for (int t = 0; t < 20; ++t) {
            const ParticleSystem ps(random_particles(rng, 6), pot, make_atan_law_50(), VelocityMode::nonlinear);
            const auto v = nonlinear_velocities(ps);
            for (std::size_t i = 0; i < ps.size(); ++i) {
                const auto &p = ps.particles()[i];
                const double jump = ps.law().antiderivative(direct_u(ps, p.x + eps)) -
                                    ps.law().antiderivative(direct_u(ps, p.x - eps));
                EXPECT_NEAR(v[i], -jump / (c * p.m), 1e-6) << pot.name;
            }
        }
    }
}

TEST(NonlinearVelocities, IdentityLawMatchesLinear) {
    std::mt19937_64 rng(32);
    for (const auto &pot : {kAbsHalf, make_exp_pointy(), make_builtin_potential("abs_scaled", 1.0 / 250.0)}) {
        for (int t = 0; t < 50; ++t) {
            const auto parts = random_particles(rng, 12);
            const auto lin = linear_velocities(linear_system(parts, pot));
            const auto non = nonlinear_velocities(ParticleSystem(parts, pot, kId, VelocityMode::nonlinear));
            for (std::size_t i = 0; i < lin.size(); ++i) EXPECT_NEAR(lin[i], non[i], 1e-12) << pot.name;
        }
    }
}

TEST(AdvanceTo, TwoParticlesMergeAtFour) {
    TrajectoryLog log;
    const auto end = advance_to(linear_system({{-1.0, 0.5}, {1.0, 0.5}}), 5.0, &log);
    ASSERT_EQ(end.size(), 1u);
    EXPECT_NEAR(end.particles()[0].x, 0.0, 1e-8);
    EXPECT_EQ(end.particles()[0].m, 1.0);
    EXPECT_EQ(end.time(), 5.0);
    ASSERT_EQ(log.count(EventKind::merge), 1u);
    EXPECT_NEAR(log.events[0].time, 4.0, 1e-8);
    EXPECT_EQ(linear_velocities(end), (std::vector<double>{0.0}));
}

TEST(AdvanceTo, SingleParticleStaysPut) {
    TrajectoryLog log;
    const auto end = advance_to(linear_system({{0.7, 1.0}}, make_exp_pointy()), 123.0, &log);
    EXPECT_EQ(end.particles()[0].x, 0.7);
    EXPECT_TRUE(log.events.empty());
    EXPECT_THROW(advance_to(end, 1.0), std::invalid_argument);
}

TEST(AdvanceTo, ThreeBodyAgainstFixedStepOracle) {
    // Outer particles fall in at speed 3/8 and reach the center at t = 8/3.
    const auto end = advance_to(linear_system({{-1.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}}), 10.0);
    ASSERT_EQ(end.size(), 1u);
    EXPECT_NEAR(end.particles()[0].x, 0.0, 1e-12);
    EXPECT_EQ(end.particles()[0].m, 1.0);

    // exp_pointy: nonconstant speeds; compare with a fine fixed-step RK4 before contact.
    const auto pot = make_exp_pointy();
    const std::vector<Particle> init{{-1.0, 0.25}, {0.1, 0.5}, {1.3, 0.25}};
    const auto ours = advance_to(linear_system(init, pot), 1.5);
    std::vector<double> x{-1.0, 0.1, 1.3};
    const std::vector<double> m{0.25, 0.5, 0.25};
    auto f = [&](const std::vector<double> &y) {
        std::vector<double> v(3, 0.0);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                if (i != j) v[i] += m[j] * pot.derivative(y[i] - y[j]);
        return v;
    };
    const double h = 1e-4;
    for (int k = 0; k < 15000; ++k) {
        auto k1 = f(x), y = x;
        for (int i = 0; i < 3; ++i) y[i] = x[i] + 0.5 * h * k1[i];
        auto k2 = f(y);
        for (int i = 0; i < 3; ++i) y[i] = x[i] + 0.5 * h * k2[i];
        auto k3 = f(y);
        for (int i = 0; i < 3; ++i) y[i] = x[i] + h * k3[i];
        auto k4 = f(y);
        for (int i = 0; i < 3; ++i) x[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    ASSERT_EQ(ours.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(ours.particles()[i].x, x[i], 1e-10);
    const auto fin = advance_to(ours, 60.0);
    EXPECT_EQ(fin.size(), 1u);
}

TEST(AdvanceTo, NonlinearPairMergesSymmetrically) {
    const auto law = make_atan_law_50();
    const ParticleSystem ps({{-0.5, 0.5}, {0.5, 0.5}}, make_builtin_potential("abs_scaled", 1.0 / 250.0), law,
                            VelocityMode::nonlinear);
    // u jumps from c/2 to 0 across each particle, so the speed is the mean of a on [0, c/2].
    const double c = 1.0 / 125.0;
    const double speed = interval_mean(law, 0.0, 0.5 * c);
    TrajectoryLog log;
    const auto end = advance_to(ps, 1.0 / speed, &log);
    ASSERT_EQ(end.size(), 1u);
    EXPECT_NEAR(end.particles()[0].x, 0.0, 1e-12);
    EXPECT_NEAR(log.events.at(0).time, 0.5 / speed, 1e-8);
}

TEST(AdvanceTo, SimultaneousCollisionsMergeTogether) {
    const auto end = advance_to(linear_system({{-2.0, 0.25}, {-1.0, 0.25}, {1.0, 0.25}, {2.0, 0.25}}), 0.6);
    ASSERT_EQ(end.size(), 4u);
    TrajectoryLog log;
    const auto fin = advance_to(linear_system({{-1.0, 0.25}, {-0.999, 0.25}, {0.999, 0.25}, {1.0, 0.25}}), 0.1, &log);
    EXPECT_EQ(fin.size(), 2u);
    ASSERT_EQ(log.count(EventKind::merge), 1u);
    EXPECT_EQ(log.events[0].snapshot.size(), 2u);
}

TEST(ParticleInvariants, MassAndCenterOfMass) {
    std::mt19937_64 rng(33);
    for (const auto &pot : {kAbsHalf, make_exp_pointy()}) {
        for (int t = 0; t < 10; ++t) {
            const auto ps = linear_system(random_particles(rng, 40), pot);
            const double m0 = ps.total_mass(), c0 = ps.center_of_mass();
            TrajectoryLog log;
            auto cur = ps;
            for (double s = 0.5; s <= 4.0; s += 0.5) {
                cur = advance_to(cur, s, &log);
                EXPECT_NEAR(cur.total_mass(), m0, 1e-14);
                EXPECT_NEAR(cur.center_of_mass(), c0, 1e-10);
            }
            for (const auto &e : log.events) EXPECT_NEAR(e.snapshot.total_mass(), m0, 1e-14);
            for (std::size_t k = 1; k < log.events.size(); ++k) EXPECT_GE(log.events[k].time, log.events[k - 1].time);
            EXPECT_LT(cur.size(), ps.size());
        }
    }
}

TEST(ParticleInvariants, NonlinearMassConservation) {
    std::mt19937_64 rng(34);
    const auto ps = ParticleSystem(random_particles(rng, 30), make_exp_pointy(), make_atan_law_50(), VelocityMode::nonlinear);
    const auto end = advance_to(ps, 3.0);
    EXPECT_NEAR(end.total_mass(), ps.total_mass(), 1e-14);
    EXPECT_LT(end.size(), ps.size());
}

TEST(ParticleInvariants, ContractionWithoutConcavity) {
    std::mt19937_64 rng(35);
    std::normal_distribution<double> jitter(0.0, 0.05);
    for (int t = 0; t < 5; ++t) {
        auto a = random_particles(rng, 20);
        auto b = a;
        for (auto &p : b) p.x += jitter(rng);
        auto pa = linear_system(a), pb = linear_system(b);
        double prev = wasserstein1(pa.measure(), pb.measure());
        for (int k = 1; k <= 40; ++k) {
            pa = advance_to(pa, 0.1 * k);
            pb = advance_to(pb, 0.1 * k);
            const double w = wasserstein1(pa.measure(), pb.measure());
            EXPECT_LE(w, prev + 1e-9);
            prev = w;
        }
    }
}

TEST(ParticleInvariants, ExpansionBoundedForConcavePotential) {
    std::mt19937_64 rng(36);
    std::normal_distribution<double> jitter(0.0, 0.05);
    const auto pot = make_exp_pointy();
    for (int t = 0; t < 5; ++t) {
        auto a = random_particles(rng, 20);
        auto b = a;
        for (auto &p : b) p.x += jitter(rng);
        auto pa = linear_system(a, pot), pb = linear_system(b, pot);
        const double w0 = wasserstein1(pa.measure(), pb.measure());
        for (int k = 1; k <= 20; ++k) {
            const double time = 0.1 * k;
            pa = advance_to(pa, time);
            pb = advance_to(pb, time);
            EXPECT_LE(wasserstein1(pa.measure(), pb.measure()), std::exp(2.0 * pot.lambda * time) * w0 * (1.0 + 1e-6));
        }
    }
}

TEST(ParticleInvariants, OneSidedLipschitzVelocities) {
    std::mt19937_64 rng(37);
    for (const auto &pot : {kAbsHalf, make_exp_pointy()}) {
        for (int t = 0; t < 50; ++t) {
            const auto ps = linear_system(random_particles(rng, 15), pot);
            const auto v = linear_velocities(ps);
            const auto x = positions(ps);
            for (std::size_t i = 0; i < x.size(); ++i)
                for (std::size_t j = i + 1; j < x.size(); ++j)
                    EXPECT_LE(v[j] - v[i], pot.lambda * (x[j] - x[i]) * ps.total_mass() + 1e-9);
        }
    }
}

TEST(TrajectoryCsv, Layout) {
    TrajectoryLog log;
    log.record(0.5, EventKind::sample, DiscreteMeasure({{-1.0, 0.5}, {1.0, 0.5}}));
    log.record(4.0, EventKind::merge, DiscreteMeasure::dirac(0.0));
    std::ostringstream os;
    write_trajectory_csv(os, log);
    EXPECT_EQ(os.str(), "time,event,positions...,masses...\n0.5,sample,-1,1,0.5,0.5\n4,merge,0,1\n");
}
