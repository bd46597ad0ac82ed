#include <gtest/gtest.h>

#include "support.hpp"

using namespace isoperiod;
using namespace testing_support;

TEST(Hamiltonian, HarmonicOscillatorValues) {
    auto ho = SystemSpec::harmonic_oscillator(1, 1, 2);
    EXPECT_DOUBLE_EQ(eval_hamiltonian(ho, pp({1, 0}, {0, 0})), 0.5);
    EXPECT_DOUBLE_EQ(eval_hamiltonian(ho, pp({0, 0}, {0, 0})), 0.0);
}

TEST(Hamiltonian, LotkaVolterraAtLogPopulations) {
    auto lv = predator_prey();
    double H = eval_hamiltonian(lv, pp({0, 0}, {std::log(1.2), std::log(1.0)}));
    // eps.Q - sum x with Q = 0 and x = (1.2, 1.0)
    EXPECT_NEAR(H, -(1.2 + 1.0), 1e-15);
}

TEST(Hamiltonian, KeplerCollisionIsOutsideDomain) {
    auto k = SystemSpec::kepler(1, 1, 1, 2);
    EXPECT_THROW(eval_hamiltonian(k, pp({0, 0}, {1, 0})), DomainError);
}

TEST(Gradient, HarmonicOscillator) {
    auto g = eval_gradient(SystemSpec::harmonic_oscillator(1, 1, 2), pp({1, 0}, {0, 2}));
    EXPECT_EQ(g.dq, vec({1, 0}));
    EXPECT_EQ(g.dp, vec({0, 2}));
}

TEST(Gradient, KeplerUnitCircle) {
    auto sys = SystemSpec::kepler(1, 1, 1, 2);
    auto x = pp({1, 0}, {0, 1});
    auto g = eval_gradient(sys, x);
    EXPECT_NEAR((g.dq - vec({1, 0})).norm(), 0.0, 1e-15);
    EXPECT_NEAR((g.dp - vec({0, 1})).norm(), 0.0, 1e-15);
    auto fd = fd_gradient(sys, x);
    EXPECT_NEAR((g.dq - fd.dq).norm(), 0.0, 1e-8);
    EXPECT_NEAR((g.dp - fd.dp).norm(), 0.0, 1e-8);
}

TEST(Gradient, LotkaVolterraMatchesFiniteDifferences) {
    auto sys = predator_prey();
    auto x = pp({0, 0}, {std::log(1.2), 0.0});
    auto g = eval_gradient(sys, x);
    auto fd = fd_gradient(sys, x);
    EXPECT_LT((g.dq - fd.dq).lpNorm<Eigen::Infinity>(), 1e-6);
    EXPECT_LT((g.dp - fd.dp).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(VectorField, HarmonicRestoringForce) {
    auto v = vector_field(SystemSpec::harmonic_oscillator(1, 1, 2), pp({1, 0}, {0, 0}));
    EXPECT_EQ(v.q, vec({0, 0}));
    EXPECT_EQ(v.p, vec({-1, 0}));
}

TEST(VectorField, LotkaVolterraAtUnitPopulations) {
    auto sys = predator_prey();
    auto x = pp({0, 0}, {0, 0});
    auto v = vector_field(sys, x);
    EXPECT_NEAR((v.q - vec({1, 1})).norm(), 0.0, 1e-15);
    // Volterra form: P' = +dH/dQ, checked against finite differences of H
    auto fd = fd_gradient(sys, x);
    EXPECT_LT((v.p - fd.dq).lpNorm<Eigen::Infinity>(), 1e-9);
    EXPECT_LT((v.q + fd.dp).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(VectorField, VolterraFlowReproducesPopulationOde) {
    auto sys = predator_prey();
    const auto& lv = *sys.as<LotkaVolterra>();
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
        auto x = pp({rng.uniform(-2, 2), rng.uniform(-2, 2)}, {rng.uniform(-1, 1), rng.uniform(-1, 1)});
        auto v = vector_field(sys, x);
        Vec pop = lv_extract(x, sys);
        // chain rule: x_j' = x_j (P_j' + (A Q')_j / 2)
        Vec dx = pop.cwiseProduct(v.p + 0.5 * (lv.A * v.q));
        EXPECT_LT((dx - lv_rhs(lv, pop)).lpNorm<Eigen::Infinity>(), 1e-12 * (1 + pop.squaredNorm()));
    }
}

TEST(Equilibrium, Examples) {
    Mat A(2, 2);
    A << 0, -1, 1, 0;
    EXPECT_NEAR((lv_equilibrium(vec({1, -1}), A).q - vec({1, 1})).norm(), 0.0, 1e-15);
    EXPECT_NEAR((lv_equilibrium(vec({2, -1}), A).q - vec({1, 2})).norm(), 0.0, 1e-15);
    EXPECT_THROW(lv_equilibrium(vec({1, 1}), Mat::Zero(2, 2)), NoUniqueEquilibrium);
}

TEST(Embedding, Examples) {
    auto sys = predator_prey();
    auto s = lv_embed(vec({1, 1}), sys);
    EXPECT_EQ(s.Q, vec({0, 0}));
    EXPECT_EQ(s.P, vec({0, 0}));
    const double e = std::numbers::e;
    auto s2 = lv_embed(vec({e, e * e}), sys);
    EXPECT_NEAR(s2.P[0], 1.0, 1e-15);
    EXPECT_NEAR(s2.P[1], 2.0, 1e-15);
    EXPECT_THROW(lv_embed(vec({1, 0}), sys), DomainError);
}

TEST(Embedding, RoundTrip) {
    auto sys = predator_prey();
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        Vec x0 = vec({rng.uniform(0.01, 10), rng.uniform(0.01, 10)});
        Vec back = lv_extract(lv_embed(x0, sys), sys);
        EXPECT_LT(((back - x0).array() / x0.array()).abs().maxCoeff(), 1e-14);
    }
}

TEST(Extraction, Examples) {
    auto sys = predator_prey();
    EXPECT_EQ(lv_extract(vec({0, 0}), vec({0, 0}), sys), vec({1, 1}));
    // (A Q)/2 = (0, 1) for Q = (2, 0)
    Vec x = lv_extract(vec({2, 0}), vec({0, 0}), sys);
    EXPECT_NEAR(x[0], 1.0, 1e-15);
    EXPECT_NEAR(x[1], std::numbers::e, 1e-15);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        Vec y = lv_extract(vec({rng.uniform(-50, 50), rng.uniform(-50, 50)}),
                           vec({rng.uniform(-20, 20), rng.uniform(-20, 20)}), sys);
        EXPECT_TRUE((y.array() > 0).all());
    }
}

TEST(DriftRemoval, LinearDriftCancelsExactly) {
    Mat A(2, 2);
    A << 0, -1, 1, 0;
    Vec q = vec({1, 1});
    Trajectory tr;
    for (int i = 0; i <= 100; ++i) {
        double t = 0.1 * i;
        tr.times.push_back(t);
        tr.states.emplace_back(q * t, -(0.5 * (A * q)) * t);
    }
    auto out = lv_drift_removal(tr, q, A);
    for (const auto& s : out.states) EXPECT_LT(norm(s), 1e-14);
}

TEST(DriftRemoval, EquilibriumOrbit) {
    auto sys = predator_prey();
    const auto& lv = *sys.as<LotkaVolterra>();
    Vec q = lv_equilibrium(sys).q;
    auto tr = integrate(sys, lv_embed(q, sys).point(), midpoint(1e-3), 10.0, {}, 100);
    auto out = lv_drift_removal(tr, q, lv.A);
    const Vec P0 = out.states.front().p;
    for (const auto& s : out.states) {
        EXPECT_LT(s.q.norm(), 1e-10);
        EXPECT_LT((s.p - P0).norm(), 1e-10);
    }
}

TEST(DriftRemoval, GenericOrbitClosesAtDetectedPeriod) {
    auto sys = predator_prey();
    const auto& lv = *sys.as<LotkaVolterra>();
    Vec x0 = vec({1.2, 1.0});
    auto res = detect_period_lv(sys, x0, midpoint(1e-3), 50.0, 1e-6 * (x0.norm() + 1));
    ASSERT_TRUE(res.x_space.T);
    const double T = *res.x_space.T;
    auto start = lv_embed(x0, sys).point();
    auto end = flow_for(sys, start, midpoint(1e-3), T);
    Vec Qt0 = lv_remove_drift(start, 0.0, res.equilibrium, lv.A).q;
    Vec QtT = lv_remove_drift(end, T, res.equilibrium, lv.A).q;
    EXPECT_LT((QtT - Qt0).norm(), 1e-6);
}

TEST(Sampling, HarmonicPointsOnSurface) {
    auto sys = SystemSpec::harmonic_oscillator(1, 1, 1);
    auto pts = sample_energy_surface(sys, 0.5, 4, 0);
    ASSERT_EQ(pts.size(), 4u);
    for (const auto& x : pts) EXPECT_NEAR(eval_hamiltonian(sys, x), 0.5, 1e-10);
}

TEST(Sampling, KeplerBoundStatesStayInsideApocentreBound) {
    auto sys = SystemSpec::kepler(1, 1, 1);
    auto pts = sample_energy_surface(sys, -0.5, 8, 1);
    ASSERT_EQ(pts.size(), 8u);
    // a = 1 from E = -GMm/(2a); bound orbits have r <= 2a
    for (const auto& x : pts) {
        EXPECT_LT(x.q.norm(), 2.0);
        EXPECT_NEAR(eval_hamiltonian(sys, x), -0.5, 1e-10);
    }
}

TEST(Sampling, CriticalLevelIsDegenerate) {
    EXPECT_THROW(sample_energy_surface(SystemSpec::harmonic_oscillator(1, 1, 1), 0.0, 1, 0),
                 DegenerateSurface);
    EXPECT_THROW(sample_energy_surface(SystemSpec::harmonic_oscillator(1, 1, 1), -1.0, 1, 0),
                 SurfaceUnreachable);
    EXPECT_THROW(sample_energy_surface(SystemSpec::kepler(1, 1, 1), 0.5, 1, 0), SurfaceUnreachable);
}

TEST(Sampling, ReproducibleForFixedSeed) {
    auto sys = SystemSpec::anisotropic_oscillator(1, std::numbers::sqrt2);
    auto a = sample_energy_surface(sys, 1.0, 16, 42);
    auto b = sample_energy_surface(sys, 1.0, 16, 42);
    auto c = sample_energy_surface(sys, 1.0, 16, 43);
    ASSERT_EQ(a.size(), b.size());
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].flat(), b[i].flat());
        differs |= a[i].flat() != c[i].flat();
        EXPECT_NEAR(eval_hamiltonian(sys, a[i]), 1.0, 1e-10);
    }
    EXPECT_TRUE(differs);
}

TEST(Construction, SkewSymmetryGate) {
    Mat A(2, 2);
    A << 0, -1, 0.5, 0;
    EXPECT_THROW(SystemSpec::lotka_volterra(vec({1, -1}), A), ConfigError);
    EXPECT_THROW(SystemSpec::lotka_volterra(vec({1, -1, 0}), Mat::Zero(2, 2)), ConfigError);
    EXPECT_THROW(SystemSpec::harmonic_oscillator(0, 1, 1), ConfigError);
    EXPECT_THROW(SystemSpec::kepler(1, 1, 1, 4), ConfigError);
    EXPECT_THROW(SystemSpec::potential_1d(Polynomial::parse("x^2"), 1, 1, -1), ConfigError);
}

TEST(Construction, PhasePointRejectsBadShapes) {
    EXPECT_THROW(PhasePoint(vec({1, 2}), vec({1})), DomainError);
    EXPECT_THROW(PhasePoint(vec({NAN}), vec({1})), DomainError);
}

TEST(Polynomial, MiniLanguage) {
    auto V = Polynomial::parse("0.5*x^2 - 2x + 3 + x^4");
    EXPECT_DOUBLE_EQ(V(2.0), 0.5 * 4 - 4 + 3 + 16);
    EXPECT_DOUBLE_EQ(V.derivative()(1.0), 1.0 - 2.0 + 4.0);
    EXPECT_THROW(Polynomial::parse("sin(x)"), ConfigError);
    EXPECT_THROW(Polynomial::parse("x^"), ConfigError);
}

// 100 seeded admissible points per system, central differences at 1e-5
TEST(Property, GradientMatchesFiniteDifferences) {
    Mat A3(3, 3);
    A3 << 0, -1, 0.5, 1, 0, -0.3, -0.5, 0.3, 0;
    std::vector<SystemSpec> systems{
        SystemSpec::harmonic_oscillator(1.3, 0.7, 3),
        SystemSpec::kepler(1, 1, 1, 3),
        SystemSpec::kepler(1, 2, 0.5, 2),
        predator_prey(),
        SystemSpec::lotka_volterra(vec({1, -1, 0.5}), A3),
        SystemSpec::potential_1d(Polynomial::parse("x^4 - x^2 + 0.1x"), 1, -2, 2),
        SystemSpec::anisotropic_oscillator(1, std::numbers::sqrt2),
    };
    for (const auto& sys : systems) {
        Rng rng(2024);
        const int n = sys.dof();
        for (int k = 0; k < 100; ++k) {
            Vec q(n), p(n);
            do {
                for (int i = 0; i < n; ++i) {
                    q[i] = rng.uniform(-1.5, 1.5);
                    p[i] = rng.uniform(-1.5, 1.5);
                }
            } while (sys.as<Kepler>() && q.norm() < 0.3);
            PhasePoint x(q, p);
            auto g = eval_gradient(sys, x);
            auto fd = fd_gradient(sys, x);
            Vec a(2 * n), b(2 * n);
            a << g.dq, g.dp;
            b << fd.dq, fd.dp;
            EXPECT_LE((a - b).norm(), 1e-6 * std::max(1.0, a.norm())) << sys.kind_name();
        }
    }
}

// x(t) extracted along the (Q, P) flow obeys x' = x (eps + A x)
TEST(Property, ExtractedPopulationsSatisfyOde) {
    auto sys = predator_prey();
    const auto& lv = *sys.as<LotkaVolterra>();
    double worst = 0.0;
    auto obs = [&](double, const PhasePoint& s) {
        auto v = vector_field(sys, s);
        Vec x = lv_extract(s, sys);
        Vec dx = x.cwiseProduct(v.p + 0.5 * (lv.A * v.q));
        worst = std::max(worst, (dx - lv_rhs(lv, x)).lpNorm<Eigen::Infinity>());
    };
    integrate(sys, lv_embed(vec({1.2, 1.0}), sys).point(), midpoint(1e-3), 10.0, obs, 1000);
    EXPECT_LT(worst, 1e-8);
}

TEST(Property, SkewSystemConservesEnergyAlongFlow) {
    auto sys = predator_prey();
    auto tr = integrate(sys, lv_embed(vec({1.5, 0.7}), sys).point(), midpoint(5e-4), 10.0, {}, 10);
    EXPECT_LT(tr.max_drift, 1e-8);
    // dH/dt = grad H . X = 0 identically
    for (const auto& s : tr.states) {
        auto g = eval_gradient(sys, s);
        auto v = vector_field(sys, s);
        EXPECT_NEAR(g.dq.dot(v.q) + g.dp.dot(v.p), 0.0, 1e-13);
    }
}
