#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "support.hpp"

using namespace isoperiod;
using namespace testing_support;

namespace {

std::vector<double> ho_levels(double hbar, double omega, double hi) {
    std::vector<double> out;
    for (int k = 0; hbar * omega * (2 * k + 1) < hi; ++k) out.push_back(hbar * omega * (2 * k + 1));
    return out;
}

SpectralWindow make_window(std::vector<double> eigs, double hbar, double E = 1.0) {
    SpectralWindow w;
    w.hbar = hbar;
    w.E = E;
    w.c = 1.0;
    w.delta = 0.25;
    w.eigenvalues = std::move(eigs);
    return w;
}

}  // namespace

TEST(Discretize, EmptyBoxSpectrum) {
    const double L = std::numbers::pi / 2;
    auto T = discretize_1d(Polynomial::parse("0"), 1.0, Grid1D(L, 2000));
    auto eigs = eig_tridiagonal(T, 0.0, 30.0);
    ASSERT_GE(eigs.size(), 5u);
    // hbar^2 (pi j / 2L)^2 = j^2
    for (int j = 1; j <= 5; ++j) EXPECT_NEAR(eigs[j - 1], double(j * j), 1e-5 * j * j * j * j);
}

TEST(Discretize, HarmonicGroundState) {
    auto T = discretize_1d(Polynomial::parse("x^2"), 0.1, Grid1D(3.0, 2000));
    auto eigs = eig_tridiagonal(T, -1.0, 0.15);
    ASSERT_EQ(eigs.size(), 1u);
    EXPECT_NEAR(eigs[0], 0.1, 1e-4);
}

TEST(Discretize, MinimalGrid) {
    auto T = discretize_1d(Polynomial::parse("x^2"), 0.5, Grid1D(2.0, 16));
    EXPECT_EQ(T.d.size(), 16u);
    EXPECT_EQ(T.e.size(), 15u);
    EXPECT_THROW(Grid1D(2.0, 15), ConfigError);
    EXPECT_THROW(discretize_1d(Polynomial::parse("x^2"), 0.0, Grid1D(2.0, 16)), ConfigError);
}

TEST(Eigen, DiagonalMatrix) {
    SymTridiagonal T{{3, 1, 2}, {0, 0}};
    auto eigs = eig_tridiagonal(T);
    ASSERT_EQ(eigs.size(), 3u);
    EXPECT_NEAR(eigs[0], 1, 1e-12);
    EXPECT_NEAR(eigs[1], 2, 1e-12);
    EXPECT_NEAR(eigs[2], 3, 1e-12);
}

TEST(Eigen, TwoByTwo) {
    const double a = 1.5, b = -0.7;
    SymTridiagonal T{{a, a}, {b}};
    auto eigs = eig_tridiagonal(T);
    ASSERT_EQ(eigs.size(), 2u);
    EXPECT_NEAR(eigs[0], a - std::abs(b), 1e-12);
    EXPECT_NEAR(eigs[1], a + std::abs(b), 1e-12);
}

TEST(Eigen, HarmonicLadder) {
    auto T = discretize_1d(Polynomial::parse("x^2"), 0.1, Grid1D(3.0, 2000));
    auto eigs = eig_tridiagonal(T, -1.0, 2.05);
    ASSERT_EQ(eigs.size(), 10u);
    double worst = 0;
    for (int k = 0; k < 10; ++k) worst = std::max(worst, std::abs(eigs[k] - 0.1 * (2 * k + 1)));
    EXPECT_LT(worst, 5e-4);
}

TEST(Eigen, ParallelMatchesSerial) {
    auto T = discretize_1d(Polynomial::parse("x^4 - x^2"), 0.05, Grid1D(2.5, 3000));
    auto a = eig_tridiagonal(T, -1.0, 1.0, 1);
    auto b = eig_tridiagonal(T, -1.0, 1.0, 4);
    EXPECT_EQ(a, b);
}

TEST(Window, HarmonicExample) {
    const double hbar = 0.01;
    auto w = window(ho_levels(hbar, 1.0, 3.0), 1.0, 1.0, 0.25, hbar);
    EXPECT_NEAR(w.half_width(), std::pow(0.01, 0.75), 1e-15);
    EXPECT_NEAR(w.half_width(), 0.0316, 1e-4);
    ASSERT_EQ(w.eigenvalues.size(), 4u);
    const double expect[] = {0.97, 0.99, 1.01, 1.03};
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(w.eigenvalues[i], expect[i], 1e-12);
}

TEST(Window, FromDiscretizedOperator) {
    auto w = window_1d(Polynomial::parse("x^2"), 0.01, 1.0, 1.0, 0.25);
    ASSERT_EQ(w.eigenvalues.size(), 4u);
    const double expect[] = {0.97, 0.99, 1.01, 1.03};
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(w.eigenvalues[i], expect[i], 1e-3);
}

TEST(Window, Contract) {
    auto eigs = ho_levels(0.01, 1.0, 3.0);
    EXPECT_TRUE(window(eigs, 1.0, 1e-12, 0.25, 0.01).empty());
    EXPECT_THROW(window(eigs, 1.0, 1.0, 0.5, 0.01), ConfigError);
    EXPECT_THROW(window(eigs, 1.0, 1.0, 0.0, 0.01), ConfigError);
    EXPECT_THROW(window(eigs, 1.0, 0.0, 0.25, 0.01), ConfigError);
    auto w = window(eigs, 1.0, 1.0, 0.45, 0.01);
    for (double e : w.eigenvalues) EXPECT_LT(std::abs(e - 1.0), w.half_width());
}

TEST(TensorSum, Enumeration) {
    auto s = tensor_sum_spectrum({1, 2}, {10, 20}, 50, 50);
    EXPECT_EQ(s, (std::vector<double>{11, 12, 21, 22}));
}

TEST(TensorSum, IsotropicDegeneracy) {
    const double hbar = 0.05;
    auto lv = ho_levels(hbar, 1.0, 3.0);
    auto s = tensor_sum_spectrum(lv, lv, 1.0, 1.0);
    // level hbar (2 + 2n) is (n+1)-fold
    std::map<long, int> mult;
    for (double e : s) ++mult[std::lround(e / hbar)];
    for (const auto& [k, m] : mult) EXPECT_EQ(m, int(k / 2)) << "level " << k;
}

TEST(TensorSum, AnisotropicMatchesClosedForm) {
    const double hbar = 0.05, E = 2.0;
    SpectrumOptions opt;
    auto sx = spectrum_1d(Polynomial::parse("x^2"), hbar, -1, E + 0.3, 1.0, opt);
    auto sy = spectrum_1d(Polynomial::parse("2x^2"), hbar, -1, E + 0.3, 1.0, opt);
    auto s = tensor_sum_spectrum(sx.eigenvalues, sy.eigenvalues, E, 0.3);
    std::vector<double> exact;
    for (int m = 0; m < 60; ++m)
        for (int n = 0; n < 60; ++n) {
            double e = hbar * (2 * m + 1) + hbar * std::numbers::sqrt2 * (2 * n + 1);
            if (std::abs(e - E) <= 0.3) exact.push_back(e);
        }
    std::sort(exact.begin(), exact.end());
    ASSERT_EQ(s.size(), exact.size());
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s[i], exact[i], 2e-3);
}

TEST(DifferenceSpectrum, WindowExample) {
    auto d = difference_spectrum(make_window({0.97, 0.99, 1.01, 1.03}, 0.01));
    ASSERT_EQ(d.size(), 12u);
    std::map<long, int> mult;
    for (double x : d) ++mult[std::lround(x)];
    EXPECT_EQ(mult, (std::map<long, int>{{-6, 1}, {-4, 2}, {-2, 3}, {2, 3}, {4, 2}, {6, 1}}));
    for (double x : d) EXPECT_NEAR(x, double(std::lround(x)), 1e-9);
}

TEST(DifferenceSpectrum, SingletonIsEmpty) {
    EXPECT_TRUE(difference_spectrum(make_window({1.0}, 0.01)).empty());
    EXPECT_TRUE(difference_spectrum(make_window({}, 0.01)).empty());
}

TEST(ClusterVerdict, HarmonicLattice) {
    auto rep = diffspec_1d(Polynomial::parse("x^2"), {0.1, 0.05, 0.02}, 1.0, 1.0, 0.25);
    EXPECT_EQ(rep.verdict, ClusterVerdict::lattice);
    ASSERT_TRUE(rep.fitted_spacing);
    ASSERT_TRUE(rep.oracle_T);
    EXPECT_NEAR(*rep.oracle_T, std::numbers::pi, 1e-9);
    EXPECT_NEAR(*rep.fitted_spacing, 2.0, 0.02 * 2.0);
    EXPECT_NEAR(*rep.T_hat, std::numbers::pi, 0.02 * std::numbers::pi);
}

TEST(ClusterVerdict, AnisotropicDense) {
    ClusterOptions copt;
    copt.range = 10.0;
    auto rep = diffspec_separable(Polynomial::parse("x^2"), Polynomial::parse("2x^2"), {0.05, 0.02, 0.01}, 5.0,
                                  1.0, 0.45, copt);
    EXPECT_EQ(rep.verdict, ClusterVerdict::dense);
    EXPECT_GE(rep.per_hbar.back().fill_fraction, 0.9);
    // fill never drops as hbar shrinks
    for (std::size_t i = 1; i < rep.per_hbar.size(); ++i)
        EXPECT_GE(rep.per_hbar[i].fill_fraction, rep.per_hbar[i - 1].fill_fraction);
}

TEST(ClusterVerdict, SyntheticLattice) {
    const double T = 7.0, E = 1.0;
    std::vector<SpectralWindow> wins;
    for (double hbar : {0.1, 0.05, 0.02}) {
        std::vector<double> eigs;
        const double hw = std::pow(hbar, 0.75);
        for (int k = -200; k <= 200; ++k) {
            double e = E + hbar * (kTwoPi / T) * k;
            if (std::abs(e - E) < hw) eigs.push_back(e);
        }
        wins.push_back(make_window(eigs, hbar, E));
    }
    auto rep = cluster_verdict(wins);
    ASSERT_EQ(rep.verdict, ClusterVerdict::lattice);
    EXPECT_NEAR(*rep.T_hat, T, 0.02 * T);
}

TEST(ClusterVerdict, ScheduleContract) {
    std::vector<SpectralWindow> two{make_window({1}, 0.1), make_window({1}, 0.05)};
    EXPECT_THROW(cluster_verdict(two), ConfigError);
    std::vector<SpectralWindow> up{make_window({1}, 0.05), make_window({1}, 0.1), make_window({1}, 0.01)};
    EXPECT_THROW(cluster_verdict(up), ConfigError);
}

TEST(BohrSommerfeld, HarmonicIsExact) {
    SpectrumOptions opt;
    opt.grid.k_delta = 0.02;
    const double hbar = 0.05;
    auto V = Polynomial::parse("x^2");
    // half-width 0.05^0.75 ~ 0.106 keeps 0.95 and 1.05
    auto w = window_1d(V, hbar, 1.0, 1.0, 0.25, opt);
    ASSERT_EQ(w.eigenvalues.size(), 2u);
    auto bs = bohr_sommerfeld_residuals(V, 1.0, hbar, w);
    EXPECT_LT(bs.max_abs_residual, 1e-3);
    // S = pi E here, so S(E_k) / (2 pi hbar) - 1/2 = k exactly for E_k = (2k+1) hbar
    for (const auto& l : bs.levels) EXPECT_NEAR(l.S, std::numbers::pi * l.E, 1e-9);
}

TEST(BohrSommerfeld, QuarticWell) {
    const double hbar = 0.02;
    auto V = Polynomial::parse("x^4");
    auto w = window_1d(V, hbar, 1.0, 1.0, 0.45);
    ASSERT_GE(w.eigenvalues.size(), 2u);
    auto bs = bohr_sommerfeld_residuals(V, 1.0, hbar, w);
    EXPECT_LE(bs.max_abs_residual, 0.05);
    EXPECT_LE(bs.max_gap_deviation, 0.02);
    EXPECT_EQ(bs.gaps.size(), w.eigenvalues.size() - 1);
}

TEST(BohrSommerfeld, EmptyWindow) {
    auto bs = bohr_sommerfeld_residuals(Polynomial::parse("x^2"), 1.0, 0.1, make_window({}, 0.1));
    EXPECT_TRUE(bs.levels.empty());
    EXPECT_TRUE(bs.gaps.empty());
}

// eigenvalue counts on random intervals agree with a dense solver
TEST(Property, SturmCountIsExact) {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 5 + int(rng.uniform() * 60);
        SymTridiagonal T;
        Mat M = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            T.d.push_back(rng.uniform(-3, 3));
            M(i, i) = T.d.back();
            if (i + 1 < n) {
                T.e.push_back(rng.uniform(-1, 1));
                M(i, i + 1) = M(i + 1, i) = T.e.back();
            }
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(M);
        const Vec ev = es.eigenvalues();
        auto ours = eig_tridiagonal(T);
        ASSERT_EQ(ours.size(), std::size_t(n));
        for (int i = 0; i < n; ++i) EXPECT_NEAR(ours[i], ev[i], 1e-10);
        for (int k = 0; k < 10; ++k) {
            double a = rng.uniform(-4, 4), b = a + rng.uniform(0, 3);
            long dense = (ev.array() >= a && ev.array() < b).count();
            // probe points within 1e-9 of an eigenvalue would be ambiguous
            if (((ev.array() - a).abs() < 1e-9).any() || ((ev.array() - b).abs() < 1e-9).any()) continue;
            EXPECT_EQ(long(sturm_count(T, b) - sturm_count(T, a)), dense);
            EXPECT_EQ(long(eig_tridiagonal(T, a, b).size()), dense);
        }
    }
}

TEST(Property, DiscretizationErrorIsSecondOrder) {
    auto V = Polynomial::parse("x^2");
    const double hbar = 0.1, L = 3.0;
    double err[2];
    int N = 200;
    for (double& e : err) {
        auto eigs = eig_tridiagonal(discretize_1d(V, hbar, Grid1D(L, N)), -1.0, 0.55);
        ASSERT_EQ(eigs.size(), 3u);
        e = std::abs(eigs[2] - 0.5);
        N = 2 * N + 1;  // halves dx = 2L / (N + 1)
    }
    EXPECT_GE(err[0] / err[1], 3.5);
    EXPECT_LE(err[0] / err[1], 4.5);
}

TEST(Property, DifferenceSpectrumSymmetryAndCardinality) {
    Rng rng(23);
    for (int n : {0, 1, 2, 5, 17}) {
        std::vector<double> eigs;
        for (int i = 0; i < n; ++i) eigs.push_back(1.0 + 0.03 * rng.uniform(-1, 1));
        std::sort(eigs.begin(), eigs.end());
        auto d = difference_spectrum(make_window(eigs, 0.01));
        ASSERT_EQ(d.size(), std::size_t(n * (n - 1)));
        auto neg = d;
        for (double& x : neg) x = -x;
        std::sort(neg.begin(), neg.end());
        EXPECT_EQ(neg, d);
    }
}

TEST(Property, LatticeSpacingAtEveryHbar) {
    auto V = Polynomial::parse("x^2");
    const double s = 2 * std::numbers::pi / period_oracle_1d(V, 1.0, 1.0);
    for (double hbar : {0.1, 0.05, 0.02}) {
        auto d = difference_spectrum(window_1d(V, hbar, 1.0, 1.0, 0.25));
        auto it = std::upper_bound(d.begin(), d.end(), 0.5 * s);
        ASSERT_NE(it, d.end());
        EXPECT_NEAR(*it, s, 0.02 * s) << "hbar = " << hbar;
    }
}

TEST(Property, GridMeetsConfinementMargin) {
    auto V = Polynomial::parse("x^4");
    auto g = choose_grid(V, 0.02, 1.1, 0.5);
    EXPECT_TRUE(g.warnings.empty());
    EXPECT_GE(V(g.grid.L), 1.6);
    EXPECT_GE(V(-g.grid.L), 1.6);
    GridOptions tight;
    tight.L = 1.0;
    EXPECT_FALSE(choose_grid(V, 0.02, 1.1, 0.5, tight).warnings.empty());
}
