#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lrvm/spectral.hpp"
#include "oracles.hpp"

using namespace lrvm;
constexpr double kPi = std::numbers::pi;

TEST_CASE("symbol: zero, evenness, positivity on a grid") {
    SpectralModel m(KernelParams(1, 0.5), 2000);
    CHECK(m.symbol_phi({0.0}) == doctest::Approx(0.0).epsilon(1e-14));
    RandomStream rng(3);
    for (int i = 0; i < 20; ++i) {
        double th = (2 * rng.uniform() - 1) * kPi;
        CHECK(m.symbol_phi({th}) == m.symbol_phi({-th}));
    }
    int positive = 0;
    const int G = 10000;
    for (int k = 1; k <= G; ++k) {
        double th = kPi * k / G;
        if (m.symbol_phi({th}) > 0) ++positive;
    }
    CHECK(positive == G);
}

TEST_CASE("symbol at pi: odd-terms closed form (d=1, alpha=0.5)") {
    SpectralModel m(KernelParams(1, 0.5));
    double truth = 4.0 * (1.0 - std::pow(2.0, -1.5)) * oracles::zeta(1.5);
    CHECK(m.symbol_phi({kPi}) == doctest::Approx(truth).epsilon(1e-6));
    CHECK(m.char_fn_walk({kPi}, 1.0) == doctest::Approx(std::exp(-truth)).epsilon(1e-5));
}

TEST_CASE("char_fn_walk trivials") {
    SpectralModel m(KernelParams(2, 1.0));
    CHECK(m.char_fn_walk({1.0, -0.5}, 0.0) == 1.0);
    CHECK(m.char_fn_walk({0.0, 0.0}, 7.5) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("symbol tensor grid equals pointwise evaluation") {
    SpectralModel m(KernelParams(2, 1.0), 60);
    std::vector<Eigen::VectorXd> axes(2);
    axes[0] = Eigen::VectorXd::LinSpaced(5, 0.1, 3.0);
    axes[1] = Eigen::VectorXd::LinSpaced(4, 0.05, 2.0);
    Eigen::ArrayXd grid = m.symbol().on_tensor_grid(axes);
    REQUIRE(grid.size() == 20);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j) {
            double direct = m.symbol_phi({axes[0][i], axes[1][j]});
            CHECK(grid[i * 4 + j] == doctest::Approx(direct).epsilon(1e-12));
        }
}

TEST_CASE("Gtilde matches the closed Gamma-function form") {
    struct Case {
        int d;
        double a;
    };
    for (Case c : {Case{1, 0.5}, Case{1, 0.75}, Case{2, 1.0}, Case{3, 1.5}}) {
        SpectralModel m(KernelParams(c.d, c.a), 64);
        CAPTURE(c.d);
        CAPTURE(c.a);
        CHECK(m.Gtilde() == doctest::Approx(oracles::gtilde_closed(c.d, c.a)).epsilon(1e-6));
    }
}

TEST_CASE("alpha=2 diffusion matrix and alpha>2 second moment") {
    SpectralModel m32(KernelParams(3, 2.0));
    CHECK(m32.K_diag() == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-13));
    SpectralModel m14(KernelParams(1, 4.0));
    CHECK(m14.sigma_sq() == doctest::Approx(2.0 * oracles::zeta(3.0)).epsilon(1e-7));
}

TEST_CASE("stable_char branches") {
    SpectralModel ml(KernelParams(1, 0.5));
    CHECK(ml.stable_char({0.0}, 3.0) == 1.0);
    // radial form: depends on ||theta|| only
    SpectralModel m2(KernelParams(2, 1.5), 48);
    double a = m2.stable_char({0.3, 0.4}, 2.0);
    double b = m2.stable_char({0.5, 0.0}, 2.0);
    CHECK(a == doctest::Approx(b).epsilon(1e-14));
    CHECK(ml.stable_char({1.0}, 1.0) ==
          doctest::Approx(std::exp(-ml.Gtilde())).epsilon(1e-12));
}

TEST_CASE("transition table: identity at t=0, normalization, symmetry, bounds") {
    SpectralModel m(KernelParams(1, 0.5), 1000);
    auto t0 = m.transition_table(0.0, 1 << 10, 1 << 9);
    CHECK(t0.origin() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(t0.at(LatticeVec{5})) < 1e-12);

    auto t1 = m.transition_table(1.0, 1 << 12, 1 << 10);
    CHECK(t1.box_mass + t1.residual == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t1.box_mass > 0.9);  // heavy tail keeps a few percent outside
    for (Index x : {1, 7, 100}) {
        CHECK(t1.at(LatticeVec{x}) == doctest::Approx(t1.at(LatticeVec{-x})).epsilon(1e-12));
        CHECK(t1.at(LatticeVec{x}) <= t1.origin() + 1e-15);
    }
    double tot = 0;
    for (Index x = -(1 << 11) + 1; x <= (1 << 11); ++x) tot += t1.at(LatticeVec{x});
    CHECK(tot == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("transition table: Chapman-Kolmogorov self-consistency") {
    SpectralModel m(KernelParams(1, 0.5), 1000);
    const Index M = 1 << 12;
    for (auto [t, s] : {std::pair{1.0, 1.0}, std::pair{1.0, 2.0}}) {
        auto A = m.transition_table(t, M, M / 2);
        auto B = m.transition_table(s, M, M / 2);
        auto C = m.transition_table(t + s, M, M / 2);
        double conv = 0;
        for (Index n = 0; n < M; ++n) conv += A.grid[n] * B.grid[(M - n) % M];
        CHECK(conv == doctest::Approx(C.origin()).epsilon(1e-6));
        CHECK(std::abs(conv - C.origin()) < 1e-10);
    }
}

TEST_CASE("transition table: p_t(0,0) decreasing in t") {
    SpectralModel m(KernelParams(1, 0.5), 2000);
    double prev = 2.0;
    for (double t : {1.0, 2.0, 4.0, 8.0}) {
        double v = m.transition_table(t, 1 << 13, 1 << 12).origin();
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("transition table refuses an overspread walk") {
    SpectralModel m(KernelParams(1, 0.5), 500);
    CHECK_THROWS_WITH_AS(m.transition_table(1e6, 1 << 10, 1 << 9) /* h = t^2 >> M/4 */,
                         doctest::Contains("grid too small"), std::runtime_error);
}

TEST_CASE("stable density: origin closed form vs quadrature and self-similarity") {
    SpectralModel m(KernelParams(1, 0.75));
    StableDensity den(m);
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
        CHECK(den.value(0.0, t) == doctest::Approx(den.origin(t)).epsilon(1e-8));
        double rel = std::abs(den.origin(t) - std::pow(t, -1.0 / 0.75) * den.origin(1.0)) / den.origin(1.0);
        CHECK(rel < 1e-12);
    }
}

TEST_CASE("stable density: Cauchy closed form at alpha=1, d=1") {
    SpectralModel m(KernelParams(1, 1.0));
    StableDensity den(m);
    double a = m.Gtilde();
    for (double u : {0.0, 0.3, 1.0, 4.0}) {
        double truth = a / (kPi * (a * a + u * u));
        CHECK(den.value(u, 1.0) == doctest::Approx(truth).epsilon(1e-8));
    }
}

TEST_CASE("stable density: Gaussian branch closed forms") {
    SpectralModel m(KernelParams(3, 2.5), 32);
    StableDensity den(m);
    double det_sigma = std::pow(m.sigma_sq(), 3);
    for (double t : {0.5, 1.0, 3.0}) {
        double truth = std::pow(2 * kPi * t, -1.5) / std::sqrt(det_sigma);
        CHECK(den.origin(t) == doctest::Approx(truth).epsilon(1e-12));
        CHECK(den.value(0.0, t) == doctest::Approx(truth).epsilon(1e-12));
        // Brownian self-similarity index 2
        CHECK(den.origin(t) == doctest::Approx(std::pow(t, -1.5) * den.origin(1.0)).epsilon(1e-12));
    }
}

TEST_CASE("stable density integrates to one") {
    SpectralModel m1(KernelParams(1, 0.75));
    CHECK(StableDensity(m1).total_mass(1.0) == doctest::Approx(1.0).epsilon(1e-6));
    SpectralModel m2(KernelParams(2, 1.0), 128);
    CHECK(StableDensity(m2).total_mass(1.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("scaling_h branches") {
    CHECK(scaling_h(9.0, 3.0) == doctest::Approx(3.0));
    CHECK(scaling_h(4.0, 2.0) == doctest::Approx(std::sqrt(4.0 * std::log(4.0))));
    CHECK(scaling_h(8.0, 0.5) == doctest::Approx(64.0));
    CHECK_THROWS_AS(scaling_h(0.5, 2.0), std::domain_error);
}

TEST_CASE("scaling_Lambda branch table") {
    auto b = scaling_Lambda(64.0, 1, 0.75);
    CHECK(b.value == doctest::Approx(std::pow(64.0, 5.0 / 6.0)).epsilon(1e-13));
    CHECK(b.fbm);
    CHECK(b.hurst == doctest::Approx(5.0 / 6.0));

    auto c = scaling_Lambda(64.0, 3, 2.0);
    CHECK(c.value == doctest::Approx(std::pow(64.0, 0.75) * std::pow(std::log(64.0), -0.75)).epsilon(1e-13));
    CHECK(c.hurst == doctest::Approx(0.75));

    auto w = scaling_Lambda(64.0, 5, 1.0);
    CHECK(w.value == doctest::Approx(8.0));
    CHECK_FALSE(w.fbm);

    CHECK_THROWS_WITH_AS(scaling_Lambda(64.0, 1, 1.5), doctest::Contains("recurrent"),
                         std::domain_error);
}

TEST_CASE("Lambda branch partition is exhaustive and disjoint on transient pairs") {
    // one branch fires for every transient (d, alpha) on a dense grid
    for (int d = 1; d <= 6; ++d) {
        for (double a = 0.05; a < 4.0; a += 0.05) {
            if (!is_transient(d, a)) {
                CHECK_THROWS(scaling_Lambda(16.0, d, a));
                continue;
            }
            auto b = scaling_Lambda(16.0, d, a);
            CHECK(b.value > 0);
            bool fbm_expected =
                (d <= 3 && a > 0.5 * d && a < std::min(2.0, double(d))) || (d == 3 && a >= 2.0);
            CHECK(b.fbm == fbm_expected);
            if (b.fbm && d == 3 && a >= 2) CHECK(b.hurst == doctest::Approx(0.75));
            if (b.fbm && a < 2) CHECK(b.hurst == doctest::Approx(1.5 - d / (2 * a)));
        }
    }
}

TEST_CASE("transience classifier agrees with the h-integrability rule") {
    for (int d = 1; d <= 5; ++d) {
        for (double a = 0.1; a < 3.5; a += 0.1) {
            // int_1^inf h_alpha(t)^{-d} dt < inf per branch:
            bool integrable;
            if (a > 2) integrable = d > 2;                       // t^{-d/2}
            else if (a == 2) integrable = d > 2;                 // (t log t)^{-d/2}
            else integrable = double(d) / a > 1;                 // t^{-d/alpha}
            CHECK(is_transient(d, a) == integrable);
        }
    }
}

TEST_CASE("local CLT: error decreases and origin scale converges (d=1, alpha=0.75)") {
    SpectralModel m(KernelParams(1, 0.75), 4000);
    auto r8 = lclt_error(8.0, 1.0, m);
    auto r32 = lclt_error(32.0, 1.0, m);
    CAPTURE(r8.sup_error);
    CAPTURE(r32.sup_error);
    CHECK(r32.sup_error < r8.sup_error);
    double gap8 = std::abs(r8.scaled_p_origin - r8.f_origin);
    double gap32 = std::abs(r32.scaled_p_origin - r32.f_origin);
    CHECK(gap32 < gap8);
}
