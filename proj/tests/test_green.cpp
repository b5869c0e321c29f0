#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lrvm/detail/quadrature.hpp"
#include "lrvm/green.hpp"
#include "oracles.hpp"

using namespace lrvm;

namespace {
const GreenModel& model_1_05() {
    static GreenModel m{SpectralModel(KernelParams(1, 0.5))};
    return m;
}
}  // namespace

TEST_CASE("construction refuses recurrent parameters") {
    CHECK_THROWS_WITH_AS(GreenModel(SpectralModel(KernelParams(1, 1.5), 64)),
                         doctest::Contains("recurrent"), std::domain_error);
    CHECK_THROWS_AS(GreenModel(SpectralModel(KernelParams(2, 2.0), 64)), std::domain_error);
}

TEST_CASE("frequency rule integrates the constant exactly") {
    // int 1 over [-pi,pi]^d / (2pi)^d = 1; exercises weights and the
    // geometric closure of the innermost cube
    const auto& m = model_1_05();
    CHECK(m.p00(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    GreenModel m3(SpectralModel(KernelParams(3, 1.5), 40));
    CHECK(m3.p00(0.0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("p00 cross-checks the FFT transition table") {
    const auto& m = model_1_05();
    const double M = 1 << 13;
    // subtract the leading wrapped-image mass ~ s * sum_k w(Mk) from the
    // torus table before comparing against the infinite-lattice value
    double imgw = 2.0 * std::pow(M, -1.5) * oracles::zeta(1.5);
    for (double s : {1.0, 4.0}) {
        double fft = m.spectral().transition_table(s, 1 << 13, 16).origin() - s * imgw;
        CHECK(m.p00(s) == doctest::Approx(fft).epsilon(5e-3));
    }
}

TEST_CASE("green function: symmetry, positivity, capacity") {
    const auto& m = model_1_05();
    CHECK(m.green_function(LatticeVec{7}) == m.green_function(LatticeVec{-7}));
    CHECK(m.green0() > 0);
    CHECK(m.capacity_constant() * m.green0() == doctest::Approx(1.0).epsilon(1e-15));
    for (int d_a = 0; d_a < 5; ++d_a) {
        static const std::pair<int, double> grid[] = {
            {1, 0.5}, {1, 0.75}, {2, 1.0}, {3, 1.5}, {3, 2.5}};
        auto [d, a] = grid[d_a];
        Index R = d == 1 ? 2000 : (d == 2 ? 200 : 60);
        GreenModel g(SpectralModel(KernelParams(d, a), R));
        CAPTURE(d);
        CAPTURE(a);
        CHECK(g.capacity_constant() > 0);
    }
}

TEST_CASE("G(0) agrees with the time-domain quadrature oracle") {
    // oracle: int_0^T p_s(0,0) ds from FFT transition tables (independent
    // of the frequency rule) plus the self-similar tail f_1(0) int s^{-d/alpha}
    const auto& m = model_1_05();
    const SpectralModel& sp = m.spectral();
    const double T = 64.0;
    double time_int = 0;
    double edges[] = {0.0, 1.0, 4.0, 16.0, 64.0};
    for (int seg = 0; seg + 1 < 5; ++seg) {
        time_int += lrvm::detail::gauss_composite(
            [&](double s) { return sp.transition_table(s, 1 << 14, 8).origin(); }, edges[seg],
            edges[seg + 1], 6, 4);
    }
    StableDensity den(sp);
    double q = 1.0 / 0.5;  // d/alpha
    double tail = den.origin(1.0) * std::pow(T, 1.0 - q) / (q - 1.0);
    double oracle = time_int + tail;
    CHECK(m.green0() == doctest::Approx(oracle).epsilon(0.01));
}

TEST_CASE("green asymptotics: ratio G(x) ||x||^{d-alpha} stabilizes (d=1, alpha=0.5)") {
    const auto& m = model_1_05();
    double r64 = m.green_function(LatticeVec{64}) * std::pow(64.0, 0.5);
    double r128 = m.green_function(LatticeVec{128}) * std::pow(128.0, 0.5);
    CHECK(std::abs(r64 / r128 - 1.0) < 0.05);
    // and the limit constant matches C2 = Gamma(1-a) cos(pi(1-a)/2)/(pi Gtilde)
    double c2 = std::tgamma(0.5) * std::cos(M_PI * 0.25) / (M_PI * m.spectral().Gtilde());
    CHECK(r128 == doctest::Approx(c2).epsilon(0.02));
}

TEST_CASE("error estimate brackets refinement differences") {
    const auto& m = model_1_05();
    auto g = m.green_function_with_error(LatticeVec{64});
    CHECK(g.error < 0.01 * g.value);
}

TEST_CASE("escape probability: endpoints and growth") {
    const auto& m = model_1_05();
    CHECK(m.escape_probability(LatticeVec{0}) == 0.0);
    double p8 = m.escape_probability(LatticeVec{8});
    double p128 = m.escape_probability(LatticeVec{128});
    CHECK(p8 > 0);
    CHECK(p128 > p8);
    CHECK(p128 <= 1.0);
}

TEST_CASE("stationary covariance values") {
    const auto& m = model_1_05();
    LatticeVec x{3}, y{3};
    CHECK(m.stationary_covariance(x, y, 0.5) == doctest::Approx(0.25));
    double prev = 1e9;
    for (Index r : {1, 2, 4, 8}) {
        double c = m.stationary_covariance(LatticeVec{r}, LatticeVec{0}, 0.5);
        CHECK(c >= 0);
        CHECK(c < prev);
        prev = c;
    }
    CHECK(m.stationary_covariance(LatticeVec{5}, LatticeVec{2}, 0.3) ==
          m.stationary_covariance(LatticeVec{2}, LatticeVec{5}, 0.3));
}

TEST_CASE("identity 4.20: truncated sum against the capacity constant") {
    const auto& m = model_1_05();
    auto r512 = m.identity_420(512);
    CHECK(std::abs(r512.gap) / r512.rhs < 1e-2);
    auto r128 = m.identity_420(128);
    CHECK(std::abs(r512.gap) < std::abs(r128.gap));

    // equivalent rearranged form: sum (1-Phi) w = sum w - C
    double lam = oracles::lambda_1d(0.5);
    double lhs2 = 0;
    for (Index y = 1; y <= 512; ++y)
        lhs2 += 2.0 * (1.0 - m.escape_probability(LatticeVec{y})) * std::pow(double(y), -1.5);
    double rhs2 = lam - m.capacity_constant();
    CHECK(std::abs(lhs2 - rhs2) / m.capacity_constant() < 1e-2);
}

TEST_CASE("occupation autocovariance: exact at zero lag, decreasing") {
    const auto& m = model_1_05();
    CHECK(m.occupation_autocov(0.0, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
    double prev = 1e9;
    for (double th : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        double v = m.occupation_autocov(th, 0.5);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("resolvent: domination and monotone convergence to G") {
    const auto& m = model_1_05();
    for (Index x : {0, 1, 5, 20}) {
        CHECK(m.resolvent(LatticeVec{x}, 100.0) <= m.green_function(LatticeVec{x}) + 1e-12);
    }
    double gap2 = m.green0() - m.resolvent(LatticeVec{0}, 1e2);
    double gap4 = m.green0() - m.resolvent(LatticeVec{0}, 1e4);
    CHECK(gap2 > 0);
    CHECK(gap4 > 0);
    CHECK(gap4 < gap2);
}

TEST_CASE("resolvent norm-sq bounded on the alpha < d/2 branch") {
    GreenModel m(SpectralModel(KernelParams(1, 0.4)));
    double dt = m.double_tail(1e4).freq_value;
    double n2 = m.resolvent_norm_sq(1e2);
    double n3 = m.resolvent_norm_sq(1e3);
    double n4 = m.resolvent_norm_sq(1e4);
    CHECK(n2 < n3);
    CHECK(n3 < n4);
    CHECK(n4 < dt);
    CHECK(std::abs(n4 - dt) < std::abs(n2 - dt));
}

TEST_CASE("double tail: refusal names the applicable branch") {
    const auto& m = model_1_05();  // alpha = d/2 boundary: 0.5 = 1/2 -> divergent
    CHECK_THROWS_WITH_AS(m.double_tail(), doctest::Contains("sqrt(N log N)"), std::domain_error);
    GreenModel m75(SpectralModel(KernelParams(1, 0.75)));
    CHECK_THROWS_WITH_AS(m75.double_tail(), doctest::Contains("N^(3/2"), std::domain_error);
}

TEST_CASE("double tail: finite branches stable and cross-checked") {
    GreenModel m04(SpectralModel(KernelParams(1, 0.4)));
    auto a = m04.double_tail(1e4);
    auto b = m04.double_tail(2e4);
    CHECK(a.value > 0);
    CHECK(std::abs(a.value - b.value) / a.value < 0.01);
    CHECK(std::abs(a.value - a.freq_value) / a.freq_value < 0.01);

    GreenModel m51(SpectralModel(KernelParams(5, 1.0)));
    auto c = m51.double_tail(1e3);
    auto c2 = m51.double_tail(2e3);
    CHECK(c.value > 0);
    CHECK(std::abs(c.value - c2.value) / c.value < 0.01);
    CHECK(std::abs(c.value - c.freq_value) / c.freq_value < 0.01);
}
