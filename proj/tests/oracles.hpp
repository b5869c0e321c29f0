#pragma once

// Test-only reference computations, kept independent of the library's own
// evaluation paths.

#include <cmath>
#include <cstdint>

namespace oracles {

/// Riemann zeta by Euler-Maclaurin; ~1e-13 for s >= 1.2.
inline double zeta(double s) {
    const int n = 64;
    double sum = 0;
    for (int k = 1; k < n; ++k) sum += std::pow(double(k), -s);
    double ns = std::pow(double(n), -s);
    sum += ns * n / (s - 1) + 0.5 * ns;
    double term = s * ns / n / 12.0;
    sum += term;
    sum -= s * (s + 1) * (s + 2) * ns / (n * n * n) / 720.0;
    return sum;
}

/// kernel mass for d = 1: 2 zeta(1 + alpha)
inline double lambda_1d(double alpha) { return 2.0 * zeta(1.0 + alpha); }

/// closed form of int_{R^d} (1 - cos v_1) ||v||^{-(d+alpha)} dv, 0 < alpha < 2
inline double gtilde_closed(int d, double alpha) {
    const double pi = 3.14159265358979323846;
    double gamma_neg = std::tgamma(1.0 - 0.5 * alpha) / (-0.5 * alpha);  // Gamma(-alpha/2)
    return std::pow(pi, 0.5 * d) * std::abs(gamma_neg) /
           (std::pow(2.0, alpha) * std::tgamma(0.5 * (d + alpha)));
}

/// brute-force kernel mass over ||y||_2 <= R for d = 1 plus integral bracket
struct BruteMass {
    double low = 0, high = 0;
};
inline BruteMass brute_mass_1d(double alpha, std::int64_t R) {
    BruteMass b;
    double s = 0;
    for (std::int64_t y = 1; y <= R; ++y) s += std::pow(double(y), -1.0 - alpha);
    s *= 2;
    // integral bracket of the tail: 2 int over [R, R+1] cells
    b.low = s + 2.0 * std::pow(double(R) + 1.0, -alpha) / alpha;
    b.high = s + 2.0 * std::pow(double(R), -alpha) / alpha;
    return b;
}

}  // namespace oracles
