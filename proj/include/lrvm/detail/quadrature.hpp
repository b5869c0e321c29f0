#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace lrvm::detail {

struct GaussRule {
    std::vector<double> x;  // nodes on (-1, 1)
    std::vector<double> w;
};

/// Gauss-Legendre nodes/weights by Newton iteration on P_n.
inline const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1);
        r.x[i] = x;
        r.w[i] = 2.0 / ((1 - x * x) * dp * dp);
    }
    auto [pos, ok] = cache.emplace(n, std::move(r));
    return pos->second;
}

/// integral of f over [a, b] with one Gauss panel
template <typename F>
double gauss_panel(F&& f, double a, double b, int n) {
    const auto& g = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0;
    for (int i = 0; i < n; ++i) s += g.w[i] * f(mid + half * g.x[i]);
    return s * half;
}

/// composite Gauss over [a, b] with `panels` equal panels
template <typename F>
double gauss_composite(F&& f, double a, double b, long panels, int n) {
    double s = 0;
    double len = (b - a) / double(panels);
    for (long p = 0; p < panels; ++p) s += gauss_panel(f, a + p * len, a + (p + 1) * len, n);
    return s;
}

}  // namespace lrvm::detail
