#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace lrvm {

using Index = std::int64_t;

inline constexpr int kMaxDim = 6;

/// Lattice point of Z^d for small d. Coordinates beyond dim are zero.
struct LatticeVec {
    int dim = 1;
    std::array<Index, kMaxDim> c{};

    LatticeVec() = default;
    explicit LatticeVec(int d) : dim(d) {
        if (d < 1 || d > kMaxDim) throw std::invalid_argument("LatticeVec: dim out of range");
    }
    LatticeVec(std::initializer_list<Index> xs) : dim(static_cast<int>(xs.size())) {
        if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("LatticeVec: dim out of range");
        int i = 0;
        for (Index v : xs) c[i++] = v;
    }

    Index operator[](int i) const { return c[i]; }
    Index& operator[](int i) { return c[i]; }

    bool is_zero() const {
        for (int i = 0; i < dim; ++i)
            if (c[i] != 0) return false;
        return true;
    }
    double norm2() const {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += double(c[i]) * double(c[i]);
        return std::sqrt(s);
    }
    double norm2_sq() const {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += double(c[i]) * double(c[i]);
        return s;
    }
    Index norm_inf() const {
        Index m = 0;
        for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(c[i]));
        return m;
    }
    LatticeVec operator+(const LatticeVec& o) const {
        LatticeVec r(dim);
        for (int i = 0; i < dim; ++i) r.c[i] = c[i] + o.c[i];
        return r;
    }
    LatticeVec operator-(const LatticeVec& o) const {
        LatticeVec r(dim);
        for (int i = 0; i < dim; ++i) r.c[i] = c[i] - o.c[i];
        return r;
    }
    LatticeVec operator-() const {
        LatticeVec r(dim);
        for (int i = 0; i < dim; ++i) r.c[i] = -c[i];
        return r;
    }
    bool operator==(const LatticeVec& o) const {
        if (dim != o.dim) return false;
        for (int i = 0; i < dim; ++i)
            if (c[i] != o.c[i]) return false;
        return true;
    }
};

/// Surface area of the unit (d-1)-sphere in R^d; S_0 = 2 (two points).
inline double sphere_surface(int d) {
    const double pi = std::numbers::pi;
    return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// 1 - A_d(s) where A_d is the spherical mean of cos(s * omega_1) over the
/// unit sphere of R^d: A_d(s) = Gamma(d/2) (2/s)^{d/2-1} J_{d/2-1}(s).
/// Computed by series for small s to avoid the 1 - cos cancellation.
inline double sphere_one_minus_cos_mean(int d, double s) {
    if (s < 0.5) {
        // 1 - A_d = sum_{k>=1} (-1)^{k+1} s^{2k} / (4^k k! (d/2)_k) * (d/2)...
        double s2 = s * s;
        double term = s2 / (2.0 * d);
        double sum = term;
        for (int k = 1; k < 24; ++k) {
            term *= -s2 / (4.0 * (k + 1) * (0.5 * d + k));
            sum += term;
            if (std::abs(term) < 1e-19 * std::abs(sum)) break;
        }
        return sum;
    }
    if (d == 1) return 1.0 - std::cos(s);
    if (d == 3) return 1.0 - std::sin(s) / s;
    const double nu = 0.5 * d - 1.0;
    return 1.0 - std::tgamma(0.5 * d) * std::pow(2.0 / s, nu) * std::cyl_bessel_j(nu, s);
}

/// A_d(s) itself (safe everywhere; the mean is O(1))
inline double sphere_cos_mean(int d, double s) {
    return 1.0 - sphere_one_minus_cos_mean(d, s);
}

/// Visits every lattice point of the closed ball {0 < ||y||_2 <= R} with
/// nonnegative coordinates, reporting the orbit multiplicity 2^{#nonzero}
/// (its orbit under coordinate sign flips). Summing f over full sign orbits
/// of these representatives covers the punctured ball exactly once.
template <typename F>
void for_each_orthant_rep(int d, double R, F&& f) {
    const Index r = static_cast<Index>(std::floor(R));
    LatticeVec y(d);
    const double R2 = R * R;
    // odometer over [0,r]^d
    for (;;) {
        double n2 = y.norm2_sq();
        if (n2 > 0 && n2 <= R2) {
            int nz = 0;
            for (int i = 0; i < d; ++i)
                if (y.c[i] != 0) ++nz;
            f(y, double(1u << nz));
        }
        int i = 0;
        while (i < d && y.c[i] == r) y.c[i++] = 0;
        if (i == d) break;
        ++y.c[i];
    }
}

}  // namespace lrvm
