#include "lrvm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lrvm {

bool is_transient(int d, double alpha) {
    if (d >= 3) return true;
    return alpha < double(d);
}

KernelParams::KernelParams(int d_, double alpha_) : d(d_), alpha(alpha_) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("KernelParams: d must be in [1,6]");
    if (!(alpha > 0)) throw std::invalid_argument("KernelParams: alpha must be positive");
    transient = is_transient(d, alpha);
}

double kernel_weight(const LatticeVec& y, const KernelParams& params) {
    if (y.is_zero()) throw std::domain_error("kernel_weight: y = 0 is excluded");
    return std::pow(y.norm2(), -(params.d + params.alpha));
}

namespace {

// int_A^infty r^{d-1} (r+shift)^{-(d+alpha)} dr in closed form via the
// binomial expansion of r^{d-1} = ((r+shift)-shift)^{d-1}.
double shifted_tail_integral(int d, double alpha, double A, double shift) {
    // substitute t = r + shift; t runs from A+shift
    double t0 = A + shift;
    double sum = 0;
    double binom = 1;
    for (int k = 0; k <= d - 1; ++k) {
        // term: C(d-1,k) (-shift)^k t^{d-1-k-(d+alpha)} integrated
        double expo = alpha + k;
        sum += binom * std::pow(-shift, k) * std::pow(t0, -expo) / expo;
        binom = binom * (d - 1 - k) / (k + 1);
    }
    return sum;
}

}  // namespace

MassEstimate kernel_mass(const KernelParams& params, Index R) {
    if (R < 1) throw std::invalid_argument("kernel_mass: R >= 1 required");
    const int d = params.d;
    const double a = params.alpha;
    MassEstimate out;
    double s = 0;
    for_each_orthant_rep(d, double(R), [&](const LatticeVec& y, double mult) {
        s += mult * std::pow(y.norm2_sq(), -0.5 * (d + a));
    });
    out.ball_sum = s;

    const double Sd = sphere_surface(d);
    const double h = 0.5 * std::sqrt(double(d));
    // midpoint estimate and true cell-geometry brackets of the lattice tail
    out.tail = Sd * std::pow(R + 0.5, -a) / a;
    double upper = Sd * shifted_tail_integral(d, a, double(R) - 2 * h, h);
    double lower = Sd * shifted_tail_integral(d, a, double(R), -h);
    out.error_bound = std::max(upper - out.tail, out.tail - lower);
    out.lambda = out.ball_sum + out.tail;
    return out;
}

AliasTable::AliasTable(const std::vector<double>& weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw std::invalid_argument("AliasTable: empty");
    double total = 0;
    for (double w : weights) {
        if (!(w >= 0)) throw std::invalid_argument("AliasTable: negative weight");
        total += w;
    }
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] * n / total;
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i)
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    while (!small.empty() && !large.empty()) {
        auto s = small.back(), l = large.back();
        small.pop_back();
        large.pop_back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] -= 1.0 - scaled[s];
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (auto i : large) prob_[i] = 1.0;
    for (auto i : small) prob_[i] = 1.0;
}

std::size_t AliasTable::sample(RandomStream& rng) const {
    std::size_t i = rng.below(prob_.size());
    return rng.uniform() < prob_[i] ? i : alias_[i];
}

Index JumpSampler::default_radius(int d) {
    switch (d) {
        case 1: return 64;
        case 2: return 32;
        case 3: return 16;
        case 4: return 10;
        default: return 6;
    }
}

JumpSampler::JumpSampler(const KernelParams& params, Index R) : params_(params), R_(R) {
    if (R < 2) throw std::invalid_argument("JumpSampler: R >= 2 required");
    const int d = params_.d;
    const double a = params_.alpha;
    mass_ = kernel_mass(params_, R);
    std::vector<double> weights;
    for_each_orthant_rep(d, double(R), [&](const LatticeVec& rep, double) {
        // expand the full sign orbit into explicit points
        int nz[kMaxDim], k = 0;
        for (int i = 0; i < d; ++i)
            if (rep.c[i] != 0) nz[k++] = i;
        const int combos = 1 << k;
        const double w = std::pow(rep.norm2_sq(), -0.5 * (d + a));
        for (int m = 0; m < combos; ++m) {
            LatticeVec y = rep;
            for (int b = 0; b < k; ++b)
                if (m & (1 << b)) y.c[nz[b]] = -y.c[nz[b]];
            points_.push_back(y);
            weights.push_back(w);
        }
    });
    inside_mass_ = mass_.ball_sum;
    tail_mass_ = mass_.tail;
    lambda_ = mass_.lambda;
    alias_ = AliasTable(weights);
    const double h = 0.5 * std::sqrt(double(d));
    accept_norm_ = std::pow(1.0 + h / double(R), d + a);
}

LatticeVec JumpSampler::sample(RandomStream& rng) const {
    if (rng.uniform() * lambda_ < inside_mass_) return points_[alias_.sample(rng)];
    return sample_tail(rng);
}

LatticeVec JumpSampler::sample_tail(RandomStream& rng) const {
    const int d = params_.d;
    const double a = params_.alpha;
    const double h = 0.5 * std::sqrt(double(d));
    const double r0 = double(R_) - h;  // proposal support covers every tail cell
    for (long iter = 0; iter < max_rejection_iters_; ++iter) {
        double r = r0 * std::pow(rng.uniform_pos(), -1.0 / a);
        double dir[kMaxDim], n2 = 0;
        if (d == 1) {
            dir[0] = rng.bernoulli(0.5) ? 1.0 : -1.0;
            n2 = 1.0;
        } else {
            do {
                n2 = 0;
                for (int i = 0; i < d; ++i) {
                    dir[i] = rng.normal();
                    n2 += dir[i] * dir[i];
                }
            } while (n2 == 0);
        }
        const double scale = r / std::sqrt(n2);
        LatticeVec y(d);
        double v2 = 0;
        for (int i = 0; i < d; ++i) {
            double vi = dir[i] * scale;
            y.c[i] = static_cast<Index>(std::llround(vi));
            v2 += vi * vi;
        }
        double y2 = y.norm2_sq();
        if (y2 <= double(R_) * double(R_)) continue;  // outside the tail region
        // accept with probability (||v||/||y||)^{d+alpha} / accept_norm_
        double ratio = std::pow(v2 / y2, 0.5 * (d + a)) / accept_norm_;
        if (rng.uniform() < ratio) return y;
    }
    throw std::runtime_error("JumpSampler: tail rejection cap exceeded (broken envelope)");
}

double JumpSampler::exact_region_prob(const LatticeVec& y) const {
    if (y.is_zero() || y.norm2() > double(R_)) return 0;
    return kernel_weight(y, params_) / lambda_;
}

TorusKernel::TorusKernel(const KernelParams& params, Index L, int images)
    : params_(params), L_(L) {
    if (L < 4) throw std::invalid_argument("TorusKernel: L >= 4 required");
    if (L % 2 != 0) throw std::invalid_argument("TorusKernel: odd L rejected (minimal-image ambiguity)");
    const int d = params_.d;
    const double a = params_.alpha;

    // minimal-image representatives z in {-L/2+1, ..., L/2}^d \ {0}
    std::vector<Index> reps;
    for (Index v = -L / 2 + 1; v <= L / 2; ++v) reps.push_back(v);
    LatticeVec z(d);
    std::array<std::size_t, kMaxDim> idx{};
    for (;;) {
        for (int i = 0; i < d; ++i) z.c[i] = reps[idx[i]];
        if (!z.is_zero()) {
            double w = 0;
            LatticeVec img(d);
            std::array<int, kMaxDim> k{};
            for (int i = 0; i < d; ++i) k[i] = -images;
            for (;;) {
                for (int i = 0; i < d; ++i) img.c[i] = z.c[i] + Index(k[i]) * L;
                w += std::pow(img.norm2_sq(), -0.5 * (d + a));
                int i = 0;
                while (i < d && k[i] == images) k[i++] = -images;
                if (i == d) break;
                ++k[i];
            }
            displacements_.push_back(z);
            weights_.push_back(w);
            lambda_L_ += w;
        }
        int i = 0;
        while (i < d && idx[i] == reps.size() - 1) idx[i++] = 0;
        if (i == d) break;
        ++idx[i];
    }
    alias_ = AliasTable(weights_);

    // every omitted image has ||z + Lk||_2 >= L(images + 1/2)
    const double Rcut = double(L) * (images + 0.5);
    const double h = 0.5 * std::sqrt(double(d));
    truncation_bound_ = sphere_surface(d) * shifted_tail_integral(d, a, Rcut - 2 * h, h);
}

double TorusKernel::weight(const LatticeVec& z) const {
    const int d = params_.d;
    LatticeVec r(d);
    for (int i = 0; i < d; ++i) {
        Index m = ((z.c[i] % L_) + L_) % L_;
        r.c[i] = m > L_ / 2 ? m - L_ : m;
    }
    if (r.is_zero()) throw std::domain_error("TorusKernel::weight: zero displacement class");
    // locate via flat index in the rep enumeration
    for (std::size_t i = 0; i < displacements_.size(); ++i)
        if (displacements_[i] == r) return weights_[i];
    throw std::logic_error("TorusKernel::weight: representative not found");
}

}  // namespace lrvm
