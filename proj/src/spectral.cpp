#include "lrvm/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lrvm/detail/quadrature.hpp"

namespace lrvm {

using detail::gauss_composite;
using detail::gauss_panel;

double scaling_h(double t, double alpha) {
    if (alpha > 2) return std::sqrt(t);
    if (alpha == 2) {
        if (t <= 1) throw std::domain_error("scaling_h: alpha=2 branch needs t > 1");
        return std::sqrt(t * std::log(t));
    }
    return std::pow(t, 1.0 / alpha);
}

LambdaBranch scaling_Lambda(double N, int d, double alpha) {
    if (N < 2) throw std::invalid_argument("scaling_Lambda: N >= 2 required");
    if (!is_transient(d, alpha)) {
        std::ostringstream os;
        os << "scaling_Lambda: (d=" << d << ", alpha=" << alpha
           << ") is recurrent; occupation-time normalization undefined";
        throw std::domain_error(os.str());
    }
    LambdaBranch b;
    if (d <= 3 && alpha < std::min(2.0, double(d))) {
        const double half_d = 0.5 * d;
        if (alpha > half_d) {
            b.hurst = 1.5 - d / (2 * alpha);
            b.fbm = true;
            b.value = std::pow(N, b.hurst);
            b.formula = "N^(3/2 - d/(2 alpha))";
        } else if (alpha == half_d) {
            b.value = std::sqrt(N * std::log(N));
            b.formula = "sqrt(N log N)";
        } else {
            b.value = std::sqrt(N);
            b.formula = "sqrt(N)";
        }
        return b;
    }
    if (d == 3) {  // alpha >= 2
        b.fbm = true;
        b.hurst = 0.75;
        if (alpha > 2) {
            b.value = std::pow(N, 0.75);
            b.formula = "N^(3/4)";
        } else {
            b.value = std::pow(N, 0.75) * std::pow(std::log(N), -0.75);
            b.formula = "N^(3/4) (log N)^(-3/4)";
        }
        return b;
    }
    if (d == 4) {
        if (alpha > 2) {
            b.value = std::sqrt(N * std::log(N));
            b.formula = "sqrt(N log N)";
        } else {
            b.value = std::sqrt(N);
            b.formula = "sqrt(N)";
        }
        return b;
    }
    b.value = std::sqrt(N);
    b.formula = "sqrt(N)";
    return b;
}

// ---------------------------------------------------------------------------
// SymbolTable

SymbolTable::SymbolTable(const KernelParams& params, Index R_phi)
    : params_(params), R_phi_(R_phi) {
    if (R_phi < 2) throw std::invalid_argument("SymbolTable: R_phi >= 2 required");
    const int d = params_.d;
    const double a = params_.alpha;
    m_ = R_phi_ + 1;
    Index total = 1;
    for (int i = 0; i < d; ++i) total *= m_;
    weight_tensor_ = Eigen::ArrayXd::Zero(total);
    for_each_orthant_rep(d, double(R_phi_), [&](const LatticeVec& y, double mult) {
        Index flat = 0;
        for (int i = 0; i < d; ++i) flat = flat * m_ + y.c[i];
        double w = mult * std::pow(y.norm2_sq(), -0.5 * (d + a));
        weight_tensor_[flat] = w;
        lambda_R_ += w;
        // ball moments of the first coordinate blocks (lattice symmetry makes
        // these the only distinct entries of the moment tensors)
        double y1 = double(y.c[0]), y2 = d > 1 ? double(y.c[1]) : 0.0,
               y3 = d > 2 ? double(y.c[2]) : 0.0;
        m2_ += w * y1 * y1;
        m4_ += w * y1 * y1 * y1 * y1;
        m6_ += w * std::pow(y1, 6);
        if (d > 1) {
            m22_ += w * y1 * y1 * y2 * y2;
            m42_ += w * y1 * y1 * y1 * y1 * y2 * y2;
        }
        if (d > 2) m222_ += w * y1 * y1 * y2 * y2 * y3 * y3;
    });
    small_cut_ = 0.15 / (double(R_phi_) + 0.5);

    // Cumulative tail kernel Q(a) = int_a^inf rho^{-1-alpha} (1 - A_d(rho)) drho,
    // integrated top-down so the alpha >= 2 branch (divergent at 0) still works
    // on [a_min, a_max].
    q_a_min_ = 1e-8;
    q_a_max_ = 2e4;
    auto g = [&](double rho) {
        return std::pow(rho, -1.0 - a) * sphere_one_minus_cos_mean(d, rho);
    };
    std::vector<double> bounds;
    for (double x = q_a_min_; x < 2 * std::numbers::pi;) {
        bounds.push_back(x);
        x *= std::pow(10.0, 1.0 / 32.0);
    }
    for (double x = 2 * std::numbers::pi; x < 400.0; x += std::numbers::pi / 16) bounds.push_back(x);
    for (double x = 400.0; x < q_a_max_; x += std::numbers::pi / 2) bounds.push_back(x);
    bounds.push_back(q_a_max_);
    const std::size_t nb = bounds.size();
    std::vector<double> panel(nb - 1);
    for (std::size_t i = 0; i + 1 < nb; ++i) panel[i] = gauss_panel(g, bounds[i], bounds[i + 1], 12);
    // beyond a_max: 1 - A_d ~ 1 up to an oscillatory remainder that is
    // negligible at this range
    q_mass_at_amax_ = std::pow(q_a_max_, -a) / a;
    q_val_.assign(nb, 0.0);
    q_val_[nb - 1] = q_mass_at_amax_;
    for (std::size_t i = nb - 1; i-- > 0;) q_val_[i] = q_val_[i + 1] + panel[i];
    q_log_a_.resize(nb);
    for (std::size_t i = 0; i < nb; ++i) q_log_a_[i] = std::log(bounds[i]);
}

double SymbolTable::q_lookup(double a) const {
    const double al = params_.alpha;
    const int d = params_.d;
    if (a >= q_a_max_) return std::pow(a, -al) / al;
    if (a <= q_a_min_) {
        // extend below the table with int_a^{a_min} rho^{1-alpha}/(2d) drho
        double piece;
        if (al == 2)
            piece = std::log(q_a_min_ / a) / (2.0 * d);
        else
            piece = (std::pow(q_a_min_, 2.0 - al) - std::pow(a, 2.0 - al)) / ((2.0 - al) * 2.0 * d);
        return q_val_.front() + piece;
    }
    double la = std::log(a);
    auto it = std::upper_bound(q_log_a_.begin(), q_log_a_.end(), la);
    std::size_t i = std::distance(q_log_a_.begin(), it) - 1;
    double f = (la - q_log_a_[i]) / (q_log_a_[i + 1] - q_log_a_[i]);
    return q_val_[i] * (1 - f) + q_val_[i + 1] * f;
}

// Lattice part of phi by even-moment expansion, free of the lambda - cos_sum
// cancellation. Valid for ||theta|| (R+1/2) <~ 0.15 with relative error
// below 1e-12 (the theta^8 term).
double SymbolTable::small_theta_phi(const double* theta, double s) const {
    const int d = params_.d;
    double p2 = 0, p4 = 0, p6 = 0;
    double sum4 = 0, sum22 = 0, sum6 = 0, sum42 = 0, sum222 = 0;
    for (int i = 0; i < d; ++i) {
        double t2 = theta[i] * theta[i];
        p2 += t2;
        sum4 += t2 * t2;
        sum6 += t2 * t2 * t2;
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            double ti2 = theta[i] * theta[i], tj2 = theta[j] * theta[j];
            sum22 += ti2 * tj2;            // ordered pairs: counts each {i,j} twice
            sum42 += ti2 * ti2 * tj2;      // ordered (4,2) pattern
        }
    sum22 *= 0.5;
    if (d > 2)
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                for (int k = j + 1; k < d; ++k)
                    sum222 += theta[i] * theta[i] * theta[j] * theta[j] * theta[k] * theta[k];
    double Q2 = m2_ * p2;
    double Q4 = m4_ * sum4 + 6.0 * m22_ * sum22;
    double Q6 = m6_ * sum6 + 15.0 * m42_ * sum42 + 90.0 * m222_ * sum222;
    double lattice = 0.5 * Q2 - Q4 / 24.0 + Q6 / 720.0;
    return lattice + tail_correction(s);
}

double SymbolTable::tail_correction(double s, bool mass_only) const {
    const int d = params_.d;
    const double a = params_.alpha;
    const double Sd = sphere_surface(d);
    const double edge = double(R_phi_) + 0.5;
    if (mass_only || s == 0.0) {
        double mass = Sd * std::pow(edge, -a) / a;
        return mass_only ? mass : 0.0;
    }
    return Sd * std::pow(s, a) * q_lookup(edge * s);
}

double SymbolTable::operator()(const double* theta) const {
    const int d = params_.d;
    {
        double s2 = 0;
        for (int i = 0; i < d; ++i) s2 += theta[i] * theta[i];
        double s = std::sqrt(s2);
        if (s < small_cut_) return small_theta_phi(theta, s);
    }
    // per-axis cosine tables cos(theta_i * m)
    std::vector<double> cos_tab(std::size_t(d) * m_);
    for (int i = 0; i < d; ++i)
        for (Index m = 0; m < m_; ++m)
            cos_tab[std::size_t(i) * m_ + m] = std::cos(theta[i] * double(m));
    double cos_sum = 0;
    LatticeVec y(d);
    std::array<Index, kMaxDim> idx{};
    // iterate the dense orthant tensor
    const double* W = weight_tensor_.data();
    Index total = weight_tensor_.size();
    for (Index flat = 0; flat < total; ++flat) {
        double w = W[flat];
        if (w != 0) {
            double prod = 1;
            Index rest = flat;
            for (int i = d - 1; i >= 0; --i) {
                Index mi = rest % m_;
                rest /= m_;
                prod *= cos_tab[std::size_t(i) * m_ + mi];
            }
            cos_sum += w * prod;
        }
    }
    double s = 0;
    for (int i = 0; i < d; ++i) s += theta[i] * theta[i];
    s = std::sqrt(s);
    return std::max(0.0, lambda_R_ - cos_sum) + tail_correction(s);
}

Eigen::ArrayXd SymbolTable::on_tensor_grid(const std::vector<Eigen::VectorXd>& axes) const {
    const int d = params_.d;
    if (int(axes.size()) != d) throw std::invalid_argument("on_tensor_grid: axis count != d");
    using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    // contract the weight tensor with per-axis cosine matrices, cycling axes
    RMat cur = Eigen::Map<const RMat>(weight_tensor_.data(), m_, weight_tensor_.size() / m_);
    std::vector<Index> dims(d, m_);
    for (int aax = 0; aax < d; ++aax) {
        const Index n = axes[aax].size();
        RMat C(n, m_);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < m_; ++j) C(i, j) = std::cos(axes[aax][i] * double(j));
        RMat prod = C * cur;                       // (n, rest)
        dims.erase(dims.begin());
        dims.push_back(n);
        Index lead = dims.front();
        RMat next = prod.transpose();              // row-major (rest, n)
        cur = Eigen::Map<const RMat>(next.data(), lead, next.size() / lead);
    }
    // cur is now the cosine sum, row-major over (n_0, ..., n_{d-1})
    Eigen::ArrayXd out(cur.size());
    std::array<Index, kMaxDim> idx{};
    const double* cs = cur.data();
    for (Index flat = 0; flat < cur.size(); ++flat) {
        double s2 = 0;
        double th[kMaxDim];
        for (int i = 0; i < d; ++i) {
            double v = axes[i][idx[i]];
            th[i] = v;
            s2 += v * v;
        }
        double s = std::sqrt(s2);
        double phi = s < small_cut_
                         ? small_theta_phi(th, s)
                         : std::max(0.0, lambda_R_ - cs[flat]) + tail_correction(s);
        out[flat] = phi;
        int i = d - 1;
        while (i >= 0 && idx[i] == axes[i].size() - 1) idx[i--] = 0;
        if (i >= 0) ++idx[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// SpectralModel

Index SpectralModel::default_R_phi(int d) {
    switch (d) {
        case 1: return 10000;
        case 2: return 300;
        case 3: return 60;
        case 4: return 16;
        default: return 8;
    }
}

Index SpectralModel::default_grid(int d) {
    switch (d) {
        case 1: return 1 << 14;
        case 2: return 1 << 9;
        default: return 1 << 6;
    }
}

SpectralModel::SpectralModel(const KernelParams& params, Index R_phi)
    : params_(params), symbol_(params, R_phi) {
    const int d = params_.d;
    const double a = params_.alpha;
    const double Sd = sphere_surface(d);
    if (a < 2) {
        // Gtilde = S_{d-1} * int_0^inf rho^{-1-alpha}(1 - A_d(rho)) drho;
        // reuse the cumulative radial table plus the [0, a_min] stub.
        double stub = std::pow(symbol_.q_a_min_, 2.0 - a) / (2.0 * d * (2.0 - a));
        Gtilde_ = Sd * (symbol_.q_val_.front() + stub);
    } else if (a > 2) {
        double s2 = 0;
        for_each_orthant_rep(d, double(R_phi), [&](const LatticeVec& y, double mult) {
            s2 += mult * y.norm2_sq() * std::pow(y.norm2_sq(), -0.5 * (d + a));
        });
        s2 += Sd * std::pow(double(R_phi) + 0.5, 2.0 - a) / (a - 2.0);
        sigma_sq_ = s2 / d;
    }
    K_diag_ = Sd / (2.0 * d);
}

SpectralModel::SpectralModel(const KernelParams& params)
    : SpectralModel(params, default_R_phi(params.d)) {}

double SpectralModel::char_fn_walk(const std::vector<double>& theta, double t) const {
    if (t < 0) throw std::domain_error("char_fn_walk: t >= 0 required");
    return std::exp(-t * symbol_(theta));
}

double SpectralModel::stable_char(const std::vector<double>& theta, double t) const {
    if (t < 0) throw std::domain_error("stable_char: t >= 0 required");
    double s2 = 0;
    for (double v : theta) s2 += v * v;
    const double a = params_.alpha;
    if (a < 2) return std::exp(-t * Gtilde_ * std::pow(s2, 0.5 * a));
    if (a == 2) return std::exp(-0.5 * t * K_diag_ * s2);
    return std::exp(-0.5 * t * sigma_sq_ * s2);
}

namespace {

double walk_spread(double t, double alpha) {
    if (alpha < 2) return std::pow(t, 1.0 / alpha);
    if (alpha == 2) return std::sqrt(t * std::max(1.0, std::log(std::max(t, 1.0))));
    return std::sqrt(t);
}

void fft_nd(std::vector<std::complex<double>>& data, int d, Index M, bool inverse) {
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> line(M), out(M);
    Index total = data.size();
    for (int axis = 0; axis < d; ++axis) {
        Index stride = 1;
        for (int i = axis + 1; i < d; ++i) stride *= M;
        Index blocks = total / (stride * M);
        for (Index b = 0; b < blocks; ++b) {
            for (Index in = 0; in < stride; ++in) {
                Index base = b * stride * M + in;
                for (Index k = 0; k < M; ++k) line[k] = data[base + k * stride];
                if (inverse)
                    fft.inv(out, line);
                else
                    fft.fwd(out, line);
                for (Index k = 0; k < M; ++k) data[base + k * stride] = out[k];
            }
        }
    }
}

}  // namespace

TransitionTable SpectralModel::transition_table(double t) const {
    Index M = default_grid(params_.d);
    return transition_table(t, M, M / 2);
}

TransitionTable SpectralModel::transition_table(double t, Index M, Index B) const {
    const int d = params_.d;
    const double a = params_.alpha;
    if (d > 3) throw std::invalid_argument("transition_table: d <= 3 supported");
    if (t < 0) throw std::domain_error("transition_table: t >= 0 required");
    if (M < 4 || (M & (M - 1)) != 0) throw std::invalid_argument("transition_table: M must be a power of two");
    if (B > M / 2) throw std::invalid_argument("transition_table: B <= M/2 required");
    if (t > 0 && walk_spread(t, a) > double(M) / 4.0)
        throw std::runtime_error("transition_table: grid too small (walk spread h_alpha(t) exceeds M/4)");

    Index total = 1;
    for (int i = 0; i < d; ++i) total *= M;

    // fold the truncated kernel onto the M-grid; the DFT of the folded table
    // equals the truncated lattice cosine sum exactly at grid frequencies
    std::vector<std::complex<double>> work(total, {0.0, 0.0});
    const Index R = symbol_.radius();
    for_each_orthant_rep(d, double(R), [&](const LatticeVec& rep, double) {
        int nz[kMaxDim], k = 0;
        for (int i = 0; i < d; ++i)
            if (rep.c[i] != 0) nz[k++] = i;
        double w = std::pow(rep.norm2_sq(), -0.5 * (d + a));
        const int combos = 1 << k;
        for (int m = 0; m < combos; ++m) {
            LatticeVec y = rep;
            for (int b = 0; b < k; ++b)
                if (m & (1 << b)) y.c[nz[b]] = -y.c[nz[b]];
            Index flat = 0;
            for (int i = 0; i < d; ++i) {
                Index mi = ((y.c[i] % M) + M) % M;
                flat = flat * M + mi;
            }
            work[flat] += w;
        }
    });
    fft_nd(work, d, M, false);

    const double lam = symbol_.ball_mass();
    const double two_pi = 2.0 * std::numbers::pi;
    std::array<Index, kMaxDim> idx{};
    for (Index flat = 0; flat < total; ++flat) {
        double s2 = 0;
        for (int i = 0; i < d; ++i) {
            Index k = idx[i] > M / 2 ? idx[i] - M : idx[i];
            double th = two_pi * double(k) / double(M);
            s2 += th * th;
        }
        double phi = std::max(0.0, lam - work[flat].real()) + symbol_.tail_correction(std::sqrt(s2));
        work[flat] = std::exp(-t * phi);
        int i = d - 1;
        while (i >= 0 && idx[i] == M - 1) idx[i--] = 0;
        if (i >= 0) ++idx[i];
    }
    fft_nd(work, d, M, true);

    TransitionTable tab;
    tab.d = d;
    tab.t = t;
    tab.M = M;
    tab.B = B;
    tab.grid.resize(total);
    for (Index i = 0; i < total; ++i) tab.grid[i] = std::max(0.0, work[i].real());

    // wrap-around mass estimate at the Lemma-LCLT scale
    if (a < 2) {
        tab.aliasing_bound = std::min(1.0, t * sphere_surface(d) * std::pow(double(M) / 2, -a) / a);
    } else {
        double var = (a == 2 ? K_diag_ : sigma_sq_) * std::max(t, 1e-300);
        double z = (double(M) / 2) / std::sqrt(2.0 * var);
        tab.aliasing_bound = std::min(1.0, 2.0 * d * 0.5 * std::erfc(z));
    }

    // box mass over ||x||_inf <= B without double-visiting wrapped sites
    double mass = 0;
    const Index lo = (B == M / 2) ? -B + 1 : -B;
    LatticeVec x(d);
    for (int i = 0; i < d; ++i) x.c[i] = lo;
    for (;;) {
        mass += tab.at(x);
        int i = d - 1;
        while (i >= 0 && x.c[i] == B) x.c[i--] = lo;
        if (i < 0) break;
        ++x.c[i];
    }
    tab.box_mass = mass;
    tab.residual = 1.0 - mass;
    return tab;
}

double TransitionTable::at(const LatticeVec& x) const {
    Index flat = 0;
    for (int i = 0; i < d; ++i) {
        Index mi = ((x.c[i] % M) + M) % M;
        flat = flat * M + mi;
    }
    return grid[flat];
}

double TransitionTable::origin() const {
    return grid[0];
}

// ---------------------------------------------------------------------------
// StableDensity

StableDensity::StableDensity(const SpectralModel& model)
    : model_(&model), d_(model.params().d), alpha_(model.params().alpha) {}

double StableDensity::similarity_index() const { return alpha_ < 2 ? alpha_ : 2.0; }

double StableDensity::origin(double t) const {
    if (t <= 0) throw std::domain_error("stable_density: t > 0 required");
    const double pi = std::numbers::pi;
    if (alpha_ < 2) {
        double G = model_->Gtilde();
        return sphere_surface(d_) * std::tgamma(double(d_) / alpha_) /
               (std::pow(2 * pi, d_) * alpha_ * std::pow(t * G, double(d_) / alpha_));
    }
    double v = t * (alpha_ == 2 ? model_->K_diag() : model_->sigma_sq());
    return std::pow(2 * pi * v, -0.5 * d_);
}

namespace {

// panel boundaries for integrands with a rho^alpha cusp at 0 and cos(rho*u)
// oscillation: geometric growth from rho_max * 2^-42, capped by a uniform
// step and a half-period step
std::vector<double> cusp_osc_panels(double rho_max, double u) {
    std::vector<double> b;
    b.push_back(0.0);
    double x = rho_max * 0x1.0p-42;
    b.push_back(x);
    const double uniform = rho_max / 48.0;
    const double osc = u > 0 ? std::numbers::pi / (2.0 * u) : rho_max;
    while (x < rho_max) {
        double step = std::min({x, uniform, osc});
        x += step;
        b.push_back(std::min(x, rho_max));
    }
    return b;
}

}  // namespace

double StableDensity::value(double u, double t) const {
    if (t <= 0) throw std::domain_error("stable_density: t > 0 required");
    const double pi = std::numbers::pi;
    if (alpha_ >= 2) {
        double v = t * (alpha_ == 2 ? model_->K_diag() : model_->sigma_sq());
        return std::pow(2 * pi * v, -0.5 * d_) * std::exp(-0.5 * u * u / v);
    }
    const double G = model_->Gtilde();
    const double rho_max = std::pow(45.0 / (t * G), 1.0 / alpha_);
    auto f = [&](double rho) {
        return std::exp(-t * G * std::pow(rho, alpha_)) * std::pow(rho, d_ - 1) *
               sphere_cos_mean(d_, rho * u);
    };
    auto b = cusp_osc_panels(rho_max, u);
    double integral = 0;
    for (std::size_t i = 0; i + 1 < b.size(); ++i) integral += gauss_panel(f, b[i], b[i + 1], 12);
    return sphere_surface(d_) * integral / std::pow(2 * pi, d_);
}

StableDensity::Radial StableDensity::tabulate(double t, double u_max, int points) const {
    Radial r;
    r.umax_ = u_max;
    r.du_ = u_max / (points - 1);
    r.vals_.resize(points);
    for (int i = 0; i < points; ++i) r.vals_[i] = value(i * r.du_, t);
    return r;
}

double StableDensity::Radial::operator()(double u) const {
    if (u >= umax_) return vals_.back();
    double x = u / du_;
    auto i = static_cast<std::size_t>(x);
    double f = x - double(i);
    return vals_[i] * (1 - f) + vals_[i + 1] * f;
}

namespace {

// V_d(x) = R^{-d} int_{||u|| <= R} e^{-i theta.u} du at x = ||theta|| R
double ball_fourier_kernel(int d, double x) {
    if (x < 1e-4) {
        double x2 = x * x;
        switch (d) {
            case 1: return 2.0 * (1.0 - x2 / 6.0);
            case 2: return 2.0 * std::numbers::pi * (0.5 - x2 / 16.0);
            default: return 4.0 * std::numbers::pi * (1.0 / 3.0 - x2 / 30.0);
        }
    }
    switch (d) {
        case 1: return 2.0 * std::sin(x) / x;
        case 2: return 2.0 * std::numbers::pi * std::cyl_bessel_j(1.0, x) / x;
        default: return 4.0 * std::numbers::pi * (std::sin(x) - x * std::cos(x)) / (x * x * x);
    }
}

}  // namespace

double StableDensity::total_mass(double t) const {
    if (alpha_ >= 2) return 1.0;  // Gaussian branch integrates exactly
    if (d_ > 3) throw std::invalid_argument("total_mass: d <= 3 supported");
    const double pi = std::numbers::pi;
    const double G = model_->Gtilde();
    const double scale = std::pow(t * G, 1.0 / alpha_);
    const double Rq = 6.0 * std::max(scale, 1.0);

    // mass of the ball ||u|| <= Rq by radial quadrature of the density
    auto fr = [&](double r) { return value(r, t) * std::pow(r, d_ - 1); };
    double ball_density = sphere_surface(d_) * gauss_composite(fr, 0.0, Rq, 160, 12);

    // the same ball mass straight from the characteristic function; the
    // remainder 1 - ball_char closes the heavy tail exactly
    const double rho_max = std::pow(45.0 / (t * G), 1.0 / alpha_);
    auto g = [&](double rho) {
        return std::exp(-t * G * std::pow(rho, alpha_)) * std::pow(rho, d_ - 1) *
               ball_fourier_kernel(d_, rho * Rq);
    };
    auto b = cusp_osc_panels(rho_max, Rq);
    double integral = 0;
    for (std::size_t i = 0; i + 1 < b.size(); ++i) integral += gauss_panel(g, b[i], b[i + 1], 12);
    double ball_char =
        std::pow(Rq, d_) * sphere_surface(d_) * integral / std::pow(2 * pi, d_);

    return ball_density + (1.0 - ball_char);
}

// ---------------------------------------------------------------------------

LcltReport lclt_error(double N, double t, const SpectralModel& model) {
    const int d = model.params().d;
    Index M = d == 2 ? (1 << 10) : SpectralModel::default_grid(d);
    double h = scaling_h(N, model.params().alpha);
    Index B = std::min<Index>(M / 2, Index(std::ceil(8 * h)));
    return lclt_error(N, t, model, M, B);
}

namespace {

// first-order wrap correction: sum_{k != 0} p_{tN}(0, x + Mk) ~ tN sum w(x + Mk)
double image_weight(const LatticeVec& x, Index M, const KernelParams& p) {
    const int d = p.d;
    double s = 0;
    LatticeVec img(d);
    std::array<int, kMaxDim> k{};
    for (int i = 0; i < d; ++i) k[i] = -3;
    for (;;) {
        bool zero = true;
        for (int i = 0; i < d; ++i)
            if (k[i] != 0) zero = false;
        if (!zero) {
            for (int i = 0; i < d; ++i) img.c[i] = x.c[i] + Index(k[i]) * M;
            s += std::pow(img.norm2_sq(), -0.5 * (d + p.alpha));
        }
        int i = 0;
        while (i < d && k[i] == 3) k[i++] = -3;
        if (i == d) break;
        ++k[i];
    }
    return s;
}

}  // namespace

LcltReport lclt_error(double N, double t, const SpectralModel& model, Index M, Index B) {
    const int d = model.params().d;
    const double h = scaling_h(N, model.params().alpha);
    TransitionTable tab = model.transition_table(t * N, M, B);
    StableDensity den(model);
    double u_max = (double(B) * std::sqrt(double(d)) + 1.0) / h;
    auto f = den.tabulate(t, u_max * 1.01 + 1e-9);
    const double hd = std::pow(h, d);

    LcltReport rep;
    rep.h = h;
    rep.f_origin = den.origin(t);
    rep.location = LatticeVec(d);
    rep.scaled_p_origin =
        hd * (tab.origin() - t * N * image_weight(rep.location, M, model.params()));

    const Index lo = (B == M / 2) ? -B + 1 : -B;
    LatticeVec x(d);
    for (int i = 0; i < d; ++i) x.c[i] = lo;
    for (;;) {
        // subtract the leading wrapped-image mass so the statistic compares
        // against the infinite-lattice walk
        double p = tab.at(x) - t * N * image_weight(x, M, model.params());
        double err = std::abs(hd * p - f(x.norm2() / h));
        if (err > rep.sup_error) {
            rep.sup_error = err;
            rep.location = x;
        }
        int i = d - 1;
        while (i >= 0 && x.c[i] == B) x.c[i--] = lo;
        if (i < 0) break;
        ++x.c[i];
    }
    return rep;
}

}  // namespace lrvm
