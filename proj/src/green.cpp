#include "lrvm/green.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "lrvm/detail/quadrature.hpp"

namespace lrvm {

namespace detail {

namespace {
constexpr double kPi = std::numbers::pi;
}

/// Tensor-product quadrature over the positive orthant of [-pi, pi]^d with
/// dyadic shells toward theta = 0. Each shell splits into d slabs whose node
/// sets are tensor grids, so the symbol evaluates through matrix products and
/// every Green-type integral becomes a cached weighted sum.
class FrequencyRule {
  public:
    struct Slab {
        std::vector<Eigen::VectorXd> axes;    // nodes per axis
        std::vector<Eigen::VectorXd> axis_w;  // Gauss weights per axis
        Eigen::ArrayXd phi;                   // symbol values, row-major tensor
        Eigen::ArrayXd wflat;                 // combined weights (with 2^d factor)
        int shell = 0;
    };

    FrequencyRule(const SymbolTable& symbol, Index x_max, int shells, int gauss)
        : d_(symbol.params().d), shells_(shells) {
        const auto& g = gauss_legendre(gauss);
        auto panel_nodes = [&](double lo, double hi, Eigen::VectorXd& nodes,
                               Eigen::VectorXd& wts) {
            long panels =
                std::max<long>(1, long(std::ceil((hi - lo) * double(x_max) * 3.0 / (2.0 * kPi))));
            nodes.resize(panels * gauss);
            wts.resize(panels * gauss);
            double len = (hi - lo) / double(panels);
            for (long p = 0; p < panels; ++p) {
                double mid = lo + (p + 0.5) * len, half = 0.5 * len;
                for (int i = 0; i < gauss; ++i) {
                    nodes[p * gauss + i] = mid + half * g.x[i];
                    wts[p * gauss + i] = half * g.w[i];
                }
            }
        };
        for (int j = 0; j < shells_; ++j) {
            double h = kPi * std::pow(0.5, j);
            for (int a = 0; a < d_; ++a) {
                Slab s;
                s.shell = j;
                s.axes.resize(d_);
                s.axis_w.resize(d_);
                for (int b = 0; b < d_; ++b) {
                    double lo = 0, hi = h;
                    if (b == a) lo = 0.5 * h;
                    else if (b < a) hi = 0.5 * h;
                    panel_nodes(lo, hi, s.axes[b], s.axis_w[b]);
                }
                s.phi = symbol.on_tensor_grid(s.axes);
                Index n = s.phi.size();
                s.wflat.resize(n);
                std::array<Index, kMaxDim> idx{};
                const double orthant = std::pow(2.0, d_);
                for (Index f = 0; f < n; ++f) {
                    double w = orthant;
                    for (int b = 0; b < d_; ++b) w *= s.axis_w[b][idx[b]];
                    s.wflat[f] = w;
                    int b = d_ - 1;
                    while (b >= 0 && idx[b] == s.axes[b].size() - 1) idx[b--] = 0;
                    if (b >= 0) ++idx[b];
                }
                slabs_.push_back(std::move(s));
            }
        }
    }

    int shells() const { return shells_; }

    /// (2 pi)^{-d} int F(phi) dtheta with geometric closure of the innermost cube
    template <typename F>
    ValueWithError integrate(F&& f) const {
        std::vector<double> shell_sum(shells_, 0.0);
        for (const auto& s : slabs_) {
            double acc = 0;
            const double* w = s.wflat.data();
            const double* ph = s.phi.data();
            const Index n = s.phi.size();
            for (Index i = 0; i < n; ++i) acc += w[i] * f(ph[i]);
            shell_sum[s.shell] += acc;
        }
        return close(shell_sum);
    }

    /// (2 pi)^{-d} int prod_i cos(x_i theta_i) F(phi) dtheta
    template <typename F>
    ValueWithError integrate_cos(const LatticeVec& x, F&& f) const {
        std::vector<double> shell_sum(shells_, 0.0);
        std::vector<double> c0, c1, c2;
        for (const auto& s : slabs_) {
            double acc = 0;
            const double* ph = s.phi.data();
            cos_axis(s, 0, x.c[0], c0);
            if (d_ == 1) {
                for (Index i = 0; i < s.phi.size(); ++i) acc += c0[i] * f(ph[i]);
            } else if (d_ == 2) {
                cos_axis(s, 1, x.c[1], c1);
                const Index n1 = s.axes[1].size();
                Index flat = 0;
                for (Index i = 0; i < Index(c0.size()); ++i) {
                    double pc = c0[i];
                    double row = 0;
                    for (Index j = 0; j < n1; ++j, ++flat) row += c1[j] * f(ph[flat]);
                    acc += pc * row;
                }
            } else if (d_ == 3) {
                cos_axis(s, 1, x.c[1], c1);
                cos_axis(s, 2, x.c[2], c2);
                const Index n1 = s.axes[1].size(), n2 = s.axes[2].size();
                Index flat = 0;
                for (Index i = 0; i < Index(c0.size()); ++i) {
                    for (Index j = 0; j < n1; ++j) {
                        double pc = c0[i] * c1[j];
                        double row = 0;
                        for (Index k = 0; k < n2; ++k, ++flat) row += c2[k] * f(ph[flat]);
                        acc += pc * row;
                    }
                }
            } else {
                throw std::invalid_argument("FrequencyRule: cosine evaluation supports d <= 3");
            }
            shell_sum[s.shell] += acc;
        }
        return close(shell_sum);
    }

  private:
    void cos_axis(const Slab& s, int axis, Index xa, std::vector<double>& out) const {
        const Index n = s.axes[axis].size();
        out.resize(n);
        const double fac = axis == 0 ? std::pow(2.0, d_) : 1.0;
        for (Index i = 0; i < n; ++i)
            out[i] = fac * s.axis_w[axis][i] * std::cos(double(xa) * s.axes[axis][i]);
    }

    ValueWithError close(const std::vector<double>& shell_sum) const {
        double total = 0;
        for (double v : shell_sum) total += v;
        ValueWithError r;
        // geometric extrapolation of the un-integrated innermost cube
        double s1 = shell_sum[shells_ - 1], s2 = shell_sum[shells_ - 2];
        double rem = 0;
        if (s2 != 0) {
            double q = s1 / s2;
            if (q > 0 && q < 0.97) rem = s1 * q / (1 - q);
        }
        const double norm = std::pow(2 * kPi, -d_);
        r.value = (total + rem) * norm;
        r.error = std::abs(rem) * 0.25 * norm;
        return r;
    }

    int d_;
    int shells_;
    std::vector<Slab> slabs_;
};

}  // namespace detail

namespace {

GreenModel::Options fill_defaults(GreenModel::Options o, int d) {
    if (o.x_max == 0) o.x_max = d == 1 ? 640 : (d == 2 ? 24 : (d == 3 ? 14 : 2));
    if (o.gauss == 0) o.gauss = d == 1 ? 12 : (d == 2 ? 8 : (d == 3 ? 6 : 4));
    if (o.green_radius == 0) o.green_radius = d == 1 ? 600 : (d == 2 ? 16 : 12);
    return o;
}

}  // namespace

GreenModel::GreenModel(const SpectralModel& spectral, Options opt)
    : spectral_(spectral), opt_(fill_defaults(opt, spectral.params().d)) {
    const auto& p = spectral_.params();
    if (!p.transient) {
        std::ostringstream os;
        os << "GreenModel: (d=" << p.d << ", alpha=" << p.alpha
           << ") is recurrent, G(0) diverges (transience needs alpha < d for d <= 2)";
        throw std::domain_error(os.str());
    }
    rule_ = std::make_unique<detail::FrequencyRule>(spectral_.symbol(), opt_.x_max, opt_.shells,
                                                    opt_.gauss);
    rule_coarse_ = std::make_unique<detail::FrequencyRule>(
        spectral_.symbol(), opt_.x_max, opt_.shells - 6, std::max(3, opt_.gauss - 3));
    green0_ = rule_->integrate([](double ph) { return 1.0 / ph; }).value;
    capacity_ = 1.0 / green0_;
    f1_origin_ = StableDensity(spectral_).origin(1.0);
}

GreenModel::GreenModel(const SpectralModel& spectral) : GreenModel(spectral, Options{}) {}

GreenModel::~GreenModel() = default;

double GreenModel::green_function(const LatticeVec& x) const {
    if (x.is_zero()) return green0_;
    return rule_->integrate_cos(x, [](double ph) { return 1.0 / ph; }).value;
}

ValueWithError GreenModel::green_function_with_error(const LatticeVec& x) const {
    auto fine = rule_->integrate_cos(x, [](double ph) { return 1.0 / ph; });
    auto coarse = rule_coarse_->integrate_cos(x, [](double ph) { return 1.0 / ph; });
    return {fine.value, std::abs(fine.value - coarse.value) + fine.error};
}

double GreenModel::escape_probability(const LatticeVec& x) const {
    if (x.is_zero()) return 0.0;
    double phi = 1.0 - capacity_ * green_function(x);
    if (phi < 0.0 || phi > 1.0) {
        clamp_count_.fetch_add(1, std::memory_order_relaxed);
        phi = std::clamp(phi, 0.0, 1.0);
    }
    return phi;
}

double GreenModel::stationary_covariance(const LatticeVec& x, const LatticeVec& y,
                                         double p) const {
    if (!(p > 0 && p < 1)) throw std::domain_error("stationary_covariance: p in (0,1) required");
    return p * (1 - p) * (1.0 - escape_probability(x - y));
}

IdentityReport GreenModel::identity_420(Index R_sum) const {
    if (R_sum < 8) throw std::invalid_argument("identity_420: R_sum >= 8 required");
    const auto& prm = params();
    const int d = prm.d;
    const double dpa = d + prm.alpha;

    double sum_w = 0, sum_gw_exact = 0;
    const Index Rg = std::min<Index>(opt_.green_radius, R_sum);

    // exact G inside Rg; fitted asymptotic G ~ Chat ||y||^{alpha-d} beyond
    double chat_num = 0, chat_den = 0;
    for_each_orthant_rep(d, double(Rg), [&](const LatticeVec& y, double mult) {
        double w = mult * std::pow(y.norm2_sq(), -0.5 * dpa);
        double G = green_function(y);
        sum_gw_exact += w * G;
        double r = y.norm2();
        if (r > double(Rg) - 1.5) {
            chat_num += mult * G * std::pow(r, d - prm.alpha);
            chat_den += mult;
        }
    });
    double chat = chat_den > 0 ? chat_num / chat_den : 0.0;

    double sum_gw_asym = 0;
    for_each_orthant_rep(d, double(R_sum), [&](const LatticeVec& y, double mult) {
        double r2 = y.norm2_sq();
        double w = mult * std::pow(r2, -0.5 * dpa);
        sum_w += w;
        if (r2 > double(Rg) * double(Rg))
            sum_gw_asym += w * chat * std::pow(r2, 0.5 * (prm.alpha - d));
    });

    IdentityReport rep;
    rep.tail = sphere_surface(d) * std::pow(double(R_sum) + 0.5, -prm.alpha) / prm.alpha;
    rep.lhs = sum_w - capacity_ * (sum_gw_exact + sum_gw_asym) + rep.tail;
    rep.rhs = capacity_;
    rep.gap = rep.lhs - rep.rhs;
    return rep;
}

double GreenModel::green_tail(double theta) const {
    if (theta < 0) throw std::domain_error("green_tail: theta >= 0 required");
    if (theta == 0) return green0_;
    return rule_->integrate([theta](double ph) { return std::exp(-theta * ph) / ph; }).value;
}

double GreenModel::occupation_autocov(double theta, double p) const {
    if (!(p > 0 && p < 1)) throw std::domain_error("occupation_autocov: p in (0,1) required");
    return p * (1 - p) * capacity_ * green_tail(theta);
}

double GreenModel::resolvent(const LatticeVec& x, double N) const {
    if (N < 1) throw std::invalid_argument("resolvent: N >= 1 required");
    const double mu = 1.0 / N;
    if (x.is_zero()) return rule_->integrate([mu](double ph) { return 1.0 / (ph + mu); }).value;
    return rule_->integrate_cos(x, [mu](double ph) { return 1.0 / (ph + mu); }).value;
}

double GreenModel::resolvent_norm_sq(double N) const {
    if (N < 1) throw std::invalid_argument("resolvent_norm_sq: N >= 1 required");
    const double mu = 1.0 / N;
    return rule_->integrate([mu](double ph) { return 1.0 / ((ph + mu) * (ph + mu)); }).value;
}

double GreenModel::p00(double s) const {
    if (s < 0) throw std::domain_error("p00: s >= 0 required");
    return rule_->integrate([s](double ph) { return std::exp(-s * ph); }).value;
}

bool GreenModel::double_tail_finite() const {
    const auto& p = params();
    if (p.alpha < 2) return p.alpha < 0.5 * p.d;
    if (p.alpha == 2) return p.d >= 4;
    return p.d >= 5;
}

DoubleTailReport GreenModel::double_tail(double T_cut) const {
    const auto& p = params();
    if (!double_tail_finite()) {
        std::ostringstream os;
        os << "double_tail: int int p_{u+r}(0,0) du dr diverges for (d=" << p.d
           << ", alpha=" << p.alpha << "); the occupation-time normalization is the "
           << scaling_Lambda(16.0, p.d, p.alpha).formula << " branch";
        throw std::domain_error(os.str());
    }
    DoubleTailReport rep;
    rep.T_cut = T_cut;
    // int_0^T r p_r(0,0) dr integrated in the frequency domain
    const double T = T_cut;
    rep.value = rule_->integrate([T](double ph) {
                         double x = T * ph;
                         if (x < 1e-5) return 0.5 * T * T * (1.0 - 2.0 * x / 3.0);
                         return (1.0 - (1.0 + x) * std::exp(-x)) / (ph * ph);
                     })
                    .value;
    // self-similar closure of int_T^inf r p_r dr via p_r ~ f_1(0) h_alpha(r)^{-d}
    double tail;
    if (p.alpha < 2) {
        double q = double(p.d) / p.alpha;
        tail = f1_origin_ * std::pow(T, 2.0 - q) / (q - 2.0);
    } else if (p.alpha > 2) {
        double q = 0.5 * p.d;
        tail = f1_origin_ * std::pow(T, 2.0 - q) / (q - 2.0);
    } else {
        // d = 4, alpha = 2: p_r ~ f_1(0) (r log r)^{-2}
        tail = f1_origin_ / std::log(T);
    }
    rep.tail_part = tail;
    rep.value += tail;
    rep.freq_value = rule_->integrate([](double ph) { return 1.0 / (ph * ph); }).value;
    return rep;
}

}  // namespace lrvm
