#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "lrvm/spectral.hpp"

namespace lrvm {

namespace detail {
class FrequencyRule;
}

struct ValueWithError {
    double value = 0;
    double error = 0;
};

struct IdentityReport {
    double lhs = 0;   // truncated sum + Phi->1 tail estimate
    double rhs = 0;   // C_{d,alpha}
    double gap = 0;
    double tail = 0;  // the tail estimate folded into lhs
};

struct DoubleTailReport {
    double value = 0;       // time-domain: int_0^T r p_r dr + self-similar tail
    double freq_value = 0;  // (2 pi)^{-d} int phi^{-2}
    double tail_part = 0;
    double T_cut = 0;
};

/// Green function, escape probability, capacity constant and the
/// stationary-measure identities. Construction requires a transient kernel.
class GreenModel {
  public:
    struct Options {
        Index x_max = 0;          // largest lattice coordinate resolved by the rule (0 = per-d default)
        int shells = 60;          // dyadic refinement depth toward theta = 0
        int gauss = 0;            // Gauss order per panel (0 = per-d default)
        Index green_radius = 0;   // exact-G radius for lattice sums (0 = per-d default)
    };

    explicit GreenModel(const SpectralModel& spectral);
    GreenModel(const SpectralModel& spectral, Options opt);
    ~GreenModel();
    GreenModel(const GreenModel&) = delete;
    GreenModel& operator=(const GreenModel&) = delete;

    const SpectralModel& spectral() const { return spectral_; }
    const KernelParams& params() const { return spectral_.params(); }

    /// G(x) = (2 pi)^{-d} int cos(x.theta)/phi(theta) dtheta
    double green_function(const LatticeVec& x) const;
    ValueWithError green_function_with_error(const LatticeVec& x) const;
    double green0() const { return green0_; }

    /// C_{d,alpha} = 1/G(0)
    double capacity_constant() const { return capacity_; }

    /// Phi(x) = 1 - C G(x), clamped to [0,1]; clamps are counted, not fatal
    double escape_probability(const LatticeVec& x) const;
    long clamp_count() const { return clamp_count_.load(); }

    /// Cov_{nu_p}(eta(x), eta(y)) = p(1-p)(1 - Phi(x-y))
    double stationary_covariance(const LatticeVec& x, const LatticeVec& y, double p) const;

    /// sum_{y != 0} Phi(y) w(y) vs C_{d,alpha}
    IdentityReport identity_420(Index R_sum) const;

    /// int_theta^inf p_s(0,0) ds; equals G(0) at theta = 0 by construction
    double green_tail(double theta) const;

    /// Cov_{nu_p}(eta_theta(0), eta_0(0)) = p(1-p) C green_tail(theta)
    double occupation_autocov(double theta, double p) const;

    /// Upsilon_N(x) = int_0^inf e^{-s/N} p_s(0,x) ds, frequency form
    double resolvent(const LatticeVec& x, double N) const;
    /// sum_x Upsilon_N(x)^2 = (2 pi)^{-d} int (phi + 1/N)^{-2}
    double resolvent_norm_sq(double N) const;

    /// p_s(0,0) from the cached rule (smooth integrand; no FFT grid)
    double p00(double s) const;

    bool double_tail_finite() const;
    DoubleTailReport double_tail(double T_cut = 1e4) const;

  private:
    SpectralModel spectral_;
    Options opt_;
    std::unique_ptr<detail::FrequencyRule> rule_, rule_coarse_;
    double green0_ = 0;
    double capacity_ = 0;
    double f1_origin_ = 0;
    mutable std::atomic<long> clamp_count_{0};
};

}  // namespace lrvm
