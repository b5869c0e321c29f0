#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "lrvm/kernel.hpp"
#include "lrvm/lattice.hpp"

namespace lrvm {

/// Walk spread scale: sqrt(t) for alpha>2, sqrt(t log t) for alpha=2
/// (needs t>1), t^{1/alpha} for alpha<2.
double scaling_h(double t, double alpha);

struct LambdaBranch {
    double value = 0;          // Lambda_{d,alpha}(N)
    std::string formula;       // human-readable branch formula
    bool fbm = false;          // fractional branch (Hurst > 1/2)
    double hurst = 0.5;
};

/// Occupation-time normalization of the limit theorems. Refuses recurrent
/// (d, alpha) with a classification message.
LambdaBranch scaling_Lambda(double N, int d, double alpha);

/// Symbol phi(theta) = sum_{y != 0} (1 - cos(theta . y)) w(y), evaluated as an
/// exact lattice sum over ||y|| <= R_phi plus an isotropic integral tail
/// correction. Shared by point queries, FFT grids, and quadrature rules.
class SymbolTable {
  public:
    SymbolTable(const KernelParams& params, Index R_phi);

    const KernelParams& params() const { return params_; }
    Index radius() const { return R_phi_; }
    double ball_mass() const { return lambda_R_; }
    /// total mass estimate (ball + integral tail)
    double total_mass() const { return lambda_R_ + tail_correction(0.0, true); }

    double operator()(const double* theta) const;
    double operator()(const std::vector<double>& theta) const {
        return (*this)(theta.data());
    }

    /// tail of sum_{||y|| > R} (1 - cos(theta.y)) w(y), isotropic approximation;
    /// mass_only = true drops the cosine part (pure kernel tail mass).
    double tail_correction(double theta_norm, bool mass_only = false) const;

    /// phi on a tensor grid: axis_nodes[a] lists the theta_a values; returns
    /// the flattened row-major tensor. Evaluated with matrix products.
    Eigen::ArrayXd on_tensor_grid(const std::vector<Eigen::VectorXd>& axis_nodes) const;

  private:
    double small_theta_phi(const double* theta, double s) const;

    KernelParams params_;
    Index R_phi_;
    double lambda_R_ = 0;
    Eigen::ArrayXd weight_tensor_;  // orbit-folded weights on [0,R]^d, row-major
    Index m_ = 0;                   // R_phi + 1 (per-axis extent)
    // ball moments for the cancellation-free small-theta expansion
    double m2_ = 0, m4_ = 0, m22_ = 0, m6_ = 0, m42_ = 0, m222_ = 0;
    double small_cut_ = 0;  // switch to the moment expansion below this ||theta||
    // cumulative tail integral Q(a) = int_a^inf rho^{-1-alpha}(1-A_d(rho)) drho
    std::vector<double> q_log_a_, q_val_;
    double q_a_min_ = 0, q_a_max_ = 0;
    double q_mass_at_amax_ = 0;

    double q_lookup(double a) const;
    friend class StableDensity;
    friend class SpectralModel;
};

/// Wrapped-walk transition probabilities from a discrete Fourier inversion of
/// psi_t on the M-grid. Exact for the walk folded onto (Z/MZ)^d; the
/// wrap-around mass is reported as aliasing_bound.
struct TransitionTable {
    int d = 1;
    double t = 0;
    Index M = 0;
    Index B = 0;  // query box radius (infinity norm)
    double aliasing_bound = 0;
    double box_mass = 0;
    double residual = 0;
    std::vector<double> grid;  // full M^d wrapped table, row-major

    double at(const LatticeVec& x) const;
    double origin() const;
};

class SpectralModel {
  public:
    SpectralModel(const KernelParams& params, Index R_phi);
    explicit SpectralModel(const KernelParams& params);

    static Index default_R_phi(int d);
    static Index default_grid(int d);

    const KernelParams& params() const { return params_; }
    const SymbolTable& symbol() const { return symbol_; }

    double symbol_phi(const std::vector<double>& theta) const { return symbol_(theta); }
    double char_fn_walk(const std::vector<double>& theta, double t) const;

    /// Gaussian-branch constants
    double Gtilde() const { return Gtilde_; }           // alpha < 2
    double sigma_sq() const { return sigma_sq_; }        // alpha > 2 (per-axis)
    double K_diag() const { return K_diag_; }            // alpha = 2: S_{d-1}/(2d)

    double stable_char(const std::vector<double>& theta, double t) const;

    TransitionTable transition_table(double t, Index M, Index B) const;
    TransitionTable transition_table(double t) const;

  private:
    KernelParams params_;
    SymbolTable symbol_;
    double Gtilde_ = 0;
    double sigma_sq_ = 0;
    double K_diag_ = 0;
};

/// Density f_t of the limiting stable (or Gaussian) process, via radially
/// reduced quadrature for alpha < 2 and closed Gaussian forms for alpha >= 2.
class StableDensity {
  public:
    explicit StableDensity(const SpectralModel& model);

    double origin(double t) const;                  // closed form f_t(0)
    double value(double u_norm, double t) const;    // f_t at radius ||u||
    /// self-similarity exponent: f_t(0) = t^{-d/index} f_1(0)
    double similarity_index() const;

    /// radial interpolation table of f_t on [0, u_max]
    class Radial {
      public:
        double operator()(double u_norm) const;
        double u_max() const { return umax_; }

      private:
        friend class StableDensity;
        double umax_ = 0, du_ = 0;
        std::vector<double> vals_;
    };
    Radial tabulate(double t, double u_max, int points = 8192) const;

    /// int f_t over R^d by radial quadrature of the table plus the heavy-tail
    /// closure t S_{d-1} R^{-alpha}/alpha (alpha < 2); Gaussian branch closed.
    double total_mass(double t) const;

  private:
    const SpectralModel* model_;
    int d_;
    double alpha_;
};

struct LcltReport {
    double sup_error = 0;
    LatticeVec location;
    double f_origin = 0;       // f_t(0)
    double scaled_p_origin = 0;  // h^d p_{tN}(0,0)
    double h = 0;
};

/// Sup-norm local-CLT discrepancy sup_x | h_alpha(N)^d p_{tN}(0,x) - f_t(x/h) |
/// over the table box.
LcltReport lclt_error(double N, double t, const SpectralModel& model, Index M, Index B);
LcltReport lclt_error(double N, double t, const SpectralModel& model);

}  // namespace lrvm
