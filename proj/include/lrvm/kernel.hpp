#pragma once

#include <cstdint>
#include <vector>

#include "lrvm/lattice.hpp"
#include "lrvm/rng.hpp"

namespace lrvm {

/// Model parameters of the long-range kernel w(y) = ||y||_2^{-(d+alpha)}.
struct KernelParams {
    int d = 1;
    double alpha = 0.5;
    bool transient = false;

    KernelParams() = default;
    KernelParams(int d_, double alpha_);
};

/// True iff the long-range walk with these parameters is transient:
/// d ∈ {1,2} requires alpha < d, any alpha works for d >= 3.
bool is_transient(int d, double alpha);

/// w(y) for y != 0. Throws on y = 0 (the kernel excludes the origin).
double kernel_weight(const LatticeVec& y, const KernelParams& params);

struct MassEstimate {
    double lambda = 0;       // exact ball sum + midpoint tail estimate
    double error_bound = 0;  // true bound on the tail-estimate error
    double ball_sum = 0;     // exact sum over 0 < ||y|| <= R
    double tail = 0;         // midpoint tail estimate
};

/// Total kernel mass  sum_{y != 0} w(y), split as an exact lattice sum over
/// the ball of radius R plus a midpoint-corrected integral tail. The bound
/// brackets the true tail between cell-geometry integrals, so the estimate
/// never drifts outside [lambda - bound, lambda + bound] as R grows.
MassEstimate kernel_mass(const KernelParams& params, Index R);

/// Walker alias table for O(1) draws from a fixed discrete distribution.
class AliasTable {
  public:
    AliasTable() = default;
    explicit AliasTable(const std::vector<double>& weights);
    std::size_t sample(RandomStream& rng) const;
    std::size_t size() const { return prob_.size(); }

  private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

/// Exact sampler for the jump law w(y)/lambda on Z^d. Displacements inside
/// radius R come from an alias table; the tail uses rejection against a
/// continuous isotropic power-law envelope rounded to the lattice.
class JumpSampler {
  public:
    JumpSampler(const KernelParams& params, Index R);
    static Index default_radius(int d);

    const KernelParams& params() const { return params_; }
    double total_rate() const { return lambda_; }
    double tail_mass() const { return tail_mass_; }
    double mass_error_bound() const { return mass_.error_bound; }
    Index exact_radius() const { return R_; }

    LatticeVec sample(RandomStream& rng) const;

    /// probability of drawing exactly y (for the exact region only; used by tests)
    double exact_region_prob(const LatticeVec& y) const;

  private:
    LatticeVec sample_tail(RandomStream& rng) const;

    KernelParams params_;
    Index R_;
    MassEstimate mass_;
    double lambda_ = 0;
    double inside_mass_ = 0;
    double tail_mass_ = 0;
    double accept_norm_ = 1;  // envelope domination constant
    std::vector<LatticeVec> points_;
    AliasTable alias_;
    long max_rejection_iters_ = 1000000;
};

/// Folded kernel on the torus (Z/LZ)^d: for each nonzero displacement class z
/// (minimal-image representative), the weight sum over lattice images within
/// `images` boxes per axis. Used by the finite-volume forward simulation.
class TorusKernel {
  public:
    TorusKernel(const KernelParams& params, Index L, int images = 3);

    const KernelParams& params() const { return params_; }
    Index L() const { return L_; }
    double total_rate() const { return lambda_L_; }
    double truncation_bound() const { return truncation_bound_; }
    std::size_t count() const { return displacements_.size(); }
    const LatticeVec& displacement(std::size_t i) const { return displacements_[i]; }
    double weight_of(std::size_t i) const { return weights_[i]; }

    /// folded weight of a displacement class given any representative
    double weight(const LatticeVec& z) const;

    const LatticeVec& sample(RandomStream& rng) const {
        return displacements_[alias_.sample(rng)];
    }

  private:
    KernelParams params_;
    Index L_;
    double lambda_L_ = 0;
    double truncation_bound_ = 0;
    std::vector<LatticeVec> displacements_;
    std::vector<double> weights_;
    AliasTable alias_;
};

}  // namespace lrvm
