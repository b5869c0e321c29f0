#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lrvm/kernel.hpp"
#include "lrvm/lattice.hpp"
#include "lrvm/rng.hpp"

namespace lrvm {

/// Continuous-time walk trajectory: piecewise constant between jump times.
struct WalkPath {
    LatticeVec start;
    double horizon = 0;
    std::vector<double> times;          // strictly increasing jump times
    std::vector<LatticeVec> positions;  // position after the k-th jump

    LatticeVec position_at(double t) const;
    std::size_t jump_count() const { return times.size(); }
};

WalkPath simulate_walk(const LatticeVec& x0, double T, const JumpSampler& sampler,
                       RandomStream& rng);

/// Position packing for the collision index (d <= 3).
std::uint64_t pack_position(const LatticeVec& x);

/// Open-addressing map from packed positions to class ids.
class PositionMap {
  public:
    explicit PositionMap(std::size_t expect = 16);
    std::int32_t find(std::uint64_t key) const;
    void insert(std::uint64_t key, std::int32_t id);
    void set(std::uint64_t key, std::int32_t id);
    void erase(std::uint64_t key);
    std::size_t size() const { return size_; }

  private:
    void grow();
    std::size_t slot(std::uint64_t key) const;
    std::vector<std::uint64_t> keys_;
    std::vector<std::int32_t> vals_;
    std::size_t mask_ = 0, size_ = 0;
};

/// Lattice policies for the coalescing engine.
struct ZLattice {
    const JumpSampler* sampler;
    int dim() const { return sampler->params().d; }
    double rate() const { return sampler->total_rate(); }
    void jump(LatticeVec& pos, RandomStream& rng) const {
        LatticeVec dz = sampler->sample(rng);
        for (int i = 0; i < pos.dim; ++i) pos.c[i] += dz.c[i];
    }
};

struct TorusLattice {
    const TorusKernel* kernel;
    int dim() const { return kernel->params().d; }
    double rate() const { return kernel->total_rate(); }
    void jump(LatticeVec& pos, RandomStream& rng) const {
        const LatticeVec& dz = kernel->sample(rng);
        const Index L = kernel->L();
        for (int i = 0; i < pos.dim; ++i) {
            pos.c[i] += dz.c[i];
            if (pos.c[i] < 0) pos.c[i] += L;
            else if (pos.c[i] >= L) pos.c[i] -= L;
        }
    }
};

/// Coalescing system with delayed activations. Walkers rest at their start
/// site and are transparent to collisions until activation; active classes
/// perform independent rate-lambda walks and merge on collision.
template <class Lattice>
class CoalescingSystem {
  public:
    CoalescingSystem(const Lattice& lat, RandomStream& rng) : lat_(lat), rng_(&rng) {}

    /// schedule a walker; returns its id. Must be called before run passes
    /// its activation time.
    int add_walker(const LatticeVec& start, double activation);

    void run_until(double T);

    double time() const { return time_; }
    /// number of distinct classes among activated walkers
    int active_classes() const { return static_cast<int>(active_.size()) + (held_ >= 0 ? 1 : 0); }
    int find_class(int walker_id);
    const LatticeVec& class_position(int class_id) const { return pos_[class_id]; }
    long merge_count() const { return static_cast<long>(merge_times_.size()); }
    long merges_since(double t0) const;

    /// origin-hold mode: while enabled, a class occupying the origin is
    /// frozen (its clock is driven externally via origin_event)
    void set_origin_hold(bool on);
    /// the origin's graphical event: any class at the origin relocates to y;
    /// returns the class now occupying y (merging as needed), or -1
    int origin_event(const LatticeVec& y);
    /// place a new walker at y, merging with any resident class
    int spawn_at(const LatticeVec& y);

  private:
    int root(int v);
    void unite_into(int winner, int loser);
    void remove_active(int id);
    void do_jump();

    Lattice lat_;
    RandomStream* rng_;
    double time_ = 0;

    std::vector<std::int32_t> parent_;
    std::vector<LatticeVec> pos_;        // valid for roots only
    std::vector<std::int32_t> slot_;     // index into active_ (roots), -1 if not walking
    std::vector<std::int32_t> active_;   // walking roots
    PositionMap map_;

    struct Pending {
        double when;
        LatticeVec where;
        int id;
    };
    std::vector<Pending> pending_;  // sorted by activation time, ascending
    std::size_t next_pending_ = 0;

    bool origin_hold_ = false;
    std::int32_t held_ = -1;  // root frozen at the origin
    std::vector<double> merge_times_;
};

struct MCEstimate {
    double value = 0;
    double std_error = 0;
    long replicas = 0;
};

enum class DualLattice { Z, Torus };

struct DualOptions {
    DualLattice lattice = DualLattice::Z;
    Index torus_L = 0;       // required for Torus
    Index sampler_radius = 0;  // 0 = default
    int threads = 1;
};

/// Monte Carlo estimate of P(eta_t(x_i) = 1 for all i) under product(p)
/// initial law, via E p^{A_t} over the coalescing dual.
MCEstimate dual_moment(const std::vector<LatticeVec>& sites, double t, double p, long replicas,
                       const KernelParams& params, std::uint64_t seed, DualOptions opt = {});

/// A_t for nested-site monotonicity checks: mean of p^{A_t} with the sites
/// given (single replica helper used by tests)
double dual_moment_once(const std::vector<LatticeVec>& sites, double t, double p,
                        const JumpSampler& sampler, RandomStream& rng);

struct EscapeEstimate {
    double value = 0;
    double std_error = 0;
    double bias_bound = 0;  // finite-horizon correction scale C * green_tail(2T)
    long replicas = 0;
};

/// Fraction of difference walks (rate 2 lambda, start x) that never visit the
/// origin by time T. The caller supplies C * green_tail(2T) as bias scale via
/// `bias_bound` if available (0 otherwise).
EscapeEstimate estimate_escape(const LatticeVec& x, double T, long replicas,
                               const KernelParams& params, std::uint64_t seed,
                               double bias_bound = 0, int threads = 1,
                               Index sampler_radius = 0);

struct StationarySample {
    std::vector<std::uint8_t> values;  // one per window site
    int surviving_classes = 0;
    long merges_last_decade = 0;
};

/// One draw from the duality sampler for nu_p on a finite window: coalescing
/// walks from every window site for T_burn, then one Bernoulli(p) per class.
StationarySample sample_stationary(const std::vector<LatticeVec>& window, double p, double T_burn,
                                   const JumpSampler& sampler, RandomStream& rng);

/// Exact occupation-time path of the origin over [0, N] under the (duality)
/// stationary law, by reconstructing the origin's opinion segments from a
/// backward coalescing system fed at the origin's own update times. T_stat
/// extends the backward run to approximate the nu_p class assignment.
struct OccupationPath {
    std::vector<double> xi;  // occupation integral at the requested times
    int segments = 0;
    int final_classes = 0;
};

OccupationPath occupation_path_dual(double N, const std::vector<double>& times, double p,
                                    double T_stat, const JumpSampler& sampler, RandomStream& rng);

}  // namespace lrvm
