#include "lrvm/coalesce.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lrvm/parallel.hpp"

namespace lrvm {

LatticeVec WalkPath::position_at(double t) const {
    if (t < 0) throw std::domain_error("WalkPath: t >= 0 required");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return start;
    return positions[std::distance(times.begin(), it) - 1];
}

WalkPath simulate_walk(const LatticeVec& x0, double T, const JumpSampler& sampler,
                       RandomStream& rng) {
    if (T < 0) throw std::domain_error("simulate_walk: T >= 0 required");
    WalkPath path;
    path.start = x0;
    path.horizon = T;
    const double rate = sampler.total_rate();
    LatticeVec pos = x0;
    double t = rng.exponential(rate);
    while (t <= T) {
        LatticeVec dz = sampler.sample(rng);
        for (int i = 0; i < pos.dim; ++i) pos.c[i] += dz.c[i];
        path.times.push_back(t);
        path.positions.push_back(pos);
        t += rng.exponential(rate);
    }
    return path;
}

std::uint64_t pack_position(const LatticeVec& x) {
    switch (x.dim) {
        case 1:
            return static_cast<std::uint64_t>(x.c[0]);
        case 2:
            return (static_cast<std::uint64_t>(x.c[0] + (Index(1) << 30)) << 32) |
                   static_cast<std::uint64_t>(std::uint32_t(x.c[1] + (Index(1) << 30)));
        case 3:
            return (static_cast<std::uint64_t>(x.c[0] + (Index(1) << 20)) << 42) |
                   (static_cast<std::uint64_t>(x.c[1] + (Index(1) << 20)) << 21) |
                   static_cast<std::uint64_t>(x.c[2] + (Index(1) << 20));
        default:
            throw std::invalid_argument("pack_position: d <= 3 supported");
    }
}

PositionMap::PositionMap(std::size_t expect) {
    std::size_t cap = 16;
    while (cap < expect * 2) cap <<= 1;
    keys_.assign(cap, 0);
    vals_.assign(cap, -1);
    mask_ = cap - 1;
}

std::size_t PositionMap::slot(std::uint64_t key) const {
    return detail::splitmix64(key) & mask_;
}

std::int32_t PositionMap::find(std::uint64_t key) const {
    std::size_t i = slot(key);
    while (vals_[i] >= 0) {
        if (keys_[i] == key) return vals_[i];
        i = (i + 1) & mask_;
    }
    return -1;
}

void PositionMap::grow() {
    std::vector<std::uint64_t> ok = std::move(keys_);
    std::vector<std::int32_t> ov = std::move(vals_);
    std::size_t cap = (mask_ + 1) * 2;
    keys_.assign(cap, 0);
    vals_.assign(cap, -1);
    mask_ = cap - 1;
    size_ = 0;
    for (std::size_t i = 0; i < ov.size(); ++i)
        if (ov[i] >= 0) insert(ok[i], ov[i]);
}

void PositionMap::insert(std::uint64_t key, std::int32_t id) {
    if ((size_ + 1) * 10 > (mask_ + 1) * 6) grow();
    std::size_t i = slot(key);
    while (vals_[i] >= 0) i = (i + 1) & mask_;
    keys_[i] = key;
    vals_[i] = id;
    ++size_;
}

void PositionMap::set(std::uint64_t key, std::int32_t id) {
    std::size_t i = slot(key);
    while (vals_[i] >= 0) {
        if (keys_[i] == key) {
            vals_[i] = id;
            return;
        }
        i = (i + 1) & mask_;
    }
    insert(key, id);
}

void PositionMap::erase(std::uint64_t key) {
    std::size_t i = slot(key);
    while (vals_[i] >= 0 && keys_[i] != key) i = (i + 1) & mask_;
    if (vals_[i] < 0) return;
    // backward-shift deletion keeps probe chains intact
    for (;;) {
        vals_[i] = -1;
        std::size_t j = i;
        for (;;) {
            j = (j + 1) & mask_;
            if (vals_[j] < 0) {
                --size_;
                return;
            }
            std::size_t k = slot(keys_[j]);
            if (((j - k) & mask_) >= ((j - i) & mask_)) {
                keys_[i] = keys_[j];
                vals_[i] = vals_[j];
                i = j;
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// CoalescingSystem

template <class L>
int CoalescingSystem<L>::add_walker(const LatticeVec& start, double activation) {
    if (activation < time_)
        throw std::invalid_argument("CoalescingSystem: activation time already passed");
    int id = static_cast<int>(parent_.size());
    parent_.push_back(id);
    pos_.push_back(start);
    slot_.push_back(-1);
    Pending p{activation, start, id};
    auto it = std::upper_bound(pending_.begin() + next_pending_, pending_.end(), activation,
                               [](double a, const Pending& b) { return a < b.when; });
    pending_.insert(it, p);
    return id;
}

template <class L>
int CoalescingSystem<L>::root(int v) {
    while (parent_[v] != v) {
        parent_[v] = parent_[parent_[v]];
        v = parent_[v];
    }
    return v;
}

template <class L>
int CoalescingSystem<L>::find_class(int walker_id) {
    return root(walker_id);
}

template <class L>
void CoalescingSystem<L>::remove_active(int id) {
    std::int32_t s = slot_[id];
    if (s < 0) return;
    std::int32_t last = active_.back();
    active_[s] = last;
    slot_[last] = s;
    active_.pop_back();
    slot_[id] = -1;
}

template <class L>
void CoalescingSystem<L>::unite_into(int winner, int loser) {
    parent_[loser] = winner;
    remove_active(loser);
    merge_times_.push_back(time_);
}

template <class L>
void CoalescingSystem<L>::do_jump() {
    const int idx = static_cast<int>(rng_->below(active_.size()));
    const int id = active_[idx];
    const std::uint64_t old_key = pack_position(pos_[id]);
    lat_.jump(pos_[id], *rng_);
    const std::uint64_t new_key = pack_position(pos_[id]);
    map_.erase(old_key);
    const std::int32_t res = map_.find(new_key);
    if (res >= 0) {
        unite_into(res, id);
        return;
    }
    map_.insert(new_key, id);
    if (origin_hold_ && held_ < 0 && pos_[id].is_zero()) {
        // the origin's clock is driven by its recorded update times
        remove_active(id);
        held_ = id;
    }
}

template <class L>
void CoalescingSystem<L>::run_until(double T) {
    const double rate = lat_.rate();
    for (;;) {
        const bool pending_left = next_pending_ < pending_.size();
        // settled: nothing can change the partition any more
        if (!pending_left && !origin_hold_ && held_ < 0 && active_.size() <= 1) {
            time_ = T;
            return;
        }
        double t_act = pending_left ? pending_[next_pending_].when : 1e300;
        double t_jump = 1e300;
        if (!active_.empty()) t_jump = time_ + rng_->exponential(double(active_.size()) * rate);
        if (std::min(t_act, t_jump) > T) {
            time_ = T;
            return;
        }
        if (t_act <= t_jump) {
            time_ = t_act;
            const Pending p = pending_[next_pending_++];
            const std::uint64_t key = pack_position(p.where);
            const std::int32_t res = map_.find(key);
            if (res >= 0) {
                parent_[p.id] = res;
                merge_times_.push_back(time_);
            } else {
                map_.insert(key, p.id);
                if (origin_hold_ && held_ < 0 && p.where.is_zero()) {
                    held_ = p.id;
                } else {
                    slot_[p.id] = static_cast<std::int32_t>(active_.size());
                    active_.push_back(p.id);
                }
            }
        } else {
            time_ = t_jump;
            do_jump();
        }
    }
}

template <class L>
long CoalescingSystem<L>::merges_since(double t0) const {
    auto it = std::lower_bound(merge_times_.begin(), merge_times_.end(), t0);
    return std::distance(it, merge_times_.end());
}

template <class L>
void CoalescingSystem<L>::set_origin_hold(bool on) {
    if (origin_hold_ && !on && held_ >= 0) {
        slot_[held_] = static_cast<std::int32_t>(active_.size());
        active_.push_back(held_);
        held_ = -1;
    }
    origin_hold_ = on;
}

template <class L>
int CoalescingSystem<L>::origin_event(const LatticeVec& y) {
    const int cur = held_;
    if (cur >= 0) {
        map_.erase(pack_position(pos_[cur]));
        held_ = -1;
        pos_[cur] = y;
        const std::uint64_t key = pack_position(y);
        const std::int32_t res = map_.find(key);
        if (res >= 0) {
            parent_[cur] = res;
            merge_times_.push_back(time_);
            return res;
        }
        map_.insert(key, cur);
        slot_[cur] = static_cast<std::int32_t>(active_.size());
        active_.push_back(cur);
        return cur;
    }
    return map_.find(pack_position(y));
}

template <class L>
int CoalescingSystem<L>::spawn_at(const LatticeVec& y) {
    int id = static_cast<int>(parent_.size());
    parent_.push_back(id);
    pos_.push_back(y);
    slot_.push_back(-1);
    const std::uint64_t key = pack_position(y);
    const std::int32_t res = map_.find(key);
    if (res >= 0) {
        parent_[id] = res;
        merge_times_.push_back(time_);
        return id;
    }
    map_.insert(key, id);
    if (origin_hold_ && held_ < 0 && y.is_zero()) {
        held_ = id;
    } else {
        slot_[id] = static_cast<std::int32_t>(active_.size());
        active_.push_back(id);
    }
    return id;
}

template class CoalescingSystem<ZLattice>;
template class CoalescingSystem<TorusLattice>;

// ---------------------------------------------------------------------------
// Monte Carlo operations

namespace {

template <class L>
double dual_once(const L& lat, const std::vector<LatticeVec>& sites, double t, double p,
                 RandomStream& rng) {
    CoalescingSystem<L> sys(lat, rng);
    for (const auto& s : sites) sys.add_walker(s, 0.0);
    sys.run_until(t);
    return std::pow(p, sys.active_classes());
}

MCEstimate reduce_mean(const std::vector<double>& vals) {
    MCEstimate e;
    e.replicas = static_cast<long>(vals.size());
    double m = 0;
    for (double v : vals) m += v;
    m /= double(e.replicas);
    double s2 = 0;
    for (double v : vals) s2 += (v - m) * (v - m);
    e.value = m;
    e.std_error = std::sqrt(s2 / double(e.replicas - 1) / double(e.replicas));
    return e;
}

}  // namespace

double dual_moment_once(const std::vector<LatticeVec>& sites, double t, double p,
                        const JumpSampler& sampler, RandomStream& rng) {
    ZLattice lat{&sampler};
    return dual_once(lat, sites, t, p, rng);
}

MCEstimate dual_moment(const std::vector<LatticeVec>& sites, double t, double p, long replicas,
                       const KernelParams& params, std::uint64_t seed, DualOptions opt) {
    if (!(p > 0 && p < 1)) throw std::domain_error("dual_moment: p in (0,1) required");
    if (replicas < 100) throw std::invalid_argument("dual_moment: replicas >= 100 required");
    Index R = opt.sampler_radius ? opt.sampler_radius : JumpSampler::default_radius(params.d);
    std::vector<double> vals(replicas);
    if (opt.lattice == DualLattice::Z) {
        JumpSampler sampler(params, R);
        ZLattice lat{&sampler};
        parallel_for(replicas, opt.threads, [&](std::size_t r) {
            RandomStream rng = seed_stream(seed, "dual_moment", r);
            vals[r] = dual_once(lat, sites, t, p, rng);
        });
    } else {
        if (opt.torus_L < 4) throw std::invalid_argument("dual_moment: torus_L required");
        TorusKernel kernel(params, opt.torus_L);
        TorusLattice lat{&kernel};
        parallel_for(replicas, opt.threads, [&](std::size_t r) {
            RandomStream rng = seed_stream(seed, "dual_moment", r);
            vals[r] = dual_once(lat, sites, t, p, rng);
        });
    }
    return reduce_mean(vals);
}

EscapeEstimate estimate_escape(const LatticeVec& x, double T, long replicas,
                               const KernelParams& params, std::uint64_t seed, double bias_bound,
                               int threads, Index sampler_radius) {
    EscapeEstimate e;
    e.bias_bound = bias_bound;
    e.replicas = replicas;
    if (x.is_zero()) return e;  // Phi(0) = 0 exactly
    Index R = sampler_radius ? sampler_radius : JumpSampler::default_radius(params.d);
    JumpSampler sampler(params, R);
    const double rate = 2.0 * sampler.total_rate();  // difference walk runs twice as fast
    std::vector<std::uint8_t> escaped(replicas, 0);
    parallel_for(replicas, threads, [&](std::size_t r) {
        RandomStream rng = seed_stream(seed, "escape", r);
        LatticeVec pos = x;
        double t = rng.exponential(rate);
        bool esc = true;
        while (t <= T) {
            LatticeVec dz = sampler.sample(rng);
            for (int i = 0; i < pos.dim; ++i) pos.c[i] += dz.c[i];
            if (pos.is_zero()) {
                esc = false;
                break;
            }
            t += rng.exponential(rate);
        }
        escaped[r] = esc ? 1 : 0;
    });
    long hits = 0;
    for (auto v : escaped) hits += v;
    e.value = double(hits) / double(replicas);
    e.std_error = std::sqrt(e.value * (1.0 - e.value) / double(replicas));
    return e;
}

StationarySample sample_stationary(const std::vector<LatticeVec>& window, double p, double T_burn,
                                   const JumpSampler& sampler, RandomStream& rng) {
    if (!(T_burn > 0)) throw std::domain_error("sample_stationary: T_burn > 0 required");
    if (!sampler.params().transient)
        throw std::domain_error("sample_stationary: transient (d, alpha) required");
    ZLattice lat{&sampler};
    CoalescingSystem<ZLattice> sys(lat, rng);
    std::vector<int> ids(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) ids[i] = sys.add_walker(window[i], 0.0);
    sys.run_until(T_burn);

    StationarySample out;
    out.merges_last_decade = sys.merges_since(T_burn * 0.9);
    out.values.resize(window.size());
    std::vector<std::int8_t> assigned(ids.empty() ? 0 : ids.size() + 1, -1);
    int classes = 0;
    for (std::size_t i = 0; i < window.size(); ++i) {
        int r = sys.find_class(ids[i]);
        if (assigned[r] < 0) {
            assigned[r] = rng.bernoulli(p) ? 1 : 0;
            ++classes;
        }
        out.values[i] = static_cast<std::uint8_t>(assigned[r]);
    }
    out.surviving_classes = classes;
    return out;
}

OccupationPath occupation_path_dual(double N, const std::vector<double>& times, double p,
                                    double T_stat, const JumpSampler& sampler,
                                    RandomStream& rng) {
    const int d = sampler.params().d;
    const double rate = sampler.total_rate();

    // the origin's own update moments over forward time (0, N]
    std::vector<double> tau;
    {
        double t = rng.exponential(rate);
        while (t <= N) {
            tau.push_back(t);
            t += rng.exponential(rate);
        }
    }
    const int K = static_cast<int>(tau.size());

    ZLattice lat{&sampler};
    CoalescingSystem<ZLattice> sys(lat, rng);
    sys.set_origin_hold(true);

    // backward run: births at b_j = N - tau_j trace eta_{tau_j}(0) = eta_{tau_j-}(y_j)
    std::vector<int> walker_of_segment(K + 1, -1);
    for (int j = K - 1; j >= 0; --j) {
        sys.run_until(N - tau[j]);
        LatticeVec y = sampler.sample(rng);
        sys.origin_event(y);
        walker_of_segment[j + 1] = sys.spawn_at(y);
    }
    sys.run_until(N);
    sys.set_origin_hold(false);
    walker_of_segment[0] = sys.spawn_at(LatticeVec(d));  // the site itself at forward time 0
    sys.run_until(N + T_stat);

    // one Bernoulli(p) opinion per surviving class
    OccupationPath out;
    out.segments = K + 1;
    std::vector<std::int8_t> seg_value(K + 1);
    {
        std::vector<std::int8_t> assigned;
        int classes = 0;
        for (int j = 0; j <= K; ++j) {
            int r = sys.find_class(walker_of_segment[j]);
            if (r >= int(assigned.size())) assigned.resize(r + 1, -1);
            if (assigned[r] < 0) {
                assigned[r] = rng.bernoulli(p) ? 1 : 0;
                ++classes;
            }
            seg_value[j] = assigned[r];
        }
        out.final_classes = classes;
    }

    // xi(T') = sum_j v_j |[s_j, s_{j+1}) cap [0, T')|
    out.xi.assign(times.size(), 0.0);
    for (int j = 0; j <= K; ++j) {
        if (!seg_value[j]) continue;
        double s0 = j == 0 ? 0.0 : tau[j - 1];
        double s1 = j == K ? N : tau[j];
        for (std::size_t g = 0; g < times.size(); ++g) {
            double hi = std::min(s1, times[g]);
            if (hi > s0) out.xi[g] += hi - s0;
        }
    }
    return out;
}

}  // namespace lrvm
