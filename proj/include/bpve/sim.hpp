// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

//! \file bpve/sim.hpp
//! Monte Carlo engines: BPVE trajectories, the selection process (BPWS) and
//! accessible-path counting on Galton-Watson trees.
//!
//! Labels. The fitness law is non-atomic, so labels are represented after the
//! probability-integral transform: every label lies in [0,1] and a child of a
//! parent at x survives selection with probability 1 - x. Internally a label
//! x is stored as its log-tail log(1 - x), which keeps labels distinct after
//! hundreds of generations where 1 - x drops below double resolution.
//!
//! Randomness. Replica r uses replica_stream(seed, r). In the selection engine
//! each particle owns a 64-bit key and draws its offspring from Stream{key};
//! child j gets derive_key(key, j). Results therefore do not depend on thread
//! count, and runs that differ only in the starting label share all
//! randomness, which makes the surviving population monotone in the start.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "laws.hpp"
#include "rng.hpp"
#include "schedule.hpp"
#include "variates.hpp"

namespace bpve {

enum class CapPolicy {
    //! Stop the replica and record CapHit.
    stop_record_cap_hit,
    //! Keep only the `population_cap` particles most likely to survive
    //! (BPVE: an arbitrary subset; BPWS: the lowest labels). The pruned process
    //! is dominated by the true one, so alive counts are lower bounds.
    prune_to_cap,
};

struct SimConfig
{
    std::size_t horizon = 100;
    std::size_t replicas = 1000;
    Count population_cap = 10'000'000;
    std::uint64_t seed = 0;
    CapPolicy cap_policy = CapPolicy::stop_record_cap_hit;
    //! 0 = hardware concurrency
    unsigned threads = 0;

    void validate() const
    {
        if (horizon < 1 || replicas < 1 || population_cap < 1) {
            throw std::invalid_argument("horizon, replicas and population cap must be >= 1");
        }
    }
};

enum class Terminal { extinct, alive_at_horizon, cap_hit };

[[nodiscard]] inline char const* to_string(Terminal t) noexcept
{
    switch (t) {
    case Terminal::extinct: return "Extinct";
    case Terminal::alive_at_horizon: return "AliveAtHorizon";
    case Terminal::cap_hit: return "CapHit";
    }
    return "?";
}

struct BpveTrajectory
{
    //! Z_0..Z_T
    std::vector<Count> sizes;
    Terminal terminal = Terminal::alive_at_horizon;
    //! Generation of extinction or cap hit; the horizon otherwise.
    std::size_t at = 0;
    bool pruned = false;
};

//! Counts over replicas at a fixed horizon.
struct SurvivalEstimate
{
    std::size_t horizon = 0;
    std::size_t replicas = 0;
    std::size_t alive = 0;
    std::size_t extinct = 0;
    std::size_t cap_hit = 0;
    //! Replicas in which prune_to_cap removed particles.
    std::size_t pruned = 0;
    //! alive / replicas, an estimate of P(alive at horizon)
    double p_hat = 0.0;
    //! Wilson 95% interval for p_hat
    double ci_low = 0.0;
    double ci_high = 0.0;
    //! (alive + cap_hit) / replicas
    double upper = 0.0;
};

struct Interval
{
    double lo = 0.0;
    double hi = 1.0;

    [[nodiscard]] bool empty() const { return !(hi > lo); }
};

namespace detail {

inline std::pair<double, double> wilson(std::size_t successes, std::size_t trials)
{
    constexpr double z = 1.959963984540054;
    double const n = static_cast<double>(trials);
    double const p = static_cast<double>(successes) / n;
    double const denom = 1.0 + z * z / n;
    double const center = (p + z * z / (2.0 * n)) / denom;
    double const half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    double const low = successes == 0 ? 0.0 : std::max(0.0, center - half);
    double const high = successes == trials ? 1.0 : std::min(1.0, center + half);
    return {low, high};
}

inline std::vector<OffspringLaw> laws_up_to(Schedule const& schedule, std::size_t horizon)
{
    std::vector<OffspringLaw> laws;
    laws.reserve(horizon);
    for (std::size_t n = 0; n < horizon; ++n) {
        laws.push_back(schedule.law(n));
    }
    return laws;
}

//! Runs body(r) for r in [0, count) on `threads` workers.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body)
{
    unsigned workers = threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (workers <= 1) {
        for (std::size_t r = 0; r < count; ++r) {
            body(r);
        }
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t r = w; r < count; r += workers) {
                body(r);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
}

inline SurvivalEstimate tally(std::vector<Terminal> const& terminals,
                              std::vector<char> const& pruned, std::size_t horizon)
{
    SurvivalEstimate e;
    e.horizon = horizon;
    e.replicas = terminals.size();
    for (std::size_t r = 0; r < terminals.size(); ++r) {
        switch (terminals[r]) {
        case Terminal::extinct: ++e.extinct; break;
        case Terminal::alive_at_horizon: ++e.alive; break;
        case Terminal::cap_hit: ++e.cap_hit; break;
        }
        e.pruned += pruned[r] != 0 ? 1 : 0;
    }
    double const n = static_cast<double>(e.replicas);
    e.p_hat = static_cast<double>(e.alive) / n;
    std::tie(e.ci_low, e.ci_high) = wilson(e.alive, e.replicas);
    e.upper = static_cast<double>(e.alive + e.cap_hit) / n;
    return e;
}

inline BpveTrajectory bpve_replica(std::vector<OffspringLaw> const& laws, SimConfig const& cfg,
                                   std::uint64_t replica)
{
    Stream s = replica_stream(cfg.seed, replica);
    BpveTrajectory t;
    t.sizes.reserve(laws.size() + 1);
    Count z = 1;
    t.sizes.push_back(z);
    for (std::size_t n = 0; n < laws.size(); ++n) {
        z = laws[n].sample_sum(z, s);
        if (z > cfg.population_cap) {
            if (cfg.cap_policy == CapPolicy::stop_record_cap_hit) {
                t.sizes.push_back(z);
                t.terminal = Terminal::cap_hit;
                t.at = n + 1;
                return t;
            }
            z = cfg.population_cap;
            t.pruned = true;
        }
        t.sizes.push_back(z);
        if (z == 0) {
            t.terminal = Terminal::extinct;
            t.at = n + 1;
            return t;
        }
    }
    t.terminal = Terminal::alive_at_horizon;
    t.at = laws.size();
    return t;
}

}  // namespace detail

//! One BPVE replica. Z_{n+1} is drawn as an exact sample of the sum of Z_n
//! i.i.d. offspring counts, so large populations cost O(1) per generation.
[[nodiscard]] inline BpveTrajectory run_bpve(Schedule const& schedule, SimConfig const& cfg,
                                             std::uint64_t replica = 0)
{
    cfg.validate();
    return detail::bpve_replica(detail::laws_up_to(schedule, cfg.horizon), cfg, replica);
}

[[nodiscard]] inline SurvivalEstimate estimate_survival(Schedule const& schedule,
                                                        SimConfig const& cfg)
{
    cfg.validate();
    auto const laws = detail::laws_up_to(schedule, cfg.horizon);
    std::vector<Terminal> terminals(cfg.replicas);
    std::vector<char> pruned(cfg.replicas, 0);
    detail::parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
        auto const t = detail::bpve_replica(laws, cfg, r);
        terminals[r] = t.terminal;
        pruned[r] = t.pruned ? 1 : 0;
    });
    return detail::tally(terminals, pruned, cfg.horizon);
}

// ---------------------------------------------------------------------------
// Selection process

struct BpwsOptions
{
    //! Labels counted per generation fall in [watch.lo, watch.hi).
    Interval watch{0.0, 1.0};
    //! Ignore labels entirely: every child is kept and the run reproduces
    //! run_bpve on the same replica stream.
    bool ignore_labels = false;
    //! Keep parent links per generation (debug; populations up to this size).
    std::size_t lineage_limit = 0;
};

struct LineageRecord
{
    //! generation -> particles as (parent index in previous generation, log-tail)
    std::vector<std::vector<std::pair<std::size_t, double>>> generations;
};

struct BpwsRun
{
    std::vector<Count> sizes;
    //! log(1 - l_n); +inf never occurs, -inf marks an empty generation.
    std::vector<double> leftmost_log_tail;
    std::vector<Count> watch_counts;
    Terminal terminal = Terminal::alive_at_horizon;
    std::size_t at = 0;
    bool pruned = false;
    std::optional<LineageRecord> lineage;

    //! l_n as a label in [0,1]; +inf for an empty generation.
    [[nodiscard]] double leftmost(std::size_t n) const
    {
        double const lt = leftmost_log_tail.at(n);
        return lt == -std::numeric_limits<double>::infinity()
                   ? std::numeric_limits<double>::infinity()
                   : -std::expm1(lt);
    }
};

namespace detail {

struct Particle
{
    double log_tail;
    std::uint64_t key;
};

//! Children of one parent in increasing label order (decreasing log-tail),
//! generated lazily from the parent's stream.
class Brood
{
  public:
    Brood(Particle const& parent, OffspringLaw const& law)
        : stream_{parent.key}, key_{parent.key}, log_tail_{parent.log_tail}
    {
        Count const w = law.sample(stream_);
        double const u = stream_.uniform();
        kept_ = binomial_inverse(w, std::exp(parent.log_tail), u);
    }

    [[nodiscard]] Count kept() const { return kept_; }
    [[nodiscard]] bool done() const { return next_ >= kept_; }

    //! Next child; successive children have strictly smaller log-tails.
    Particle next()
    {
        // Largest remaining of (kept - next) uniforms: U^(1/(kept - next)).
        double const remaining = static_cast<double>(kept_ - next_);
        double lt = log_tail_ + std::log(stream_.uniform()) / remaining;
        if (!(lt < log_tail_)) {
            lt = std::nextafter(log_tail_, -std::numeric_limits<double>::infinity());
        }
        log_tail_ = lt;
        Particle child{lt, derive_key(key_, next_)};
        ++next_;
        return child;
    }

  private:
    Stream stream_;
    std::uint64_t key_;
    double log_tail_;
    Count kept_ = 0;
    Count next_ = 0;
};

inline bool in_watch(double log_tail, double log_lo_tail, double log_hi_tail)
{
    // label in [lo, hi)  <=>  1 - label in (1 - hi, 1 - lo]
    return log_tail <= log_lo_tail && log_tail > log_hi_tail;
}

inline BpwsRun bpws_replica(std::vector<OffspringLaw> const& laws, double start_label,
                            SimConfig const& cfg, BpwsOptions const& opt, std::uint64_t replica)
{
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    BpwsRun run;
    if (opt.ignore_labels) {
        auto const t = bpve_replica(laws, cfg, replica);
        run.sizes = t.sizes;
        run.terminal = t.terminal;
        run.at = t.at;
        run.pruned = t.pruned;
        run.leftmost_log_tail.assign(t.sizes.size(), 0.0);
        run.watch_counts = t.sizes;
        return run;
    }

    double const log_lo_tail = std::log1p(-opt.watch.lo);
    double const log_hi_tail = opt.watch.hi >= 1.0 ? neg_inf : std::log1p(-opt.watch.hi);
    auto record = [&](std::vector<Particle> const& gen) {
        run.sizes.push_back(gen.size());
        double best = neg_inf;
        Count watched = 0;
        for (auto const& p : gen) {
            best = std::max(best, p.log_tail);
            watched += in_watch(p.log_tail, log_lo_tail, log_hi_tail) ? 1 : 0;
        }
        run.leftmost_log_tail.push_back(best);
        run.watch_counts.push_back(watched);
    };
    bool keep_lineage = opt.lineage_limit > 0;
    if (keep_lineage) {
        run.lineage.emplace();
    }

    std::vector<Particle> current{
        Particle{std::log1p(-start_label), replica_stream(cfg.seed, replica).key()}};
    record(current);
    if (keep_lineage) {
        run.lineage->generations.push_back({{0, current.front().log_tail}});
    }
    std::vector<Particle> next;
    std::vector<Brood> broods;
    for (std::size_t n = 0; n < laws.size(); ++n) {
        broods.clear();
        broods.reserve(current.size());
        Count total = 0;
        for (auto const& p : current) {
            broods.emplace_back(p, laws[n]);
            total = saturating_add(total, broods.back().kept());
        }
        next.clear();
        std::vector<std::pair<std::size_t, double>> links;
        if (total <= cfg.population_cap) {
            next.reserve(total);
            for (std::size_t i = 0; i < broods.size(); ++i) {
                while (!broods[i].done()) {
                    next.push_back(broods[i].next());
                    if (keep_lineage) {
                        links.emplace_back(i, next.back().log_tail);
                    }
                }
            }
        } else if (cfg.cap_policy == CapPolicy::stop_record_cap_hit) {
            run.sizes.push_back(total);
            run.leftmost_log_tail.push_back(neg_inf);
            run.watch_counts.push_back(0);
            run.terminal = Terminal::cap_hit;
            run.at = n + 1;
            return run;
        } else {
            // Merge broods, keeping the cap lowest labels.
            run.pruned = true;
            using Entry = std::pair<double, std::size_t>;
            std::vector<Particle> heads(broods.size());
            std::priority_queue<Entry> heap;
            for (std::size_t i = 0; i < broods.size(); ++i) {
                if (!broods[i].done()) {
                    heads[i] = broods[i].next();
                    heap.emplace(heads[i].log_tail, i);
                }
            }
            auto const cap = static_cast<std::size_t>(cfg.population_cap);
            next.reserve(cap);
            while (next.size() < cap && !heap.empty()) {
                std::size_t const i = heap.top().second;
                heap.pop();
                next.push_back(heads[i]);
                if (keep_lineage) {
                    links.emplace_back(i, heads[i].log_tail);
                }
                if (!broods[i].done()) {
                    heads[i] = broods[i].next();
                    heap.emplace(heads[i].log_tail, i);
                }
            }
        }
        current.swap(next);
        record(current);
        if (keep_lineage) {
            // Past the size limit only the recorded prefix of generations is kept.
            keep_lineage = current.size() <= opt.lineage_limit;
            if (keep_lineage) {
                run.lineage->generations.push_back(std::move(links));
            }
        }
        if (current.empty()) {
            run.terminal = Terminal::extinct;
            run.at = n + 1;
            return run;
        }
    }
    run.terminal = Terminal::alive_at_horizon;
    run.at = laws.size();
    return run;
}

}  // namespace detail

//! One BPWS replica started from a single particle at `start_label`.
[[nodiscard]] inline BpwsRun run_bpws(Schedule const& schedule, double start_label,
                                      SimConfig const& cfg, BpwsOptions const& opt = {},
                                      std::uint64_t replica = 0)
{
    cfg.validate();
    if (!(start_label >= 0.0 && start_label < 1.0)) {
        throw std::invalid_argument("start label must lie in [0,1)");
    }
    return detail::bpws_replica(detail::laws_up_to(schedule, cfg.horizon), start_label, cfg, opt,
                                replica);
}

//! P(population nonempty at the horizon) for the selection process.
[[nodiscard]] inline SurvivalEstimate estimate_bpws_survival(Schedule const& schedule,
                                                             double start_label,
                                                             SimConfig const& cfg,
                                                             BpwsOptions const& opt = {})
{
    cfg.validate();
    if (!(start_label >= 0.0 && start_label < 1.0)) {
        throw std::invalid_argument("start label must lie in [0,1)");
    }
    auto const laws = detail::laws_up_to(schedule, cfg.horizon);
    BpwsOptions quiet = opt;
    quiet.lineage_limit = 0;
    std::vector<Terminal> terminals(cfg.replicas);
    std::vector<char> pruned(cfg.replicas, 0);
    detail::parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
        auto const run = detail::bpws_replica(laws, start_label, cfg, quiet, r);
        terminals[r] = run.terminal;
        pruned[r] = run.pruned ? 1 : 0;
    });
    return detail::tally(terminals, pruned, cfg.horizon);
}

//! Fraction of replicas with at least one particle in `interval` during the
//! last horizon/4 generations. This occupancy event is a finite-horizon proxy
//! for "visits the interval infinitely often".
//!
//! Replicas that hit the cap under stop_record_cap_hit count in cap_hit;
//! `alive` counts occupancy, `extinct` counts the rest.
[[nodiscard]] inline SurvivalEstimate estimate_local_survival(Schedule const& schedule,
                                                              double start_label,
                                                              Interval interval,
                                                              SimConfig const& cfg)
{
    cfg.validate();
    if (!(start_label >= 0.0 && start_label < 1.0)) {
        throw std::invalid_argument("start label must lie in [0,1)");
    }
    if (interval.lo < start_label || interval.hi > 1.0 || interval.lo > interval.hi) {
        throw std::invalid_argument("interval must lie inside [start label, 1]");
    }
    SurvivalEstimate empty;
    if (interval.empty()) {
        empty.horizon = cfg.horizon;
        empty.replicas = cfg.replicas;
        empty.extinct = cfg.replicas;
        std::tie(empty.ci_low, empty.ci_high) = detail::wilson(0, cfg.replicas);
        return empty;
    }
    auto const laws = detail::laws_up_to(schedule, cfg.horizon);
    BpwsOptions opt;
    opt.watch = interval;
    std::size_t const from = cfg.horizon - cfg.horizon / 4;
    std::vector<Terminal> terminals(cfg.replicas);
    std::vector<char> pruned(cfg.replicas, 0);
    detail::parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
        auto const run = detail::bpws_replica(laws, start_label, cfg, opt, r);
        pruned[r] = run.pruned ? 1 : 0;
        if (run.terminal == Terminal::cap_hit) {
            terminals[r] = Terminal::cap_hit;
            return;
        }
        bool seen = false;
        for (std::size_t n = from; n < run.watch_counts.size(); ++n) {
            seen = seen || run.watch_counts[n] > 0;
        }
        terminals[r] = seen ? Terminal::alive_at_horizon : Terminal::extinct;
    });
    return detail::tally(terminals, pruned, cfg.horizon);
}

// ---------------------------------------------------------------------------
// Accessible paths

struct PathCountResult
{
    std::size_t depth = 0;
    std::size_t replicas = 0;
    //! Mean number of depth-n vertices whose root path carries increasing labels.
    double mean = 0.0;
    //! Standard error of `mean`.
    double standard_error = 0.0;
    //! Fraction of trees with at least one accessible path.
    double p_accessible = 0.0;
    double p_standard_error = 0.0;
};

namespace detail {

//! Accessible leaves of one tree, explored depth-first. A vertex with key k
//! draws its label and then its offspring count from Stream{k}; child j has
//! key derive_key(k, j).
inline Count accessible_leaves(std::vector<OffspringLaw> const& laws, std::uint64_t root_key,
                               std::size_t depth)
{
    struct Frame
    {
        std::uint64_t key;
        double label;
        Count children;
        Count next;
    };
    auto open = [&](std::uint64_t key, double label, std::size_t level, Stream& s) {
        Count const w = level < depth ? laws[level].sample(s) : 0;
        return Frame{key, label, w, 0};
    };
    Stream root{root_key};
    double const root_label = root.uniform();
    std::vector<Frame> stack;
    stack.reserve(depth + 1);
    stack.push_back(open(root_key, root_label, 0, root));
    Count leaves = 0;
    while (!stack.empty()) {
        Frame& top = stack.back();
        std::size_t const level = stack.size() - 1;
        if (level == depth) {
            leaves = saturating_add(leaves, 1);
            stack.pop_back();
            continue;
        }
        if (top.next >= top.children) {
            stack.pop_back();
            continue;
        }
        std::uint64_t const child_key = derive_key(top.key, top.next);
        ++top.next;
        Stream s{child_key};
        double const label = s.uniform();
        if (label > top.label) {
            Frame const f = open(child_key, label, level + 1, s);
            stack.push_back(f);
        }
    }
    return leaves;
}

}  // namespace detail

[[nodiscard]] inline PathCountResult count_accessible_paths(Schedule const& schedule,
                                                           std::size_t depth,
                                                           std::size_t replicas,
                                                           std::uint64_t seed,
                                                           unsigned threads = 0)
{
    if (replicas < 1) {
        throw std::invalid_argument("replicas must be >= 1");
    }
    auto const laws = detail::laws_up_to(schedule, depth);
    std::vector<Count> counts(replicas);
    detail::parallel_for(replicas, threads, [&](std::size_t r) {
        counts[r] = detail::accessible_leaves(laws, replica_stream(seed, r).key(), depth);
    });
    // Integer accumulation keeps the result independent of thread count.
    unsigned __int128 sum = 0;
    unsigned __int128 sum_sq = 0;
    std::size_t hits = 0;
    for (Count c : counts) {
        sum += c;
        sum_sq += static_cast<unsigned __int128>(c) * c;
        hits += c > 0 ? 1 : 0;
    }
    PathCountResult out;
    out.depth = depth;
    out.replicas = replicas;
    double const n = static_cast<double>(replicas);
    out.mean = static_cast<double>(sum) / n;
    double const second = static_cast<double>(sum_sq) / n;
    double const var = replicas > 1 ? std::max(0.0, second - out.mean * out.mean) * n / (n - 1.0) : 0.0;
    out.standard_error = std::sqrt(var / n);
    out.p_accessible = static_cast<double>(hits) / n;
    out.p_standard_error = std::sqrt(out.p_accessible * (1.0 - out.p_accessible) / n);
    return out;
}

}  // namespace bpve
