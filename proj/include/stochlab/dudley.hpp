#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochlab/hitting.hpp"
#include "stochlab/path.hpp"
#include "stochlab/stats.hpp"

namespace stochlab {

// Read-only window onto a realized path: W at grid times, clamped at a freeze
// horizon. Reads must land on grid points; the grid builders below insert
// every time a target or approximant is allowed to read.
struct PathView {
    const TimeGrid* grid = nullptr;
    const std::vector<double>* values = nullptr;
    double freeze = kInf;

    double at(double t) const {
        const double tt = std::min(t, freeze);
        const auto& times = grid->times;
        const auto it = std::lower_bound(times.begin(), times.end(), tt);
        if (it == times.end() || *it != tt)
            throw std::invalid_argument("PathView: time " + std::to_string(tt) +
                                        " is not a realized grid point");
        return (*values)[static_cast<std::size_t>(it - times.begin())];
    }
};

// A strongly measurable terminal value: a deterministic function of the path
// restricted to times <= horizon (< b).
struct TargetFunctional {
    std::function<Vec(const PathView&)> eval;
    double horizon = 0.0;
    std::size_t dim = 1;
};

inline TargetFunctional constant_target(Vec v) {
    TargetFunctional t;
    t.dim = v.dim();
    t.horizon = -kInf;  // reads nothing
    t.eval = [v](const PathView&) { return v; };
    return t;
}

inline TargetFunctional brownian_value_target(double read_time) {
    TargetFunctional t;
    t.dim = 1;
    t.horizon = read_time;
    t.eval = [read_time](const PathView& p) { return Vec{p.at(read_time)}; };
    return t;
}

inline TargetFunctional sign_target(double read_time) {
    TargetFunctional t;
    t.dim = 1;
    t.horizon = read_time;
    t.eval = [read_time](const PathView& p) { return Vec{p.at(read_time) >= 0.0 ? 1.0 : -1.0}; };
    return t;
}

// Level schedule and measured approximation errors for a terminal-value
// representation on [a, b). Level n owns the interval [a_n, a_{n+1}) (with
// a_{N+1} = b) and carries the increment xi_n - xi_{n-1}, xi_0 = 0.
struct DudleyPlan {
    double a = 0.0;
    double b = 1.0;
    std::vector<double> schedule;         // a_1 < a_2 < ... < a_N < b
    std::vector<double> budgets;          // per-level error budgets, default 4^{-n}
    std::vector<double> measured_errors;  // L0 errors (or p-th moments when p > 0)
    double p = 0.0;                       // 0: L0 budgets; in (0,1): L^p variant
    TargetFunctional target;
    std::size_t mc_paths = 0;
    std::uint64_t mc_seed = 0;
    std::size_t grid_cells = 64;

    std::size_t levels() const { return schedule.size(); }
    double level_end(std::size_t n) const {  // right endpoint of level n's interval
        return n + 1 < schedule.size() ? schedule[n + 1] : b;
    }
};

inline std::vector<double> default_schedule(double a, double b, std::size_t levels) {
    std::vector<double> s(levels);
    for (std::size_t n = 0; n < levels; ++n)
        s[n] = a + (b - a) * (1.0 - std::pow(2.0, -static_cast<double>(n + 1)));
    return s;
}

inline std::vector<double> default_budgets(std::size_t levels) {
    std::vector<double> bud(levels);
    for (std::size_t n = 0; n < levels; ++n) bud[n] = std::pow(4.0, -static_cast<double>(n + 1));
    return bud;
}

// Grid that realizes every read a plan needs: uniform cells over
// [a, max(horizon, a)] plus any schedule points inside that span.
inline TimeGrid plan_measurement_grid(double a, double horizon, std::span<const double> schedule,
                                      std::size_t cells) {
    const double end = horizon > a ? horizon : a + 1e-9;
    auto g = make_uniform_grid(a, end, std::max<std::size_t>(cells, 1));
    std::vector<double> times = g.times;
    for (double s : schedule)
        if (s > a && s < end) times.push_back(s);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return make_grid(std::move(times));
}

struct PlanOptions {
    std::vector<double> schedule;  // empty: default geometric approach to b
    std::vector<double> budgets;   // empty: 4^{-n}
    std::size_t mc_paths = 4000;
    std::uint64_t seed = 2024;
    std::size_t grid_cells = 64;
    double p = 0.0;  // 0 for the L0 budgets
};

// Builds the plan and measures the per-level approximation errors of the
// frozen-path approximants by Monte Carlo. Throws when a level misses its
// budget, naming the level and the measured error.
inline DudleyPlan plan(const TargetFunctional& target, double a, double b, std::size_t levels,
                       const PlanOptions& opts = {}) {
    if (levels == 0) throw std::invalid_argument("plan: need at least one level");
    if (!(a < b)) throw std::invalid_argument("plan: need a < b");
    if (std::isfinite(b) && !(target.horizon < b) && target.horizon != -kInf)
        throw std::invalid_argument("plan: target horizon must lie strictly below b");

    DudleyPlan pl;
    pl.a = a;
    pl.b = b;
    pl.p = opts.p;
    pl.target = target;
    pl.mc_paths = opts.mc_paths;
    pl.mc_seed = opts.seed;
    pl.grid_cells = opts.grid_cells;
    pl.schedule = opts.schedule.empty() ? default_schedule(a, b, levels) : opts.schedule;
    if (pl.schedule.size() != levels) throw std::invalid_argument("plan: schedule size != levels");
    for (std::size_t n = 0; n < levels; ++n) {
        if (!(pl.schedule[n] > a) || !(pl.schedule[n] < b) ||
            (n > 0 && !(pl.schedule[n] > pl.schedule[n - 1])))
            throw std::invalid_argument("plan: schedule must be strictly increasing inside (a,b)");
    }
    pl.budgets = opts.budgets.empty() ? default_budgets(levels) : opts.budgets;
    if (pl.budgets.size() != levels) throw std::invalid_argument("plan: budgets size != levels");

    const auto grid = plan_measurement_grid(a, target.horizon, pl.schedule, opts.grid_cells);
    std::vector<std::vector<double>> errs(levels, std::vector<double>(opts.mc_paths));
    parallel_for(opts.mc_paths, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t pi = lo; pi < hi; ++pi) {
            const auto path = sample_path(grid, opts.seed, pi);
            const auto values = path.values();
            PathView full{&grid, &values, kInf};
            const Vec xi = target.eval(full);
            for (std::size_t n = 0; n < levels; ++n) {
                PathView frozen{&grid, &values, pl.schedule[n]};
                errs[n][pi] = norm(xi - target.eval(frozen));
            }
        }
    });
    pl.measured_errors.resize(levels);
    for (std::size_t n = 0; n < levels; ++n) {
        double e;
        if (pl.p > 0.0) {
            double acc = 0.0;
            for (double x : errs[n]) acc += std::pow(x, pl.p);
            e = acc / static_cast<double>(errs[n].size());
        } else {
            e = l0_metric(errs[n]);
        }
        if (!std::isfinite(e))
            throw std::runtime_error("plan: level " + std::to_string(n + 1) +
                                     " has a non-finite measured moment");
        pl.measured_errors[n] = e;
        if (e > pl.budgets[n])
            throw std::runtime_error("plan: level " + std::to_string(n + 1) +
                                     " measured error " + std::to_string(e) +
                                     " exceeds budget " + std::to_string(pl.budgets[n]));
    }
    return pl;
}

// L^p variant of an existing plan: same schedule, budgets re-read as bounds on
// E ||xi - xi_n||^p, errors re-measured.
inline DudleyPlan lp_budget(const DudleyPlan& base, double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("lp_budget: need p in (0,1)");
    PlanOptions opts;
    opts.schedule = base.schedule;
    opts.budgets = base.budgets;
    opts.mc_paths = base.mc_paths;
    opts.seed = base.mc_seed;
    opts.grid_cells = base.grid_cells;
    opts.p = p;
    return plan(base.target, base.a, base.b, base.levels(), opts);
}

// One assembled level: the block integrand (xi_n - xi_{n-1}) 1_{(a_n, tau_n)}
// (a_{n+1} - t)^{-1}, realized through a level-1 hit of the running weighted
// integral. y_factor = Y_n(tau_n) is 1 + overshoot when resolved; the block's
// Ito sum is diff * y_factor.
struct AssembledLevel {
    std::size_t level = 0;
    Vec diff;
    double diff_norm = 0.0;
    bool empty = true;
    bool resolved = true;
    double tau = 0.0;
    double clock_value = 0.0;  // h_n(tau_n)
    double y_factor = 0.0;
    double eta = 0.0;          // ||diff|| h_n(tau_n)^{1/2}: the block L2 norm
};

struct AssembledIntegrand {
    std::vector<AssembledLevel> levels;
    Vec terminal;          // zeta(b)
    double l2_norm_sq = 0.0;
    std::size_t flagged = 0;
};

inline HitWalkParams default_dudley_walk() {
    HitWalkParams p;
    p.base_step = 1e-3;
    p.h_max = 6.4e3;
    p.tail_growth = 0.5;
    p.refine_zone = 4.0;
    p.refine_min_sd = 1.0 / 16.0;
    return p;
}

// Assembles the integrand along one base path. The frozen approximants may
// only read times <= schedule[0]: beyond the first level boundary the block
// noise is generated lazily and is not exposed for reads.
inline AssembledIntegrand assemble(const DudleyPlan& pl, const BrownianPath& base,
                                   std::uint64_t seed, std::uint64_t path_index,
                                   const HitWalkParams& walk = default_dudley_walk()) {
    if (pl.target.horizon > pl.schedule.front())
        throw std::invalid_argument(
            "assemble: target horizon exceeds the first level boundary; frozen reads inside "
            "block intervals are not realizable");
    const auto values = base.values();
    PathView view{&base.grid, &values, kInf};
    const std::size_t d = pl.target.dim;

    AssembledIntegrand out;
    out.terminal = Vec(d);
    Vec prev(d);  // xi_0 = 0
    for (std::size_t n = 0; n < pl.levels(); ++n) {
        view.freeze = pl.schedule[n];
        const Vec xi_n = pl.target.eval(view);
        AssembledLevel lvl;
        lvl.level = n + 1;
        lvl.diff = xi_n - prev;
        lvl.diff_norm = norm(lvl.diff);
        prev = xi_n;
        if (lvl.diff_norm == 0.0) {
            out.levels.push_back(std::move(lvl));
            continue;
        }
        lvl.empty = false;
        const Clock c(pl.schedule[n], pl.level_end(n));
        rng::Stream ws(seed, path_index, 64 + n);
        const auto hit = run_hit_walk(1.0, ws, walk);
        lvl.resolved = hit.resolved;
        lvl.clock_value = hit.clock_value;
        lvl.tau = hit.resolved ? c.inverse(hit.clock_value) : pl.schedule[n];
        lvl.y_factor = hit.y_end;
        lvl.eta = lvl.diff_norm * std::sqrt(hit.clock_value);
        if (!hit.resolved) ++out.flagged;
        out.terminal += lvl.y_factor * lvl.diff;
        out.l2_norm_sq += lvl.diff_norm * lvl.diff_norm * lvl.clock_value;
        out.levels.push_back(std::move(lvl));
    }
    return out;
}

struct TerminalReport {
    double metric = 0.0;           // E min(||zeta(b) - xi||, 1), all paths
    double metric_stderr = 0.0;
    double metric_resolved = 0.0;  // same, over paths with no flagged level
    double lp_metric = 0.0;        // E ||zeta(b) - xi||^p when the plan is L^p
    double flag_rate = 0.0;        // fraction of paths with >= 1 unresolved hit
    double mean_l2_norm_sq = 0.0;
    std::size_t paths = 0;
};

// Monte Carlo terminal-value check: reassembles the integrand on fresh paths
// and measures the distance between zeta(b) and the target.
inline TerminalReport terminal_check(const DudleyPlan& pl, std::size_t paths, std::uint64_t seed,
                                     const HitWalkParams& walk = default_dudley_walk()) {
    if (paths < 1000) throw std::invalid_argument("terminal_check: need >= 10^3 paths");
    const auto grid =
        plan_measurement_grid(pl.a, pl.target.horizon, pl.schedule, pl.grid_cells);
    std::vector<double> errs(paths), norms(paths);
    std::vector<char> flagged(paths, 0);
    parallel_for(paths, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t pi = lo; pi < hi; ++pi) {
            const auto base = sample_path(grid, seed, pi);
            const auto asm_ = assemble(pl, base, seed, pi, walk);
            const auto values = base.values();
            PathView full{&grid, &values, kInf};
            const Vec xi = pl.target.eval(full);
            errs[pi] = norm(asm_.terminal - xi);
            norms[pi] = asm_.l2_norm_sq;
            flagged[pi] = asm_.flagged > 0 ? 1 : 0;
        }
    });
    TerminalReport rep;
    rep.paths = paths;
    rep.metric = l0_metric(errs);
    {
        std::vector<double> capped(paths);
        for (std::size_t i = 0; i < paths; ++i) capped[i] = std::min(errs[i], 1.0);
        rep.metric_stderr = mean_stderr(capped).stderr_;
    }
    std::vector<double> resolved_errs;
    std::size_t nflag = 0;
    double l2acc = 0.0;
    for (std::size_t i = 0; i < paths; ++i) {
        l2acc += norms[i];
        if (flagged[i])
            ++nflag;
        else
            resolved_errs.push_back(errs[i]);
    }
    rep.flag_rate = static_cast<double>(nflag) / static_cast<double>(paths);
    rep.metric_resolved = resolved_errs.empty() ? 0.0 : l0_metric(resolved_errs);
    rep.mean_l2_norm_sq = l2acc / static_cast<double>(paths);
    if (pl.p > 0.0) {
        double acc = 0.0;
        for (double e : errs) acc += std::pow(e, pl.p);
        rep.lp_metric = acc / static_cast<double>(paths);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// The zero-sum integrand: 1 on [0, 1/2), then one block targeting -W(1/2).
// Its indefinite integral is W(1/2) at 1/2 exactly and returns to ~0 at 1.
// ---------------------------------------------------------------------------

struct PsiResult {
    double value_at_half = 0.0;
    double value_at_one = 0.0;
    bool flagged = false;
};

inline PsiResult psi_zero_sum(const BrownianPath& base_on_first_half, std::uint64_t seed,
                              std::uint64_t path_index,
                              const HitWalkParams& walk = default_dudley_walk()) {
    PsiResult out;
    double w_half = 0.0;
    for (double dw : base_on_first_half.increments) w_half += dw;
    out.value_at_half = w_half;
    rng::Stream ws(seed, path_index, 64);
    const auto hit = run_hit_walk(1.0, ws, walk);
    out.flagged = !hit.resolved;
    out.value_at_one = w_half + (-w_half) * hit.y_end;
    return out;
}

// ---------------------------------------------------------------------------
// Universal accumulation walk
// ---------------------------------------------------------------------------

// x -> x / (1 + ||x||): into the open unit ball.
inline Vec contract_to_ball(const Vec& x) { return (1.0 / (1.0 + norm(x))) * x; }

// y -> y / (1 - ||y||): inverse of the contraction on the open ball.
inline Vec expand_from_ball(const Vec& y) {
    const double n = norm(y);
    if (!(n < 1.0)) throw std::invalid_argument("expand_from_ball: need ||y|| < 1");
    return (1.0 / (1.0 - n)) * y;
}

struct UniversalWalkResult {
    std::vector<Vec> zeta;               // zeta(0), zeta(1), ..., zeta(T)
    std::vector<std::size_t> rho_index;  // alpha(k) for block k
    std::size_t flagged = 0;
};

// Indefinite integral whose values at integer times revisit each target
// infinitely often (at desk scale: round-robin over a finite list). Block k
// on [k, k+1) carries rho_k - rho_{k-1} through a level-1 hit, rho_{-1} = 0.
inline UniversalWalkResult universal_walk(const std::vector<Vec>& targets,
                                          const std::function<std::size_t(std::size_t)>& alpha,
                                          std::size_t horizon_blocks, std::uint64_t seed,
                                          std::uint64_t path_index,
                                          const HitWalkParams& walk = default_dudley_walk()) {
    if (targets.empty()) throw std::invalid_argument("universal_walk: need >= 1 target");
    const std::size_t d = targets.front().dim();
    for (const auto& t : targets)
        if (t.dim() != d) throw std::invalid_argument("universal_walk: mixed target dimensions");

    UniversalWalkResult out;
    out.zeta.reserve(horizon_blocks + 1);
    out.zeta.push_back(Vec(d));
    Vec prev(d);
    for (std::size_t k = 0; k < horizon_blocks; ++k) {
        const std::size_t j = alpha(k);
        if (j >= targets.size()) throw std::invalid_argument("universal_walk: alpha out of range");
        out.rho_index.push_back(j);
        // the predictable-projection detour is the identity for fixed vectors
        const Vec rho = expand_from_ball(contract_to_ball(targets[j]));
        const Vec diff = rho - prev;
        prev = rho;
        Vec next = out.zeta.back();
        if (norm(diff) > 0.0) {
            rng::Stream ws(seed, path_index, 128 + k);
            const auto hit = run_hit_walk(1.0, ws, walk);
            if (!hit.resolved) ++out.flagged;
            next += hit.y_end * diff;
        }
        out.zeta.push_back(next);
    }
    return out;
}

inline std::function<std::size_t(std::size_t)> round_robin(std::size_t n_targets) {
    if (n_targets == 0) throw std::invalid_argument("round_robin: need >= 1 target");
    return [n_targets](std::size_t k) { return k % n_targets; };
}

}  // namespace stochlab
