#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochlab/hitting.hpp"
#include "stochlab/path.hpp"
#include "stochlab/tail_series.hpp"

namespace stochlab {

// Disjoint open intervals I_n = (s_n, b_n) in (0,1) with midpoints a_n and
// per-block coefficients c_n. One orthonormal direction per block.
struct BlockSchedule {
    struct Block {
        double s, a, b, c;
        double half_width() const { return a - s; }
    };
    std::vector<Block> blocks;

    std::size_t size() const { return blocks.size(); }
};

// Packs intervals left to right, |I_n| = spacing * 2^{-n-1}, c_n = 1/n.
inline BlockSchedule make_packed_schedule(std::size_t n_blocks, double spacing = 0.9) {
    if (n_blocks == 0) throw std::invalid_argument("make_packed_schedule: need >= 1 block");
    if (!(spacing > 0.0) || !(spacing <= 1.0))
        throw std::invalid_argument("make_packed_schedule: spacing must lie in (0,1]");
    BlockSchedule sched;
    sched.blocks.reserve(n_blocks);
    double left = 0.0;
    double len = 0.25 * spacing;
    for (std::size_t n = 1; n <= n_blocks; ++n) {
        BlockSchedule::Block b;
        b.s = left;
        b.b = left + len;
        b.a = 0.5 * (b.s + b.b);
        b.c = 1.0 / static_cast<double>(n);
        sched.blocks.push_back(b);
        left = b.b;
        len *= 0.5;
    }
    return sched;
}

// One realized block of the process: level eta read off the path, detected
// stopping time, normalized clock value theta = h_n(tau_n)/(a_n - s_n) and
// xi = sqrt(1 + theta). signed_integral is the block's realized Ito sum of
// phi_n (zero in the continuum; crossing overshoot on a grid).
struct BlockIntegrand {
    std::size_t index = 0;
    double eta = 0.0;
    double tau = 0.0;
    double clock_value = 0.0;
    double theta = 0.0;
    double xi = 1.0;
    double signed_integral = 0.0;
    bool resolved = true;

    double norm_sq(const BlockSchedule::Block& b) const {
        return b.half_width() * (1.0 + theta);
    }
};

struct ProcessRealization {
    std::vector<BlockIntegrand> blocks;
    std::size_t dim = 0;

    double flag_rate() const {
        if (blocks.empty()) return 0.0;
        std::size_t flagged = 0;
        for (const auto& b : blocks)
            if (!b.resolved) ++flagged;
        return static_cast<double>(flagged) / static_cast<double>(blocks.size());
    }
};

namespace detail {
inline std::size_t grid_index_of(const TimeGrid& g, double t, const char* what) {
    const auto it = std::lower_bound(g.times.begin(), g.times.end(), t);
    if (it == g.times.end() || *it != t)
        throw std::invalid_argument(std::string("build_process: grid is missing the ") + what +
                                    " point " + std::to_string(t));
    return static_cast<std::size_t>(it - g.times.begin());
}
}  // namespace detail

// Composite grid for the packed schedule: a uniform leg over [s_n, a_n] plus
// a clock-uniform leg over [a_n, b_n) capped at h = theta_cap * (a_n - s_n).
inline TimeGrid make_process_grid(const BlockSchedule& sched, std::size_t base_steps,
                                  double theta_cap, std::size_t theta_steps) {
    if (base_steps == 0 || theta_steps == 0 || !(theta_cap > 0.0))
        throw std::invalid_argument("make_process_grid: bad resolution parameters");
    std::vector<double> times;
    times.push_back(sched.blocks.front().s);
    for (const auto& b : sched.blocks) {
        for (std::size_t k = 1; k <= base_steps; ++k)
            times.push_back(b.s + (b.a - b.s) * static_cast<double>(k) /
                                      static_cast<double>(base_steps));
        const Clock c(b.a, b.b);
        const double h_max = theta_cap * b.half_width();
        for (std::size_t k = 1; k <= theta_steps; ++k)
            times.push_back(c.inverse(h_max * static_cast<double>(k) /
                                      static_cast<double>(theta_steps)));
        times.push_back(b.b);
    }
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return make_grid(std::move(times));
}

// Grid-coupled construction on an already-sampled path. The level of block n
// is eta_n = W(a_n) - W(s_n) from the same path that drives the hit.
inline ProcessRealization build_process(const BlockSchedule& sched, const BrownianPath& path,
                                        std::size_t d) {
    if (d == 0 || d > sched.size())
        throw std::invalid_argument("build_process: need 1 <= d <= number of blocks");
    const auto values = path.values();
    ProcessRealization out;
    out.dim = d;
    out.blocks.reserve(d);
    for (std::size_t n = 0; n < d; ++n) {
        const auto& blk = sched.blocks[n];
        const std::size_t is = detail::grid_index_of(path.grid, blk.s, "interval start");
        const std::size_t ia = detail::grid_index_of(path.grid, blk.a, "interval center");
        const Clock clock(blk.a, blk.b);

        BlockIntegrand bi;
        bi.index = n;
        bi.eta = values[ia] - values[is];
        bi.resolved = false;
        bi.tau = blk.a;
        if (bi.eta == 0.0) {
            bi.resolved = true;
            bi.clock_value = 0.0;
        } else {
            double y = 0.0;
            for (std::size_t k = ia; k + 1 < path.grid.times.size(); ++k) {
                if (!(path.grid.times[k + 1] < blk.b)) break;
                y += clock.speed(path.grid.times[k]) * path.increments[k];
                const double gap = bi.eta - y;
                if (gap == 0.0 || (gap > 0.0) != (bi.eta > 0.0)) {
                    bi.resolved = true;
                    bi.tau = path.grid.times[k + 1];
                    bi.clock_value = clock.value(bi.tau);
                    bi.signed_integral = y - bi.eta;
                    break;
                }
            }
            if (!bi.resolved) bi.signed_integral = y - bi.eta;
        }
        bi.theta = bi.clock_value / blk.half_width();
        bi.xi = std::sqrt(1.0 + bi.theta);
        out.blocks.push_back(bi);
    }
    return out;
}

// Same law with lazily generated legs: eta_n is the increment of an implicit
// base leg, the hit runs as a walk in normalized clock units (theta units),
// so the resolution parameters mean the same thing for every block.
inline ProcessRealization sample_process(const BlockSchedule& sched, std::size_t d,
                                         std::uint64_t seed, std::uint64_t path_index,
                                         const HitWalkParams& theta_walk) {
    if (d == 0 || d > sched.size())
        throw std::invalid_argument("sample_process: need 1 <= d <= number of blocks");
    ProcessRealization out;
    out.dim = d;
    out.blocks.reserve(d);
    for (std::size_t n = 0; n < d; ++n) {
        const auto& blk = sched.blocks[n];
        rng::Stream level(seed, path_index, 16 + 2 * n);
        rng::Stream walk(seed, path_index, 17 + 2 * n);
        const double scale = std::sqrt(blk.half_width());
        const double eta = scale * level.next_normal();

        BlockIntegrand bi;
        bi.index = n;
        bi.eta = eta;
        const auto r = run_hit_walk(eta / scale, walk, theta_walk);
        bi.resolved = r.resolved;
        bi.theta = r.clock_value;
        bi.clock_value = r.clock_value * blk.half_width();
        const Clock clock(blk.a, blk.b);
        bi.tau = r.resolved ? clock.inverse(bi.clock_value) : blk.a;
        bi.signed_integral = scale * r.signed_integral;
        bi.xi = std::sqrt(1.0 + bi.theta);
        out.blocks.push_back(bi);
    }
    return out;
}

// Distributional backend: hits sampled exactly, no discretization error.
inline ProcessRealization sample_process_exact(const BlockSchedule& sched, std::size_t d,
                                               std::uint64_t seed, std::uint64_t path_index) {
    if (d == 0 || d > sched.size())
        throw std::invalid_argument("sample_process_exact: need 1 <= d <= number of blocks");
    ProcessRealization out;
    out.dim = d;
    out.blocks.reserve(d);
    for (std::size_t n = 0; n < d; ++n) {
        const auto& blk = sched.blocks[n];
        rng::Stream level(seed, path_index, 16 + 2 * n);
        rng::Stream walk(seed, path_index, 17 + 2 * n);
        const double scale = std::sqrt(blk.half_width());
        const double eta = scale * level.next_normal();

        BlockIntegrand bi;
        bi.index = n;
        bi.eta = eta;
        bi.theta = sample_first_passage_exact(eta / scale, walk);
        bi.clock_value = bi.theta * blk.half_width();
        const Clock clock(blk.a, blk.b);
        bi.tau = clock.inverse(bi.clock_value);
        bi.signed_integral = 0.0;
        bi.xi = std::sqrt(1.0 + bi.theta);
        out.blocks.push_back(bi);
    }
    return out;
}

// <Ito integral of phi, x>. Each block's scalar integral vanishes in the
// continuum; on a grid it is the recorded crossing overshoot.
inline double weak_integral(const BlockSchedule& sched, const ProcessRealization& proc,
                            const Vec& x) {
    if (x.dim() < proc.dim) throw std::invalid_argument("weak_integral: x has too few coordinates");
    double s = 0.0;
    for (const auto& bi : proc.blocks) {
        const auto& blk = sched.blocks[bi.index];
        s += x[bi.index] * blk.c * bi.signed_integral / std::sqrt(blk.half_width());
    }
    return s;
}

// || <phi, x> ||_{L^2(0,1)} in closed form from the stored xi_n.
inline double weak_l2_norm(const BlockSchedule& sched, const ProcessRealization& proc,
                           const Vec& x) {
    if (x.dim() < proc.dim) throw std::invalid_argument("weak_l2_norm: x has too few coordinates");
    double s = 0.0;
    for (const auto& bi : proc.blocks) {
        const double term = x[bi.index] * sched.blocks[bi.index].c * bi.xi;
        s += term * term;
    }
    return std::sqrt(s);
}

struct StrongNorm {
    double sum_sq = 0.0;  // integral of ||phi||_E^2 over (0,1)
    double sup_sq = 0.0;  // lower bound through the sup of c_n xi_n
};

inline StrongNorm strong_l2_norm_sq(const BlockSchedule& sched, const ProcessRealization& proc) {
    StrongNorm out;
    for (const auto& bi : proc.blocks) {
        const double t = sched.blocks[bi.index].c * bi.xi;
        out.sum_sq += t * t;
        out.sup_sq = std::max(out.sup_sq, t * t);
    }
    return out;
}

// Law-only sampling of sum c_n^2 xi_n^2: enough for the divergence medians,
// no block geometry needed.
inline std::vector<double> strong_norm_samples(std::span<const double> c, std::size_t paths,
                                               std::uint64_t seed) {
    std::vector<double> out(paths);
    parallel_for(paths, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            rng::Stream rs(seed, p, rng::kIntegrand);
            double acc = 0.0;
            for (double cn : c) acc += cn * cn * (1.0 + sample_theta(rs));
            out[p] = acc;
        }
    });
    return out;
}

struct MomentBoundReport {
    double lhs = 0.0;       // E || <phi, x> ||^p
    double lhs_stderr = 0.0;
    double rhs = 0.0;       // C_p ||x||^p ||c||_{l^{pr}}^p
    double c_p = 0.0;       // E xi^p by quadrature
    double slack = 0.0;     // rhs - lhs
    bool holds = false;
    std::size_t paths = 0;
};

// Checks the fractional weak moment bound with p/2 + 1/r = 1. Only the range
// p in (2/3, 1) is supported; for smaller p the reduction through Jensen is
// not implemented here.
inline MomentBoundReport weak_moment_bound_check(const BlockSchedule& sched, double p,
                                                 const Vec& x, std::size_t paths,
                                                 std::uint64_t seed) {
    if (!(p > 2.0 / 3.0) || !(p < 1.0))
        throw std::invalid_argument(
            "weak_moment_bound_check: p must lie in (2/3, 1); smaller p unsupported");
    if (paths == 0) throw std::invalid_argument("weak_moment_bound_check: need paths >= 1");
    const std::size_t d = std::min<std::size_t>(x.dim(), sched.size());
    std::vector<double> lhs_samples(paths);
    parallel_for(paths, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t pi = lo; pi < hi; ++pi) {
            rng::Stream rs(seed, pi, rng::kIntegrand);
            double s = 0.0;
            for (std::size_t n = 0; n < d; ++n) {
                const double xi_sq = 1.0 + sample_theta(rs);
                const double term = x[n] * sched.blocks[n].c;
                s += term * term * xi_sq;
            }
            lhs_samples[pi] = std::pow(s, 0.5 * p);
        }
    });
    const auto m = mean_stderr(lhs_samples);

    MomentBoundReport rep;
    rep.paths = paths;
    rep.lhs = m.mean;
    rep.lhs_stderr = m.stderr_;
    rep.c_p = xi_moment(p);
    const double pr = 2.0 * p / (2.0 - p);
    double xnorm_sq = 0.0, c_pr = 0.0;
    for (std::size_t n = 0; n < d; ++n) {
        xnorm_sq += x[n] * x[n];
        c_pr += std::pow(sched.blocks[n].c, pr);
    }
    rep.rhs = rep.c_p * std::pow(xnorm_sq, 0.5 * p) * std::pow(c_pr, p / pr);
    rep.slack = rep.rhs - rep.lhs;
    rep.holds = rep.lhs <= rep.rhs + 3.0 * rep.lhs_stderr;
    return rep;
}

// Cellwise values of the vector step process phi on a grid, given the block
// realization: phi = sum_n (a_n - s_n)^{-1/2} c_n phi_n e_n with
// phi_n = -1_{[s_n,a_n)} + 1_{[a_n,tau_n)} / (b_n - t). Useful for driving
// the generic Ito machinery over the same construction.
inline std::vector<Vec> process_integrand_values(const BlockSchedule& sched,
                                                 const ProcessRealization& proc,
                                                 const TimeGrid& grid) {
    std::vector<Vec> vals(grid.cells(), Vec(proc.dim));
    for (const auto& bi : proc.blocks) {
        const auto& blk = sched.blocks[bi.index];
        const double w = blk.c / std::sqrt(blk.half_width());
        for (std::size_t k = 0; k < grid.cells(); ++k) {
            const double t = grid.times[k];
            if (t >= blk.s && t < blk.a) {
                vals[k][bi.index] = -w;
            } else if (t >= blk.a && grid.times[k + 1] < blk.b &&
                       (bi.resolved ? t < bi.tau : true)) {
                // unresolved blocks keep the whole capped clock leg
                vals[k][bi.index] = w / (blk.b - t);
            }
        }
    }
    return vals;
}

}  // namespace stochlab
