#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochlab/path.hpp"
#include "stochlab/rng.hpp"
#include "stochlab/stats.hpp"

namespace stochlab {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Deterministic time change on [a,b): h(r) = 1/(b-r) - 1/(b-a) when b is
// finite, h(r) = r - a when b = inf. Strictly increasing, h(a) = 0 and
// h(r) -> inf as r -> b.
struct Clock {
    double a = 0.0;
    double b = kInf;

    Clock(double a_, double b_) : a(a_), b(b_) {
        if (!(a < b)) throw std::invalid_argument("Clock: need a < b");
        if (!std::isfinite(a)) throw std::invalid_argument("Clock: a must be finite");
    }

    bool finite_b() const { return std::isfinite(b); }

    // speed f_b(r): the integrand whose running integral is time-changed BM
    double speed(double r) const { return finite_b() ? 1.0 / (b - r) : 1.0; }

    double value(double r) const {
        if (!(r >= a) || !(r < b))
            throw std::invalid_argument("Clock: time " + std::to_string(r) + " outside [a, b)");
        if (!finite_b()) return r - a;
        return 1.0 / (b - r) - 1.0 / (b - a);
    }

    double inverse(double u) const {
        if (!(u >= 0.0)) throw std::invalid_argument("Clock: clock value must be >= 0");
        if (!finite_b()) return a + u;
        return b - 1.0 / (u + 1.0 / (b - a));
    }
};

// First-passage time of standard BM to a level x, sampled exactly through
// tau = x^2 / Z^2 with Z standard normal. tau = 0 when x = 0.
inline double sample_first_passage_exact(double level, rng::Stream& rs) {
    if (level == 0.0) return 0.0;
    const double z = rs.next_normal();
    return (level * level) / (z * z);
}

struct HittingSample {
    double tau = 0.0;          // hitting time in [a, b)
    double clock_value = 0.0;  // h(tau)
    double level = 0.0;        // the level eta that was hit
};

// Distributional (exact) hitting backend: draws the first-passage time of the
// level in clock time and maps it back through the inverse clock. tau < b is
// automatic for finite b. A finite h_cap rejects unbounded samples explicitly.
inline HittingSample sample_hitting(const Clock& c, double eta, rng::Stream& rs,
                                    double h_cap = kInf) {
    const double t = sample_first_passage_exact(eta, rs);
    if (t > h_cap)
        throw std::runtime_error("sample_hitting: clock value " + std::to_string(t) +
                                 " exceeds configured cap " + std::to_string(h_cap) +
                                 " (level " + std::to_string(eta) + ")");
    return HittingSample{c.inverse(t), t, eta};
}

// Same backend with an independently drawn centered Gaussian level.
inline HittingSample sample_hitting_gaussian(const Clock& c, double sigma, rng::Stream& rs,
                                             double h_cap = kInf) {
    const double eta = sigma * rs.next_normal();
    return sample_hitting(c, eta, rs, h_cap);
}

// ---------------------------------------------------------------------------
// Grid-coupled backend
// ---------------------------------------------------------------------------

// First index k with (y[k]-eta) on the other side of the level than the start
// (start side taken from eta itself since y[0] = 0). Returns npos when the
// sequence never reaches the level.
inline constexpr std::size_t kNoCrossing = static_cast<std::size_t>(-1);

inline std::size_t first_crossing(std::span<const double> ys, double eta) {
    for (std::size_t k = 0; k < ys.size(); ++k) {
        const double d = eta - ys[k];
        if (d == 0.0 || (d > 0.0) != (eta > 0.0)) return k;
    }
    return kNoCrossing;
}

struct GridHit {
    bool resolved = false;
    double tau = 0.0;
    double clock_value = 0.0;
    double level = 0.0;
    double overshoot = 0.0;         // |Y(tau) - eta|
    double signed_integral = 0.0;   // Y(tau) - eta; the block's net Ito sum
    double terminal_y = 0.0;        // running sum at the last grid time when unresolved
    std::size_t cell_index = 0;     // grid index of the detected crossing
};

// Pathwise hitting on an already-sampled path: forms the running Ito sum
// Y(t_k) = sum f_b(t_j) dW_j over the grid restricted to [a, b) and detects
// the first grid crossing of eta. No bridge correction; the overshoot is
// recorded for bias diagnostics.
inline GridHit hit_on_grid(const BrownianPath& path, const Clock& c, double eta) {
    const auto& times = path.grid.times;
    if (times.front() < c.a || !(times.back() <= c.b))
        throw std::invalid_argument("hit_on_grid: path grid must lie within [a, b]");
    GridHit out;
    out.level = eta;
    double y = 0.0;
    // k indexes grid times; Y at times[0] is 0
    if (eta == 0.0) {
        out.resolved = true;
        out.tau = times.front();
        out.clock_value = c.value(times.front());
        return out;
    }
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        y += c.speed(times[k]) * path.increments[k];
        const double d = eta - y;
        if (d == 0.0 || (d > 0.0) != (eta > 0.0)) {
            out.resolved = true;
            out.cell_index = k + 1;
            out.tau = times[k + 1];
            out.clock_value = c.value(times[k + 1]);
            out.overshoot = std::abs(y - eta);
            out.signed_integral = y - eta;
            return out;
        }
    }
    out.terminal_y = y;
    out.signed_integral = y - eta;
    return out;
}

// Grid uniform in clock time: h(t_k) = k * h_max / steps; t_0 = a. The
// singularity at b is never reached; everything beyond h_max is the caller's
// unresolved-hit accounting.
inline TimeGrid clock_uniform_grid(const Clock& c, double h_max, std::size_t steps) {
    if (!(h_max > 0.0) || steps == 0)
        throw std::invalid_argument("clock_uniform_grid: need h_max > 0 and steps >= 1");
    std::vector<double> times(steps + 1);
    times[0] = c.a;
    for (std::size_t k = 1; k <= steps; ++k)
        times[k] = c.inverse(h_max * static_cast<double>(k) / static_cast<double>(steps));
    return make_grid(std::move(times));
}

// ---------------------------------------------------------------------------
// Lazy hit walk
// ---------------------------------------------------------------------------

// Simulates the time-changed process W(h) at adapted clock times until it
// crosses `eta` or the clock cap is reached. Steps are uniform in clock time
// at `base_step`; two optional departures trade strict uniformity for cost:
//   * tail_growth lets steps grow like max(1,h)^tail_growth deep in the tail,
//   * refine_zone shrinks steps near the level so the recorded overshoot is
//     resolved at refine_min_sd of the base step's standard deviation.
// Both default off (0 / 1), which is the plain clock-uniform scheme.
struct HitWalkParams {
    double base_step = 1e-3;
    double h_max = 6.4e3;
    double tail_growth = 0.0;
    double refine_zone = 0.0;       // in units of base-step standard deviations
    double refine_min_sd = 1.0;     // floor for the refined step sd, relative to base sd

    HitWalkParams with_step(double s) const {
        HitWalkParams p = *this;
        p.base_step = s;
        return p;
    }
};

struct HitWalkResult {
    bool resolved = false;
    double clock_value = 0.0;      // h at the crossing (or h_max when unresolved)
    double y_end = 0.0;            // walk value at crossing / cap
    double overshoot = 0.0;        // |y_end - eta| when resolved
    double signed_integral = 0.0;  // y_end - eta
    std::uint64_t steps = 0;
};

inline HitWalkResult run_hit_walk(double eta, rng::Stream& rs, const HitWalkParams& p) {
    if (!(p.base_step > 0.0) || !(p.h_max > 0.0))
        throw std::invalid_argument("run_hit_walk: base_step and h_max must be positive");
    HitWalkResult out;
    if (eta == 0.0) {
        out.resolved = true;
        return out;
    }
    double y = 0.0, h = 0.0;
    const bool up = eta > 0.0;
    while (h < p.h_max) {
        double dh = p.base_step;
        if (p.tail_growth > 0.0 && h > 1.0) dh *= std::pow(h, p.tail_growth);
        if (p.refine_zone > 0.0) {
            const double sd_base = std::sqrt(dh);
            const double dist = std::abs(eta - y);
            if (dist < p.refine_zone * sd_base) {
                const double sd = std::max(dist / p.refine_zone, p.refine_min_sd * sd_base);
                dh = sd * sd;
            }
        }
        dh = std::min(dh, p.h_max - h);
        y += std::sqrt(dh) * rs.next_normal();
        h += dh;
        ++out.steps;
        if (up ? (y >= eta) : (y <= eta)) {
            out.resolved = true;
            out.clock_value = h;
            out.y_end = y;
            out.overshoot = std::abs(y - eta);
            out.signed_integral = y - eta;
            return out;
        }
    }
    out.clock_value = p.h_max;
    out.y_end = y;
    out.signed_integral = y - eta;
    return out;
}

// ---------------------------------------------------------------------------
// Tail laws
// ---------------------------------------------------------------------------

// Survival of h(tau) for a centered Gaussian level with sd sigma.
inline double arctan_survival(double sigma, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("arctan_survival: need t > 0");
    return 2.0 / 3.14159265358979323846 * std::atan(sigma / std::sqrt(t));
}

// Survival of the first-passage time to a fixed level x.
inline double levy_survival(double x, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("levy_survival: need t > 0");
    if (x == 0.0) return 0.0;
    return 2.0 * normal_cdf(std::abs(x) / std::sqrt(t)) - 1.0;
}

struct SurvivalBounds {
    double lower = 0.0;
    double upper = 0.0;
};

// sqrt(2/(pi e)): the constant in the lower hitting-tail estimate.
inline double hitting_lower_constant() {
    return std::sqrt(2.0 / (3.14159265358979323846 * std::exp(1.0)));
}

// Two-sided bounds on P(h(tau) > t) in terms of m(t) = E min(|eta|/sqrt(t), 1).
inline SurvivalBounds hitting_survival_bounds(double m_t) {
    return SurvivalBounds{hitting_lower_constant() * m_t, m_t};
}

inline double eta_band_point(double eta, double t) {
    return std::min(std::abs(eta) / std::sqrt(t), 1.0);
}

// closed form of E min(sigma|Z|/sqrt(t), 1) for Z standard normal
inline double eta_band_gaussian(double sigma, double t) {
    if (sigma == 0.0) return 0.0;
    const double k = std::sqrt(t) / sigma;
    const double pi = 3.14159265358979323846;
    return (1.0 / k) * std::sqrt(2.0 / pi) * (1.0 - std::exp(-0.5 * k * k)) +
           2.0 * normal_cdf(-k);
}

// Describes one of the closed-form tail laws plus the generic bounds variant.
struct TailLaw {
    enum class Kind { Arctan, Levy, Bounds };
    Kind kind = Kind::Arctan;
    double param = 1.0;  // sigma for Arctan, x for Levy, unused for Bounds
    std::function<double(double)> eta_band;  // t -> E min(|eta|/sqrt(t),1), Bounds only

    static TailLaw arctan(double sigma) { return {Kind::Arctan, sigma, {}}; }
    static TailLaw levy(double x) { return {Kind::Levy, x, {}}; }
    static TailLaw bounds(std::function<double(double)> band) {
        return {Kind::Bounds, 0.0, std::move(band)};
    }

    // survival for the closed-form laws; midpoint of the band otherwise
    double survival(double t) const {
        switch (kind) {
            case Kind::Arctan: return arctan_survival(param, t);
            case Kind::Levy: return levy_survival(param, t);
            case Kind::Bounds: {
                const auto b = hitting_survival_bounds(eta_band(t));
                return 0.5 * (b.lower + b.upper);
            }
        }
        return 0.0;
    }

    SurvivalBounds bounds_at(double t) const {
        if (kind != Kind::Bounds)
            return SurvivalBounds{survival(t), survival(t)};
        return hitting_survival_bounds(eta_band(t));
    }
};

inline double tail_survival(const TailLaw& law, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("tail_survival: need t > 0");
    return law.survival(t);
}

}  // namespace stochlab
