#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochlab/hitting.hpp"
#include "stochlab/rng.hpp"
#include "stochlab/stats.hpp"

namespace stochlab {

// theta with survival P(theta > t) = (2/pi) arctan(1/sqrt(t)): the law of a
// unit-level clocked hitting time. Sampled through the distributional hitting
// backend (first passage of an independent N(0,1) level in clock time).
inline double sample_theta(rng::Stream& rs) {
    const double eta = rs.next_normal();
    return sample_first_passage_exact(eta, rs);
}

inline double theta_survival(double t) {
    if (t <= 0.0) return 1.0;
    return 2.0 / 3.14159265358979323846 * std::atan(1.0 / std::sqrt(t));
}

// i.i.d. law for the series experiments: a sampler plus its survival function
// and the constant C of the polynomial two-sided tail band
// C^-1 (t+1)^-1 <= P(xi > t) <= C (t+1)^-1.
struct XiLaw {
    std::function<double(rng::Stream&)> sample;
    std::function<double(double)> survival;
    double band_constant = 2.0;
    std::string name;
};

// xi = sqrt(1 + theta). Tail index 1; the band holds with C = 2.
inline XiLaw builtin_xi_law() {
    XiLaw law;
    law.sample = [](rng::Stream& rs) { return std::sqrt(1.0 + sample_theta(rs)); };
    law.survival = [](double t) {
        if (t <= 1.0) return 1.0;
        return theta_survival(t * t - 1.0);
    };
    law.band_constant = 2.0;
    law.name = "arctan-sqrt";
    return law;
}

inline XiLaw pareto_xi_law(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("pareto_xi_law: need alpha > 0");
    XiLaw law;
    law.sample = [alpha](rng::Stream& rs) { return std::pow(rs.next_unit(), -1.0 / alpha); };
    law.survival = [alpha](double t) { return t <= 1.0 ? 1.0 : std::pow(t, -alpha); };
    law.band_constant = alpha == 1.0 ? 2.0 : 0.0;  // band only meaningful at index 1
    law.name = "pareto";
    return law;
}

inline XiLaw exponential_xi_law() {
    XiLaw law;
    law.sample = [](rng::Stream& rs) { return -std::log(rs.next_unit()); };
    law.survival = [](double t) { return t <= 0.0 ? 1.0 : std::exp(-t); };
    law.name = "exponential";
    return law;
}

// E xi^p for the built-in law, p in (0,1), by quadrature. In polar form the
// moment is (2/pi) Int_0^{pi/2} sec^p v dv; the substitution w = pi/2 - v,
// w = y^{1/(1-p)} removes the endpoint singularity so plain adaptive Simpson
// converges.
inline double xi_moment(double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("xi_moment: need p in (0,1)");
    const double pi = 3.14159265358979323846;
    const double q = 1.0 / (1.0 - p);
    const double upper = std::pow(pi / 2.0, 1.0 - p);
    const auto g = [=](double y) {
        if (y <= 0.0) return q;
        const double w = std::pow(y, q);
        return std::pow(std::sin(w), -p) * q * std::pow(y, q - 1.0);
    };
    return 2.0 / pi * integrate(g, 0.0, upper, 1e-12);
}

// Coefficients c_n in (0,1] plus the xi law; N is c.size().
struct TailSequenceSpec {
    std::vector<double> c;
    XiLaw law;

    std::size_t N() const { return c.size(); }
};

inline std::vector<double> coefficients_harmonic(std::size_t n) {
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = 1.0 / static_cast<double>(i + 1);
    return c;
}

inline std::vector<double> coefficients_geometric(std::size_t n) {
    std::vector<double> c(n);
    double v = 0.5;
    for (std::size_t i = 0; i < n; ++i) {
        c[i] = v;
        v = v > 1e-300 ? 0.5 * v : v;
    }
    return c;
}

inline void validate_spec(const TailSequenceSpec& spec) {
    if (spec.c.empty()) throw std::invalid_argument("tail series: need at least one coefficient");
    for (double cn : spec.c)
        if (!(cn > 0.0) || !(cn <= 1.0))
            throw std::invalid_argument("tail series: coefficients must lie in (0,1]");
}

// Exact CDF of the truncated maximum: P(sup_{n<=N} c_n xi_n <= lambda)
// = prod_{n<=N} (1 - p_n(lambda)) with p_n(lambda) = P(xi > lambda / c_n).
inline double product_cdf(const TailSequenceSpec& spec, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("product_cdf: need lambda > 0");
    validate_spec(spec);
    double log_p = 0.0;
    for (double cn : spec.c) {
        const double pn = spec.law.survival(lambda / cn);
        if (pn >= 1.0) return 0.0;
        log_p += std::log1p(-pn);
    }
    return std::exp(log_p);
}

// Median of the truncated-sup law, by bisection on product_cdf.
inline double product_cdf_median(const TailSequenceSpec& spec) {
    double lo = 1e-12, hi = 1.0;
    while (product_cdf(spec, hi) < 0.5 && hi < 1e15) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (product_cdf(spec, mid) < 0.5)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// i.i.d. samples of sup_{n<=N} c_n xi_n.
inline std::vector<double> sample_sup(const TailSequenceSpec& spec, std::size_t paths,
                                      std::uint64_t seed) {
    validate_spec(spec);
    if (paths == 0) throw std::invalid_argument("sample_sup: need paths >= 1");
    std::vector<double> out(paths);
    parallel_for(paths, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            rng::Stream rs(seed, p, rng::kIntegrand);
            double sup = 0.0;
            for (double cn : spec.c) sup = std::max(sup, cn * spec.law.sample(rs));
            out[p] = sup;
        }
    });
    return out;
}

// Exploratory: samples of || (c_n xi_n)_{n<=N} ||_{l^p}. Nothing is asserted
// about these; the dichotomy statement proper concerns the sup (p = inf).
inline std::vector<double> sample_lp_norm(const TailSequenceSpec& spec, double p,
                                          std::size_t paths, std::uint64_t seed) {
    validate_spec(spec);
    if (!(p >= 1.0)) throw std::invalid_argument("sample_lp_norm: need p >= 1");
    std::vector<double> out(paths);
    parallel_for(paths, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t pi = lo; pi < hi; ++pi) {
            rng::Stream rs(seed, pi, rng::kIntegrand);
            double acc = 0.0;
            for (double cn : spec.c) acc += std::pow(cn * spec.law.sample(rs), p);
            out[pi] = std::pow(acc, 1.0 / p);
        }
    });
    return out;
}

struct DichotomyReport {
    double sum_c = 0.0;
    double empirical_median = 0.0;
    double analytic_median = 0.0;
    double ks_distance = 0.0;
    bool bounded_regime = false;  // verdict: medians stabilize vs diverge
};

// Tail-index fit: OLS slope of log empirical survival against log threshold.
// index = -slope. Flags super-polynomial decay when the index estimated from
// the upper half of the thresholds runs away from the lower half.
struct TailIndexFit {
    double index = 0.0;
    double stderr_ = 0.0;
    double index_lower_half = 0.0;
    double index_upper_half = 0.0;
    bool non_polynomial = false;
};

inline TailIndexFit tail_index(std::span<const double> samples,
                               std::span<const double> thresholds,
                               std::size_t min_exceedances = 10) {
    if (samples.size() < 1000)
        throw std::invalid_argument("tail_index: need at least 10^3 samples");
    if (thresholds.size() < 4) throw std::invalid_argument("tail_index: need >= 4 thresholds");
    std::vector<double> lx, ly;
    for (double t : thresholds) {
        std::size_t count = 0;
        for (double s : samples)
            if (s > t) ++count;
        if (t == thresholds.back() && count < min_exceedances)
            throw std::invalid_argument(
                "tail_index: too few exceedances over the largest threshold (" +
                std::to_string(count) + ")");
        if (count == 0) continue;
        lx.push_back(std::log(t));
        ly.push_back(std::log(static_cast<double>(count) / static_cast<double>(samples.size())));
    }
    if (lx.size() < 4) throw std::invalid_argument("tail_index: too few usable thresholds");
    const auto fit = fit_line(lx, ly);
    TailIndexFit out;
    out.index = -fit.slope;
    out.stderr_ = fit.slope_stderr;
    const std::size_t half = lx.size() / 2;
    out.index_lower_half = -fit_line(std::span(lx).subspan(0, half), std::span(ly).subspan(0, half)).slope;
    out.index_upper_half = -fit_line(std::span(lx).subspan(half), std::span(ly).subspan(half)).slope;
    out.non_polynomial =
        out.index_upper_half > 1.5 * out.index_lower_half + 0.5;
    return out;
}

}  // namespace stochlab
