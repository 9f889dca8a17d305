#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace stochlab {

// Ordered sample times on [a,b]. Strictly increasing, finite, times[0] = a.
struct TimeGrid {
    std::vector<double> times;

    double a() const { return times.front(); }
    double b() const { return times.back(); }
    std::size_t cells() const { return times.size() - 1; }
    double dt(std::size_t k) const { return times[k + 1] - times[k]; }
};

namespace detail {
inline void validate_times(const std::vector<double>& times) {
    if (times.size() < 2)
        throw std::invalid_argument("grid: need at least two sample times");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]))
            throw std::invalid_argument("grid: non-finite time at index " + std::to_string(i));
        if (i > 0 && !(times[i] > times[i - 1]))
            throw std::invalid_argument("grid: times not strictly increasing at index " +
                                        std::to_string(i));
    }
}
}  // namespace detail

inline TimeGrid make_grid(std::vector<double> times) {
    detail::validate_times(times);
    return TimeGrid{std::move(times)};
}

inline TimeGrid make_uniform_grid(double a, double b, std::size_t n_steps) {
    if (!std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("make_uniform_grid: endpoints must be finite");
    if (!(a < b)) throw std::invalid_argument("make_uniform_grid: need a < b");
    if (n_steps == 0) throw std::invalid_argument("make_uniform_grid: need n_steps >= 1");
    std::vector<double> times(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) {
        const double w = static_cast<double>(k) / static_cast<double>(n_steps);
        times[k] = a + w * (b - a);
    }
    times.front() = a;
    times.back() = b;
    return TimeGrid{std::move(times)};
}

// Splits every cell into `factor` equal parts. Existing times are kept exactly.
inline TimeGrid refine_grid(const TimeGrid& g, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("refine_grid: factor must be >= 1");
    std::vector<double> times;
    times.reserve(g.cells() * factor + 1);
    for (std::size_t k = 0; k < g.cells(); ++k) {
        times.push_back(g.times[k]);
        for (std::size_t j = 1; j < factor; ++j) {
            const double w = static_cast<double>(j) / static_cast<double>(factor);
            times.push_back(g.times[k] + w * g.dt(k));
        }
    }
    times.push_back(g.times.back());
    return make_grid(std::move(times));
}

// Sorted union of two grids; duplicate times collapse.
inline TimeGrid merge_grids(const TimeGrid& g1, const TimeGrid& g2) {
    std::vector<double> times;
    times.reserve(g1.times.size() + g2.times.size());
    std::merge(g1.times.begin(), g1.times.end(), g2.times.begin(), g2.times.end(),
               std::back_inserter(times));
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return make_grid(std::move(times));
}

}  // namespace stochlab
