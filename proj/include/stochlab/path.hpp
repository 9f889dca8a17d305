#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochlab/grid.hpp"
#include "stochlab/rng.hpp"
#include "stochlab/vec.hpp"

namespace stochlab {

// Increments of a driving Brownian motion over a TimeGrid. Same (grid, seed,
// path_index) always reproduces the same increments bit for bit.
struct BrownianPath {
    TimeGrid grid;
    std::vector<double> increments;  // increments[k] ~ N(0, dt_k)
    std::uint64_t seed = 0;

    // cumulative value at grid.times[idx]; value at times[0] is 0
    double value_at(std::size_t idx) const {
        double w = 0.0;
        for (std::size_t k = 0; k < idx; ++k) w += increments[k];
        return w;
    }

    std::vector<double> values() const {
        std::vector<double> v(grid.times.size());
        v[0] = 0.0;
        for (std::size_t k = 0; k < increments.size(); ++k) v[k + 1] = v[k] + increments[k];
        return v;
    }
};

inline BrownianPath sample_path(const TimeGrid& grid, std::uint64_t seed,
                                std::uint64_t path_index = 0) {
    detail::validate_times(grid.times);
    rng::Stream rs(seed, path_index, rng::kBasePath);
    BrownianPath p{grid, std::vector<double>(grid.cells()), seed};
    for (std::size_t k = 0; k < p.increments.size(); ++k)
        p.increments[k] = std::sqrt(grid.dt(k)) * rs.next_normal();
    return p;
}

// Left-endpoint Riemann-Ito sum: sum_k f_k * dW_k. The caller guarantees that
// integrand_values[k] depends on the path only up to the cell's left endpoint.
inline double ito_sum(const BrownianPath& path, std::span<const double> integrand_values) {
    if (integrand_values.size() != path.increments.size())
        throw std::invalid_argument("ito_sum: one integrand value per increment required, got " +
                                    std::to_string(integrand_values.size()) + " for " +
                                    std::to_string(path.increments.size()) + " cells");
    double s = 0.0;
    for (std::size_t k = 0; k < integrand_values.size(); ++k)
        s += integrand_values[k] * path.increments[k];
    return s;
}

// Componentwise Ito sums. Coordinate i accumulates in the same cell order as
// the scalar ito_sum of the i-th coordinate values, so the pairing identity
// <vector_ito_sum(F), e_i> == ito_sum(<F, e_i>) holds exactly.
inline Vec vector_ito_sum(const BrownianPath& path, std::span<const Vec> integrand) {
    if (integrand.size() != path.increments.size())
        throw std::invalid_argument("vector_ito_sum: one integrand value per increment required");
    if (integrand.empty()) return Vec{};
    const std::size_t d = integrand.front().dim();
    Vec out(d);
    for (std::size_t k = 0; k < integrand.size(); ++k) {
        if (integrand[k].dim() != d)
            throw std::invalid_argument("vector_ito_sum: dimension mismatch at cell " +
                                        std::to_string(k));
        for (std::size_t i = 0; i < d; ++i) out[i] += integrand[k][i] * path.increments[k];
    }
    return out;
}

struct QuadraticVariation {
    double predictable;  // sum_k g_k^2 dt_k
    double realized;     // sum_k (g_k dW_k)^2
};

inline QuadraticVariation quadratic_variation(const BrownianPath& path,
                                              std::span<const double> integrand_values) {
    if (integrand_values.size() != path.increments.size())
        throw std::invalid_argument("quadratic_variation: length mismatch");
    QuadraticVariation qv{0.0, 0.0};
    for (std::size_t k = 0; k < integrand_values.size(); ++k) {
        const double g = integrand_values[k];
        qv.predictable += g * g * path.grid.dt(k);
        const double dm = g * path.increments[k];
        qv.realized += dm * dm;
    }
    return qv;
}

// E(||.|| ^ 1): mean of min(norm, 1). Metrizes convergence in probability.
inline double l0_metric(std::span<const double> sample_norms) {
    if (sample_norms.empty()) throw std::invalid_argument("l0_metric: empty sample list");
    double s = 0.0;
    for (double x : sample_norms) {
        if (x < 0.0) throw std::invalid_argument("l0_metric: negative norm");
        s += std::min(x, 1.0);
    }
    return s / static_cast<double>(sample_norms.size());
}

}  // namespace stochlab
