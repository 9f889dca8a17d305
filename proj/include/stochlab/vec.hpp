#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace stochlab {

// Finite-dimensional Euclidean state value. Stands in for the target space of
// vector-valued integrands; experiments treat dimension growth as the knob.
struct Vec {
    std::vector<double> c;

    Vec() = default;
    explicit Vec(std::size_t dim, double fill = 0.0) : c(dim, fill) {}
    Vec(std::initializer_list<double> init) : c(init) {}

    std::size_t dim() const { return c.size(); }
    double& operator[](std::size_t i) { return c[i]; }
    double operator[](std::size_t i) const { return c[i]; }

    Vec& operator+=(const Vec& o) {
        if (o.dim() != dim()) throw std::invalid_argument("Vec: dimension mismatch");
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        if (o.dim() != dim()) throw std::invalid_argument("Vec: dimension mismatch");
        for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (double& x : c) x *= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
};

inline double dot(const Vec& a, const Vec& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += a.c[i] * b.c[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec basis_vec(std::size_t dim, std::size_t i) {
    Vec e(dim);
    e[i] = 1.0;
    return e;
}

}  // namespace stochlab
