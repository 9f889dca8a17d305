#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace stochlab {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean_stderr: empty sample");
    double m = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (double x : xs) {
        ++n;
        const double d = x - m;
        m += d / static_cast<double>(n);
        m2 += d * (x - m);
    }
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    return {m, std::sqrt(var / static_cast<double>(n)), n};
}

// One-pass central moments up to order four.
struct MomentAccumulator {
    std::size_t n = 0;
    double m = 0.0, M2 = 0.0, M3 = 0.0, M4 = 0.0;

    void push(double x) {
        const double n1 = static_cast<double>(n);
        ++n;
        const double nn = static_cast<double>(n);
        const double d = x - m;
        const double dn = d / nn;
        const double dn2 = dn * dn;
        const double t1 = d * dn * n1;
        m += dn;
        M4 += t1 * dn2 * (nn * nn - 3.0 * nn + 3.0) + 6.0 * dn2 * M2 - 4.0 * dn * M3;
        M3 += t1 * dn * (nn - 2.0) - 3.0 * dn * M2;
        M2 += t1;
    }
    double mean() const { return m; }
    double variance() const { return n > 1 ? M2 / static_cast<double>(n - 1) : 0.0; }
    double kurtosis() const {
        const double nn = static_cast<double>(n);
        return nn * M4 / (M2 * M2);
    }
};

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median: empty sample");
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    double hi = xs[mid];
    if (xs.size() % 2 == 1) return hi;
    double lo = *std::max_element(xs.begin(), xs.begin() + mid);
    return 0.5 * (lo + hi);
}

// Sup distance between the empirical CDF of the samples and `cdf`.
// Samples need not be pre-sorted.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(static_cast<double>(i) / n - f));
    }
    return d;
}

// Spearman rank correlation; ties get average ranks.
inline double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("spearman: need two equally sized samples");
    auto ranks = [](std::span<const double> v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(rx.size());
    my /= static_cast<double>(ry.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: bad input");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double sse = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - (f.intercept + f.slope * x[i]);
            sse += e * e;
        }
        f.slope_stderr = std::sqrt(sse / (n - 2.0) / sxx);
    }
    return f;
}

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double fa, double b,
                      double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa,
                                   double b, double fb, double m, double fm, double whole,
                                   double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, lm, flm);
    const double right = simpson(f, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 48) {
    if (!(a < b)) throw std::invalid_argument("integrate: need a < b");
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = detail::simpson(f, a, fa, b, fb, m, fm);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// Static partition over [0, n); fn(begin, end) per worker. Work is split the
// same way regardless of how many threads actually run, and workers write to
// disjoint slots, so results do not depend on scheduling.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                         unsigned max_threads = 0) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (max_threads != 0 && max_threads < hw) hw = max_threads;
    if (n < 1024 || hw <= 1) {
        fn(0, n);
        return;
    }
    const std::size_t chunk = (n + hw - 1) / hw;
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < hw; ++t) {
        const std::size_t lo = static_cast<std::size_t>(t) * chunk;
        if (lo >= n) break;
        const std::size_t hi = std::min(n, lo + chunk);
        workers.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& w : workers) w.join();
}

}  // namespace stochlab
