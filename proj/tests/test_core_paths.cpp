#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "stochlab/path.hpp"
#include "stochlab/stats.hpp"

using namespace stochlab;

TEST_CASE("make_uniform_grid spacing") {
    const auto g = make_uniform_grid(0.0, 1.0, 4);
    const std::vector<double> want{0.0, 0.25, 0.5, 0.75, 1.0};
    REQUIRE(g.times == want);

    const auto g1 = make_uniform_grid(0.0, 1.0, 1);
    REQUIRE(g1.times == std::vector<double>{0.0, 1.0});

    const auto g2 = make_uniform_grid(2.0, 3.0, 2);
    REQUIRE(g2.times == std::vector<double>{2.0, 2.5, 3.0});
}

TEST_CASE("make_uniform_grid rejects bad input") {
    REQUIRE_THROWS_AS(make_uniform_grid(1.0, 1.0, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(make_uniform_grid(2.0, 1.0, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(make_uniform_grid(0.0, 1.0, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_uniform_grid(0.0, std::numeric_limits<double>::infinity(), 4),
                      std::invalid_argument);
}

TEST_CASE("sample_path determinism") {
    const auto g = make_uniform_grid(0.0, 1.0, 64);
    const auto p1 = sample_path(g, 1234, 7);
    const auto p2 = sample_path(g, 1234, 7);
    REQUIRE(p1.increments == p2.increments);

    const auto p3 = sample_path(g, 1234, 8);
    REQUIRE(p1.increments != p3.increments);
}

TEST_CASE("sample_path law of W(1)") {
    const auto g = make_uniform_grid(0.0, 1.0, 16);
    const std::size_t n = 100000;
    std::vector<double> w1(n), w1sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = sample_path(g, 99, i);
        const double w = p.value_at(g.cells());
        w1[i] = w;
        w1sq[i] = w * w;
    }
    const auto m = mean_stderr(w1);
    REQUIRE(std::abs(m.mean - 0.0) < 3.0 * m.stderr_);
    const auto v = mean_stderr(w1sq);
    REQUIRE(std::abs(v.mean - 1.0) < 3.0 * v.stderr_);
}

TEST_CASE("ito_sum telescoping") {
    const auto g = make_uniform_grid(0.0, 1.0, 8);
    const auto p = sample_path(g, 5, 0);
    const std::vector<double> ones(8, 1.0);
    const double w1 = p.value_at(8);
    REQUIRE(ito_sum(p, ones) == Catch::Approx(w1).margin(1e-15));

    const std::vector<double> zeros(8, 0.0);
    REQUIRE(ito_sum(p, zeros) == 0.0);

    // +1 on [0,1/2), -1 on [1/2,1]  ->  2 W(1/2) - W(1)
    std::vector<double> pm(8, -1.0);
    for (std::size_t k = 0; k < 4; ++k) pm[k] = 1.0;
    const double whalf = p.value_at(4);
    REQUIRE(ito_sum(p, pm) == Catch::Approx(2.0 * whalf - w1).margin(1e-14));

    const std::vector<double> short_vals(7, 1.0);
    REQUIRE_THROWS_AS(ito_sum(p, short_vals), std::invalid_argument);
}

TEST_CASE("ito_sum invariant under refinement for step integrands") {
    // same underlying W: the fine path is sampled first and coarsened by
    // summing increments, breakpoints stay on both grids
    const auto fine = make_uniform_grid(0.0, 1.0, 64);
    const auto pf = sample_path(fine, 21, 3);
    BrownianPath pc{make_uniform_grid(0.0, 1.0, 8), std::vector<double>(8, 0.0), 21};
    for (std::size_t k = 0; k < 64; ++k) pc.increments[k / 8] += pf.increments[k];

    auto step_val = [](double t) { return t < 0.25 ? 2.0 : (t < 0.75 ? -1.5 : 0.25); };
    std::vector<double> vf(64), vc(8);
    for (std::size_t k = 0; k < 64; ++k) vf[k] = step_val(pf.grid.times[k]);
    for (std::size_t k = 0; k < 8; ++k) vc[k] = step_val(pc.grid.times[k]);

    REQUIRE(ito_sum(pf, vf) == Catch::Approx(ito_sum(pc, vc)).margin(1e-13));
}

TEST_CASE("vector_ito_sum componentwise and pairing identity") {
    const auto g = make_uniform_grid(0.0, 1.0, 16);
    const auto p = sample_path(g, 77, 0);

    std::vector<Vec> constant(16, Vec{1.0, 0.0});
    const Vec r = vector_ito_sum(p, constant);
    REQUIRE(r[0] == Catch::Approx(p.value_at(16)).margin(1e-15));
    REQUIRE(r[1] == 0.0);

    // random adapted integrand: exact pairing identity against basis vectors
    rng::Stream rs(3, 0, rng::kIntegrand);
    std::vector<Vec> phi(16, Vec(3));
    for (auto& v : phi)
        for (auto& x : v.c) x = rs.next_normal();
    const Vec vi = vector_ito_sum(p, phi);
    for (std::size_t i = 0; i < 3; ++i) {
        std::vector<double> coord(16);
        for (std::size_t k = 0; k < 16; ++k) coord[k] = phi[k][i];
        REQUIRE(vi[i] == ito_sum(p, coord));  // bit-exact by construction
    }

    // zero coordinate stays zero
    for (auto& v : phi) v[2] = 0.0;
    REQUIRE(vector_ito_sum(p, phi)[2] == 0.0);

    std::vector<Vec> mixed = phi;
    mixed[4] = Vec(2);
    REQUIRE_THROWS_AS(vector_ito_sum(p, mixed), std::invalid_argument);
}

TEST_CASE("quadratic variation forms") {
    const auto g = make_uniform_grid(0.0, 1.0, 10);
    const auto p = sample_path(g, 8, 0);
    const std::vector<double> ones(10, 1.0);
    auto qv = quadratic_variation(p, ones);
    REQUIRE(qv.predictable == Catch::Approx(1.0).margin(1e-14));

    const std::vector<double> zeros(10, 0.0);
    qv = quadratic_variation(p, zeros);
    REQUIRE(qv.predictable == 0.0);
    REQUIRE(qv.realized == 0.0);
}

TEST_CASE("realized quadratic variation concentrates at 1") {
    const auto g = make_uniform_grid(0.0, 1.0, 32);
    const std::vector<double> ones(32, 1.0);
    const std::size_t n = 10000;
    std::vector<double> qvs(n);
    for (std::size_t i = 0; i < n; ++i)
        qvs[i] = quadratic_variation(sample_path(g, 123, i), ones).realized;
    const auto m = mean_stderr(qvs);
    REQUIRE(std::abs(m.mean - 1.0) < 3.0 * m.stderr_);
}

TEST_CASE("martingale property of adapted integrands") {
    const auto g = make_uniform_grid(0.0, 1.0, 16);
    const std::size_t n = 20000;
    std::vector<double> sums(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = sample_path(g, 55, i);
        // bounded adapted integrand: sign of the running value, shifted
        std::vector<double> vals(16);
        double w = 0.0;
        for (std::size_t k = 0; k < 16; ++k) {
            vals[k] = w >= 0.0 ? 1.0 : -0.5;
            w += p.increments[k];
        }
        sums[i] = ito_sum(p, vals);
    }
    const auto m = mean_stderr(sums);
    REQUIRE(std::abs(m.mean) < 3.0 * m.stderr_);
}

TEST_CASE("l0 metric") {
    const std::vector<double> zeros(5, 0.0);
    REQUIRE(l0_metric(zeros) == 0.0);

    const std::vector<double> big{1.0, 2.0, 7.5};
    REQUIRE(l0_metric(big) == 1.0);

    const std::vector<double> mix{0.5, 1.5};
    REQUIRE(l0_metric(mix) == Catch::Approx(0.75));

    REQUIRE_THROWS_AS(l0_metric(std::vector<double>{}), std::invalid_argument);
    REQUIRE_THROWS_AS(l0_metric(std::vector<double>{-0.1}), std::invalid_argument);
}
