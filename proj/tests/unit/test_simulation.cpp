#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/fixtures.hpp"
#include "liborforge/errors.hpp"
#include "liborforge/simulation.hpp"

using namespace liborforge;
using fixtures::vec;

namespace {

ModelSpec scalar_custom(const LocalCharacteristics& driver, double x0 = 0.0) {
    const TenorStructure tenor = fixtures::uniform_tenor(2, driver.horizon() / 2.0);
    return ModelSpec::custom(InitialCurve::flat(tenor, 0.02), Construction::terminal, driver,
                             {ForwardFunctional::affine(0.01, vec({0.5}))}, vec({x0}));
}

ModelSpec zero_vol_lmm() {
    const auto curve = fixtures::flat_curve();
    LevyDriverBlock block{LocalCharacteristics::zero(1, curve.tenor().maturity()), {}, 1.0, 1.0};
    for (int k = 1; k <= 3; ++k) block.volatilities.push_back(VolatilitySchedule::constant(vec({0.0}), curve.tenor().date(k)));
    return ModelSpec::lmm(curve, block);
}

SimulationConfig config(std::size_t paths, std::uint64_t seed = 1, int workers = 1) {
    SimulationConfig c;
    c.path_count = paths;
    c.master_seed = seed;
    c.worker_count = workers;
    return c;
}

}  // namespace

TEST_CASE("grid contains every tenor date and breakpoint") {
    const ModelSpec spec = fixtures::lmm_model();
    SimulationConfig c;
    CHECK(c.resolved_step(spec.tenor()) == 0.5 / 32);
    const auto grid = simulation_grid(spec, 0.3);
    for (int k = 0; k <= 4; ++k) CHECK(grid.times[grid.tenor_index[k]] == spec.tenor().date(k));
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        CHECK(grid.times[i + 1] > grid.times[i]);
        CHECK(grid.times[i + 1] - grid.times[i] <= 0.3 + 1e-15);
    }
    CHECK(grid.index_of(1.0) == grid.tenor_index[2]);
    CHECK_THROWS_AS(grid.index_of(0.123456), DomainError);
}

TEST_CASE("zero characteristics keep paths at the initial state") {
    const ModelSpec spec = scalar_custom(LocalCharacteristics::zero(1, 1.0), 0.7);
    const PathGrid grid = simulate_driver(spec, config(50));
    for (double v : grid.states) CHECK(v == 0.7);
}

TEST_CASE("deterministic drift integrates exactly") {
    const ModelSpec spec = scalar_custom(
        LocalCharacteristics::constant(1.0, vec({0.1}), Matrix::Zero(1, 1), AtomicJumpMeasure(1)), 0.25);
    const PathGrid grid = simulate_driver(spec, config(20));
    for (std::size_t p = 0; p < grid.path_count; ++p) {
        CHECK(std::abs(grid.coordinate(p, grid.times.size() - 1, 0) - 0.35) < 1e-14);
        const double mid = grid.times[grid.tenor_index[1]];
        CHECK(std::abs(grid.coordinate(p, grid.tenor_index[1], 0) - (0.25 + 0.1 * mid)) < 1e-14);
    }
}

TEST_CASE("jump counts follow the atom intensity") {
    const ModelSpec spec = scalar_custom(
        LocalCharacteristics::constant(1.0, Vector::Zero(1), Matrix::Zero(1, 1), AtomicJumpMeasure(1, {{vec({1.0}), 2.0}})));
    const std::size_t n = 100000;
    const PathGrid grid = simulate_driver(spec, config(n, 99));
    double total = 0.0;
    for (const auto& log : grid.jumps) total += static_cast<double>(log.size());
    const double mean = total / n;
    CHECK(std::abs(mean - 2.0) <= 3.0 * std::sqrt(2.0 / n));
    // The compensated drift -lambda * x is applied between jumps.
    const auto& first = grid.jumps.front();
    const double end = grid.coordinate(0, grid.times.size() - 1, 0);
    CHECK(std::abs(end - (static_cast<double>(first.size()) - 2.0)) < 1e-12);
}

TEST_CASE("non-finite states raise a simulation error") {
    const ModelSpec spec = scalar_custom(
        LocalCharacteristics::constant(4.0, vec({1e308}), Matrix::Zero(1, 1), AtomicJumpMeasure(1)));
    CHECK_THROWS_AS(simulate_driver(spec, config(2)), SimulationError);
}

TEST_CASE("forward price paths at the initial state") {
    // L(0, T_1) = 0.02 with delta = 0.5
    const InitialCurve curve(fixtures::uniform_tenor(2, 0.5), {0.99, 0.99 / 1.01});
    LevyDriverBlock block{fixtures::levy_driver(1.0), {VolatilitySchedule::constant(vec({0.2}), 0.5)}, 1.0, 1.0};
    const ModelSpec lmm = ModelSpec::lmm(curve, block);
    const PathGrid grid = simulate_driver(lmm, config(10));
    const Matrix fwd = forward_price_paths(lmm, grid, 1);
    for (std::size_t p = 0; p < 10; ++p) CHECK(std::abs(fwd(p, 0) - 1.01) < 1e-15);

    const ModelSpec affine = fixtures::affine_model();
    const PathGrid ag = simulate_driver(affine, config(10));
    for (int k = 1; k <= 3; ++k) {
        const Matrix f = forward_price_paths(affine, ag, k);
        for (std::size_t p = 0; p < 10; ++p) CHECK(std::abs(f(p, 0) - affine.curve().forward_price(k, 4)) < 1e-10);
    }

    const ModelSpec flat = zero_vol_lmm();
    const PathGrid zg = simulate_driver(flat, config(5));
    const Matrix zf = forward_price_paths(flat, zg, 2);
    for (Eigen::Index i = 0; i < zf.size(); ++i)
        CHECK(zf.data()[i] == std::exp(flat.backward_functional(2).value(0.0, flat.initial_state())));
}

TEST_CASE("zero-volatility model: martingale test, density and caplets are exact") {
    const ModelSpec spec = zero_vol_lmm();
    const auto report = martingale_test(spec, config(200));
    CHECK(report.passed());
    for (const auto& row : report.rows) {
        CHECK(row.mean == row.target);
        CHECK(row.z == 0.0);
    }
    const PathGrid grid = simulate_driver(spec, config(20));
    const Matrix d = density_process(spec, grid, 1);
    for (Eigen::Index i = 0; i < d.size(); ++i) CHECK(d.data()[i] == 1.0);

    const auto& curve = spec.curve();
    for (double strike : {0.0, 0.01, 0.05}) {
        const auto q = caplet_price(spec, config(100), 2, strike);
        const double l0 = curve.libor(2);
        const double expected = curve.bond_price(3) * 0.5 * std::max(l0 - strike, 0.0);
        CHECK(std::abs(q.price - expected) < 1e-15);
        CHECK(q.std_error == 0.0);
    }
}

TEST_CASE("density process starts at one and is a martingale after reweighting") {
    const ModelSpec spec = fixtures::fpm_model(3.0);
    const std::size_t n = 20000;
    const PathGrid grid = simulate_driver(spec, config(n, 4));
    for (int k = 1; k <= 3; ++k) {
        const Matrix d = density_process(spec, grid, k);
        const Matrix w = measure_weight_paths(spec, grid, k + 1);
        const std::size_t tk = grid.tenor_index[k];
        std::vector<double> values(n);
        for (std::size_t p = 0; p < n; ++p) {
            CHECK(d(p, 0) == 1.0);
            values[p] = d(p, tk) * w(p, tk);
        }
        const auto s = pairwise_statistics(values);
        CHECK(std::abs(s.mean - 1.0) <= 3.0 * s.std_error);
    }
}

TEST_CASE("fpm martingale test passes and the sabotaged drift is detected") {
    const ModelSpec spec = fixtures::fpm_model(3.0);
    const auto good = martingale_test(spec, config(100000, 11));
    CHECK(good.passed());
    CHECK(good.rows.size() == 6);
    const auto bad = martingale_test(spec.with_zero_drift(), config(100000, 11));
    CHECK_FALSE(bad.passed());
    CHECK(bad.max_abs_z() > 3.0);
}

TEST_CASE("caplet with an unreachable strike is worthless") {
    const auto quotes = caplet_prices(fixtures::lmm_model(), config(2000), {1e6});
    for (const auto& q : quotes) {
        CHECK(q.price == 0.0);
        CHECK(q.std_error == 0.0);
    }
}

TEST_CASE("telescoping product of period forwards") {
    const ModelSpec spec = fixtures::lmm_model();
    const PathGrid grid = simulate_driver(spec, config(200, 3));
    const Matrix terminal = terminal_forward_paths(spec, grid, 1);
    Matrix product = Matrix::Ones(grid.path_count, grid.times.size());
    for (int j = 1; j <= 3; ++j) product = product.cwiseProduct(period_forward_paths(spec, grid, j));
    CHECK(((product - terminal).cwiseQuotient(terminal)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("positivity of simulated paths") {
    const ModelSpec lmm = fixtures::lmm_model();
    const PathGrid grid = simulate_driver(lmm, config(2000, 5));
    for (int k = 1; k <= 3; ++k) CHECK(period_forward_paths(lmm, grid, k).minCoeff() >= 1.0);

    const ModelSpec affine = fixtures::affine_model();
    const PathGrid ag = simulate_driver(affine, config(2000, 5));
    for (double v : ag.states) CHECK(v >= 0.0);
}

TEST_CASE("results do not depend on the worker count") {
    for (const ModelSpec& spec : {fixtures::lmm_model(), fixtures::affine_model()}) {
        const PathGrid a = simulate_driver(spec, config(300, 21, 1));
        const PathGrid b = simulate_driver(spec, config(300, 21, 4));
        CHECK(a.states == b.states);
        const auto ma = martingale_test(spec, config(3000, 21, 1));
        const auto mb = martingale_test(spec, config(3000, 21, 3));
        REQUIRE(ma.rows.size() == mb.rows.size());
        for (std::size_t i = 0; i < ma.rows.size(); ++i) {
            CHECK(ma.rows[i].mean == mb.rows[i].mean);
            CHECK(ma.rows[i].std_error == mb.rows[i].std_error);
        }
    }
    CHECK(path_seed(1, 0) != path_seed(1, 1));
    CHECK(path_seed(1, 5) != path_seed(2, 5));
}

TEST_CASE("pairwise statistics agree with a two-pass computation") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z(3.0, 2.0);
    for (std::size_t n : {1u, 2u, 15u, 16u, 17u, 1000u, 4097u}) {
        std::vector<double> v(n);
        for (double& x : v) x = z(rng);
        long double sum = 0.0L;
        for (double x : v) sum += x;
        const long double mean = sum / n;
        long double ss = 0.0L;
        for (double x : v) ss += (x - mean) * (x - mean);
        const auto s = pairwise_statistics(v);
        CHECK(s.count == n);
        CHECK(std::abs(s.mean - static_cast<double>(mean)) < 1e-12);
        if (n > 1) {
            const double se = std::sqrt(static_cast<double>(ss / (n - 1)) / n);
            CHECK(std::abs(s.std_error - se) < 1e-12 * std::max(1.0, se));
        } else {
            CHECK(s.std_error == 0.0);
        }
    }
    CHECK(z_score(1.0, 1.0, 0.0) == 0.0);
    CHECK(std::isinf(z_score(1.1, 1.0, 0.0)));
    CHECK(z_score(1.3, 1.0, 0.1) == doctest::Approx(3.0));
}
