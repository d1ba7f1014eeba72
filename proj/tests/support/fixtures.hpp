#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "liborforge/affine.hpp"
#include "liborforge/model.hpp"

namespace fixtures {

using namespace liborforge;

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

inline TenorStructure uniform_tenor(int n, double delta) {
    std::vector<double> dates;
    for (int k = 0; k <= n; ++k) dates.push_back(k * delta);
    return TenorStructure(dates);
}

inline InitialCurve flat_curve(int n = 4, double delta = 0.5, double rate = 0.03) {
    return InitialCurve::flat(uniform_tenor(n, delta), rate);
}

// One diffusion factor with unit variance plus three jump atoms.
inline LocalCharacteristics levy_driver(double horizon, double variance = 1.0) {
    Matrix c(1, 1);
    c(0, 0) = variance;
    return LocalCharacteristics::constant(
        horizon, Vector::Zero(1), c,
        AtomicJumpMeasure(1, {{vec({0.1}), 1.0}, {vec({-0.15}), 0.5}, {vec({0.05}), 2.0}}));
}

inline LevyDriverBlock levy_block(const TenorStructure& tenor, std::vector<double> vols, double variance = 1.0) {
    LevyDriverBlock block{levy_driver(tenor.maturity(), variance), {}, 1.0, 1.0};
    double total = 0.0;
    for (std::size_t k = 0; k < vols.size(); ++k) {
        block.volatilities.push_back(VolatilitySchedule::constant(vec({vols[k]}), tenor.date(static_cast<int>(k) + 1)));
        total += vols[k];
    }
    block.bound = std::max(1.0, 2.0 * total);
    return block;
}

inline ModelSpec lmm_model(double scale = 1.0) {
    const auto curve = flat_curve();
    return ModelSpec::lmm(curve, levy_block(curve.tenor(), {0.2 * scale, 0.18 * scale, 0.15 * scale}));
}

inline ModelSpec fpm_model(double scale = 1.0) {
    const auto curve = flat_curve();
    return ModelSpec::fpm(curve, levy_block(curve.tenor(), {0.05 * scale, 0.04 * scale, 0.03 * scale}));
}

inline AffineDriverSpec cir_jump_driver() {
    return AffineDriverSpec(0.6, -0.5, 0.1, AtomicJumpMeasure(1, {{vec({0.2}), 0.5}}),
                            AtomicJumpMeasure(1, {{vec({0.1}), 0.3}}));
}

inline ModelSpec affine_model() {
    const auto curve = flat_curve();
    const auto driver = cir_jump_driver();
    return ModelSpec::affine(curve, AffineModelSpec(driver, curve.tenor(), calibrate_u(driver, curve), 1e-3));
}

// Two-dimensional Brownian driver with the given diffusion and no jumps.
inline LocalCharacteristics gaussian_driver(double horizon, const Matrix& c) {
    return LocalCharacteristics::constant(horizon, Vector::Zero(c.rows()), c, AtomicJumpMeasure(c.rows()));
}

}  // namespace fixtures
