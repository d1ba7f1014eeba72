#include <doctest.h>

#include <cmath>

#include "../support/fixtures.hpp"
#include "liborforge/errors.hpp"
#include "liborforge/measure_change.hpp"

using namespace liborforge;
using fixtures::vec;

namespace {

CharacteristicTriplet scalar_triplet(double b, double c, std::vector<JumpAtom> jumps) {
    CharacteristicTriplet chars = CharacteristicTriplet::zero(1);
    chars.drift(0) = b;
    chars.diffusion(0, 0) = c;
    chars.jumps = std::move(jumps);
    return chars;
}

ForwardFunctional square() {
    return ForwardFunctional::custom(
        1,
        {[](double, const Vector& x) { return x(0) * x(0); }, [](double, const Vector&) { return 0.0; },
         [](double, const Vector& x) { return vec({2.0 * x(0)}); },
         [](double, const Vector&) { return Matrix::Constant(1, 1, 2.0); }},
        10.0);
}

double max_diff(const CharacteristicTriplet& a, const CharacteristicTriplet& b) {
    double m = (a.drift - b.drift).cwiseAbs().maxCoeff();
    m = std::max(m, (a.diffusion - b.diffusion).cwiseAbs().maxCoeff());
    REQUIRE(a.jumps.size() == b.jumps.size());
    for (std::size_t i = 0; i < a.jumps.size(); ++i) {
        m = std::max(m, (a.jumps[i].size - b.jumps[i].size).cwiseAbs().maxCoeff());
        m = std::max(m, std::abs(a.jumps[i].intensity - b.jumps[i].intensity));
    }
    return m;
}

}  // namespace

TEST_CASE("characteristics of a constant functional vanish") {
    const auto chars = scalar_triplet(0.3, 0.2, {{vec({0.5}), 2.0}});
    const auto s = characteristics_of_functional(chars, ForwardFunctional::constant(1, 4.2), 0.1, vec({0.7}));
    CHECK(s.drift == 0.0);
    CHECK(s.diffusion == 0.0);
    CHECK(s.jumps.empty());
}

TEST_CASE("identity functional passes the triplet through") {
    const auto chars = scalar_triplet(0.1, 0.04, {{vec({0.5}), 2.0}});
    const auto s = characteristics_of_functional(chars, ForwardFunctional::affine(0.0, vec({1.0})), 0.0, vec({0.3}));
    CHECK(std::abs(s.drift - 0.1) < 1e-15);
    CHECK(std::abs(s.diffusion - 0.04) < 1e-15);
    REQUIRE(s.jumps.size() == 1);
    CHECK(s.jumps.atoms()[0].size(0) == 0.5);
    CHECK(s.jumps.atoms()[0].intensity == 2.0);
}

TEST_CASE("square functional by hand") {
    const auto s = characteristics_of_functional(scalar_triplet(0.0, 1.0, {}), square(), 0.0, vec({1.0}));
    CHECK(std::abs(s.drift - 1.0) < 1e-15);
    CHECK(std::abs(s.diffusion - 4.0) < 1e-15);
    CHECK(s.jumps.empty());

    // With one atom: the image jump (x + y)^2 - x^2 and the compensator correction.
    const auto j = characteristics_of_functional(scalar_triplet(0.0, 0.0, {{vec({0.5}), 2.0}}), square(), 0.0,
                                                 vec({1.0}));
    const double image = 1.5 * 1.5 - 1.0;
    CHECK(std::abs(j.drift - (image - 2.0 * 0.5) * 2.0) < 1e-15);
    REQUIRE(j.jumps.size() == 1);
    CHECK(std::abs(j.jumps.atoms()[0].size(0) - image) < 1e-15);
}

TEST_CASE("functional characteristics reject bounded truncation") {
    const auto bounded = LocalCharacteristics::constant(1.0, Vector::Zero(1), Matrix::Identity(1, 1),
                                                        AtomicJumpMeasure(1), Truncation::bounded);
    CHECK_THROWS_AS(characteristics_of_functional(bounded, ForwardFunctional::zero(1), 0.0, vec({0.0})),
                    ContractError);
}

TEST_CASE("girsanov tilt by zero is the identity") {
    const auto chars = scalar_triplet(0.3, 0.2, {{vec({0.5}), 2.0}, {vec({-0.1}), 1.0}});
    const auto tilted = girsanov_tilt_apply(chars, ForwardFunctional::zero(1), 0.4, vec({1.0}));
    CHECK(max_diff(chars, tilted) == 0.0);
}

TEST_CASE("girsanov tilt by the identity functional") {
    const auto chars = scalar_triplet(0.0, 1.0, {{vec({0.5}), 1.0}});
    const auto tilt = girsanov_tilt(chars, ForwardFunctional::affine(0.0, vec({1.0})), 0.0, vec({0.0}));
    CHECK(tilt.beta(0) == 1.0);
    CHECK(std::abs(tilt.multipliers[0] - std::exp(0.5)) < 1e-15);
    const auto t = girsanov_tilt_apply(chars, ForwardFunctional::affine(0.0, vec({1.0})), 0.0, vec({0.0}));
    CHECK(std::abs(t.drift(0) - 1.3243606353500641) < 1e-12);
    CHECK(std::abs(t.drift(0) - (1.0 + (std::exp(0.5) - 1.0) * 0.5)) < 1e-15);
    CHECK(t.diffusion(0, 0) == 1.0);
    CHECK(std::abs(t.jumps[0].intensity - 1.6487212707001282) < 1e-12);
}

TEST_CASE("affine tilt is state independent") {
    CharacteristicTriplet chars = CharacteristicTriplet::zero(2);
    chars.drift = vec({0.01, -0.02});
    chars.diffusion = Matrix::Zero(2, 2);
    chars.diffusion(0, 0) = 0.04;
    chars.diffusion(1, 1) = 0.09;
    chars.jumps = {{vec({0.1, 0.3}), 1.0}, {vec({-0.2, 0.05}), 0.5}};
    const auto f = ForwardFunctional::affine(0.7, vec({0.0, 1.0}));
    const auto a = girsanov_tilt_apply(chars, f, 0.2, vec({0.0, 0.0}));
    const auto b = girsanov_tilt_apply(chars, f, 0.2, vec({3.0, -4.0}));
    CHECK(max_diff(a, b) == 0.0);
    double expected = 0.09 - 0.02;
    for (const auto& atom : chars.jumps) expected += (std::exp(atom.size(1)) - 1.0) * atom.size(1) * atom.intensity;
    CHECK(std::abs(a.drift(1) - expected) < 1e-15);
    CHECK(std::abs(a.jumps[0].intensity - std::exp(0.3)) < 1e-15);
    CHECK(std::abs(a.jumps[1].intensity - 0.5 * std::exp(0.05)) < 1e-15);
}

TEST_CASE("forward measure characteristics compose single tilts") {
    const ModelSpec spec = fixtures::lmm_model();  // N = 4
    const double t = 0.3;
    const Vector x = vec({0.2, -0.4, 0.1});
    const auto base = spec.driver_triplet(t, x);
    CHECK(max_diff(forward_measure_characteristics(spec, 3, t, x), base) == 0.0);

    const auto& f = spec.backward_functionals();
    const auto one = girsanov_tilt_apply(base, f[2], t, x);  // f^3
    CHECK(max_diff(forward_measure_characteristics(spec, 2, t, x), one) == 0.0);
    const auto two = girsanov_tilt_apply(one, f[1], t, x);  // then f^2
    CHECK(max_diff(forward_measure_characteristics(spec, 1, t, x), two) < 1e-14);
}

TEST_CASE("local martingale residual of exponential Brownian motion") {
    // exp(x) with b = -c/2 and compensated jumps is a martingale.
    const double c = 0.09, y = 0.2, lambda = 1.5;
    const auto chars = scalar_triplet(-0.5 * c - (std::exp(y) - 1.0 - y) * lambda, c, {{vec({y}), lambda}});
    const auto f = ForwardFunctional::affine(0.0, vec({1.0}));
    CHECK(std::abs(local_martingale_residual(chars, f, 0.0, vec({0.4}))) < 1e-16);
    const auto off = scalar_triplet(0.0, c, {{vec({y}), lambda}});
    CHECK(std::abs(local_martingale_residual(off, f, 0.0, vec({0.4})) - (0.5 * c + (std::exp(y) - 1.0 - y) * lambda)) <
          1e-16);
}
