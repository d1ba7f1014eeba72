#pragma once

#include <vector>

#include "liborforge/characteristics.hpp"
#include "liborforge/functional.hpp"

namespace liborforge {

class ModelSpec;

// Characteristics (b^f, c^f, F^f) of the scalar process f(t, X_t) at one
// (t, x), identity truncation. Atoms whose image is zero are dropped.
struct ScalarCharacteristics {
    double drift = 0.0;
    double diffusion = 0.0;
    AtomicJumpMeasure jumps{1};
};

ScalarCharacteristics characteristics_of_functional(const CharacteristicTriplet& chars, const ForwardFunctional& f,
                                                    double t, const Vector& x);
ScalarCharacteristics characteristics_of_functional(const LocalCharacteristics& chars, const ForwardFunctional& f,
                                                    double t, const Vector& x);

// Density exponent f: beta = Df(t, x) and per-atom multipliers
// Y(x_i) = exp(f(t, x + x_i) - f(t, x)).
struct GirsanovTilt {
    Vector beta;
    std::vector<double> multipliers;
};

GirsanovTilt girsanov_tilt(const CharacteristicTriplet& chars, const ForwardFunctional& f, double t, const Vector& x);

// (b + c beta + sum (Y - 1) x_i lambda_i, c, {(x_i, Y lambda_i)}).
CharacteristicTriplet girsanov_tilt_apply(const CharacteristicTriplet& chars, const ForwardFunctional& f, double t,
                                          const Vector& x);
CharacteristicTriplet girsanov_tilt_apply(const LocalCharacteristics& chars, const ForwardFunctional& f, double t,
                                          const Vector& x);

// Tilt by the sum of several exponents at once; the jump multiplier is a
// single exponential of the summed differences.
CharacteristicTriplet girsanov_tilt_apply(const CharacteristicTriplet& chars,
                                          const std::vector<ForwardFunctional>& exponents, double t, const Vector& x);

// P_{k+1}-characteristics of X: the P_N triplet tilted by f^{k+1}, ..., f^{N-1}.
CharacteristicTriplet forward_measure_characteristics(const ModelSpec& spec, int k, double t, const Vector& x);

// b^f + c^f / 2 + sum (e^{Delta f} - 1 - Delta f) lambda: the drift of
// exp(f(t, X)) relative to itself, zero iff it is a local martingale.
double local_martingale_residual(const CharacteristicTriplet& chars, const ForwardFunctional& f, double t,
                                 const Vector& x);

}  // namespace liborforge
