#include "liborforge/measure_change.hpp"

#include <cmath>
#include <string>

#include "liborforge/errors.hpp"
#include "liborforge/model.hpp"

namespace liborforge {

namespace {

void check_triplet(const CharacteristicTriplet& chars, const Vector& x) {
    const int d = chars.dimension();
    if (x.size() != d || chars.diffusion.rows() != d || chars.diffusion.cols() != d)
        throw InvariantError("state and characteristics differ in dimension");
}

}  // namespace

ScalarCharacteristics characteristics_of_functional(const CharacteristicTriplet& chars, const ForwardFunctional& f,
                                                    double t, const Vector& x) {
    check_triplet(chars, x);
    const Vector df = f.gradient(t, x);
    const Matrix d2f = f.hessian(t, x);
    ScalarCharacteristics out;
    out.drift = f.time_derivative(t, x) + df.dot(chars.drift) + 0.5 * (d2f.cwiseProduct(chars.diffusion)).sum();
    out.diffusion = std::max(0.0, df.dot(chars.diffusion * df));
    std::vector<JumpAtom> atoms;
    for (const auto& a : chars.jumps) {
        const double delta = f.increment(t, x, a.size);
        out.drift += (delta - df.dot(a.size)) * a.intensity;
        if (delta != 0.0) atoms.push_back({Vector::Constant(1, delta), a.intensity});
    }
    out.jumps = AtomicJumpMeasure(1, std::move(atoms));
    return out;
}

ScalarCharacteristics characteristics_of_functional(const LocalCharacteristics& chars, const ForwardFunctional& f,
                                                    double t, const Vector& x) {
    chars.require_identity_truncation();
    return characteristics_of_functional(chars.at(t), f, t, x);
}

GirsanovTilt girsanov_tilt(const CharacteristicTriplet& chars, const ForwardFunctional& f, double t, const Vector& x) {
    check_triplet(chars, x);
    GirsanovTilt tilt{f.gradient(t, x), {}};
    tilt.multipliers.reserve(chars.jumps.size());
    for (const auto& a : chars.jumps) tilt.multipliers.push_back(std::exp(f.increment(t, x, a.size)));
    return tilt;
}

CharacteristicTriplet girsanov_tilt_apply(const CharacteristicTriplet& chars,
                                          const std::vector<ForwardFunctional>& exponents, double t, const Vector& x) {
    check_triplet(chars, x);
    const int d = chars.dimension();
    Vector beta = Vector::Zero(d);
    std::vector<double> log_y(chars.jumps.size(), 0.0);
    for (const auto& f : exponents) {
        beta += f.gradient(t, x);
        for (std::size_t i = 0; i < chars.jumps.size(); ++i) log_y[i] += f.increment(t, x, chars.jumps[i].size);
    }
    CharacteristicTriplet out{chars.drift + chars.diffusion * beta, chars.diffusion, {}};
    out.jumps.reserve(chars.jumps.size());
    for (std::size_t i = 0; i < chars.jumps.size(); ++i) {
        const auto& a = chars.jumps[i];
        const double y = std::exp(log_y[i]);
        if (!std::isfinite(y)) throw RangeError("tilt multiplier overflows at atom " + std::to_string(i));
        out.drift += std::expm1(log_y[i]) * a.intensity * a.size;
        out.jumps.push_back({a.size, y * a.intensity});
    }
    return out;
}

CharacteristicTriplet girsanov_tilt_apply(const CharacteristicTriplet& chars, const ForwardFunctional& f, double t,
                                          const Vector& x) {
    return girsanov_tilt_apply(chars, std::vector<ForwardFunctional>{f}, t, x);
}

CharacteristicTriplet girsanov_tilt_apply(const LocalCharacteristics& chars, const ForwardFunctional& f, double t,
                                          const Vector& x) {
    chars.require_identity_truncation();
    return girsanov_tilt_apply(chars.at(t), f, t, x);
}

CharacteristicTriplet forward_measure_characteristics(const ModelSpec& spec, int k, double t, const Vector& x) {
    spec.tenor().require_rate_index(k);
    const auto& f = spec.backward_functionals();
    const std::vector<ForwardFunctional> exponents(f.begin() + k, f.end());
    const CharacteristicTriplet base = spec.driver_triplet(t, x);
    if (exponents.empty()) return base;
    return girsanov_tilt_apply(base, exponents, t, x);
}

double local_martingale_residual(const CharacteristicTriplet& chars, const ForwardFunctional& f, double t,
                                 const Vector& x) {
    const ScalarCharacteristics s = characteristics_of_functional(chars, f, t, x);
    double r = s.drift + 0.5 * s.diffusion;
    for (const auto& a : s.jumps.atoms()) {
        const double delta = a.size[0];
        r += (std::expm1(delta) - delta) * a.intensity;
    }
    return r;
}

}  // namespace liborforge
