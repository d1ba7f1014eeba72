#include "liborforge/characteristics.hpp"

#include <cmath>
#include <string>

#include "liborforge/errors.hpp"

namespace liborforge {

AtomicJumpMeasure::AtomicJumpMeasure(int dimension, std::vector<JumpAtom> atoms)
    : dimension_(dimension), atoms_(std::move(atoms)) {
    if (dimension_ < 1) throw InvariantError("jump measure dimension must be positive");
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const auto& a = atoms_[i];
        const std::string where = "jump atom " + std::to_string(i);
        if (a.size.size() != dimension_)
            throw InvariantError(where + " has dimension " + std::to_string(a.size.size()) +
                                 ", expected " + std::to_string(dimension_));
        if (!a.size.allFinite()) throw InvariantError(where + " has a non-finite size");
        if (!(a.intensity >= 0.0) || !std::isfinite(a.intensity))
            throw InvariantError(where + " needs a finite intensity >= 0");
        if (a.size.isZero(0.0)) throw InvariantError(where + " sits at the zero vector");
    }
}

double AtomicJumpMeasure::total_intensity() const noexcept {
    double total = 0.0;
    for (const auto& a : atoms_) total += a.intensity;
    return total;
}

CharacteristicTriplet CharacteristicTriplet::zero(int dimension) {
    return {Vector::Zero(dimension), Matrix::Zero(dimension, dimension), {}};
}

LocalCharacteristics::LocalCharacteristics(int dimension, std::vector<CharacteristicSegment> segments,
                                           Truncation truncation)
    : dimension_(dimension), segments_(std::move(segments)), truncation_(truncation) {
    if (dimension_ < 1) throw InvariantError("characteristics dimension must be positive");
    if (segments_.empty()) throw InvariantError("characteristics need at least one segment");
    if (segments_.front().start != 0.0) throw InvariantError("characteristic segments must start at t = 0");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& s = segments_[i];
        const std::string where = "segment " + std::to_string(i);
        if (!(s.end > s.start)) throw InvariantError(where + " is empty or reversed");
        if (i > 0 && s.start != segments_[i - 1].end)
            throw InvariantError(where + " leaves a gap or overlap with its predecessor");
        if (s.drift.size() != dimension_ || s.diffusion.rows() != dimension_ ||
            s.diffusion.cols() != dimension_ || s.jumps.dimension() != dimension_)
            throw InvariantError(where + " does not match dimension " + std::to_string(dimension_));
        if (!s.drift.allFinite()) throw InvariantError(where + " has a non-finite drift");
        if (!is_symmetric_psd(s.diffusion))
            throw InvariantError(where + " diffusion is not symmetric positive semidefinite");
    }
}

LocalCharacteristics LocalCharacteristics::constant(double horizon, Vector drift, Matrix diffusion,
                                                    AtomicJumpMeasure jumps, Truncation truncation) {
    const int d = static_cast<int>(drift.size());
    std::vector<CharacteristicSegment> segs;
    segs.push_back({0.0, horizon, std::move(drift), std::move(diffusion), std::move(jumps)});
    return LocalCharacteristics(d, std::move(segs), truncation);
}

LocalCharacteristics LocalCharacteristics::zero(int dimension, double horizon) {
    return constant(horizon, Vector::Zero(dimension), Matrix::Zero(dimension, dimension),
                    AtomicJumpMeasure(dimension));
}

const CharacteristicSegment& LocalCharacteristics::segment_at(double t) const {
    if (!(t >= 0.0) || t > horizon())
        throw DomainError("time " + std::to_string(t) + " outside [0, " + std::to_string(horizon()) + "]");
    for (const auto& s : segments_)
        if (t < s.end) return s;
    return segments_.back();
}

CharacteristicTriplet LocalCharacteristics::at(double t) const {
    const auto& s = segment_at(t);
    return {s.drift, s.diffusion, s.jumps.atoms()};
}

std::vector<double> LocalCharacteristics::breakpoints() const {
    std::vector<double> out;
    out.reserve(segments_.size() + 1);
    for (const auto& s : segments_) out.push_back(s.start);
    out.push_back(horizon());
    return out;
}

void LocalCharacteristics::require_identity_truncation() const {
    if (truncation_ != Truncation::identity)
        throw ContractError("operation requires identity-truncation characteristics");
}

}  // namespace liborforge
