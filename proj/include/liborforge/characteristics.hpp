#pragma once

#include <vector>

#include "liborforge/linalg.hpp"

namespace liborforge {

enum class Truncation { identity, bounded };

struct JumpAtom {
    Vector size;
    double intensity = 0.0;  // per year
};

// Finite-activity jump measure: a list of atoms with non-negative intensities.
class AtomicJumpMeasure {
public:
    explicit AtomicJumpMeasure(int dimension = 1, std::vector<JumpAtom> atoms = {});

    int dimension() const noexcept { return dimension_; }
    const std::vector<JumpAtom>& atoms() const noexcept { return atoms_; }
    bool empty() const noexcept { return atoms_.empty(); }
    std::size_t size() const noexcept { return atoms_.size(); }
    double total_intensity() const noexcept;

private:
    int dimension_;
    std::vector<JumpAtom> atoms_;
};

// The triplet (b, c, F) evaluated at one (t, x), identity truncation.
struct CharacteristicTriplet {
    Vector drift;
    Matrix diffusion;
    std::vector<JumpAtom> jumps;

    int dimension() const noexcept { return static_cast<int>(drift.size()); }
    static CharacteristicTriplet zero(int dimension);
};

struct CharacteristicSegment {
    double start = 0.0;
    double end = 0.0;
    Vector drift;
    Matrix diffusion;
    AtomicJumpMeasure jumps;
};

// Piecewise-constant local characteristics on [0, horizon].
class LocalCharacteristics {
public:
    LocalCharacteristics(int dimension, std::vector<CharacteristicSegment> segments,
                         Truncation truncation = Truncation::identity);

    static LocalCharacteristics constant(double horizon, Vector drift, Matrix diffusion,
                                         AtomicJumpMeasure jumps,
                                         Truncation truncation = Truncation::identity);
    static LocalCharacteristics zero(int dimension, double horizon);

    int dimension() const noexcept { return dimension_; }
    Truncation truncation() const noexcept { return truncation_; }
    double horizon() const noexcept { return segments_.back().end; }
    const std::vector<CharacteristicSegment>& segments() const noexcept { return segments_; }

    // Segments are half-open [start, end); t == horizon maps to the last one.
    const CharacteristicSegment& segment_at(double t) const;
    CharacteristicTriplet at(double t) const;
    std::vector<double> breakpoints() const;

    void require_identity_truncation() const;

private:
    int dimension_;
    std::vector<CharacteristicSegment> segments_;
    Truncation truncation_;
};

}  // namespace liborforge
