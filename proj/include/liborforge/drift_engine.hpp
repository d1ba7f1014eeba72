#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "liborforge/characteristics.hpp"
#include "liborforge/functional.hpp"
#include "liborforge/model.hpp"

namespace liborforge {

// (DRIFT) residual for f^k given the P_N triplet and all f^j.
double drift_residual_backward(const CharacteristicTriplet& chars, const std::vector<ForwardFunctional>& f, int k,
                               double t, const Vector& x);
double drift_residual_backward(const ModelSpec& spec, int k, double t, const Vector& x);

// Terminal-measure residual for g^k given the P_N triplet of X.
double drift_residual_terminal(const CharacteristicTriplet& chars, const ForwardFunctional& g, double t,
                               const Vector& x);
double drift_residual_terminal(const ModelSpec& spec, int k, double t, const Vector& x);

double lmm_drift(const LmmSpec& spec, int k, double t, const Vector& x);
Vector lmm_drift_vector(const LmmSpec& spec, double t, const Vector& x);
double fpm_drift(const FpmSpec& spec, int k, double t);
// b^{k,N} - b^{k+1,N}; throws NumericalError if it disagrees with the
// expanded single-volatility form by more than 1e-12.
double fpm_pairwise_drift(const FpmSpec& spec, int k, double t);
// The expanded form on its own.
double fpm_pairwise_drift_expanded(const FpmSpec& spec, int k, double t);

struct CheckRecord {
    std::string name;
    double value = 0.0;
    bool passed = true;
    std::string detail;
    // Informational records are reported but do not enter the verdict.
    bool informational = false;
};

struct ValidationReport {
    double c1 = 0.0;  // jump integral with K = sum_k K^k
    double c2 = 0.0;  // integral of ||c||
    std::vector<double> c1_terminal;  // per k, with the bound of g^k
    std::vector<double> c2_terminal;
    std::vector<CheckRecord> checks;

    bool verdict() const;
};

struct AuditOptions {
    int samples = 10000;
    double box = 5.0;  // [-box, box]^d, or [0, box] on the half-line
    std::uint64_t seed = 20240101;
};

ValidationReport validate_assumptions(const ModelSpec& spec, const AuditOptions& options = {});

// Exact piecewise integrals over [0, T_N] of the jump and diffusion
// functionals, with state-dependent characteristics frozen at the initial state.
double jump_moment_integral(const ModelSpec& spec, double lipschitz);
double diffusion_norm_integral(const ModelSpec& spec);
// Same integrals by a midpoint rule with the given number of steps.
double jump_moment_riemann(const ModelSpec& spec, double lipschitz, int steps);
double diffusion_norm_riemann(const ModelSpec& spec, int steps);

struct PropertyReport {
    bool passed = true;
    std::string detail;
    double witness_time = 0.0;
    Vector witness_state;
    Vector other_state;
    int witness_index = 0;
};

// LMM-type models: f^k >= 0; terminal models: g^k >= 0 and g^k >= g^{k+1}.
PropertyReport positivity_check(const ModelSpec& spec, int sample_count, const AuditOptions& options = {});
// Compares tilts (beta, atom multipliers) across random states. passed
// means "preserving"; a witness pair is recorded otherwise.
PropertyReport structure_preservation_check(const ModelSpec& spec, int state_samples,
                                            const AuditOptions& options = {});

struct ResidualSweep {
    std::vector<double> max_backward;  // per k
    std::vector<double> max_terminal;  // per k, empty for backward models
    double tolerance = 1e-10;
    bool passed = true;
};

// Max |residual| over random (t, x) per tenor in the native construction;
// for terminal models the backward residual through f_from_g is swept too.
ResidualSweep drift_residual_sweep(const ModelSpec& spec, int samples, const AuditOptions& options = {});

// Samples one state uniformly from the audit box of the model.
Vector sample_state(const ModelSpec& spec, double box, std::mt19937_64& rng);

}  // namespace liborforge
