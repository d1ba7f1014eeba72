#pragma once

#include <utility>
#include <vector>

#include "liborforge/characteristics.hpp"
#include "liborforge/curve.hpp"
#include "liborforge/functional.hpp"
#include "liborforge/tenor.hpp"

namespace liborforge {

// One-dimensional affine driver on D = [0, inf) with characteristics
// (b_tilde + beta x, 2 alpha x, F1 + x F2) relative to h(xi) = min(1, xi).
class AffineDriverSpec {
public:
    AffineDriverSpec(double b_tilde, double beta, double alpha, AtomicJumpMeasure constant_jumps = AtomicJumpMeasure(1),
                     AtomicJumpMeasure state_jumps = AtomicJumpMeasure(1));

    double b_tilde() const noexcept { return b_tilde_; }
    double beta() const noexcept { return beta_; }
    double alpha() const noexcept { return alpha_; }
    const AtomicJumpMeasure& constant_jumps() const noexcept { return f1_; }
    const AtomicJumpMeasure& state_jumps() const noexcept { return f2_; }

    // b = b_tilde - sum_{F1} min(1, xi) lambda, the drift entering F(u).
    double pure_drift() const noexcept;
    // Identity-truncation drift b_id(x) = a + s x.
    double identity_drift_constant() const noexcept;
    double identity_drift_slope() const noexcept;
    // Identity-truncation triplet at state x >= 0.
    CharacteristicTriplet triplet(double x) const;

    static constexpr double initial_state = 1.0;

private:
    double b_tilde_, beta_, alpha_;
    AtomicJumpMeasure f1_, f2_;
};

struct RiccatiValues {
    double F = 0.0;
    double R = 0.0;
};

RiccatiValues riccati_rhs(const AffineDriverSpec& driver, double u);
// Derivatives F'(u), R'(u).
RiccatiValues riccati_rhs_derivative(const AffineDriverSpec& driver, double u);

// phi(., u), psi(., u) on a uniform grid over [0, horizon]. Node rates and
// accelerations come from the right-hand sides, so off-grid evaluation uses
// quintic Hermite interpolation.
struct RiccatiSolution {
    double u = 0.0;
    std::vector<double> grid;
    std::vector<double> phi, psi;
    std::vector<double> phi_rate, psi_rate;
    std::vector<double> phi_accel, psi_accel;

    double horizon() const { return grid.back(); }
    double step() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
    double phi_at(double t) const;
    double psi_at(double t) const;
    double phi_rate_at(double t) const;
    double psi_rate_at(double t) const;
    double max_abs_psi() const;
};

constexpr double riccati_blowup_guard = 1e8;

RiccatiSolution riccati_solve(const AffineDriverSpec& driver, double u, double horizon, double step);
// Repeated step halving until successive terminal values differ by less than tol.
RiccatiSolution riccati_solve_controlled(const AffineDriverSpec& driver, double u, double horizon,
                                         double tolerance = 1e-12, double initial_step = 0.0);

double mgf(const AffineDriverSpec& driver, double u, double t, double x);

class AffineModelSpec {
public:
    // Solves the Riccati flow for each u_k over [0, T_N]; step 0 means 1e-3 T_N.
    AffineModelSpec(AffineDriverSpec driver, TenorStructure tenor, std::vector<double> u, double step = 0.0);
    // Adopts precomputed flows; each must span [0, T_N].
    AffineModelSpec(AffineDriverSpec driver, TenorStructure tenor, std::vector<RiccatiSolution> solutions);

    const AffineDriverSpec& driver() const noexcept { return driver_; }
    const TenorStructure& tenor() const noexcept { return tenor_; }
    const std::vector<double>& u() const noexcept { return u_; }
    const RiccatiSolution& solution(int k) const;

    // theta^k(t) = phi(T_N - t, u_k), vartheta^k(t) = psi(T_N - t, u_k).
    double theta(int k, double t) const;
    double vartheta(int k, double t) const;
    double theta_rate(int k, double t) const;
    double vartheta_rate(int k, double t) const;

    // u_1 >= ... >= u_{N-1} >= 0.
    bool ordered() const;
    // g^k(t, x) = theta^k(t) + vartheta^k(t) x.
    std::vector<ForwardFunctional> functionals() const;

private:
    void check_time(double t) const;

    AffineDriverSpec driver_;
    TenorStructure tenor_;
    std::vector<double> u_;
    std::vector<RiccatiSolution> solutions_;
};

double affine_forward_price(const AffineModelSpec& model, int k, double t, double x);
// (d theta/dt + F(vartheta), d vartheta/dt + R(vartheta)) by centered differences.
std::pair<double, double> affine_ode_residual(const AffineModelSpec& model, int k, double t);
// u_k with mgf(u_k, T_N, 1) = F(0, T_k, T_N), k = 1..N-1.
std::vector<double> calibrate_u(const AffineDriverSpec& driver, const InitialCurve& curve);

}  // namespace liborforge
