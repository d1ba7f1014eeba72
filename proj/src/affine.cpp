#include "liborforge/affine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "liborforge/errors.hpp"

namespace liborforge {

namespace {

constexpr double max_exponent = 700.0;

double truncation(double xi) { return std::min(1.0, xi); }

double checked_exp(double exponent, const char* measure, std::size_t atom) {
    if (exponent > max_exponent)
        throw RangeError(std::string("exponential overflow at ") + measure + " atom " + std::to_string(atom) +
                         " (exponent " + std::to_string(exponent) + ")");
    return std::exp(exponent);
}

void check_positive_atoms(const AtomicJumpMeasure& m, const char* name) {
    if (m.dimension() != 1) throw InvariantError(std::string(name) + " must be one-dimensional");
    for (std::size_t i = 0; i < m.size(); ++i)
        if (!(m.atoms()[i].size[0] > 0.0))
            throw InvariantError(std::string(name) + " atom " + std::to_string(i) +
                                 " must have a strictly positive size");
}

}  // namespace

AffineDriverSpec::AffineDriverSpec(double b_tilde, double beta, double alpha, AtomicJumpMeasure constant_jumps,
                                   AtomicJumpMeasure state_jumps)
    : b_tilde_(b_tilde), beta_(beta), alpha_(alpha), f1_(std::move(constant_jumps)), f2_(std::move(state_jumps)) {
    if (!std::isfinite(b_tilde_) || !std::isfinite(beta_) || !std::isfinite(alpha_))
        throw InvariantError("affine driver parameters must be finite");
    if (!(b_tilde_ > 0.0)) throw InvariantError("affine driver needs b_tilde > 0");
    if (!(alpha_ >= 0.0)) throw InvariantError("affine driver needs alpha >= 0");
    check_positive_atoms(f1_, "constant jump measure");
    check_positive_atoms(f2_, "state jump measure");
    if (pure_drift() < 0.0)
        throw InvariantError("affine driver is not admissible: b_tilde - sum min(1, xi) F1 < 0");
}

double AffineDriverSpec::pure_drift() const noexcept {
    double b = b_tilde_;
    for (const auto& a : f1_.atoms()) b -= truncation(a.size[0]) * a.intensity;
    return b;
}

double AffineDriverSpec::identity_drift_constant() const noexcept {
    double b = b_tilde_;
    for (const auto& a : f1_.atoms()) b += (a.size[0] - truncation(a.size[0])) * a.intensity;
    return b;
}

double AffineDriverSpec::identity_drift_slope() const noexcept {
    double s = beta_;
    for (const auto& a : f2_.atoms()) s += (a.size[0] - truncation(a.size[0])) * a.intensity;
    return s;
}

CharacteristicTriplet AffineDriverSpec::triplet(double x) const {
    if (!(x >= 0.0)) throw DomainError("affine driver state must lie in [0, inf)");
    CharacteristicTriplet out;
    out.drift = Vector::Constant(1, identity_drift_constant() + identity_drift_slope() * x);
    out.diffusion = Matrix::Constant(1, 1, 2.0 * alpha_ * x);
    for (const auto& a : f1_.atoms()) out.jumps.push_back(a);
    for (const auto& a : f2_.atoms()) out.jumps.push_back({a.size, a.intensity * x});
    return out;
}

RiccatiValues riccati_rhs(const AffineDriverSpec& driver, double u) {
    RiccatiValues v;
    v.F = driver.pure_drift() * u;
    const auto& f1 = driver.constant_jumps().atoms();
    for (std::size_t i = 0; i < f1.size(); ++i) {
        const double xi = f1[i].size[0];
        v.F += (checked_exp(u * xi, "F1", i) - 1.0) * f1[i].intensity;
    }
    v.R = driver.alpha() * u * u + driver.beta() * u;
    const auto& f2 = driver.state_jumps().atoms();
    for (std::size_t i = 0; i < f2.size(); ++i) {
        const double xi = f2[i].size[0];
        v.R += (checked_exp(u * xi, "F2", i) - 1.0 - u * truncation(xi)) * f2[i].intensity;
    }
    return v;
}

RiccatiValues riccati_rhs_derivative(const AffineDriverSpec& driver, double u) {
    RiccatiValues v;
    v.F = driver.pure_drift();
    const auto& f1 = driver.constant_jumps().atoms();
    for (std::size_t i = 0; i < f1.size(); ++i) {
        const double xi = f1[i].size[0];
        v.F += xi * checked_exp(u * xi, "F1", i) * f1[i].intensity;
    }
    v.R = 2.0 * driver.alpha() * u + driver.beta();
    const auto& f2 = driver.state_jumps().atoms();
    for (std::size_t i = 0; i < f2.size(); ++i) {
        const double xi = f2[i].size[0];
        v.R += (xi * checked_exp(u * xi, "F2", i) - truncation(xi)) * f2[i].intensity;
    }
    return v;
}

namespace {

struct Hermite {
    std::size_t i;
    double s, h;
};

Hermite locate(const std::vector<double>& grid, double t) {
    const double T = grid.back();
    if (!(t >= -1e-12 * std::max(1.0, T)) || t > T * (1 + 1e-12) + 1e-300)
        throw DomainError("time " + std::to_string(t) + " outside the Riccati grid [0, " + std::to_string(T) + "]");
    const std::size_t m = grid.size() - 1;
    const double h = grid[1] - grid[0];
    std::size_t i = static_cast<std::size_t>(std::clamp(std::floor(t / h), 0.0, static_cast<double>(m - 1)));
    return {i, std::clamp((t - grid[i]) / h, 0.0, 1.0), h};
}

double quintic(const Hermite& p, const std::vector<double>& y, const std::vector<double>& dy,
               const std::vector<double>& ddy) {
    const double s = p.s, s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s, h = p.h;
    const std::size_t i = p.i;
    return (1 - 10 * s3 + 15 * s4 - 6 * s5) * y[i] + (s - 6 * s3 + 8 * s4 - 3 * s5) * h * dy[i] +
           (0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5) * h * h * ddy[i] +
           (0.5 * s3 - s4 + 0.5 * s5) * h * h * ddy[i + 1] + (-4 * s3 + 7 * s4 - 3 * s5) * h * dy[i + 1] +
           (10 * s3 - 15 * s4 + 6 * s5) * y[i + 1];
}

double quintic_rate(const Hermite& p, const std::vector<double>& y, const std::vector<double>& dy,
                    const std::vector<double>& ddy) {
    const double s = p.s, s2 = s * s, s3 = s2 * s, s4 = s3 * s, h = p.h;
    const std::size_t i = p.i;
    const double ds = (-30 * s2 + 60 * s3 - 30 * s4) * y[i] + (1 - 18 * s2 + 32 * s3 - 15 * s4) * h * dy[i] +
                      (s - 4.5 * s2 + 6 * s3 - 2.5 * s4) * h * h * ddy[i] +
                      (1.5 * s2 - 4 * s3 + 2.5 * s4) * h * h * ddy[i + 1] +
                      (-12 * s2 + 28 * s3 - 15 * s4) * h * dy[i + 1] + (30 * s2 - 60 * s3 + 30 * s4) * y[i + 1];
    return ds / h;
}

}  // namespace

double RiccatiSolution::phi_at(double t) const { return quintic(locate(grid, t), phi, phi_rate, phi_accel); }
double RiccatiSolution::psi_at(double t) const { return quintic(locate(grid, t), psi, psi_rate, psi_accel); }
double RiccatiSolution::phi_rate_at(double t) const {
    return quintic_rate(locate(grid, t), phi, phi_rate, phi_accel);
}
double RiccatiSolution::psi_rate_at(double t) const {
    return quintic_rate(locate(grid, t), psi, psi_rate, psi_accel);
}
double RiccatiSolution::max_abs_psi() const {
    double m = 0.0;
    for (double v : psi) m = std::max(m, std::abs(v));
    return m;
}

RiccatiSolution riccati_solve(const AffineDriverSpec& driver, double u, double horizon, double step) {
    if (!(step > 0.0)) throw DomainError("Riccati step must be positive");
    if (!(horizon > 0.0)) throw DomainError("Riccati horizon must be positive");
    if (!std::isfinite(u)) throw DomainError("Riccati argument u must be finite");
    const auto n = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
    const double h = horizon / static_cast<double>(n);

    RiccatiSolution sol;
    sol.u = u;
    sol.grid.resize(n + 1);
    sol.phi.resize(n + 1);
    sol.psi.resize(n + 1);
    sol.phi_rate.resize(n + 1);
    sol.psi_rate.resize(n + 1);
    sol.phi_accel.resize(n + 1);
    sol.psi_accel.resize(n + 1);

    auto record = [&](std::size_t m, double phi, double psi) {
        const RiccatiValues v = riccati_rhs(driver, psi);
        const RiccatiValues dv = riccati_rhs_derivative(driver, psi);
        sol.grid[m] = (m == n) ? horizon : h * static_cast<double>(m);
        sol.phi[m] = phi;
        sol.psi[m] = psi;
        sol.phi_rate[m] = v.F;
        sol.psi_rate[m] = v.R;
        sol.phi_accel[m] = dv.F * v.R;
        sol.psi_accel[m] = dv.R * v.R;
    };

    double phi = 0.0, psi = u;
    double t = 0.0;
    try {
        record(0, phi, psi);
        for (std::size_t m = 1; m <= n; ++m) {
            const RiccatiValues k1 = riccati_rhs(driver, psi);
            const RiccatiValues k2 = riccati_rhs(driver, psi + 0.5 * h * k1.R);
            const RiccatiValues k3 = riccati_rhs(driver, psi + 0.5 * h * k2.R);
            const RiccatiValues k4 = riccati_rhs(driver, psi + h * k3.R);
            phi += h / 6.0 * (k1.F + 2.0 * k2.F + 2.0 * k3.F + k4.F);
            psi += h / 6.0 * (k1.R + 2.0 * k2.R + 2.0 * k3.R + k4.R);
            t = h * static_cast<double>(m);
            if (!std::isfinite(psi) || std::abs(psi) > riccati_blowup_guard || !std::isfinite(phi))
                throw DivergenceError("Riccati solution for u = " + std::to_string(u) + " blows up near t = " +
                                          std::to_string(t),
                                      t);
            record(m, phi, psi);
        }
    } catch (const RangeError& e) {
        throw DivergenceError("Riccati solution for u = " + std::to_string(u) + " leaves the finite-moment region near t = " +
                                  std::to_string(t) + " (" + e.what() + ")",
                              t);
    }
    return sol;
}

RiccatiSolution riccati_solve_controlled(const AffineDriverSpec& driver, double u, double horizon, double tolerance,
                                         double initial_step) {
    double step = initial_step > 0.0 ? initial_step : 1e-3 * horizon;
    RiccatiSolution coarse = riccati_solve(driver, u, horizon, step);
    for (int level = 0; level < 8; ++level) {
        step *= 0.5;
        RiccatiSolution fine = riccati_solve(driver, u, horizon, step);
        const double change = std::max(std::abs(fine.phi.back() - coarse.phi.back()),
                                       std::abs(fine.psi.back() - coarse.psi.back()));
        const double scale = std::max({1.0, std::abs(fine.phi.back()), std::abs(fine.psi.back())});
        coarse = std::move(fine);
        if (change <= tolerance * scale) break;
    }
    return coarse;
}

double mgf(const AffineDriverSpec& driver, double u, double t, double x) {
    if (!(x >= 0.0)) throw DomainError("mgf state must lie in [0, inf)");
    if (!(t >= 0.0)) throw DomainError("mgf time must be non-negative");
    if (t == 0.0) return std::exp(u * x);
    const RiccatiSolution sol = riccati_solve(driver, u, t, 1e-3 * t);
    return std::exp(sol.phi.back() + sol.psi.back() * x);
}

AffineModelSpec::AffineModelSpec(AffineDriverSpec driver, TenorStructure tenor, std::vector<double> u, double step)
    : driver_(std::move(driver)), tenor_(std::move(tenor)), u_(std::move(u)) {
    if (static_cast<int>(u_.size()) != tenor_.size() - 1)
        throw InvariantError("affine model needs " + std::to_string(tenor_.size() - 1) + " parameters u_k, got " +
                             std::to_string(u_.size()));
    const double T = tenor_.maturity();
    const double h = step > 0.0 ? step : 1e-3 * T;
    for (double uk : u_) solutions_.push_back(riccati_solve(driver_, uk, T, h));
}

AffineModelSpec::AffineModelSpec(AffineDriverSpec driver, TenorStructure tenor, std::vector<RiccatiSolution> solutions)
    : driver_(std::move(driver)), tenor_(std::move(tenor)), solutions_(std::move(solutions)) {
    if (static_cast<int>(solutions_.size()) != tenor_.size() - 1)
        throw InvariantError("affine model needs one Riccati flow per rate index");
    for (const auto& s : solutions_) {
        if (s.grid.size() < 2 || s.grid.front() != 0.0 ||
            std::abs(s.grid.back() - tenor_.maturity()) > 1e-12 * tenor_.maturity())
            throw InvariantError("Riccati flow must span [0, T_N]");
        const std::size_t n = s.grid.size();
        if (s.phi.size() != n || s.psi.size() != n || s.phi_rate.size() != n || s.psi_rate.size() != n ||
            s.phi_accel.size() != n || s.psi_accel.size() != n)
            throw InvariantError("Riccati flow arrays differ in length");
        u_.push_back(s.u);
    }
}

const RiccatiSolution& AffineModelSpec::solution(int k) const {
    tenor_.require_rate_index(k);
    return solutions_[k - 1];
}

void AffineModelSpec::check_time(double t) const {
    if (!(t >= 0.0) || t > tenor_.maturity())
        throw DomainError("time " + std::to_string(t) + " outside [0, T_N]");
}

double AffineModelSpec::theta(int k, double t) const {
    check_time(t);
    return solution(k).phi_at(tenor_.maturity() - t);
}
double AffineModelSpec::vartheta(int k, double t) const {
    check_time(t);
    return solution(k).psi_at(tenor_.maturity() - t);
}
double AffineModelSpec::theta_rate(int k, double t) const {
    check_time(t);
    return -solution(k).phi_rate_at(tenor_.maturity() - t);
}
double AffineModelSpec::vartheta_rate(int k, double t) const {
    check_time(t);
    return -solution(k).psi_rate_at(tenor_.maturity() - t);
}

bool AffineModelSpec::ordered() const {
    for (std::size_t i = 0; i < u_.size(); ++i) {
        if (u_[i] < 0.0) return false;
        if (i + 1 < u_.size() && u_[i] < u_[i + 1]) return false;
    }
    return true;
}

std::vector<ForwardFunctional> AffineModelSpec::functionals() const {
    std::vector<ForwardFunctional> g;
    const double T = tenor_.maturity();
    for (std::size_t i = 0; i < solutions_.size(); ++i) {
        // Share the flow; the interpolant may overshoot node values by rounding only.
        auto sol = std::make_shared<const RiccatiSolution>(solutions_[i]);
        const double lip = sol->max_abs_psi() * (1.0 + 1e-9);
        g.push_back(ForwardFunctional::affine(
            1,
            [sol, T](double t) {
                if (!(t >= 0.0) || t > T) throw DomainError("time " + std::to_string(t) + " outside [0, T_N]");
                const double tau = T - t;
                AffineCoefficients c;
                c.alpha = sol->phi_at(tau);
                c.alpha_rate = -sol->phi_rate_at(tau);
                c.beta = Vector::Constant(1, sol->psi_at(tau));
                c.beta_rate = Vector::Constant(1, -sol->psi_rate_at(tau));
                return c;
            },
            lip));
    }
    return g;
}

double affine_forward_price(const AffineModelSpec& model, int k, double t, double x) {
    model.tenor().require_rate_index(k);
    if (!(x >= 0.0)) throw DomainError("affine state must lie in [0, inf)");
    if (!(t >= 0.0) || t > model.tenor().date(k))
        throw DomainError("affine forward price defined for t in [0, T_k]");
    return std::exp(model.theta(k, t) + model.vartheta(k, t) * x);
}

std::pair<double, double> affine_ode_residual(const AffineModelSpec& model, int k, double t) {
    const RiccatiSolution& sol = model.solution(k);
    const double T = model.tenor().maturity();
    const double h = sol.step();
    const double slack = 1e-9 * h;
    if (!(t - h >= -slack) || t + h > T + slack)
        throw DomainError("ODE residual needs an interior time at least one grid step from the boundary");
    auto theta = [&](double s) { return model.theta(k, std::clamp(s, 0.0, T)); };
    auto vartheta = [&](double s) { return model.vartheta(k, std::clamp(s, 0.0, T)); };
    double dtheta, dvartheta;
    if (t - 2 * h >= -slack && t + 2 * h <= T + slack) {
        dtheta = (theta(t - 2 * h) - 8 * theta(t - h) + 8 * theta(t + h) - theta(t + 2 * h)) / (12 * h);
        dvartheta = (vartheta(t - 2 * h) - 8 * vartheta(t - h) + 8 * vartheta(t + h) - vartheta(t + 2 * h)) / (12 * h);
    } else {
        dtheta = (theta(t + h) - theta(t - h)) / (2 * h);
        dvartheta = (vartheta(t + h) - vartheta(t - h)) / (2 * h);
    }
    const RiccatiValues v = riccati_rhs(model.driver(), vartheta(t));
    return {dtheta + v.F, dvartheta + v.R};
}

std::vector<double> calibrate_u(const AffineDriverSpec& driver, const InitialCurve& curve) {
    const TenorStructure& tenor = curve.tenor();
    const double T = tenor.maturity();
    const double x0 = AffineDriverSpec::initial_state;
    auto eval = [&](double u) { return mgf(driver, u, T, x0); };

    std::vector<double> out;
    for (int k = 1; k < tenor.size(); ++k) {
        const double target = curve.forward_price(k, tenor.size());
        double lo = 0.0, hi = 0.0;
        if (target > 1.0) {
            double last_ok = 0.0, sup = 1.0;
            hi = 1.0;
            for (;;) {
                double value;
                try {
                    value = eval(hi);
                } catch (const DivergenceError&) {
                    // Narrow the edge of the finite-moment region before giving up.
                    double a = last_ok, b = hi;
                    bool found = false;
                    for (int i = 0; i < 60 && !found; ++i) {
                        const double mid = 0.5 * (a + b);
                        try {
                            const double v = eval(mid);
                            if (v >= target) {
                                b = mid;
                                found = true;
                            } else {
                                a = mid;
                                sup = v;
                            }
                        } catch (const DivergenceError&) {
                            b = mid;
                        }
                    }
                    if (!found)
                        throw CalibrationError("target F(0, T_" + std::to_string(k) + ", T_N) = " +
                                                   std::to_string(target) + " exceeds attainable sup " +
                                                   std::to_string(sup),
                                               sup);
                    lo = a;
                    hi = b;
                    break;
                }
                if (value >= target) {
                    lo = last_ok;
                    break;
                }
                sup = value;
                last_ok = hi;
                hi *= 2.0;
                if (hi > 1e6)
                    throw CalibrationError("target F(0, T_" + std::to_string(k) + ", T_N) unattainable", sup);
            }
        } else if (target < 1.0) {
            double last_ok = 0.0, inf = 1.0;
            lo = -1.0;
            for (;;) {
                double value;
                try {
                    value = eval(lo);
                } catch (const DivergenceError&) {
                    // The flow turns too stiff for the fixed step long before the moment does.
                    throw CalibrationError("target F(0, T_" + std::to_string(k) + ", T_N) = " +
                                               std::to_string(target) + " below attainable inf " +
                                               std::to_string(inf),
                                           inf);
                }
                if (value <= target) {
                    hi = last_ok;
                    break;
                }
                inf = value;
                last_ok = lo;
                lo *= 2.0;
                if (lo < -1e6)
                    throw CalibrationError("target F(0, T_" + std::to_string(k) + ", T_N) = " +
                                               std::to_string(target) + " below attainable inf " +
                                               std::to_string(inf),
                                           inf);
            }
        }
        double u = 0.5 * (lo + hi);
        if (target != 1.0) {
            for (int i = 0; i < 200; ++i) {
                u = 0.5 * (lo + hi);
                const double v = eval(u);
                if (std::abs(v - target) < 1e-12 * std::max(1.0, target)) break;
                (v < target ? lo : hi) = u;
                if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) break;
            }
        } else {
            u = 0.0;
        }
        const double residual = std::abs(eval(u) - target);
        if (!(residual < 1e-10))
            throw CalibrationError("calibration of u_" + std::to_string(k) + " stalled with residual " +
                                       std::to_string(residual),
                                   target);
        out.push_back(u);
    }
    return out;
}

}  // namespace liborforge
