#include "liborforge/drift_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "liborforge/errors.hpp"
#include "liborforge/measure_change.hpp"

namespace liborforge {

double drift_residual_backward(const CharacteristicTriplet& chars, const std::vector<ForwardFunctional>& f, int k,
                               double t, const Vector& x) {
    if (k < 1 || k > static_cast<int>(f.size()))
        throw IndexError("rate index " + std::to_string(k) + " outside {1.." + std::to_string(f.size()) + "}");
    if (x.size() != chars.dimension()) throw InvariantError("state and characteristics differ in dimension");
    const ForwardFunctional& fk = f[k - 1];
    const Vector dfk = fk.gradient(t, x);
    const Vector c_dfk = chars.diffusion * dfk;

    double r = dfk.dot(chars.drift) + fk.time_derivative(t, x) +
               0.5 * fk.hessian(t, x).cwiseProduct(chars.diffusion).sum() + 0.5 * dfk.dot(c_dfk);
    for (std::size_t j = k; j < f.size(); ++j) r += c_dfk.dot(f[j].gradient(t, x));
    for (const auto& a : chars.jumps) {
        const double dk = fk.increment(t, x, a.size);
        double later = 0.0;
        for (std::size_t j = k; j < f.size(); ++j) later += f[j].increment(t, x, a.size);
        r += (std::expm1(dk) * std::exp(later) - dfk.dot(a.size)) * a.intensity;
    }
    return r;
}

double drift_residual_backward(const ModelSpec& spec, int k, double t, const Vector& x) {
    spec.tenor().require_rate_index(k);
    return drift_residual_backward(spec.driver_triplet(t, x), spec.backward_functionals(), k, t, x);
}

double drift_residual_terminal(const CharacteristicTriplet& chars, const ForwardFunctional& g, double t,
                               const Vector& x) {
    if (x.size() != chars.dimension()) throw InvariantError("state and characteristics differ in dimension");
    const Vector dg = g.gradient(t, x);
    double r = dg.dot(chars.drift) + g.time_derivative(t, x) +
               0.5 * g.hessian(t, x).cwiseProduct(chars.diffusion).sum() + 0.5 * dg.dot(chars.diffusion * dg);
    for (const auto& a : chars.jumps) {
        const double delta = g.increment(t, x, a.size);
        r += (std::expm1(delta) - dg.dot(a.size)) * a.intensity;
    }
    return r;
}

double drift_residual_terminal(const ModelSpec& spec, int k, double t, const Vector& x) {
    return drift_residual_terminal(spec.driver_triplet(t, x), spec.terminal_functional(k), t, x);
}

double lmm_drift(const LmmSpec& spec, int k, double t, const Vector& x) {
    const int n_rates = spec.block.rate_count();
    if (k < 1 || k >= n_rates + 1) throw IndexError("rate index " + std::to_string(k) + " out of range");
    if (x.size() != n_rates) throw InvariantError("LMM state must have one coordinate per rate");
    const auto& seg = spec.block.levy.segment_at(t);
    const Vector lk = spec.block.volatilities[k - 1].at(t);
    if (lk.isZero(0.0)) return 0.0;
    const Vector c_lk = seg.diffusion * lk;

    std::vector<Vector> later;
    std::vector<double> shares;
    for (int j = k + 1; j <= n_rates; ++j) {
        later.push_back(spec.block.volatilities[j - 1].at(t));
        shares.push_back(spec.share(j, x[j - 1]));
    }
    double b = -0.5 * lk.dot(c_lk);
    for (std::size_t j = 0; j < later.size(); ++j) b -= shares[j] * c_lk.dot(later[j]);
    for (const auto& a : seg.jumps.atoms()) {
        const double yk = lk.dot(a.size);
        double prod = 1.0;
        for (std::size_t j = 0; j < later.size(); ++j) prod *= 1.0 + shares[j] * std::expm1(later[j].dot(a.size));
        b -= (std::expm1(yk) * prod - yk) * a.intensity;
    }
    return b;
}

Vector lmm_drift_vector(const LmmSpec& spec, double t, const Vector& x) {
    Vector b(spec.block.rate_count());
    for (int k = 1; k <= spec.block.rate_count(); ++k) b[k - 1] = lmm_drift(spec, k, t, x);
    return b;
}

double fpm_drift(const FpmSpec& spec, int k, double t) {
    const Vector cum = spec.cumulative_volatility(k, t);
    const auto& seg = spec.block.levy.segment_at(t);
    double b = -0.5 * cum.dot(seg.diffusion * cum);
    for (const auto& a : seg.jumps.atoms()) {
        const double y = cum.dot(a.size);
        b -= (std::expm1(y) - y) * a.intensity;
    }
    return b;
}

double fpm_pairwise_drift_expanded(const FpmSpec& spec, int k, double t) {
    const Vector lk = spec.block.volatilities.at(k - 1).at(t);
    const Vector rest = k < spec.block.rate_count() ? spec.cumulative_volatility(k + 1, t)
                                                    : Vector::Zero(spec.block.factor_dimension());
    const auto& seg = spec.block.levy.segment_at(t);
    const Vector c_lk = seg.diffusion * lk;
    double b = -0.5 * lk.dot(c_lk) - c_lk.dot(rest);
    for (const auto& a : seg.jumps.atoms()) {
        const double yk = lk.dot(a.size);
        b -= (std::expm1(yk) * std::exp(rest.dot(a.size)) - yk) * a.intensity;
    }
    return b;
}

double fpm_pairwise_drift(const FpmSpec& spec, int k, double t) {
    const double diff = fpm_drift(spec, k, t) - (k < spec.block.rate_count() ? fpm_drift(spec, k + 1, t) : 0.0);
    const double expanded = fpm_pairwise_drift_expanded(spec, k, t);
    if (std::abs(diff - expanded) > 1e-12 * std::max(1.0, std::abs(diff)))
        throw NumericalError("pairwise forward-price drift disagrees with its expanded form at k = " +
                             std::to_string(k));
    return diff;
}

bool ValidationReport::verdict() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.informational || c.passed; });
}

namespace {

double jump_weight(double r, double lipschitz) { return r <= 1.0 ? r * r : r * std::exp(lipschitz * r); }

// Integrand at time t, characteristics frozen at the initial state.
std::pair<double, double> integrands(const ModelSpec& spec, double t, double lipschitz) {
    const CharacteristicTriplet tr = spec.driver_triplet(t, spec.initial_state());
    double jumps = 0.0;
    for (const auto& a : tr.jumps) jumps += jump_weight(a.size.norm(), lipschitz) * a.intensity;
    return {jumps, tr.diffusion.norm()};
}

double backward_bound_sum(const ModelSpec& spec) {
    double k = 0.0;
    for (const auto& f : spec.backward_functionals()) k += f.lipschitz_bound();
    return k;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

double draw_time(const ModelSpec& spec, std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, spec.tenor().maturity())(rng);
}

struct LipschitzAudit {
    double max_ratio = 0.0;
    bool passed = true;
};

LipschitzAudit audit_lipschitz(const ModelSpec& spec, const ForwardFunctional& f, const AuditOptions& opt,
                               std::mt19937_64& rng) {
    LipschitzAudit out;
    const double bound = f.lipschitz_bound();
    for (int i = 0; i < opt.samples; ++i) {
        const double t = draw_time(spec, rng);
        const Vector x = sample_state(spec, opt.box, rng);
        const Vector y = sample_state(spec, opt.box, rng);
        const double dist = (x - y).norm();
        if (dist == 0.0) continue;
        const double ratio = std::abs(f.value(t, x) - f.value(t, y)) / dist;
        out.max_ratio = std::max(out.max_ratio, ratio);
        if (ratio > bound * (1.0 + 1e-9) + 1e-12) out.passed = false;
    }
    return out;
}

// Max relative deviation of the analytic derivatives from central differences
// (gradient and time derivative from the value, Hessian from the gradient).
double audit_derivatives(const ModelSpec& spec, const ForwardFunctional& f, int points, std::mt19937_64& rng) {
    const double h = 1e-5;
    const double T = spec.tenor().maturity();
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
        const double t = std::clamp(draw_time(spec, rng), 2 * h, T - 2 * h);
        Vector x = sample_state(spec, 5.0, rng);
        if (spec.family() == ModelFamily::affine) x[0] = std::max(x[0], 2 * h);
        const int d = static_cast<int>(x.size());
        const Vector grad = f.gradient(t, x);
        const Matrix hess = f.hessian(t, x);
        Vector fd_grad(d);
        Matrix fd_hess(d, d);
        for (int j = 0; j < d; ++j) {
            Vector e = Vector::Zero(d);
            e[j] = h;
            fd_grad[j] = (f.value(t, x + e) - f.value(t, x - e)) / (2 * h);
            fd_hess.col(j) = (f.gradient(t, x + e) - f.gradient(t, x - e)) / (2 * h);
        }
        const double fd_time = (f.value(t + h, x) - f.value(t - h, x)) / (2 * h);
        const double an_time = f.time_derivative(t, x);
        const double eg = (fd_grad - grad).cwiseAbs().maxCoeff() / std::max(1.0, grad.cwiseAbs().maxCoeff());
        const double eh = (fd_hess - hess).cwiseAbs().maxCoeff() / std::max(1.0, hess.cwiseAbs().maxCoeff());
        const double et = std::abs(fd_time - an_time) / std::max(1.0, std::abs(an_time));
        worst = std::max({worst, eg, eh, et});
    }
    return worst;
}

void add_levy_checks(const ModelSpec& spec, const LevyDriverBlock& block, ValidationReport& report) {
    const TenorStructure& tenor = spec.tenor();
    // (VOL) support: lambda(s, T_k) = 0 for s > T_k.
    for (int k = 1; k <= block.rate_count(); ++k) {
        const double end = block.volatilities[k - 1].support_end();
        report.checks.push_back({"VOL support k=" + std::to_string(k), end, end <= tenor.date(k) + 1e-12,
                                 "last time with nonzero volatility " + fmt(end) + " vs T_k = " +
                                     fmt(tenor.date(k))});
    }
    // (VOL) bound: sum_k lambda^j(s, T_k) <= M, checked on every constancy piece.
    const auto pts = spec.breakpoints();
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double mid = 0.5 * (pts[i] + pts[i + 1]);
        Vector sum = Vector::Zero(block.factor_dimension());
        for (const auto& v : block.volatilities) sum += v.at(mid);
        worst = std::max(worst, sum.maxCoeff());
    }
    report.checks.push_back({"VOL bound", worst, worst <= block.bound * (1 + 1e-12),
                             "max_s max_j sum_k lambda^j = " + fmt(worst) + ", M = " + fmt(block.bound)});
    // (EM): sup over the inflated box of the large-jump exponential moment.
    double em = 0.0;
    const double reach = (1.0 + block.epsilon) * block.bound;
    for (const auto& s : block.levy.segments())
        for (const auto& a : s.jumps.atoms())
            if (a.size.norm() > 1.0) em += std::exp(reach * a.size.cwiseAbs().sum()) * a.intensity * (s.end - s.start);
    report.checks.push_back({"EM exponential moment", em, std::isfinite(em),
                             "sup_u int int_{|x|>1} e^<u,x> F^L(dx) ds over [-(1+eps)M, (1+eps)M]^n"});
}

}  // namespace

Vector sample_state(const ModelSpec& spec, double box, std::mt19937_64& rng) {
    const bool half_line = spec.family() == ModelFamily::affine;
    std::uniform_real_distribution<double> u(half_line ? 0.0 : -box, box);
    Vector x(spec.dimension());
    for (int i = 0; i < x.size(); ++i) x[i] = u(rng);
    return x;
}

double jump_moment_integral(const ModelSpec& spec, double lipschitz) {
    const auto pts = spec.breakpoints();
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        total += integrands(spec, 0.5 * (pts[i] + pts[i + 1]), lipschitz).first * (pts[i + 1] - pts[i]);
    return total;
}

double diffusion_norm_integral(const ModelSpec& spec) {
    const auto pts = spec.breakpoints();
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        total += integrands(spec, 0.5 * (pts[i] + pts[i + 1]), 0.0).second * (pts[i + 1] - pts[i]);
    return total;
}

double jump_moment_riemann(const ModelSpec& spec, double lipschitz, int steps) {
    const double h = spec.tenor().maturity() / steps;
    double total = 0.0;
    for (int i = 0; i < steps; ++i) total += integrands(spec, (i + 0.5) * h, lipschitz).first * h;
    return total;
}

double diffusion_norm_riemann(const ModelSpec& spec, int steps) {
    const double h = spec.tenor().maturity() / steps;
    double total = 0.0;
    for (int i = 0; i < steps; ++i) total += integrands(spec, (i + 0.5) * h, 0.0).second * h;
    return total;
}

ValidationReport validate_assumptions(const ModelSpec& spec, const AuditOptions& options) {
    ValidationReport report;
    std::mt19937_64 rng(options.seed);
    const double big_k = backward_bound_sum(spec);

    report.c1 = jump_moment_integral(spec, big_k);
    report.c2 = diffusion_norm_integral(spec);
    report.checks.push_back({"INT jump integral (C1)", report.c1, std::isfinite(report.c1),
                             "K = sum_k K^k = " + fmt(big_k)});
    report.checks.push_back({"INT diffusion integral (C2)", report.c2, std::isfinite(report.c2),
                             "Frobenius norm of c"});
    for (int k = 1; k <= spec.rate_count(); ++k) {
        const double kt = spec.terminal_functional(k).lipschitz_bound();
        report.c1_terminal.push_back(jump_moment_integral(spec, kt));
        report.c2_terminal.push_back(report.c2);
        report.checks.push_back({"INT' jump integral k=" + std::to_string(k), report.c1_terminal.back(),
                                 std::isfinite(report.c1_terminal.back()), "bound of g^k = " + fmt(kt)});
    }

    for (int k = 1; k <= spec.rate_count(); ++k) {
        for (int pass = 0; pass < 2; ++pass) {
            const bool backward = pass == 0;
            const ForwardFunctional& f = backward ? spec.backward_functional(k) : spec.terminal_functional(k);
            const std::string tag = std::string(backward ? "f^" : "g^") + std::to_string(k);
            const auto lip = audit_lipschitz(spec, f, options, rng);
            report.checks.push_back({std::string(backward ? "LIP " : "LIP' ") + tag, lip.max_ratio, lip.passed,
                                     "max sampled ratio vs declared bound " + fmt(f.lipschitz_bound())});
            const double err = audit_derivatives(spec, f, 100, rng);
            report.checks.push_back({"C12 derivatives " + tag, err, err < 1e-6,
                                     "max relative deviation from central differences"});
        }
    }

    if (const auto* l = spec.lmm_block()) add_levy_checks(spec, l->block, report);
    if (const auto* f = spec.fpm_block()) add_levy_checks(spec, f->block, report);
    if (const auto* a = spec.affine_block()) {
        double psi_max = 0.0;
        for (int k = 1; k <= spec.rate_count(); ++k) psi_max = std::max(psi_max, a->solution(k).max_abs_psi());
        report.checks.push_back({"affine u_k in I_T", psi_max, psi_max < riccati_blowup_guard,
                                 "Riccati flows stay below the blow-up guard"});
        report.checks.push_back({"affine u ordering", 0.0, a->ordered(),
                                 a->ordered() ? "u_1 >= ... >= u_{N-1} >= 0: non-negative rates supported"
                                              : "u_k not decreasing and non-negative: rates may turn negative",
                                 true});
    }
    return report;
}

PropertyReport positivity_check(const ModelSpec& spec, int sample_count, const AuditOptions& options) {
    std::mt19937_64 rng(options.seed);
    const bool backward = spec.construction() == Construction::backward;
    const auto& fs = spec.functionals();
    const double tol = 1e-14;
    for (int i = 0; i < sample_count; ++i) {
        const double t = draw_time(spec, rng);
        const Vector x = sample_state(spec, options.box, rng);
        for (std::size_t k = 0; k < fs.size(); ++k) {
            const double v = fs[k].value(t, x);
            const double next = (!backward && k + 1 < fs.size()) ? fs[k + 1].value(t, x) : 0.0;
            const bool ok = backward ? v >= -tol : (v >= -tol && v - next >= -tol);
            if (!ok) {
                PropertyReport r{false, "", t, x, Vector(), static_cast<int>(k + 1)};
                r.detail = backward ? "f^" + std::to_string(k + 1) + " = " + fmt(v) + " < 0"
                                    : "g^" + std::to_string(k + 1) + " = " + fmt(v) + ", g^" +
                                          std::to_string(k + 2) + " = " + fmt(next);
                return r;
            }
        }
    }
    return {true, "all sampled values non-negative" + std::string(backward ? "" : " and decreasing in k"), 0.0,
            Vector(), Vector(), 0};
}

PropertyReport structure_preservation_check(const ModelSpec& spec, int state_samples, const AuditOptions& options) {
    std::mt19937_64 rng(options.seed);
    const auto& fs = spec.backward_functionals();
    bool all_affine = true;
    for (const auto& f : fs) all_affine = all_affine && f.kind() == FunctionalKind::affine;
    for (int k = 1; k <= static_cast<int>(fs.size()); ++k) {
        const double t = draw_time(spec, rng);
        const CharacteristicTriplet ref_chars = spec.driver_triplet(t, spec.initial_state());
        const Vector x0 = sample_state(spec, options.box, rng);
        const GirsanovTilt ref = girsanov_tilt(ref_chars, fs[k - 1], t, x0);
        for (int i = 1; i < state_samples; ++i) {
            const Vector x = sample_state(spec, options.box, rng);
            const GirsanovTilt tilt = girsanov_tilt(ref_chars, fs[k - 1], t, x);
            if (tilt.beta != ref.beta || tilt.multipliers != ref.multipliers) {
                PropertyReport r{false,
                                 "tilt by f^" + std::to_string(k) + " depends on the state" +
                                     (all_affine ? " although every functional is affine" : ""),
                                 t, x0, x, k};
                return r;
            }
        }
    }
    return {true, "tilts agree across all sampled states", 0.0, Vector(), Vector(), 0};
}

ResidualSweep drift_residual_sweep(const ModelSpec& spec, int samples, const AuditOptions& options) {
    std::mt19937_64 rng(options.seed);
    ResidualSweep out;
    out.tolerance = spec.family() == ModelFamily::affine ? 1e-8 : 1e-10;
    const bool terminal = spec.construction() == Construction::terminal;
    out.max_backward.assign(spec.rate_count(), 0.0);
    if (terminal) out.max_terminal.assign(spec.rate_count(), 0.0);
    for (int i = 0; i < samples; ++i) {
        const double t = draw_time(spec, rng);
        const Vector x = sample_state(spec, options.box, rng);
        const CharacteristicTriplet chars = spec.driver_triplet(t, x);
        for (int k = 1; k <= spec.rate_count(); ++k) {
            const double rb = std::abs(drift_residual_backward(chars, spec.backward_functionals(), k, t, x));
            out.max_backward[k - 1] = std::max(out.max_backward[k - 1], std::isnan(rb) ? INFINITY : rb);
            if (terminal) {
                const double rt = std::abs(drift_residual_terminal(chars, spec.terminal_functional(k), t, x));
                out.max_terminal[k - 1] = std::max(out.max_terminal[k - 1], std::isnan(rt) ? INFINITY : rt);
            }
        }
    }
    const auto& primary = terminal ? out.max_terminal : out.max_backward;
    out.passed = std::all_of(primary.begin(), primary.end(), [&](double v) { return v < out.tolerance; });
    return out;
}

}  // namespace liborforge
