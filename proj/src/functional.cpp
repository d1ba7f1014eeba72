#include "liborforge/functional.hpp"

#include <cmath>
#include <string>

#include "liborforge/errors.hpp"

namespace liborforge {

const char* to_string(FunctionalKind kind) noexcept {
    switch (kind) {
        case FunctionalKind::affine: return "affine";
        case FunctionalKind::log_one_plus_exp: return "log_one_plus_exp";
        case FunctionalKind::custom: return "custom";
    }
    return "?";
}

struct ForwardFunctional::Impl {
    FunctionalKind kind;
    int dimension;
    double lipschitz;

    Impl(FunctionalKind k, int d, double lip) : kind(k), dimension(d), lipschitz(lip) {}
    virtual ~Impl() = default;
    virtual double value(double t, const Vector& x) const = 0;
    virtual double time_derivative(double t, const Vector& x) const = 0;
    virtual Vector gradient(double t, const Vector& x) const = 0;
    virtual Matrix hessian(double t, const Vector& x) const = 0;
    virtual AffineCoefficients coefficients(double) const {
        throw ContractError("functional is not affine");
    }
};

namespace {

using Impl = ForwardFunctional::Impl;

struct AffineImpl final : Impl {
    ForwardFunctional::CoefficientFn coeffs;

    AffineImpl(int d, ForwardFunctional::CoefficientFn c, double lip)
        : Impl(FunctionalKind::affine, d, lip), coeffs(std::move(c)) {}

    AffineCoefficients checked(double t) const {
        AffineCoefficients c = coeffs(t);
        if (c.beta.size() != dimension || c.beta_rate.size() != dimension)
            throw InvariantError("affine coefficients have the wrong dimension");
        return c;
    }
    double value(double t, const Vector& x) const override {
        const auto c = checked(t);
        return c.alpha + c.beta.dot(x);
    }
    double time_derivative(double t, const Vector& x) const override {
        const auto c = checked(t);
        return c.alpha_rate + c.beta_rate.dot(x);
    }
    Vector gradient(double t, const Vector&) const override { return checked(t).beta; }
    Matrix hessian(double, const Vector&) const override { return Matrix::Zero(dimension, dimension); }
    AffineCoefficients coefficients(double t) const override { return checked(t); }
};

struct LogImpl final : Impl {
    LogOnePlusExpParameters params;
    double scale;  // accrual * initial rate

    LogImpl(int d, LogOnePlusExpParameters p)
        : Impl(FunctionalKind::log_one_plus_exp, d, 1.0), params(p), scale(p.accrual * p.initial_rate) {}

    double share(const Vector& x) const {
        // a e^x / (1 + a e^x), written to stay finite for large |x|.
        if (scale == 0.0) return 0.0;
        const double z = std::log(scale) + x[params.coordinate];
        return z > 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    }
    double value(double, const Vector& x) const override {
        if (scale == 0.0) return 0.0;
        const double z = std::log(scale) + x[params.coordinate];
        return z > 30 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    }
    double time_derivative(double, const Vector&) const override { return 0.0; }
    Vector gradient(double, const Vector& x) const override {
        Vector g = Vector::Zero(dimension);
        g[params.coordinate] = share(x);
        return g;
    }
    Matrix hessian(double, const Vector& x) const override {
        Matrix h = Matrix::Zero(dimension, dimension);
        const double s = share(x);
        h(params.coordinate, params.coordinate) = s * (1.0 - s);
        return h;
    }
};

struct CustomImpl final : Impl {
    ForwardFunctional::Evaluators ev;

    CustomImpl(int d, ForwardFunctional::Evaluators e, double lip)
        : Impl(FunctionalKind::custom, d, lip), ev(std::move(e)) {}

    double value(double t, const Vector& x) const override { return ev.value(t, x); }
    double time_derivative(double t, const Vector& x) const override { return ev.time_derivative(t, x); }
    Vector gradient(double t, const Vector& x) const override { return ev.gradient(t, x); }
    Matrix hessian(double t, const Vector& x) const override { return ev.hessian(t, x); }
};

}  // namespace

ForwardFunctional ForwardFunctional::zero(int dimension) { return constant(dimension, 0.0); }

ForwardFunctional ForwardFunctional::constant(int dimension, double value) {
    if (dimension < 1) throw InvariantError("functional dimension must be positive");
    return affine(value, Vector::Zero(dimension));
}

ForwardFunctional ForwardFunctional::affine(double alpha, Vector beta) {
    const int d = static_cast<int>(beta.size());
    if (d < 1) throw InvariantError("functional dimension must be positive");
    if (!std::isfinite(alpha) || !beta.allFinite()) throw InvariantError("affine coefficients must be finite");
    const double lip = beta.norm();
    AffineCoefficients c{alpha, 0.0, beta, Vector::Zero(d)};
    return affine(d, [c](double) { return c; }, lip);
}

ForwardFunctional ForwardFunctional::affine(int dimension, CoefficientFn coefficients, double lipschitz) {
    if (dimension < 1) throw InvariantError("functional dimension must be positive");
    if (!coefficients) throw InvariantError("affine functional needs a coefficient callback");
    if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz))
        throw InvariantError("Lipschitz bound must be finite and non-negative");
    return ForwardFunctional(std::make_shared<AffineImpl>(dimension, std::move(coefficients), lipschitz));
}

ForwardFunctional ForwardFunctional::log_one_plus_exp(int dimension, int coordinate, double accrual,
                                                      double initial_rate) {
    if (dimension < 1) throw InvariantError("functional dimension must be positive");
    if (coordinate < 0 || coordinate >= dimension)
        throw IndexError("coordinate " + std::to_string(coordinate) + " outside the driver dimension");
    if (!(accrual > 0.0)) throw DomainError("accrual must be positive");
    if (!(initial_rate >= 0.0) || !std::isfinite(initial_rate))
        throw DomainError("log-one-plus-exp functional needs a finite initial rate >= 0");
    return ForwardFunctional(
        std::make_shared<LogImpl>(dimension, LogOnePlusExpParameters{coordinate, accrual, initial_rate}));
}

ForwardFunctional ForwardFunctional::custom(int dimension, Evaluators evaluators, double lipschitz) {
    if (dimension < 1) throw InvariantError("functional dimension must be positive");
    if (!evaluators.value || !evaluators.time_derivative || !evaluators.gradient || !evaluators.hessian)
        throw InvariantError("custom functional needs all four evaluators");
    if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz))
        throw InvariantError("Lipschitz bound must be finite and non-negative");
    return ForwardFunctional(std::make_shared<CustomImpl>(dimension, std::move(evaluators), lipschitz));
}

ForwardFunctional ForwardFunctional::combination(const std::vector<std::pair<double, ForwardFunctional>>& terms,
                                                 double lipschitz) {
    if (terms.empty()) throw InvariantError("combination needs at least one term");
    const int d = terms.front().second.dimension();
    bool all_affine = true;
    for (const auto& [w, f] : terms) {
        if (f.dimension() != d) throw InvariantError("combined functionals differ in dimension");
        if (!std::isfinite(w)) throw InvariantError("combination weight must be finite");
        all_affine = all_affine && f.kind() == FunctionalKind::affine;
    }
    if (all_affine) {
        return affine(
            d,
            [terms, d](double t) {
                AffineCoefficients out{0.0, 0.0, Vector::Zero(d), Vector::Zero(d)};
                for (const auto& [w, f] : terms) {
                    const auto c = f.affine_coefficients(t);
                    out.alpha += w * c.alpha;
                    out.alpha_rate += w * c.alpha_rate;
                    out.beta += w * c.beta;
                    out.beta_rate += w * c.beta_rate;
                }
                return out;
            },
            lipschitz);
    }
    Evaluators ev;
    ev.value = [terms](double t, const Vector& x) {
        double s = 0.0;
        for (const auto& [w, f] : terms) s += w * f.value(t, x);
        return s;
    };
    ev.time_derivative = [terms](double t, const Vector& x) {
        double s = 0.0;
        for (const auto& [w, f] : terms) s += w * f.time_derivative(t, x);
        return s;
    };
    ev.gradient = [terms, d](double t, const Vector& x) {
        Vector s = Vector::Zero(d);
        for (const auto& [w, f] : terms) s += w * f.gradient(t, x);
        return s;
    };
    ev.hessian = [terms, d](double t, const Vector& x) {
        Matrix s = Matrix::Zero(d, d);
        for (const auto& [w, f] : terms) s += w * f.hessian(t, x);
        return s;
    };
    return custom(d, std::move(ev), lipschitz);
}

FunctionalKind ForwardFunctional::kind() const noexcept { return impl_->kind; }
int ForwardFunctional::dimension() const noexcept { return impl_->dimension; }
double ForwardFunctional::lipschitz_bound() const noexcept { return impl_->lipschitz; }

void ForwardFunctional::check_dimension(const Vector& x) const {
    if (x.size() != impl_->dimension)
        throw InvariantError("state has dimension " + std::to_string(x.size()) + ", functional expects " +
                             std::to_string(impl_->dimension));
}

double ForwardFunctional::value(double t, const Vector& x) const {
    check_dimension(x);
    return impl_->value(t, x);
}
double ForwardFunctional::time_derivative(double t, const Vector& x) const {
    check_dimension(x);
    return impl_->time_derivative(t, x);
}
Vector ForwardFunctional::gradient(double t, const Vector& x) const {
    check_dimension(x);
    return impl_->gradient(t, x);
}
Matrix ForwardFunctional::hessian(double t, const Vector& x) const {
    check_dimension(x);
    return impl_->hessian(t, x);
}

double ForwardFunctional::increment(double t, const Vector& x, const Vector& jump) const {
    check_dimension(x);
    check_dimension(jump);
    if (impl_->kind == FunctionalKind::affine) return impl_->coefficients(t).beta.dot(jump);
    return impl_->value(t, x + jump) - impl_->value(t, x);
}

AffineCoefficients ForwardFunctional::affine_coefficients(double t) const { return impl_->coefficients(t); }

const LogOnePlusExpParameters& ForwardFunctional::log_parameters() const {
    const auto* p = dynamic_cast<const LogImpl*>(impl_.get());
    if (!p) throw ContractError("functional is not of log-one-plus-exp kind");
    return p->params;
}

std::vector<ForwardFunctional> f_from_g(const std::vector<ForwardFunctional>& g) {
    std::vector<ForwardFunctional> f;
    f.reserve(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (k + 1 == g.size()) {
            f.push_back(g[k]);  // g^N = 0
        } else {
            f.push_back(ForwardFunctional::combination({{1.0, g[k]}, {-1.0, g[k + 1]}},
                                                       g[k].lipschitz_bound() + g[k + 1].lipschitz_bound()));
        }
    }
    return f;
}

std::vector<ForwardFunctional> g_from_f(const std::vector<ForwardFunctional>& f) {
    std::vector<ForwardFunctional> g;
    g.reserve(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        std::vector<std::pair<double, ForwardFunctional>> terms;
        double lip = 0.0;
        for (std::size_t j = k; j < f.size(); ++j) {
            terms.emplace_back(1.0, f[j]);
            lip += f[j].lipschitz_bound();
        }
        g.push_back(terms.size() == 1 ? f[k] : ForwardFunctional::combination(terms, lip));
    }
    return g;
}

}  // namespace liborforge
