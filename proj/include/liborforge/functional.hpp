#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "liborforge/linalg.hpp"

namespace liborforge {

enum class FunctionalKind { affine, log_one_plus_exp, custom };

const char* to_string(FunctionalKind kind) noexcept;

// f(t, x) = alpha(t) + <beta(t), x>, together with the time derivatives.
struct AffineCoefficients {
    double alpha = 0.0;
    double alpha_rate = 0.0;
    Vector beta;
    Vector beta_rate;
};

struct LogOnePlusExpParameters {
    int coordinate = 0;  // zero-based
    double accrual = 0.0;
    double initial_rate = 0.0;
};

// A C^{1,2} map f: [0, T_N] x R^d -> R with a declared global Lipschitz
// bound. Cheap to copy; the evaluators are shared and immutable.
class ForwardFunctional {
public:
    using ScalarFn = std::function<double(double, const Vector&)>;
    using VectorFn = std::function<Vector(double, const Vector&)>;
    using MatrixFn = std::function<Matrix(double, const Vector&)>;
    using CoefficientFn = std::function<AffineCoefficients(double)>;

    struct Evaluators {
        ScalarFn value;
        ScalarFn time_derivative;
        VectorFn gradient;
        MatrixFn hessian;
    };

    static ForwardFunctional zero(int dimension);
    static ForwardFunctional constant(int dimension, double value);
    // Time-constant affine map; the bound is the Euclidean norm of beta.
    static ForwardFunctional affine(double alpha, Vector beta);
    static ForwardFunctional affine(int dimension, CoefficientFn coefficients, double lipschitz);
    // log(1 + accrual * initial_rate * exp(x[coordinate])), bound 1.
    static ForwardFunctional log_one_plus_exp(int dimension, int coordinate, double accrual,
                                              double initial_rate);
    static ForwardFunctional custom(int dimension, Evaluators evaluators, double lipschitz);
    // sum_i w_i f_i; affine when every term is affine.
    static ForwardFunctional combination(const std::vector<std::pair<double, ForwardFunctional>>& terms,
                                         double lipschitz);

    FunctionalKind kind() const noexcept;
    int dimension() const noexcept;
    double lipschitz_bound() const noexcept;

    double value(double t, const Vector& x) const;
    double time_derivative(double t, const Vector& x) const;
    Vector gradient(double t, const Vector& x) const;
    Matrix hessian(double t, const Vector& x) const;
    // f(t, x + jump) - f(t, x); computed as <beta(t), jump> for affine maps,
    // so the increment is bitwise independent of x.
    double increment(double t, const Vector& x, const Vector& jump) const;

    // Throws ContractError unless kind() == affine.
    AffineCoefficients affine_coefficients(double t) const;
    // Throws ContractError unless kind() == log_one_plus_exp.
    const LogOnePlusExpParameters& log_parameters() const;

    struct Impl;

private:
    explicit ForwardFunctional(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    void check_dimension(const Vector& x) const;

    std::shared_ptr<const Impl> impl_;
};

// f^k = g^k - g^{k+1} with g^N = 0; bounds add.
std::vector<ForwardFunctional> f_from_g(const std::vector<ForwardFunctional>& g);
// g^k = sum_{j >= k} f^j; bounds add.
std::vector<ForwardFunctional> g_from_f(const std::vector<ForwardFunctional>& f);

}  // namespace liborforge
