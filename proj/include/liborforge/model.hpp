#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "liborforge/affine.hpp"
#include "liborforge/characteristics.hpp"
#include "liborforge/curve.hpp"
#include "liborforge/functional.hpp"
#include "liborforge/tenor.hpp"

namespace liborforge {

enum class ModelFamily { lmm, fpm, affine, custom };
// backward: functionals are f^k (period forward prices);
// terminal: functionals are g^k (prices relative to B(., T_N)).
enum class Construction { backward, terminal };

const char* to_string(ModelFamily family) noexcept;
const char* to_string(Construction construction) noexcept;

// Deterministic, piecewise-constant, non-negative n-vector function of time,
// constant on half-open pieces [start, end) and zero outside them.
class VolatilitySchedule {
public:
    struct Piece {
        double start = 0.0;
        double end = 0.0;
        Vector value;
    };

    VolatilitySchedule(int dimension, std::vector<Piece> pieces);
    static VolatilitySchedule constant(Vector value, double end);

    int dimension() const noexcept { return dimension_; }
    const std::vector<Piece>& pieces() const noexcept { return pieces_; }
    Vector at(double t) const;
    // Supremum of t with a nonzero value, 0 if identically zero.
    double support_end() const;

private:
    int dimension_;
    std::vector<Piece> pieces_;
};

// Time-inhomogeneous Levy driver L with triplet (0, c^L, F^L) under P_N and
// the volatility loadings lambda(., T_k), k = 1..N-1.
struct LevyDriverBlock {
    LocalCharacteristics levy;
    std::vector<VolatilitySchedule> volatilities;
    double bound = 0.0;    // M
    double epsilon = 0.0;  // exponential-moment margin

    int factor_dimension() const noexcept { return levy.dimension(); }
    int rate_count() const noexcept { return static_cast<int>(volatilities.size()); }
    // (N-1) x n matrix with rows lambda(t, T_k).
    Matrix volatility_matrix(double t) const;
    void validate(const TenorStructure& tenor) const;
};

struct LmmSpec {
    LevyDriverBlock block;
    std::vector<double> accruals;       // accrual of L(., T_k), k = 1..N-1
    std::vector<double> initial_rates;  // L(0, T_k)

    // l^j(x) = a e^x / (1 + a e^x) with a = accrual_j L(0, T_j).
    double share(int j, double x) const;
};

struct FpmSpec {
    LevyDriverBlock block;
    std::vector<double> initial_forward_prices;  // F(0, T_k, T_N), k = 1..N-1

    // Lambda_k(t) = sum_{i >= k} lambda(t, T_i).
    Vector cumulative_volatility(int k, double t) const;
};

class ModelSpec {
public:
    // Rates, accruals and forward prices are read off the curve.
    static ModelSpec lmm(InitialCurve curve, LevyDriverBlock block);
    static ModelSpec fpm(InitialCurve curve, LevyDriverBlock block);
    static ModelSpec affine(InitialCurve curve, AffineModelSpec block);
    // Explicit driver (identity truncation) and functionals for k = 1..N-1.
    static ModelSpec custom(InitialCurve curve, Construction construction, LocalCharacteristics driver,
                            std::vector<ForwardFunctional> functionals, Vector initial_state);

    const TenorStructure& tenor() const noexcept { return curve_.tenor(); }
    const InitialCurve& curve() const noexcept { return curve_; }
    ModelFamily family() const noexcept { return family_; }
    Construction construction() const noexcept { return construction_; }
    int dimension() const noexcept { return static_cast<int>(initial_state_.size()); }
    const Vector& initial_state() const noexcept { return initial_state_; }
    int rate_count() const noexcept { return tenor().size() - 1; }

    // Functionals in the family's native form (f^k or g^k).
    const std::vector<ForwardFunctional>& functionals() const;
    const std::vector<ForwardFunctional>& backward_functionals() const noexcept { return f_; }
    const std::vector<ForwardFunctional>& terminal_functionals() const noexcept { return g_; }
    const ForwardFunctional& backward_functional(int k) const;
    const ForwardFunctional& terminal_functional(int k) const;

    // P_N characteristics of X at (t, x), identity truncation.
    CharacteristicTriplet driver_triplet(double t, const Vector& x) const;
    // Times where the characteristics may jump (always includes 0 and T_N).
    std::vector<double> breakpoints() const;

    const LmmSpec* lmm_block() const noexcept { return std::get_if<LmmSpec>(&block_); }
    const FpmSpec* fpm_block() const noexcept { return std::get_if<FpmSpec>(&block_); }
    const AffineModelSpec* affine_block() const noexcept { return std::get_if<AffineModelSpec>(&block_); }
    const LocalCharacteristics* custom_driver() const noexcept { return driver_ ? &*driver_ : nullptr; }

    // Deliberately wrong model: the no-arbitrage drift (or, for the affine
    // family, the driver drift b_tilde + beta x) is replaced by zero.
    bool zero_drift() const noexcept { return zero_drift_; }
    ModelSpec with_zero_drift(bool on = true) const;

private:
    ModelSpec(InitialCurve curve, ModelFamily family, Construction construction);
    void install_functionals(std::vector<ForwardFunctional> native);

    InitialCurve curve_;
    ModelFamily family_;
    Construction construction_;
    std::variant<std::monostate, LmmSpec, FpmSpec, AffineModelSpec> block_;
    std::optional<LocalCharacteristics> driver_;
    Vector initial_state_;
    std::vector<ForwardFunctional> f_, g_;
    bool zero_drift_ = false;
};

}  // namespace liborforge
