#include "liborforge/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "liborforge/drift_engine.hpp"
#include "liborforge/errors.hpp"

namespace liborforge {

const char* to_string(ModelFamily family) noexcept {
    switch (family) {
        case ModelFamily::lmm: return "lmm";
        case ModelFamily::fpm: return "fpm";
        case ModelFamily::affine: return "affine";
        case ModelFamily::custom: return "custom";
    }
    return "?";
}

const char* to_string(Construction construction) noexcept {
    return construction == Construction::backward ? "backward" : "terminal";
}

VolatilitySchedule::VolatilitySchedule(int dimension, std::vector<Piece> pieces)
    : dimension_(dimension), pieces_(std::move(pieces)) {
    if (dimension_ < 1) throw InvariantError("volatility dimension must be positive");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const auto& p = pieces_[i];
        const std::string where = "volatility piece " + std::to_string(i);
        if (!(p.end > p.start) || !(p.start >= 0.0)) throw InvariantError(where + " has an invalid interval");
        if (i > 0 && p.start < pieces_[i - 1].end) throw InvariantError(where + " overlaps its predecessor");
        if (p.value.size() != dimension_) throw InvariantError(where + " has the wrong dimension");
        if (!p.value.allFinite() || (p.value.array() < 0.0).any())
            throw InvariantError(where + " must be finite and non-negative");
    }
}

VolatilitySchedule VolatilitySchedule::constant(Vector value, double end) {
    const int n = static_cast<int>(value.size());
    return VolatilitySchedule(n, {{0.0, end, std::move(value)}});
}

Vector VolatilitySchedule::at(double t) const {
    for (const auto& p : pieces_)
        if (t >= p.start && t < p.end) return p.value;
    return Vector::Zero(dimension_);
}

double VolatilitySchedule::support_end() const {
    double end = 0.0;
    for (const auto& p : pieces_)
        if (!p.value.isZero(0.0)) end = std::max(end, p.end);
    return end;
}

Matrix LevyDriverBlock::volatility_matrix(double t) const {
    Matrix m(rate_count(), factor_dimension());
    for (int k = 0; k < rate_count(); ++k) m.row(k) = volatilities[k].at(t).transpose();
    return m;
}

void LevyDriverBlock::validate(const TenorStructure& tenor) const {
    if (rate_count() != tenor.size() - 1)
        throw InvariantError("expected " + std::to_string(tenor.size() - 1) + " volatility functions, got " +
                             std::to_string(rate_count()));
    for (int k = 0; k < rate_count(); ++k)
        if (volatilities[k].dimension() != factor_dimension())
            throw InvariantError("volatility of T_" + std::to_string(k + 1) + " does not match the driver dimension");
    levy.require_identity_truncation();
    if (std::abs(levy.horizon() - tenor.maturity()) > 1e-12 * tenor.maturity())
        throw InvariantError("driver segments must cover [0, T_N]");
    for (const auto& s : levy.segments())
        if (!s.drift.isZero(0.0)) throw InvariantError("Levy driver must have zero drift under identity truncation");
    if (!(epsilon > 0.0)) throw InvariantError("exponential-moment margin epsilon must be positive");
    if (!(bound > 0.0)) throw InvariantError("volatility bound M must be positive");
}

double LmmSpec::share(int j, double x) const {
    const double a = accruals.at(j - 1) * initial_rates.at(j - 1);
    if (a == 0.0) return 0.0;
    const double z = std::log(a) + x;
    return z > 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

Vector FpmSpec::cumulative_volatility(int k, double t) const {
    if (k < 1 || k > block.rate_count()) throw IndexError("rate index " + std::to_string(k) + " out of range");
    Vector sum = Vector::Zero(block.factor_dimension());
    for (int i = k; i <= block.rate_count(); ++i) sum += block.volatilities[i - 1].at(t);
    return sum;
}

ModelSpec::ModelSpec(InitialCurve curve, ModelFamily family, Construction construction)
    : curve_(std::move(curve)), family_(family), construction_(construction) {}

void ModelSpec::install_functionals(std::vector<ForwardFunctional> native) {
    if (static_cast<int>(native.size()) != rate_count())
        throw InvariantError("expected " + std::to_string(rate_count()) + " functionals, got " +
                             std::to_string(native.size()));
    for (std::size_t i = 0; i < native.size(); ++i)
        if (native[i].dimension() != dimension())
            throw InvariantError("functional " + std::to_string(i + 1) + " has input dimension " +
                                 std::to_string(native[i].dimension()) + ", driver has " +
                                 std::to_string(dimension()));
    if (construction_ == Construction::backward) {
        g_ = g_from_f(native);
        f_ = std::move(native);
    } else {
        f_ = f_from_g(native);
        g_ = std::move(native);
    }
}

ModelSpec ModelSpec::lmm(InitialCurve curve, LevyDriverBlock block) {
    ModelSpec spec(std::move(curve), ModelFamily::lmm, Construction::backward);
    const TenorStructure& tenor = spec.tenor();
    if (tenor.size() < 2) throw InvariantError("a LIBOR model needs N >= 2");
    block.validate(tenor);
    LmmSpec lmm{std::move(block), {}, {}};
    const int d = tenor.size() - 1;
    std::vector<ForwardFunctional> f;
    for (int k = 1; k <= d; ++k) {
        lmm.accruals.push_back(tenor.period_length(k));
        lmm.initial_rates.push_back(spec.curve_.libor(k));
        if (lmm.initial_rates.back() < 0.0)
            throw InvariantError("LIBOR market model needs L(0, T_" + std::to_string(k) + ") >= 0");
        f.push_back(ForwardFunctional::log_one_plus_exp(d, k - 1, lmm.accruals.back(), lmm.initial_rates.back()));
    }
    spec.block_ = std::move(lmm);
    spec.initial_state_ = Vector::Zero(d);
    spec.install_functionals(std::move(f));
    return spec;
}

ModelSpec ModelSpec::fpm(InitialCurve curve, LevyDriverBlock block) {
    ModelSpec spec(std::move(curve), ModelFamily::fpm, Construction::terminal);
    const TenorStructure& tenor = spec.tenor();
    if (tenor.size() < 2) throw InvariantError("a LIBOR model needs N >= 2");
    block.validate(tenor);
    FpmSpec fpm{std::move(block), {}};
    const int d = tenor.size() - 1;
    std::vector<ForwardFunctional> g;
    for (int k = 1; k <= d; ++k) {
        fpm.initial_forward_prices.push_back(spec.curve_.forward_price(k, tenor.size()));
        Vector beta = Vector::Zero(d);
        beta[k - 1] = 1.0;
        g.push_back(ForwardFunctional::affine(std::log(fpm.initial_forward_prices.back()), std::move(beta)));
    }
    spec.block_ = std::move(fpm);
    spec.initial_state_ = Vector::Zero(d);
    spec.install_functionals(std::move(g));
    return spec;
}

ModelSpec ModelSpec::affine(InitialCurve curve, AffineModelSpec block) {
    ModelSpec spec(std::move(curve), ModelFamily::affine, Construction::terminal);
    const TenorStructure& tenor = spec.tenor();
    if (tenor.dates() != block.tenor().dates())
        throw InvariantError("affine block and initial curve use different tenor structures");
    auto g = block.functionals();
    spec.block_ = std::move(block);
    spec.initial_state_ = Vector::Constant(1, AffineDriverSpec::initial_state);
    spec.install_functionals(std::move(g));
    return spec;
}

ModelSpec ModelSpec::custom(InitialCurve curve, Construction construction, LocalCharacteristics driver,
                            std::vector<ForwardFunctional> functionals, Vector initial_state) {
    ModelSpec spec(std::move(curve), ModelFamily::custom, construction);
    driver.require_identity_truncation();
    if (std::abs(driver.horizon() - spec.tenor().maturity()) > 1e-12 * spec.tenor().maturity())
        throw InvariantError("driver segments must cover [0, T_N]");
    if (initial_state.size() != driver.dimension())
        throw InvariantError("initial state dimension does not match the driver");
    if (!initial_state.allFinite()) throw InvariantError("initial state must be finite");
    spec.driver_ = std::move(driver);
    spec.initial_state_ = std::move(initial_state);
    spec.install_functionals(std::move(functionals));
    return spec;
}

const std::vector<ForwardFunctional>& ModelSpec::functionals() const {
    return construction_ == Construction::backward ? f_ : g_;
}

const ForwardFunctional& ModelSpec::backward_functional(int k) const {
    tenor().require_rate_index(k);
    return f_[k - 1];
}

const ForwardFunctional& ModelSpec::terminal_functional(int k) const {
    tenor().require_rate_index(k);
    return g_[k - 1];
}

namespace {

std::vector<JumpAtom> loaded_atoms(const Matrix& loading, const std::vector<JumpAtom>& atoms) {
    std::vector<JumpAtom> out;
    out.reserve(atoms.size());
    for (const auto& a : atoms) {
        Vector size = loading * a.size;
        if (size.isZero(0.0)) continue;
        out.push_back({std::move(size), a.intensity});
    }
    return out;
}

}  // namespace

CharacteristicTriplet ModelSpec::driver_triplet(double t, const Vector& x) const {
    if (x.size() != dimension()) throw InvariantError("state dimension does not match the driver");
    if (!(t >= 0.0) || t > tenor().maturity()) throw DomainError("time " + std::to_string(t) + " outside [0, T_N]");
    CharacteristicTriplet out;
    switch (family_) {
        case ModelFamily::lmm: {
            const auto& lmm = std::get<LmmSpec>(block_);
            const auto& seg = lmm.block.levy.segment_at(t);
            const Matrix vol = lmm.block.volatility_matrix(t);
            out.drift = zero_drift_ ? Vector::Zero(dimension()) : lmm_drift_vector(lmm, t, x);
            out.diffusion = vol * seg.diffusion * vol.transpose();
            out.jumps = loaded_atoms(vol, seg.jumps.atoms());
            break;
        }
        case ModelFamily::fpm: {
            const auto& fpm = std::get<FpmSpec>(block_);
            const auto& seg = fpm.block.levy.segment_at(t);
            Matrix cum(rate_count(), fpm.block.factor_dimension());
            out.drift = Vector::Zero(rate_count());
            for (int k = 1; k <= rate_count(); ++k) {
                cum.row(k - 1) = fpm.cumulative_volatility(k, t).transpose();
                if (!zero_drift_) out.drift[k - 1] = fpm_drift(fpm, k, t);
            }
            out.diffusion = cum * seg.diffusion * cum.transpose();
            out.jumps = loaded_atoms(cum, seg.jumps.atoms());
            break;
        }
        case ModelFamily::affine: {
            const auto& drv = std::get<AffineModelSpec>(block_).driver();
            out = drv.triplet(x[0]);
            if (zero_drift_) out.drift[0] -= drv.b_tilde() + drv.beta() * x[0];
            break;
        }
        case ModelFamily::custom: {
            out = driver_->at(t);
            if (zero_drift_) out.drift.setZero();
            break;
        }
    }
    return out;
}

std::vector<double> ModelSpec::breakpoints() const {
    std::vector<double> pts = tenor().dates();
    auto add_levy = [&](const LevyDriverBlock& b) {
        for (double p : b.levy.breakpoints()) pts.push_back(p);
        for (const auto& v : b.volatilities)
            for (const auto& piece : v.pieces()) {
                pts.push_back(piece.start);
                pts.push_back(piece.end);
            }
    };
    if (const auto* l = lmm_block()) add_levy(l->block);
    if (const auto* f = fpm_block()) add_levy(f->block);
    if (driver_)
        for (double p : driver_->breakpoints()) pts.push_back(p);
    const double T = tenor().maturity();
    std::vector<double> out;
    std::sort(pts.begin(), pts.end());
    for (double p : pts) {
        if (p < 0.0 || p > T) continue;
        if (out.empty() || p - out.back() > 1e-12 * std::max(1.0, T)) out.push_back(p);
    }
    if (out.back() < T) out.back() = T;
    return out;
}

ModelSpec ModelSpec::with_zero_drift(bool on) const {
    ModelSpec copy = *this;
    copy.zero_drift_ = on;
    return copy;
}

}  // namespace liborforge
