#include "liborforge/curve.hpp"

#include <cmath>
#include <string>

#include "liborforge/errors.hpp"

namespace liborforge {

InitialCurve::InitialCurve(TenorStructure tenor, std::vector<double> bond_prices)
    : tenor_(std::move(tenor)), prices_(std::move(bond_prices)) {
    if (static_cast<int>(prices_.size()) != tenor_.size())
        throw InvariantError("initial curve needs " + std::to_string(tenor_.size()) +
                             " bond prices, got " + std::to_string(prices_.size()));
    for (std::size_t i = 0; i < prices_.size(); ++i)
        if (!(prices_[i] > 0.0) || !std::isfinite(prices_[i]))
            throw InvariantError("bond price B(0, T_" + std::to_string(i + 1) +
                                 ") must be finite and strictly positive");
}

InitialCurve InitialCurve::flat(TenorStructure tenor, double rate) {
    std::vector<double> prices;
    for (int k = 1; k <= tenor.size(); ++k) prices.push_back(std::exp(-rate * tenor.date(k)));
    return InitialCurve(std::move(tenor), std::move(prices));
}

double InitialCurve::bond_price(int k) const {
    if (k == 0) return 1.0;
    tenor_.require_index(k);
    return prices_[k - 1];
}

double InitialCurve::forward_price(int k, int n) const {
    tenor_.require_index(k);
    tenor_.require_index(n);
    return prices_[k - 1] / prices_[n - 1];
}

double InitialCurve::libor(int k) const {
    tenor_.require_rate_index(k);
    return libor_from_forward_price(forward_price(k, k + 1), tenor_.period_length(k));
}

double libor_from_forward_price(double forward_price, double accrual) {
    if (!(forward_price > 0.0)) throw DomainError("forward price must be positive");
    if (!(accrual > 0.0)) throw DomainError("accrual must be positive");
    return (forward_price - 1.0) / accrual;
}

double forward_price_from_libor(double rate, double accrual) {
    if (!(accrual > 0.0)) throw DomainError("accrual must be positive");
    const double fp = 1.0 + accrual * rate;
    if (!(fp > 0.0)) throw DomainError("rate implies a non-positive forward price");
    return fp;
}

double forward_price_from_curve(const InitialCurve& curve, int k, int n) {
    return curve.forward_price(k, n);
}

}  // namespace liborforge
