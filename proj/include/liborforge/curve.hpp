#pragma once

#include <vector>

#include "liborforge/tenor.hpp"

namespace liborforge {

// Zero-coupon bond prices B(0, T_k) for k = 1..N; B(0, T_0) = 1 implicitly.
class InitialCurve {
public:
    InitialCurve(TenorStructure tenor, std::vector<double> bond_prices);

    // Flat continuously compounded curve B(0, T) = exp(-rate * T).
    static InitialCurve flat(TenorStructure tenor, double rate);

    const TenorStructure& tenor() const noexcept { return tenor_; }
    const std::vector<double>& bond_prices() const noexcept { return prices_; }
    // k in 0..N.
    double bond_price(int k) const;
    // B(0, T_k) / B(0, T_n), k and n in 1..N.
    double forward_price(int k, int n) const;
    // L(0, T_k) over [T_k, T_{k+1}], k in 1..N-1.
    double libor(int k) const;

private:
    TenorStructure tenor_;
    std::vector<double> prices_;
};

double libor_from_forward_price(double forward_price, double accrual);
double forward_price_from_libor(double rate, double accrual);
double forward_price_from_curve(const InitialCurve& curve, int k, int n);

}  // namespace liborforge
