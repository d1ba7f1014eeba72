#include "liborforge/tenor.hpp"

#include <cmath>
#include <string>

#include "liborforge/errors.hpp"

namespace liborforge {

namespace {
constexpr double accrual_tolerance = 1e-12;
}

TenorStructure::TenorStructure(std::vector<double> dates) : dates_(std::move(dates)) {
    if (dates_.size() < 2)
        throw InvariantError("tenor structure needs at least T_0 and T_1");
    if (dates_.front() != 0.0)
        throw InvariantError("tenor structure must start at T_0 = 0");
    for (std::size_t k = 1; k < dates_.size(); ++k) {
        if (!std::isfinite(dates_[k]) || !(dates_[k] > dates_[k - 1]))
            throw InvariantError("tenor dates must be strictly increasing (at k = " +
                                 std::to_string(k) + ")");
    }
}

TenorStructure::TenorStructure(std::vector<double> dates, const std::vector<double>& accruals)
    : TenorStructure(std::move(dates)) {
    if (static_cast<int>(accruals.size()) != size())
        throw InvariantError("expected " + std::to_string(size()) + " accruals, got " +
                             std::to_string(accruals.size()));
    for (int k = 1; k <= size(); ++k) {
        if (!(accruals[k - 1] > 0.0))
            throw InvariantError("accrual delta_" + std::to_string(k) + " must be positive");
        if (std::abs(accruals[k - 1] - accrual(k)) > accrual_tolerance)
            throw InvariantError("accrual delta_" + std::to_string(k) +
                                 " does not match T_k - T_{k-1}");
    }
}

double TenorStructure::date(int k) const {
    if (k < 0 || k > size()) throw IndexError("tenor date index " + std::to_string(k) + " out of range");
    return dates_[k];
}

double TenorStructure::accrual(int k) const {
    require_index(k);
    return dates_[k] - dates_[k - 1];
}

double TenorStructure::period_length(int k) const {
    require_rate_index(k);
    return dates_[k + 1] - dates_[k];
}

double TenorStructure::min_accrual() const {
    double m = accrual(1);
    for (int k = 2; k <= size(); ++k) m = std::min(m, accrual(k));
    return m;
}

void TenorStructure::require_index(int k) const {
    if (!has_index(k))
        throw IndexError("tenor index " + std::to_string(k) + " outside {1.." + std::to_string(size()) + "}");
}

void TenorStructure::require_rate_index(int k) const {
    if (!has_rate_index(k))
        throw IndexError("rate index " + std::to_string(k) + " outside {1.." +
                         std::to_string(size() - 1) + "}");
}

}  // namespace liborforge
