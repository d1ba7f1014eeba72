#pragma once

#include <vector>

namespace liborforge {

// Dates 0 = T_0 < T_1 < ... < T_N in year fractions. Indices k run over
// K = {1..N}; the rate-carrying subset is {1..N-1}.
class TenorStructure {
public:
    explicit TenorStructure(std::vector<double> dates);
    // Also checks declared accruals against consecutive date differences.
    TenorStructure(std::vector<double> dates, const std::vector<double>& accruals);

    int size() const noexcept { return static_cast<int>(dates_.size()) - 1; }
    double date(int k) const;
    double maturity() const noexcept { return dates_.back(); }
    const std::vector<double>& dates() const noexcept { return dates_; }

    // delta_k = T_k - T_{k-1}, k in 1..N.
    double accrual(int k) const;
    // Length of the accrual period [T_k, T_{k+1}] that L(., T_k) compounds over.
    double period_length(int k) const;
    double min_accrual() const;

    bool has_index(int k) const noexcept { return k >= 1 && k <= size(); }
    bool has_rate_index(int k) const noexcept { return k >= 1 && k <= size() - 1; }
    void require_index(int k) const;
    void require_rate_index(int k) const;

private:
    std::vector<double> dates_;
};

}  // namespace liborforge
