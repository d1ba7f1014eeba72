#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "liborforge/linalg.hpp"
#include "liborforge/model.hpp"

namespace liborforge {

struct SimulationConfig {
    std::size_t path_count = 100000;
    double time_step = 0.0;  // 0 selects min_k delta_k / 32
    std::uint64_t master_seed = 1;
    int worker_count = 1;    // hint; results do not depend on it

    double resolved_step(const TenorStructure& tenor) const;
};

// Uniform refinement of every interval between tenor dates and
// characteristic breakpoints.
struct SimulationGrid {
    std::vector<double> times;
    std::vector<std::size_t> tenor_index;  // position of T_k, k = 0..N

    std::size_t size() const noexcept { return times.size(); }
    // Index of a grid time within 1e-9, or DomainError.
    std::size_t index_of(double t) const;
};

SimulationGrid simulation_grid(const ModelSpec& spec, double step);

struct JumpEvent {
    double time = 0.0;
    int atom = 0;  // position in the atom list active at that time
};

struct PathGrid {
    std::vector<double> times;
    std::vector<std::size_t> tenor_index;
    std::size_t path_count = 0;
    int dimension = 0;
    std::vector<double> states;  // path-major, then time, then coordinate
    std::vector<std::vector<JumpEvent>> jumps;

    Vector state(std::size_t path, std::size_t time_index) const;
    double coordinate(std::size_t path, std::size_t time_index, int j) const {
        return states[(path * times.size() + time_index) * static_cast<std::size_t>(dimension) + j];
    }
};

// Per-path seed: a fixed mix of the master seed and the path index.
std::uint64_t path_seed(std::uint64_t master_seed, std::size_t path);

// Called for each path at the requested grid indices in increasing order.
// Invocations for distinct paths may run concurrently.
using PathObserver = std::function<void(std::size_t path, std::size_t time_index, const Vector& x)>;

void observe_paths(const ModelSpec& spec, const SimulationConfig& config, const std::vector<std::size_t>& time_indices,
                   const PathObserver& observer, std::vector<std::vector<JumpEvent>>* jump_logs = nullptr);

PathGrid simulate_driver(const ModelSpec& spec, const SimulationConfig& config);

// Rows are paths, columns grid times.
// Native quote: F(t, T_k, T_{k+1}) for backward models, F(t, T_k, T_N) for terminal ones.
Matrix forward_price_paths(const ModelSpec& spec, const PathGrid& grid, int k);
Matrix period_forward_paths(const ModelSpec& spec, const PathGrid& grid, int k);    // e^{f^k}
Matrix terminal_forward_paths(const ModelSpec& spec, const PathGrid& grid, int k);  // e^{g^k}
// e^{f^k(t, X_t) - f^k(0, x_0)}.
Matrix density_process(const ModelSpec& spec, const PathGrid& grid, int k);
// dP_n / dP_N on F_t: e^{g^n(t, X_t) - g^n(0, x_0)}, identically 1 for n = N.
Matrix measure_weight_paths(const ModelSpec& spec, const PathGrid& grid, int n);

struct SampleStatistics {
    std::size_t count = 0;
    double mean = 0.0;
    double std_error = 0.0;
};

// Mean and standard error through a fixed pairwise reduction tree.
SampleStatistics pairwise_statistics(const std::vector<double>& values);
double z_score(double mean, double target, double std_error);

struct MartingaleRow {
    int k = 0;
    double t = 0.0;
    double mean = 0.0;
    double target = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    bool passed = true;
};

struct MartingaleReport {
    std::vector<MartingaleRow> rows;
    bool passed() const;
    double max_abs_z() const;
};

// Tests F(t, T_k, T_N) = e^{g^k(t, X_t)} against e^{g^k(0, x_0)} under P_N for
// every k and every checkpoint t <= T_k. Empty checkpoints select T_1..T_{N-1}.
MartingaleReport martingale_test(const ModelSpec& spec, const SimulationConfig& config,
                                 std::vector<double> checkpoints = {});

struct CapletQuote {
    int k = 0;
    double strike = 0.0;
    double price = 0.0;
    double std_error = 0.0;
};

// All caplets k = 1..N-1 for the given strikes from one set of paths.
std::vector<CapletQuote> caplet_prices(const ModelSpec& spec, const SimulationConfig& config,
                                       const std::vector<double>& strikes);
CapletQuote caplet_price(const ModelSpec& spec, const SimulationConfig& config, int k, double strike);

}  // namespace liborforge

namespace liborforge::detail {
// The joint left-point drift used by the LMM path stepper (exposed for testing).
Vector lmm_simulation_drift(const ModelSpec& spec, double t, const Vector& x);
}  // namespace liborforge::detail
