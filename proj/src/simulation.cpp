#include "liborforge/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include "liborforge/drift_engine.hpp"
#include "liborforge/errors.hpp"

namespace liborforge {

double SimulationConfig::resolved_step(const TenorStructure& tenor) const {
    if (time_step < 0.0 || !std::isfinite(time_step)) throw InvariantError("time step must be positive");
    return time_step > 0.0 ? time_step : tenor.min_accrual() / 32.0;
}

std::size_t SimulationGrid::index_of(double t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9);
    if (it == times.end() || std::abs(*it - t) > 1e-9)
        throw DomainError("time " + std::to_string(t) + " is not a simulation grid point");
    return static_cast<std::size_t>(it - times.begin());
}

SimulationGrid simulation_grid(const ModelSpec& spec, double step) {
    if (!(step > 0.0)) throw InvariantError("time step must be positive");
    const auto pts = spec.breakpoints();
    SimulationGrid grid;
    grid.times.push_back(0.0);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i], b = pts[i + 1];
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / step - 1e-9)));
        for (std::size_t j = 1; j < n; ++j) grid.times.push_back(a + (b - a) * static_cast<double>(j) / n);
        grid.times.push_back(b);
    }
    for (double date : spec.tenor().dates()) grid.tenor_index.push_back(grid.index_of(date));
    return grid;
}

Vector PathGrid::state(std::size_t path, std::size_t time_index) const {
    Vector x(dimension);
    for (int j = 0; j < dimension; ++j) x[j] = coordinate(path, time_index, j);
    return x;
}

std::uint64_t path_seed(std::uint64_t master_seed, std::size_t path) {
    auto mix = [](std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    return mix(master_seed ^ mix(static_cast<std::uint64_t>(path) + 0x632BE59BD9B4E019ULL));
}

namespace {

// Characteristics frozen on one interval between breakpoints.
struct Regime {
    int noise = 0;
    std::vector<double> loading;      // d x noise, row-major
    std::vector<double> drift;        // constant drift (custom, fpm)
    std::vector<double> compensator;  // sum_i lambda_i x_i
    std::vector<double> sizes;        // atoms x d
    std::vector<double> rates;
    // LMM random drift ingredients.
    std::vector<double> cov;    // d x d, <lambda_k, c lambda_j>
    std::vector<double> expm1;  // atoms x d, e^{<lambda_k, y_i>} - 1
};

class Engine {
public:
    Engine(const ModelSpec& spec, const SimulationConfig& config)
        : spec_(spec), grid_(simulation_grid(spec, config.resolved_step(spec.tenor()))), d_(spec.dimension()) {
        const auto pts = spec.breakpoints();
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) regimes_.push_back(build(0.5 * (pts[i] + pts[i + 1])));
        std::size_t r = 0;
        for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
            while (r + 1 < pts.size() - 1 && grid_.times[i] >= pts[r + 1] - 1e-12) ++r;
            step_regime_.push_back(r);
        }
        if (const auto* a = spec.affine_block()) {
            const auto& drv = a->driver();
            aff_const_ = drv.identity_drift_constant();
            aff_slope_ = drv.identity_drift_slope();
            if (spec.zero_drift()) {
                aff_const_ -= drv.b_tilde();
                aff_slope_ -= drv.beta();
            }
        }
    }

    const SimulationGrid& grid() const { return grid_; }

    template <class Visit>
    void run(std::size_t path, std::uint64_t master_seed, Visit&& visit, std::vector<JumpEvent>* log) const {
        std::mt19937_64 rng(path_seed(master_seed, path));
        if (spec_.family() == ModelFamily::affine)
            run_affine(path, rng, visit, log);
        else
            run_levy(path, rng, visit, log);
    }

    Vector regime_drift(double t, const Vector& x) const {
        const Regime& reg = regimes_[regime_at(t)];
        std::vector<double> b(d_), share(d_), prod;
        lmm_fast_drift(reg, x.data(), share, prod, b.data());
        return Eigen::Map<Vector>(b.data(), d_);
    }

private:
    std::size_t regime_at(double t) const {
        const auto pts = spec_.breakpoints();
        std::size_t r = 0;
        while (r + 1 < pts.size() - 1 && t >= pts[r + 1]) ++r;
        return r;
    }

    Regime build(double t) const {
        Regime reg;
        Matrix load;
        const AtomicJumpMeasure* atoms = nullptr;
        Matrix atom_map;  // maps an atom of the source measure to X-space
        switch (spec_.family()) {
            case ModelFamily::lmm:
            case ModelFamily::fpm: {
                const LevyDriverBlock& block =
                    spec_.lmm_block() ? spec_.lmm_block()->block : spec_.fpm_block()->block;
                const auto& seg = block.levy.segment_at(t);
                Matrix rows = block.volatility_matrix(t);
                if (spec_.fpm_block())
                    for (int k = 1; k <= d_; ++k) rows.row(k - 1) = spec_.fpm_block()->cumulative_volatility(k, t);
                load = rows * psd_factor(seg.diffusion);
                atoms = &seg.jumps;
                atom_map = rows;
                reg.drift.assign(d_, 0.0);
                if (spec_.fpm_block() && !spec_.zero_drift())
                    for (int k = 1; k <= d_; ++k) reg.drift[k - 1] = fpm_drift(*spec_.fpm_block(), k, t);
                if (spec_.lmm_block()) {
                    const Matrix vol = block.volatility_matrix(t);
                    const Matrix cov = vol * seg.diffusion * vol.transpose();
                    reg.cov.assign(cov.data(), cov.data() + cov.size());  // symmetric
                }
                break;
            }
            case ModelFamily::custom: {
                const auto& seg = spec_.custom_driver()->segment_at(t);
                load = psd_factor(seg.diffusion);
                atoms = &seg.jumps;
                atom_map = Matrix::Identity(d_, d_);
                reg.drift.assign(seg.drift.data(), seg.drift.data() + d_);
                if (spec_.zero_drift()) std::fill(reg.drift.begin(), reg.drift.end(), 0.0);
                break;
            }
            case ModelFamily::affine:
                return reg;
        }
        reg.noise = static_cast<int>(load.cols());
        reg.loading.resize(static_cast<std::size_t>(d_) * reg.noise);
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < reg.noise; ++j) reg.loading[i * reg.noise + j] = load(i, j);
        reg.compensator.assign(d_, 0.0);
        for (const auto& a : atoms->atoms()) {
            const Vector s = atom_map * a.size;
            for (int i = 0; i < d_; ++i) {
                reg.sizes.push_back(s[i]);
                reg.compensator[i] += a.intensity * s[i];
                if (!reg.cov.empty()) reg.expm1.push_back(std::expm1(s[i]));
            }
            reg.rates.push_back(a.intensity);
        }
        return reg;
    }

    // Drift of every LIBOR coordinate at the left-point state, all tenors jointly.
    void lmm_fast_drift(const Regime& reg, const double* x, std::vector<double>& share, std::vector<double>& prod,
                        double* b) const {
        const LmmSpec& lmm = *spec_.lmm_block();
        for (int j = 0; j < d_; ++j) share[j] = lmm.share(j + 1, x[j]);
        const std::size_t na = reg.rates.size();
        prod.assign(na, 1.0);
        for (int k = d_ - 1; k >= 0; --k) {
            double v = -0.5 * reg.cov[k * d_ + k];
            for (int j = k + 1; j < d_; ++j) v -= share[j] * reg.cov[k * d_ + j];
            for (std::size_t i = 0; i < na; ++i) {
                const double e = reg.expm1[i * d_ + k];
                v -= (e * prod[i] - reg.sizes[i * d_ + k]) * reg.rates[i];
                prod[i] *= 1.0 + share[k] * e;
            }
            b[k] = v;
        }
    }

    void fail(std::size_t path, double t) const {
        throw SimulationError("non-finite state on path " + std::to_string(path) + " at t = " + std::to_string(t));
    }

    template <class Visit>
    void run_levy(std::size_t path, std::mt19937_64& rng, Visit& visit, std::vector<JumpEvent>* log) const {
        std::normal_distribution<double> normal(0.0, 1.0);
        std::exponential_distribution<double> expo(1.0);
        const bool lmm = spec_.family() == ModelFamily::lmm && !spec_.zero_drift();
        Vector x = spec_.initial_state();
        std::vector<double> z, drift(d_), share(d_), prod, clock;
        visit(std::size_t{0}, x);
        std::size_t current = std::numeric_limits<std::size_t>::max();
        for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
            const double t0 = grid_.times[i], t1 = grid_.times[i + 1], h = t1 - t0;
            const Regime& reg = regimes_[step_regime_[i]];
            if (step_regime_[i] != current) {
                current = step_regime_[i];
                clock.resize(reg.rates.size());
                for (std::size_t a = 0; a < reg.rates.size(); ++a)
                    clock[a] = reg.rates[a] > 0.0 ? t0 + expo(rng) / reg.rates[a] : INFINITY;
            }
            if (lmm)
                lmm_fast_drift(reg, x.data(), share, prod, drift.data());
            else
                std::copy(reg.drift.begin(), reg.drift.end(), drift.begin());
            z.resize(reg.noise);
            for (int j = 0; j < reg.noise; ++j) z[j] = normal(rng);
            const double sq = std::sqrt(h);
            for (int k = 0; k < d_; ++k) {
                double noise = 0.0;
                for (int j = 0; j < reg.noise; ++j) noise += reg.loading[k * reg.noise + j] * z[j];
                x[k] += (drift[k] - reg.compensator[k]) * h + noise * sq;
            }
            for (std::size_t a = 0; a < reg.rates.size(); ++a) {
                while (clock[a] < t1) {
                    for (int k = 0; k < d_; ++k) x[k] += reg.sizes[a * d_ + k];
                    if (log) log->push_back({clock[a], static_cast<int>(a)});
                    clock[a] += expo(rng) / reg.rates[a];
                }
            }
            if (!x.allFinite()) fail(path, t1);
            visit(i + 1, x);
        }
    }

    template <class Visit>
    void run_affine(std::size_t path, std::mt19937_64& rng, Visit& visit, std::vector<JumpEvent>* log) const {
        const auto& drv = spec_.affine_block()->driver();
        const auto& f1 = drv.constant_jumps().atoms();
        const auto& f2 = drv.state_jumps().atoms();
        std::normal_distribution<double> normal(0.0, 1.0);
        std::exponential_distribution<double> expo(1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::poisson_distribution<long> poisson;
        double comp1 = 0.0, comp2 = 0.0;
        for (const auto& a : f1) comp1 += a.intensity * a.size[0];
        for (const auto& a : f2) comp2 += a.intensity * a.size[0];

        Vector x = spec_.initial_state();
        visit(std::size_t{0}, x);
        std::vector<double> clock(f1.size());
        for (std::size_t a = 0; a < f1.size(); ++a)
            clock[a] = f1[a].intensity > 0.0 ? expo(rng) / f1[a].intensity : INFINITY;
        for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
            const double t0 = grid_.times[i], t1 = grid_.times[i + 1], h = t1 - t0;
            const double xl = x[0];
            // Exact conditional mean of the affine drift, then zero-mean shocks.
            const double growth = aff_slope_ * h;
            double next = aff_slope_ != 0.0 ? std::exp(growth) * xl + aff_const_ * std::expm1(growth) / aff_slope_
                                            : xl + aff_const_ * h;
            next += std::sqrt(2.0 * drv.alpha() * xl * h) * normal(rng);
            next -= (comp1 + xl * comp2) * h;
            for (std::size_t a = 0; a < f1.size(); ++a) {
                while (clock[a] < t1) {
                    next += f1[a].size[0];
                    if (log) log->push_back({clock[a], static_cast<int>(a)});
                    clock[a] += expo(rng) / f1[a].intensity;
                }
            }
            for (std::size_t a = 0; a < f2.size(); ++a) {
                const double mean = f2[a].intensity * xl * h;
                if (mean <= 0.0) continue;
                const long count = poisson(rng, std::poisson_distribution<long>::param_type(mean));
                next += static_cast<double>(count) * f2[a].size[0];
                if (log)
                    for (long c = 0; c < count; ++c)
                        log->push_back({t0 + h * unif(rng), static_cast<int>(f1.size() + a)});
            }
            x[0] = std::max(next, 0.0);
            if (!std::isfinite(x[0])) fail(path, t1);
            visit(i + 1, x);
        }
    }

    const ModelSpec& spec_;
    SimulationGrid grid_;
    int d_;
    std::vector<Regime> regimes_;
    std::vector<std::size_t> step_regime_;
    double aff_const_ = 0.0, aff_slope_ = 0.0;
};

template <class Work>
void parallel_for(std::size_t count, int workers, Work&& work) {
    const std::size_t threads =
        std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        constexpr std::size_t chunk = 64;
        for (;;) {
            const std::size_t start = next.fetch_add(chunk);
            if (start >= count) return;
            const std::size_t stop = std::min(count, start + chunk);
            try {
                for (std::size_t p = start; p < stop; ++p) work(p);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    if (threads == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
}

void check_config(const SimulationConfig& config) {
    if (config.path_count < 1) throw InvariantError("path count must be at least 1");
    if (config.worker_count < 1) throw InvariantError("worker count must be at least 1");
}

}  // namespace

void observe_paths(const ModelSpec& spec, const SimulationConfig& config, const std::vector<std::size_t>& time_indices,
                   const PathObserver& observer, std::vector<std::vector<JumpEvent>>* jump_logs) {
    check_config(config);
    const Engine engine(spec, config);
    std::vector<char> wanted(engine.grid().size(), time_indices.empty() ? 1 : 0);
    for (std::size_t i : time_indices) {
        if (i >= wanted.size()) throw IndexError("grid index " + std::to_string(i) + " out of range");
        wanted[i] = 1;
    }
    if (jump_logs) jump_logs->assign(config.path_count, {});
    parallel_for(config.path_count, config.worker_count, [&](std::size_t p) {
        engine.run(
            p, config.master_seed,
            [&](std::size_t i, const Vector& x) {
                if (wanted[i]) observer(p, i, x);
            },
            jump_logs ? &(*jump_logs)[p] : nullptr);
    });
}

PathGrid simulate_driver(const ModelSpec& spec, const SimulationConfig& config) {
    const SimulationGrid grid = simulation_grid(spec, config.resolved_step(spec.tenor()));
    PathGrid out;
    out.times = grid.times;
    out.tenor_index = grid.tenor_index;
    out.path_count = config.path_count;
    out.dimension = spec.dimension();
    out.states.assign(out.path_count * out.times.size() * out.dimension, 0.0);
    const std::size_t nt = out.times.size();
    const int d = out.dimension;
    observe_paths(
        spec, config, {},
        [&](std::size_t p, std::size_t i, const Vector& x) {
            std::copy(x.data(), x.data() + d, out.states.begin() + (p * nt + i) * d);
        },
        &out.jumps);
    return out;
}

namespace {

Matrix functional_paths(const PathGrid& grid, const ForwardFunctional& f, double shift) {
    Matrix out(grid.path_count, grid.times.size());
    for (std::size_t p = 0; p < grid.path_count; ++p)
        for (std::size_t i = 0; i < grid.times.size(); ++i)
            out(p, i) = std::exp(f.value(grid.times[i], grid.state(p, i)) - shift);
    return out;
}

void check_grid(const ModelSpec& spec, const PathGrid& grid) {
    if (grid.dimension != spec.dimension()) throw ContractError("path grid was produced by a different model");
}

}  // namespace

Matrix period_forward_paths(const ModelSpec& spec, const PathGrid& grid, int k) {
    check_grid(spec, grid);
    return functional_paths(grid, spec.backward_functional(k), 0.0);
}

Matrix terminal_forward_paths(const ModelSpec& spec, const PathGrid& grid, int k) {
    check_grid(spec, grid);
    return functional_paths(grid, spec.terminal_functional(k), 0.0);
}

Matrix forward_price_paths(const ModelSpec& spec, const PathGrid& grid, int k) {
    return spec.construction() == Construction::backward ? period_forward_paths(spec, grid, k)
                                                         : terminal_forward_paths(spec, grid, k);
}

Matrix density_process(const ModelSpec& spec, const PathGrid& grid, int k) {
    check_grid(spec, grid);
    const auto& f = spec.backward_functional(k);
    return functional_paths(grid, f, f.value(0.0, spec.initial_state()));
}

Matrix measure_weight_paths(const ModelSpec& spec, const PathGrid& grid, int n) {
    check_grid(spec, grid);
    spec.tenor().require_index(n);
    if (n == spec.tenor().size()) return Matrix::Ones(grid.path_count, grid.times.size());
    const auto& g = spec.terminal_functional(n);
    return functional_paths(grid, g, g.value(0.0, spec.initial_state()));
}

namespace {

struct Moments {
    double n = 0.0, mean = 0.0, m2 = 0.0;
};

Moments combine(const Moments& a, const Moments& b) {
    if (a.n == 0.0) return b;
    if (b.n == 0.0) return a;
    Moments out;
    out.n = a.n + b.n;
    const double delta = b.mean - a.mean;
    out.mean = a.mean + delta * (b.n / out.n);
    out.m2 = a.m2 + b.m2 + delta * delta * (a.n * b.n / out.n);
    return out;
}

Moments reduce(const double* v, std::size_t count) {
    if (count <= 16) {
        Moments m;
        for (std::size_t i = 0; i < count; ++i) {
            m.n += 1.0;
            const double delta = v[i] - m.mean;
            m.mean = (i == 0) ? v[i] : m.mean + delta / m.n;
            m.m2 += delta * (v[i] - m.mean);
        }
        if (count == 1) m.m2 = 0.0;
        return m;
    }
    const std::size_t half = count / 2;
    return combine(reduce(v, half), reduce(v + half, count - half));
}

}  // namespace

SampleStatistics pairwise_statistics(const std::vector<double>& values) {
    SampleStatistics s;
    s.count = values.size();
    if (values.empty()) return s;
    const Moments m = reduce(values.data(), values.size());
    s.mean = m.mean;
    s.std_error = m.n > 1.0 ? std::sqrt(std::max(0.0, m.m2) / (m.n - 1.0) / m.n) : 0.0;
    return s;
}

double z_score(double mean, double target, double std_error) {
    if (std_error > 0.0) return (mean - target) / std_error;
    if (mean == target) return 0.0;
    return mean > target ? INFINITY : -INFINITY;
}

bool MartingaleReport::passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const MartingaleRow& r) { return r.passed; });
}

double MartingaleReport::max_abs_z() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, std::abs(r.z));
    return m;
}

MartingaleReport martingale_test(const ModelSpec& spec, const SimulationConfig& config,
                                 std::vector<double> checkpoints) {
    const TenorStructure& tenor = spec.tenor();
    const SimulationGrid grid = simulation_grid(spec, config.resolved_step(tenor));
    if (checkpoints.empty())
        for (int k = 1; k < tenor.size(); ++k) checkpoints.push_back(tenor.date(k));

    struct Entry {
        int k;
        double t;
        std::size_t index;
    };
    std::vector<Entry> entries;
    std::vector<std::size_t> indices;
    for (int k = 1; k < tenor.size(); ++k)
        for (double t : checkpoints) {
            const std::size_t idx = grid.index_of(t);
            if (grid.times[idx] > tenor.date(k) + 1e-12) continue;
            entries.push_back({k, grid.times[idx], idx});
            indices.push_back(idx);
        }

    std::vector<std::vector<double>> values(entries.size(), std::vector<double>(config.path_count));
    observe_paths(spec, config, indices, [&](std::size_t p, std::size_t i, const Vector& x) {
        for (std::size_t e = 0; e < entries.size(); ++e)
            if (entries[e].index == i)
                values[e][p] = std::exp(spec.terminal_functional(entries[e].k).value(entries[e].t, x));
    });

    MartingaleReport report;
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const SampleStatistics s = pairwise_statistics(values[e]);
        MartingaleRow row;
        row.k = entries[e].k;
        row.t = entries[e].t;
        row.mean = s.mean;
        row.std_error = s.std_error;
        row.target = std::exp(spec.terminal_functional(row.k).value(0.0, spec.initial_state()));
        row.z = z_score(row.mean, row.target, row.std_error);
        row.passed = std::abs(row.z) <= 3.0;
        report.rows.push_back(row);
    }
    return report;
}

std::vector<CapletQuote> caplet_prices(const ModelSpec& spec, const SimulationConfig& config,
                                       const std::vector<double>& strikes) {
    const TenorStructure& tenor = spec.tenor();
    const int n = tenor.size();
    const SimulationGrid grid = simulation_grid(spec, config.resolved_step(tenor));
    for (double s : strikes)
        if (!std::isfinite(s)) throw DomainError("strike must be finite");

    // Per path: L(T_k, T_k) and F(T_{k+1}, T_{k+1}, T_N) for every k.
    std::vector<std::vector<double>> rate(n - 1, std::vector<double>(config.path_count));
    std::vector<std::vector<double>> conv(n - 1, std::vector<double>(config.path_count, 1.0));
    std::vector<std::size_t> indices(grid.tenor_index.begin() + 1, grid.tenor_index.end());
    observe_paths(spec, config, indices, [&](std::size_t p, std::size_t i, const Vector& x) {
        for (int k = 1; k < n; ++k) {
            if (i == grid.tenor_index[k]) {
                const double tk = tenor.date(k);
                rate[k - 1][p] = std::expm1(spec.backward_functional(k).value(tk, x)) / tenor.period_length(k);
            }
            if (k + 1 < n && i == grid.tenor_index[k + 1])
                conv[k - 1][p] = std::exp(spec.terminal_functional(k + 1).value(tenor.date(k + 1), x));
        }
    });

    const double numeraire = spec.curve().bond_price(n);
    std::vector<CapletQuote> out;
    std::vector<double> payoff(config.path_count);
    for (int k = 1; k < n; ++k) {
        const double delta = tenor.period_length(k);
        for (double strike : strikes) {
            for (std::size_t p = 0; p < config.path_count; ++p)
                payoff[p] = delta * std::max(rate[k - 1][p] - strike, 0.0) * conv[k - 1][p];
            const SampleStatistics s = pairwise_statistics(payoff);
            out.push_back({k, strike, numeraire * s.mean, numeraire * s.std_error});
        }
    }
    return out;
}

CapletQuote caplet_price(const ModelSpec& spec, const SimulationConfig& config, int k, double strike) {
    spec.tenor().require_rate_index(k);
    for (const auto& q : caplet_prices(spec, config, {strike}))
        if (q.k == k) return q;
    throw IndexError("caplet index out of range");
}

namespace detail {
Vector lmm_simulation_drift(const ModelSpec& spec, double t, const Vector& x) {
    if (!spec.lmm_block()) throw ContractError("not a LIBOR market model");
    return Engine(spec, SimulationConfig{}).regime_drift(t, x);
}
}  // namespace detail

}  // namespace liborforge
