// Acceptance run: one PASS/FAIL line per criterion, with the measured value,
// the pinned tolerance and the runtime.
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "../support/fixtures.hpp"
#include "liborforge/cli.hpp"
#include "liborforge/drift_engine.hpp"
#include "liborforge/measure_change.hpp"
#include "liborforge/simulation.hpp"

using namespace liborforge;
using fixtures::vec;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double runtime_limit, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = runtime_limit <= 0.0 || seconds < runtime_limit;
    const bool passed = o.passed && in_time;
    if (!passed) ++failures;
    std::printf("C%-2d %s  %s | %s | runtime %.2fs", id, passed ? "PASS" : "FAIL", title, o.detail.c_str(), seconds);
    if (runtime_limit > 0.0) std::printf(" (limit %.0fs)", runtime_limit);
    std::printf("\n");
    std::fflush(stdout);
}

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

SimulationConfig mc(std::size_t paths, std::uint64_t seed, double step = 0.0, int workers = 1) {
    SimulationConfig c;
    c.path_count = paths;
    c.master_seed = seed;
    c.time_step = step;
    c.worker_count = workers;
    return c;
}

// Rates L(t, T_k) on every path and grid time, reported through a callback.
void for_each_rate(const ModelSpec& spec, const SimulationConfig& config,
                   const std::function<void(std::size_t, double)>& sink) {
    const SimulationGrid grid = simulation_grid(spec, config.resolved_step(spec.tenor()));
    const auto& f = spec.backward_functionals();
    observe_paths(spec, config, {}, [&](std::size_t p, std::size_t i, const Vector& x) {
        const double t = grid.times[i];
        for (int k = 1; k <= spec.rate_count(); ++k) {
            if (t > spec.tenor().date(k)) continue;
            sink(p, std::expm1(f[k - 1].value(t, x)) / spec.tenor().period_length(k));
        }
    });
}

std::string read(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

int main() {
    std::printf("liborforge acceptance run\n");

    criterion(1, "LMM backward drift closure", 5.0, [] {
        const ModelSpec spec = fixtures::lmm_model();  // N = 4, one factor, three atoms
        std::mt19937_64 rng(101);
        std::uniform_real_distribution<double> time(0.0, spec.tenor().maturity());
        double worst = 0.0;
        for (int k = 1; k <= spec.rate_count(); ++k)
            for (int i = 0; i < 1000; ++i) {
                const Vector x = sample_state(spec, 5.0, rng);
                worst = std::max(worst, std::abs(drift_residual_backward(spec, k, time(rng), x)));
            }
        return Outcome{worst < 1e-10, "max|residual| = " + sci(worst) + " (tol 1e-10, 1000 states per tenor)"};
    });

    criterion(2, "FPM terminal drift closure", 1.0, [] {
        const ModelSpec spec = fixtures::fpm_model();
        std::mt19937_64 rng(202);
        std::uniform_real_distribution<double> time(0.0, spec.tenor().maturity());
        double worst = 0.0;
        for (int k = 1; k <= spec.rate_count(); ++k)
            for (int i = 0; i < 1000; ++i)
                worst = std::max(worst,
                                 std::abs(drift_residual_terminal(spec, k, time(rng), sample_state(spec, 5.0, rng))));
        return Outcome{worst < 1e-12, "max|residual| = " + sci(worst) + " (tol 1e-12)"};
    });

    criterion(3, "backward/terminal equivalence for the FPM", 5.0, [] {
        const ModelSpec spec = fixtures::fpm_model();
        const auto f = f_from_g(spec.terminal_functionals());
        const int n = spec.tenor().size();
        std::mt19937_64 rng(303);
        std::uniform_real_distribution<double> time(0.0, spec.tenor().maturity());
        double drift = 0.0, tilted = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const Vector x = sample_state(spec, 5.0, rng);
            const double t = time(rng);
            const CharacteristicTriplet base = spec.driver_triplet(t, x);
            for (int k = 1; k < n; ++k) {
                drift = std::max(drift, std::abs(drift_residual_backward(base, f, k, t, x)));
                // P_{k+1} characteristics by composing single tilts f^{N-1}, ..., f^{k+1}.
                CharacteristicTriplet chars = base;
                for (int j = n - 1; j > k; --j) chars = girsanov_tilt_apply(chars, f[j - 1], t, x);
                tilted = std::max(tilted, std::abs(local_martingale_residual(chars, f[k - 1], t, x)));
            }
        }
        return Outcome{drift < 1e-10 && tilted < 1e-10,
                       "max|backward residual| = " + sci(drift) + ", max|P_{k+1} residual| = " + sci(tilted) +
                           " (tol 1e-10)"};
    });

    struct Family {
        const char* name;
        std::function<ModelSpec()> make;
    };
    const std::vector<Family> families{{"lmm", [] { return fixtures::lmm_model(); }},
                                       {"fpm", [] { return fixtures::fpm_model(); }},
                                       {"affine", [] { return fixtures::affine_model(); }}};
    for (const auto& fam : families) {
        const std::string title = std::string("martingale property, ") + fam.name + " (1e5 paths, step min delta/32)";
        criterion(4, title.c_str(), 60.0, [&] {
            const ModelSpec spec = fam.make();
            const auto good = martingale_test(spec, mc(100000, 404));
            const auto bad = martingale_test(spec.with_zero_drift(), mc(100000, 404));
            return Outcome{good.passed() && bad.max_abs_z() > 3.0,
                           "max|z| = " + sci(good.max_abs_z()) + " over " + std::to_string(good.rows.size()) +
                               " rows (limit 3); zero-drift max|z| = " + sci(bad.max_abs_z()) + " (must exceed 3)"};
        });
    }

    criterion(5, "Riccati accuracy and fourth-order convergence", 0.0, [] {
        const AffineDriverSpec linear(1.0, -1.0, 0.0);
        const auto lin = riccati_solve(linear, 1.0, 1.0, 1e-3);
        double e_lin = 0.0;
        for (std::size_t i = 0; i < lin.grid.size(); ++i)
            e_lin = std::max(e_lin, std::abs(lin.psi[i] - std::exp(-lin.grid[i])));

        const double alpha = 1.0, u = -1.0;
        auto quad_error = [&](double step) {
            const auto q = riccati_solve(AffineDriverSpec(1e-12, 0.0, alpha), u, 0.5, step);
            double e = 0.0;
            for (std::size_t i = 0; i < q.grid.size(); ++i)
                e = std::max(e, std::abs(q.psi[i] - u / (1.0 - alpha * u * q.grid[i])));
            return e;
        };
        const double e_quad = quad_error(1e-3);
        const double ratio_exact = quad_error(0.05) / quad_error(0.025);

        const auto d = fixtures::cir_jump_driver();
        const auto a = riccati_solve(d, 0.8, 2.0, 0.1), b = riccati_solve(d, 0.8, 2.0, 0.05),
                   c = riccati_solve(d, 0.8, 2.0, 0.025);
        const double ratio_jump = std::abs(a.psi.back() - b.psi.back()) / std::abs(b.psi.back() - c.psi.back());
        return Outcome{e_lin < 1e-8 && e_quad < 1e-8 && ratio_exact >= 12.0 && ratio_jump >= 12.0,
                       "linear err = " + sci(e_lin) + ", quadratic err = " + sci(e_quad) +
                           " (tol 1e-8); halving ratio = " + sci(ratio_exact) + " (closed form), " + sci(ratio_jump) +
                           " (CIR with jumps) (min 12)"};
    });

    criterion(6, "affine MGF against Monte Carlo (CIR with jumps)", 60.0, [] {
        const auto driver = fixtures::cir_jump_driver();
        const auto curve = fixtures::flat_curve();
        const ModelSpec spec =
            ModelSpec::affine(curve, AffineModelSpec(driver, curve.tenor(), calibrate_u(driver, curve), 1e-3));
        const double step = 1.0 / 512.0;
        const SimulationConfig config = mc(100000, 606, step);
        const SimulationGrid grid = simulation_grid(spec, step);
        const std::vector<std::pair<double, double>> points{{-2.0, 0.5}, {0.5, 1.0}, {1.0, 2.0}};
        std::vector<std::size_t> idx;
        for (const auto& [u, t] : points) idx.push_back(grid.index_of(t));
        std::vector<std::vector<double>> values(points.size(), std::vector<double>(config.path_count));
        observe_paths(spec, config, idx, [&](std::size_t p, std::size_t i, const Vector& x) {
            for (std::size_t j = 0; j < points.size(); ++j)
                if (idx[j] == i) values[j][p] = std::exp(points[j].first * x(0));
        });
        bool ok = true;
        std::string detail;
        for (std::size_t j = 0; j < points.size(); ++j) {
            const auto s = pairwise_statistics(values[j]);
            const double target = mgf(driver, points[j].first, points[j].second, 1.0);
            const double z = z_score(s.mean, target, s.std_error);
            ok = ok && std::abs(z) <= 3.0;
            detail += (j ? ", " : "") + std::string("(u,t)=(") + sci(points[j].first) + "," + sci(points[j].second) +
                      ") z=" + sci(z);
        }
        return Outcome{ok, detail + " (limit 3 SE)"};
    });

    criterion(7, "structure preservation", 0.0, [] {
        const ModelSpec affine = fixtures::affine_model();
        std::mt19937_64 rng(707);
        bool identical = true;
        for (int k = 1; k <= affine.rate_count(); ++k) {
            const double t = 0.37;
            const Vector x0 = sample_state(affine, 5.0, rng);
            const auto& f = affine.backward_functional(k);
            const GirsanovTilt ref = girsanov_tilt(affine.driver_triplet(t, x0), f, t, x0);
            for (int i = 1; i < 100; ++i) {
                const Vector x = sample_state(affine, 5.0, rng);
                const GirsanovTilt tilt = girsanov_tilt(affine.driver_triplet(t, x), f, t, x);
                identical = identical && tilt.beta == ref.beta && tilt.multipliers == ref.multipliers;
            }
        }
        const bool affine_report = structure_preservation_check(affine, 100).passed;

        const ModelSpec lmm = fixtures::lmm_model();
        const PropertyReport witness = structure_preservation_check(lmm, 100);
        bool differs = false;
        if (!witness.passed) {
            const auto& f = lmm.backward_functional(witness.witness_index);
            const double t = witness.witness_time;
            const auto a = girsanov_tilt(lmm.driver_triplet(t, witness.witness_state), f, t, witness.witness_state);
            const auto b = girsanov_tilt(lmm.driver_triplet(t, witness.other_state), f, t, witness.other_state);
            differs = a.beta != b.beta;
        }
        return Outcome{identical && affine_report && differs,
                       std::string("affine tilts identical across 100 states: ") + (identical ? "yes" : "no") +
                           "; LMM witness pair with differing tilts: " + (differs ? "found" : "not found")};
    });

    criterion(8, "telescoping identity (1e3 paths)", 0.0, [] {
        double worst = 0.0;
        for (const ModelSpec& spec : {fixtures::lmm_model(), fixtures::fpm_model(), fixtures::affine_model()}) {
            const PathGrid grid = simulate_driver(spec, mc(1000, 808));
            const int n = spec.tenor().size();
            for (int k = 1; k < n; ++k) {
                Matrix product = Matrix::Ones(grid.path_count, grid.times.size());
                for (int j = k; j < n; ++j) product = product.cwiseProduct(period_forward_paths(spec, grid, j));
                const Matrix terminal = terminal_forward_paths(spec, grid, k);
                worst = std::max(worst, (product - terminal).cwiseQuotient(terminal).cwiseAbs().maxCoeff());
            }
        }
        return Outcome{worst < 1e-12, "max relative error = " + sci(worst) + " (tol 1e-12, all families)"};
    });

    criterion(9, "positivity", 0.0, [] {
        const SimulationConfig config = mc(100000, 909);
        std::atomic<long> lmm_negative{0}, fpm_negative{0}, affine_negative{0};
        double lmm_min = INFINITY;
        std::vector<double> per_path(config.path_count, INFINITY);
        for_each_rate(fixtures::lmm_model(), config, [&](std::size_t p, double l) {
            per_path[p] = std::min(per_path[p], l);
            if (l < 0.0) ++lmm_negative;
        });
        for (double v : per_path) lmm_min = std::min(lmm_min, v);

        const auto curve = fixtures::flat_curve();
        const ModelSpec fpm = ModelSpec::fpm(curve, fixtures::levy_block(curve.tenor(), {0.3, 0.3, 0.3}));
        for_each_rate(fpm, config, [&](std::size_t, double l) {
            if (l < 0.0) ++fpm_negative;
        });

        observe_paths(fixtures::affine_model(), config, {}, [&](std::size_t, std::size_t, const Vector& x) {
            if (x(0) < 0.0) ++affine_negative;
        });
        const bool ok = lmm_negative == 0 && fpm_negative > 0 && affine_negative == 0;
        return Outcome{ok, "LMM negative rates: " + std::to_string(lmm_negative.load()) + " (min rate " + sci(lmm_min) +
                               "); FPM (vol 0.3) negative rates: " + std::to_string(fpm_negative.load()) +
                               " (need > 0); affine negative states: " + std::to_string(affine_negative.load())};
    });

    for (const auto& fam : families) {
        const std::string title = std::string("strike-0 caplet parity, ") + fam.name;
        criterion(10, title.c_str(), 60.0, [&] {
            // A strike-0 caplet pays L^+, which equals L only while rates stay
            // non-negative; the FPM is therefore run at low volatility.
            const ModelSpec spec = std::string(fam.name) == "fpm" ? fixtures::fpm_model(0.05) : fam.make();
            const auto quotes = caplet_prices(spec, mc(100000, 1010), {0.0});
            bool ok = true;
            double worst = 0.0;
            for (const auto& q : quotes) {
                const auto& curve = spec.curve();
                const double target = curve.bond_price(q.k + 1) * spec.tenor().period_length(q.k) * curve.libor(q.k);
                const double z = z_score(q.price, target, q.std_error);
                worst = std::max(worst, std::abs(z));
                ok = ok && std::abs(z) <= 3.0;
            }
            return Outcome{ok, "max|z| = " + sci(worst) + " over k = 1..3 (limit 3 SE)"};
        });
    }

    criterion(11, "byte-identical CSVs across worker counts", 0.0, [] {
        namespace fs = std::filesystem;
        const fs::path root = fs::temp_directory_path() / "liborforge_acceptance_c11";
        fs::remove_all(root);
        bool ok = true;
        std::size_t compared = 0;
        for (const char* name : {"lmm_4tenor", "fpm_4tenor", "affine_4tenor"}) {
            for (int workers : {1, 3}) {
                CliOptions o;
                o.spec_path = std::string(LIBORFORGE_SPEC_DIR) + "/" + name + ".json";
                o.workers = workers;
                o.samples = 200;
                o.out_dir = (root / name / std::to_string(workers)).string();
                std::ostringstream out, err;
                o.paths = 500;
                ok = ok && run_command("simulate", o, out, err) == 0;
                o.paths = 20000;
                ok = ok && run_command("check-martingale", o, out, err) == 0;
                ok = ok && run_command("price", o, out, err) == 0;
            }
            for (const auto& entry : fs::directory_iterator(root / name / "1")) {
                if (entry.path().extension() != ".csv") continue;
                ok = ok && read(entry.path()) == read(root / name / "3" / entry.path().filename());
                ++compared;
            }
        }
        return Outcome{ok && compared > 0, std::to_string(compared) + " CSV files compared (workers 1 vs 3)"};
    });

    std::printf("%s: %d failing criterion line(s)\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
