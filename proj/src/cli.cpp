#include "liborforge/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "liborforge/drift_engine.hpp"
#include "liborforge/errors.hpp"
#include "liborforge/simulation.hpp"
#include "liborforge/spec_document.hpp"

namespace liborforge {

namespace {

namespace fs = std::filesystem;

struct Loaded {
    SpecDocument doc;
    ModelSpec spec;
};

Loaded load(const CliOptions& options) {
    SpecDocument doc = load_spec_document(options.spec_path);
    ModelSpec spec = build_model(doc);
    if (options.zero_drift) spec = spec.with_zero_drift(true);
    return {std::move(doc), std::move(spec)};
}

SimulationConfig simulation_config(const CliOptions& options, const SpecDocument& doc) {
    SimulationConfig config;
    config.path_count = options.paths.value_or(doc.simulation.paths);
    config.time_step = options.step.value_or(doc.simulation.step);
    config.master_seed = options.seed.value_or(doc.simulation.seed);
    config.worker_count = options.workers.value_or(doc.simulation.workers);
    if (config.path_count < 1) throw InvariantError("--paths must be at least 1");
    if (!(config.time_step >= 0.0)) throw InvariantError("--step must be non-negative");
    if (config.worker_count < 1) throw InvariantError("--workers must be at least 1");
    return config;
}

AuditOptions audit_options(const CliOptions& options) {
    AuditOptions audit;
    audit.samples = options.audit_samples;
    if (options.seed) audit.seed = *options.seed;
    return audit;
}

void write_file(const CliOptions& options, const std::string& name, const std::string& content) {
    fs::create_directories(options.out_dir);
    const fs::path path = fs::path(options.out_dir) / name;
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("cannot write " + path.string());
    file << content;
    if (!file) throw Error("failed writing " + path.string());
}

std::string header(const CliOptions& options, const Loaded& loaded, const std::string& command) {
    std::ostringstream os;
    os << "liborforge " << command << "\n"
       << "spec: " << options.spec_path << "\n"
       << "family: " << to_string(loaded.spec.family()) << " (" << to_string(loaded.spec.construction())
       << " construction)\n"
       << "tenor: N = " << loaded.spec.tenor().size() << ", T_N = " << format_number(loaded.spec.tenor().maturity())
       << "\n"
       << "driver dimension: " << loaded.spec.dimension() << "\n";
    if (loaded.spec.zero_drift()) os << "SABOTAGE: driver drift zeroed (--zero-drift)\n";
    return os.str();
}

std::string describe(const ValidationReport& report) {
    std::ostringstream os;
    os << "assumptions: " << (report.verdict() ? "PASS" : "FAIL") << "\n"
       << "  C1 (jump integral) = " << format_number(report.c1) << "\n"
       << "  C2 (diffusion integral) = " << format_number(report.c2) << "\n";
    for (const auto& check : report.checks) {
        os << "  [" << (check.informational ? "INFO" : (check.passed ? "PASS" : "FAIL")) << "] " << check.name
           << " = " << format_number(check.value);
        if (!check.detail.empty()) os << " (" << check.detail << ")";
        os << "\n";
    }
    return os.str();
}

// Runs the assumption audit ahead of simulation commands; false stops the command.
bool precheck(const CliOptions& options, const Loaded& loaded, std::ostringstream& report, std::ostream& out) {
    if (options.skip_validation) {
        report << "assumptions: skipped (--skip-validation)\n";
        return true;
    }
    const ValidationReport validation = validate_assumptions(loaded.spec, audit_options(options));
    report << describe(validation);
    if (!validation.verdict()) out << "assumption audit failed; see report.txt\n";
    return validation.verdict();
}

std::string csv_row(std::initializer_list<std::string> cells) {
    std::string row;
    bool first = true;
    for (const auto& c : cells) {
        if (!first) row += ',';
        row += c;
        first = false;
    }
    row += '\n';
    return row;
}

std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

}  // namespace

std::string format_number(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

int run_validate(const CliOptions& options, std::ostream& out) {
    const Loaded loaded = load(options);
    const ModelSpec& spec = loaded.spec;
    std::ostringstream report;
    report << header(options, loaded, "validate");

    const ValidationReport validation = validate_assumptions(spec, audit_options(options));
    report << describe(validation);

    const ResidualSweep sweep = drift_residual_sweep(spec, options.samples, audit_options(options));
    report << "drift residuals (" << options.samples << " random (t, x) per tenor, tolerance "
           << format_number(sweep.tolerance) << "): " << (sweep.passed ? "PASS" : "FAIL") << "\n"
           << "  k  max|backward|  max|terminal|\n";
    std::string csv = "k,max_abs_backward,max_abs_terminal\n";
    for (std::size_t i = 0; i < sweep.max_backward.size(); ++i) {
        const std::string terminal = i < sweep.max_terminal.size() ? format_number(sweep.max_terminal[i]) : "";
        report << "  " << i + 1 << "  " << format_number(sweep.max_backward[i]) << "  "
               << (terminal.empty() ? "-" : terminal) << "\n";
        csv += csv_row({fmt(i + 1), format_number(sweep.max_backward[i]), terminal});
    }

    const PropertyReport positivity = positivity_check(spec, options.audit_samples, audit_options(options));
    report << "positivity (informational): " << (positivity.passed ? "holds" : "violated") << " - "
           << positivity.detail << "\n";
    const PropertyReport structure = structure_preservation_check(spec, 100, audit_options(options));
    report << "structure preservation (informational): " << (structure.passed ? "preserving" : "not preserving")
           << " - " << structure.detail << "\n";

    const bool passed = validation.verdict() && sweep.passed;
    report << "verdict: " << (passed ? "PASS" : "FAIL") << "\n";
    write_file(options, "report.txt", report.str());
    write_file(options, "residuals.csv", csv);
    out << "validate: " << (passed ? "PASS" : "FAIL") << "\n";
    return passed ? exit_ok : exit_check_failed;
}

int run_simulate(const CliOptions& options, std::ostream& out) {
    const Loaded loaded = load(options);
    const ModelSpec& spec = loaded.spec;
    std::ostringstream report;
    report << header(options, loaded, "simulate");
    if (!precheck(options, loaded, report, out)) {
        write_file(options, "report.txt", report.str());
        return exit_check_failed;
    }
    const SimulationConfig config = simulation_config(options, loaded.doc);
    const PathGrid grid = simulate_driver(spec, config);
    const std::size_t nt = grid.times.size();

    std::string paths = "path,t";
    for (int j = 0; j < grid.dimension; ++j) paths += ",x" + std::to_string(j + 1);
    paths += '\n';
    for (std::size_t p = 0; p < grid.path_count; ++p)
        for (std::size_t i = 0; i < nt; ++i) {
            paths += fmt(p) + ',' + format_number(grid.times[i]);
            for (int j = 0; j < grid.dimension; ++j) paths += ',' + format_number(grid.coordinate(p, i, j));
            paths += '\n';
        }
    write_file(options, "paths.csv", paths);

    const bool backward = spec.construction() == Construction::backward;
    for (int k = 1; k <= spec.rate_count(); ++k) {
        const Matrix forward = forward_price_paths(spec, grid, k);
        std::string csv = "path,t,forward_price\n";
        for (std::size_t p = 0; p < grid.path_count; ++p)
            for (std::size_t i = 0; i < nt; ++i)
                csv += fmt(p) + ',' + format_number(grid.times[i]) + ',' + format_number(forward(p, i)) + '\n';
        write_file(options, "forward_k" + std::to_string(k) + ".csv", csv);
    }
    report << "simulation: " << grid.path_count << " paths, " << nt << " grid times, step "
           << format_number(config.resolved_step(spec.tenor())) << ", seed " << config.master_seed << "\n"
           << "forward_k<k>.csv holds " << (backward ? "F(t, T_k, T_{k+1})" : "F(t, T_k, T_N)") << " on every path\n";
    write_file(options, "report.txt", report.str());
    out << "simulate: " << grid.path_count << " paths written\n";
    return exit_ok;
}

int run_riccati(const CliOptions& options, std::ostream& out) {
    const Loaded loaded = load(options);
    const AffineModelSpec* affine = loaded.spec.affine_block();
    if (!affine) throw ContractError("riccati requires an affine-family spec");
    std::ostringstream report;
    report << header(options, loaded, "riccati");
    report << "  k  u_k  step  max|psi|  max ODE residual (theta, vartheta)\n";
    for (int k = 1; k <= loaded.spec.rate_count(); ++k) {
        const RiccatiSolution& s = affine->solution(k);
        std::string csv = "t,phi,psi\n";
        for (std::size_t i = 0; i < s.grid.size(); ++i)
            csv += format_number(s.grid[i]) + ',' + format_number(s.phi[i]) + ',' + format_number(s.psi[i]) + '\n';
        write_file(options, "riccati_u" + std::to_string(k) + ".csv", csv);

        double r_theta = 0.0, r_vartheta = 0.0;
        const double horizon = s.horizon();
        for (int i = 1; i < 10; ++i) {
            const auto [a, b] = affine_ode_residual(*affine, k, horizon * i / 10.0);
            r_theta = std::max(r_theta, std::abs(a));
            r_vartheta = std::max(r_vartheta, std::abs(b));
        }
        report << "  " << k << "  " << format_number(s.u) << "  " << format_number(s.step()) << "  "
               << format_number(s.max_abs_psi()) << "  (" << format_number(r_theta) << ", "
               << format_number(r_vartheta) << ")\n";
    }
    report << "u ordering u_1 >= ... >= u_{N-1} >= 0: " << (affine->ordered() ? "yes" : "no") << "\n";
    write_file(options, "report.txt", report.str());
    out << "riccati: " << loaded.spec.rate_count() << " flows written\n";
    return exit_ok;
}

int run_check_martingale(const CliOptions& options, std::ostream& out) {
    const Loaded loaded = load(options);
    std::ostringstream report;
    report << header(options, loaded, "check-martingale");
    if (!precheck(options, loaded, report, out)) {
        write_file(options, "report.txt", report.str());
        return exit_check_failed;
    }
    const SimulationConfig config = simulation_config(options, loaded.doc);
    const MartingaleReport result = martingale_test(loaded.spec, config, loaded.doc.simulation.checkpoints);
    std::string csv = "k,t,mean,target,std_error,z,passed\n";
    for (const auto& row : result.rows)
        csv += csv_row({fmt(row.k), format_number(row.t), format_number(row.mean), format_number(row.target),
                        format_number(row.std_error), format_number(row.z), row.passed ? "1" : "0"});
    write_file(options, "martingale.csv", csv);
    report << "martingale test: " << config.path_count << " paths, step "
           << format_number(config.resolved_step(loaded.spec.tenor())) << ", seed " << config.master_seed << "\n"
           << "  rows: " << result.rows.size() << ", max |z| = " << format_number(result.max_abs_z())
           << " (threshold 3)\n"
           << "verdict: " << (result.passed() ? "PASS" : "FAIL") << "\n";
    write_file(options, "report.txt", report.str());
    out << "check-martingale: " << (result.passed() ? "PASS" : "FAIL") << ", max |z| = "
        << format_number(result.max_abs_z()) << "\n";
    return result.passed() ? exit_ok : exit_check_failed;
}

int run_price(const CliOptions& options, std::ostream& out) {
    const Loaded loaded = load(options);
    const ModelSpec& spec = loaded.spec;
    std::ostringstream report;
    report << header(options, loaded, "price");
    if (!precheck(options, loaded, report, out)) {
        write_file(options, "report.txt", report.str());
        return exit_check_failed;
    }
    const SimulationConfig config = simulation_config(options, loaded.doc);
    const std::vector<double>& strikes = options.strikes.empty() ? loaded.doc.strikes : options.strikes;
    const auto quotes = caplet_prices(spec, config, strikes);
    std::string csv = "k,strike,price,std_error\n";
    report << "caplets: " << config.path_count << " paths, seed " << config.master_seed << "\n"
           << "  k  strike  price  std_error  [strike-0 parity target, z]\n";
    for (const auto& q : quotes) {
        csv += csv_row({fmt(q.k), format_number(q.strike), format_number(q.price), format_number(q.std_error)});
        report << "  " << q.k << "  " << format_number(q.strike) << "  " << format_number(q.price) << "  "
               << format_number(q.std_error);
        if (q.strike == 0.0) {
            const auto& curve = spec.curve();
            const double target = curve.bond_price(q.k + 1) * spec.tenor().period_length(q.k) * curve.libor(q.k);
            report << "  [" << format_number(target) << ", " << format_number(z_score(q.price, target, q.std_error))
                   << "]";
        }
        report << "\n";
    }
    write_file(options, "caplets.csv", csv);
    write_file(options, "report.txt", report.str());
    out << "price: " << quotes.size() << " caplets written\n";
    return exit_ok;
}

int run_command(const std::string& command, const CliOptions& options, std::ostream& out, std::ostream& err) {
    try {
        if (command == "validate") return run_validate(options, out);
        if (command == "simulate") return run_simulate(options, out);
        if (command == "riccati") return run_riccati(options, out);
        if (command == "check-martingale") return run_check_martingale(options, out);
        if (command == "price") return run_price(options, out);
        err << "error: unknown command \"" << command << "\"\n";
        return exit_schema;
    } catch (const SchemaError& e) {
        err << "schema error at " << e.what() << "\n";
        return exit_schema;
    } catch (const InvariantError& e) {
        err << "invariant violation: " << e.what() << "\n";
        return exit_invariant;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_numerical;
    }
}

}  // namespace liborforge
