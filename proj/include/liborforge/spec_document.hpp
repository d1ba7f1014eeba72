#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "liborforge/model.hpp"

namespace liborforge {

// In-memory form of the JSON model description. Parsing checks the schema
// (SchemaError with a JSON-pointer path); build_model checks invariants.
struct SpecDocument {
    struct Atom {
        std::vector<double> size;
        double intensity = 0.0;
    };
    struct Segment {
        double start = 0.0, end = 0.0;
        std::vector<double> drift;
        std::vector<std::vector<double>> diffusion;
        std::vector<Atom> atoms;
    };
    struct Driver {
        int dimension = 1;
        std::string truncation = "identity";
        std::vector<Segment> segments;
    };
    struct VolPiece {
        double start = 0.0, end = 0.0;
        std::vector<double> value;
    };
    // A constant vector (active on [0, T_k)) or explicit pieces.
    using Volatility = std::variant<std::vector<double>, std::vector<VolPiece>>;
    struct Levy {
        std::vector<Volatility> volatilities;
        double bound = 0.0;
        double epsilon = 0.0;
    };
    struct ScalarAtom {
        double size = 0.0;
        double intensity = 0.0;
    };
    struct Affine {
        double b_tilde = 0.0, beta = 0.0, alpha = 0.0;
        std::vector<ScalarAtom> constant_jumps, state_jumps;
        bool calibrate = false;
        std::vector<double> u;
        double riccati_step = 0.0;  // 0: 1e-3 T_N
    };
    struct Functional {
        std::string kind;  // "affine" | "log_one_plus_exp"
        double alpha = 0.0;
        std::vector<double> beta;
        std::optional<double> lipschitz;
        int coordinate = 0;
        double accrual = 0.0;
        double initial_rate = 0.0;
    };
    struct Custom {
        std::string construction = "backward";
        std::vector<double> initial_state;
        std::vector<Functional> functionals;
    };
    struct Simulation {
        std::uint64_t paths = 100000;
        double step = 0.0;
        std::uint64_t seed = 1;
        int workers = 1;
        std::vector<double> checkpoints;
    };

    std::string schema_version = "1.0";
    std::vector<double> dates;
    std::optional<std::vector<double>> accruals;
    std::vector<std::pair<double, double>> initial_curve;
    std::string family;
    std::optional<Driver> driver;
    std::optional<Levy> levy;  // stored under the family key "lmm" or "fpm"
    std::optional<Affine> affine;
    std::optional<Custom> custom;
    Simulation simulation;
    std::vector<double> strikes{0.0};
};

constexpr const char* supported_schema_version = "1.0";

SpecDocument parse_spec_text(const std::string& text);
SpecDocument load_spec_document(const std::string& path);
// Canonical JSON text: fixed key order, defaults spelled out, shortest
// round-trip numbers.
std::string serialize_spec(const SpecDocument& doc);

// Builds and validates the model; affine "calibrate" runs calibrate_u.
ModelSpec build_model(const SpecDocument& doc);
ModelSpec parse_spec(const std::string& path);

}  // namespace liborforge
