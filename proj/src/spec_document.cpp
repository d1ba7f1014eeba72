#include "liborforge/spec_document.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "liborforge/errors.hpp"

namespace liborforge {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
using Doc = SpecDocument;

std::string at(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string at(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

void require_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw SchemaError(path.empty() ? "/" : path, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : j.items())
        if (!ok.count(item.key())) throw SchemaError(at(path, item.key()), "unknown field");
}

const json& field(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw SchemaError(at(path, key), "missing required field");
    return j.at(key);
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw SchemaError(path, "expected a number");
    return j.get<double>();
}

std::uint64_t count(const json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) throw SchemaError(path, "expected an integer");
    if (j.is_number_integer() && j.get<std::int64_t>() < 0) throw SchemaError(path, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) throw SchemaError(path, "expected a string");
    return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], at(path, i)));
    return out;
}

std::vector<std::vector<double>> matrix(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array of rows");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(numbers(j[i], at(path, i)));
    return out;
}

Doc::Driver parse_driver(const json& j, const std::string& path) {
    require_object(j, path, {"dimension", "truncation", "segments"});
    Doc::Driver d;
    d.dimension = static_cast<int>(count(field(j, path, "dimension"), at(path, "dimension")));
    if (d.dimension < 1) throw SchemaError(at(path, "dimension"), "must be at least 1");
    if (j.contains("truncation")) {
        d.truncation = text(j["truncation"], at(path, "truncation"));
        if (d.truncation != "identity" && d.truncation != "bounded")
            throw SchemaError(at(path, "truncation"), "expected \"identity\" or \"bounded\"");
    }
    const std::string sp = at(path, "segments");
    const json& segs = field(j, path, "segments");
    if (!segs.is_array() || segs.empty()) throw SchemaError(sp, "expected a non-empty array");
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const std::string p = at(sp, i);
        require_object(segs[i], p, {"start", "end", "drift", "diffusion", "atoms"});
        Doc::Segment s;
        s.start = number(field(segs[i], p, "start"), at(p, "start"));
        s.end = number(field(segs[i], p, "end"), at(p, "end"));
        s.drift = segs[i].contains("drift") ? numbers(segs[i]["drift"], at(p, "drift"))
                                            : std::vector<double>(d.dimension, 0.0);
        if (static_cast<int>(s.drift.size()) != d.dimension) throw SchemaError(at(p, "drift"), "wrong length");
        if (segs[i].contains("diffusion")) {
            s.diffusion = matrix(segs[i]["diffusion"], at(p, "diffusion"));
        } else {
            s.diffusion.assign(d.dimension, std::vector<double>(d.dimension, 0.0));
        }
        if (static_cast<int>(s.diffusion.size()) != d.dimension)
            throw SchemaError(at(p, "diffusion"), "expected a square matrix of the driver dimension");
        for (std::size_t r = 0; r < s.diffusion.size(); ++r)
            if (static_cast<int>(s.diffusion[r].size()) != d.dimension)
                throw SchemaError(at(at(p, "diffusion"), r), "wrong row length");
        if (segs[i].contains("atoms")) {
            const std::string ap = at(p, "atoms");
            const json& atoms = segs[i]["atoms"];
            if (!atoms.is_array()) throw SchemaError(ap, "expected an array");
            for (std::size_t a = 0; a < atoms.size(); ++a) {
                const std::string q = at(ap, a);
                require_object(atoms[a], q, {"size", "intensity"});
                Doc::Atom atom;
                atom.size = numbers(field(atoms[a], q, "size"), at(q, "size"));
                if (static_cast<int>(atom.size.size()) != d.dimension)
                    throw SchemaError(at(q, "size"), "wrong length");
                atom.intensity = number(field(atoms[a], q, "intensity"), at(q, "intensity"));
                s.atoms.push_back(std::move(atom));
            }
        }
        d.segments.push_back(std::move(s));
    }
    return d;
}

Doc::Levy parse_levy(const json& j, const std::string& path) {
    require_object(j, path, {"volatilities", "bound", "epsilon"});
    Doc::Levy l;
    const std::string vp = at(path, "volatilities");
    const json& vols = field(j, path, "volatilities");
    if (!vols.is_array()) throw SchemaError(vp, "expected an array");
    for (std::size_t k = 0; k < vols.size(); ++k) {
        const std::string p = at(vp, k);
        if (!vols[k].is_array()) throw SchemaError(p, "expected a vector or a list of pieces");
        if (!vols[k].empty() && vols[k][0].is_object()) {
            std::vector<Doc::VolPiece> pieces;
            for (std::size_t i = 0; i < vols[k].size(); ++i) {
                const std::string q = at(p, i);
                require_object(vols[k][i], q, {"start", "end", "value"});
                pieces.push_back({number(field(vols[k][i], q, "start"), at(q, "start")),
                                  number(field(vols[k][i], q, "end"), at(q, "end")),
                                  numbers(field(vols[k][i], q, "value"), at(q, "value"))});
            }
            l.volatilities.emplace_back(std::move(pieces));
        } else {
            l.volatilities.emplace_back(numbers(vols[k], p));
        }
    }
    l.bound = number(field(j, path, "bound"), at(path, "bound"));
    l.epsilon = number(field(j, path, "epsilon"), at(path, "epsilon"));
    return l;
}

std::vector<Doc::ScalarAtom> parse_scalar_atoms(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array");
    std::vector<Doc::ScalarAtom> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = at(path, i);
        require_object(j[i], p, {"size", "intensity"});
        out.push_back({number(field(j[i], p, "size"), at(p, "size")),
                       number(field(j[i], p, "intensity"), at(p, "intensity"))});
    }
    return out;
}

Doc::Affine parse_affine(const json& j, const std::string& path) {
    require_object(j, path, {"b_tilde", "beta", "alpha", "constant_jumps", "state_jumps", "u", "riccati_step"});
    Doc::Affine a;
    a.b_tilde = number(field(j, path, "b_tilde"), at(path, "b_tilde"));
    a.beta = number(field(j, path, "beta"), at(path, "beta"));
    a.alpha = number(field(j, path, "alpha"), at(path, "alpha"));
    if (j.contains("constant_jumps")) a.constant_jumps = parse_scalar_atoms(j["constant_jumps"], at(path, "constant_jumps"));
    if (j.contains("state_jumps")) a.state_jumps = parse_scalar_atoms(j["state_jumps"], at(path, "state_jumps"));
    const json& u = field(j, path, "u");
    if (u.is_string()) {
        if (u.get<std::string>() != "calibrate") throw SchemaError(at(path, "u"), "expected an array or \"calibrate\"");
        a.calibrate = true;
    } else {
        a.u = numbers(u, at(path, "u"));
    }
    if (j.contains("riccati_step")) a.riccati_step = number(j["riccati_step"], at(path, "riccati_step"));
    return a;
}

Doc::Custom parse_custom(const json& j, const std::string& path) {
    require_object(j, path, {"construction", "initial_state", "functionals"});
    Doc::Custom c;
    c.construction = text(field(j, path, "construction"), at(path, "construction"));
    if (c.construction != "backward" && c.construction != "terminal")
        throw SchemaError(at(path, "construction"), "expected \"backward\" or \"terminal\"");
    c.initial_state = numbers(field(j, path, "initial_state"), at(path, "initial_state"));
    const std::string fp = at(path, "functionals");
    const json& fs = field(j, path, "functionals");
    if (!fs.is_array()) throw SchemaError(fp, "expected an array");
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const std::string p = at(fp, i);
        require_object(fs[i], p, {"kind", "alpha", "beta", "lipschitz", "coordinate", "accrual", "initial_rate"});
        Doc::Functional f;
        f.kind = text(field(fs[i], p, "kind"), at(p, "kind"));
        if (f.kind == "affine") {
            f.alpha = number(field(fs[i], p, "alpha"), at(p, "alpha"));
            f.beta = numbers(field(fs[i], p, "beta"), at(p, "beta"));
            if (fs[i].contains("lipschitz")) f.lipschitz = number(fs[i]["lipschitz"], at(p, "lipschitz"));
        } else if (f.kind == "log_one_plus_exp") {
            f.coordinate = static_cast<int>(count(field(fs[i], p, "coordinate"), at(p, "coordinate")));
            f.accrual = number(field(fs[i], p, "accrual"), at(p, "accrual"));
            f.initial_rate = number(field(fs[i], p, "initial_rate"), at(p, "initial_rate"));
        } else {
            throw SchemaError(at(p, "kind"), "expected \"affine\" or \"log_one_plus_exp\"");
        }
        c.functionals.push_back(std::move(f));
    }
    return c;
}

Doc::Simulation parse_simulation(const json& j, const std::string& path) {
    require_object(j, path, {"paths", "step", "seed", "workers", "checkpoints"});
    Doc::Simulation s;
    if (j.contains("paths")) s.paths = count(j["paths"], at(path, "paths"));
    if (s.paths < 1) throw SchemaError(at(path, "paths"), "must be at least 1");
    if (j.contains("step")) s.step = number(j["step"], at(path, "step"));
    if (s.step < 0.0) throw SchemaError(at(path, "step"), "must be non-negative (0 selects the default)");
    if (j.contains("seed")) s.seed = count(j["seed"], at(path, "seed"));
    if (j.contains("workers")) s.workers = static_cast<int>(count(j["workers"], at(path, "workers")));
    if (s.workers < 1) throw SchemaError(at(path, "workers"), "must be at least 1");
    if (j.contains("checkpoints")) s.checkpoints = numbers(j["checkpoints"], at(path, "checkpoints"));
    return s;
}

SpecDocument parse_json(const json& j) {
    require_object(j, "", {"schema_version", "tenor", "initial_curve", "family", "driver", "lmm", "fpm", "affine",
                           "custom", "simulation", "pricing"});
    Doc doc;
    doc.schema_version = text(field(j, "", "schema_version"), "/schema_version");
    if (doc.schema_version != supported_schema_version)
        throw SchemaError("/schema_version", "unsupported version \"" + doc.schema_version + "\"");

    const json& tenor = field(j, "", "tenor");
    require_object(tenor, "/tenor", {"dates", "accruals"});
    doc.dates = numbers(field(tenor, "/tenor", "dates"), "/tenor/dates");
    if (tenor.contains("accruals")) doc.accruals = numbers(tenor["accruals"], "/tenor/accruals");

    const json& curve = field(j, "", "initial_curve");
    if (!curve.is_array()) throw SchemaError("/initial_curve", "expected an array of [date, price] pairs");
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const std::string p = at("/initial_curve", i);
        if (!curve[i].is_array() || curve[i].size() != 2) throw SchemaError(p, "expected a [date, price] pair");
        doc.initial_curve.emplace_back(number(curve[i][0], at(p, 0)), number(curve[i][1], at(p, 1)));
    }

    doc.family = text(field(j, "", "family"), "/family");
    if (doc.family == "lmm" || doc.family == "fpm") {
        doc.driver = parse_driver(field(j, "", "driver"), "/driver");
        doc.levy = parse_levy(field(j, "", doc.family.c_str()), "/" + doc.family);
    } else if (doc.family == "affine") {
        doc.affine = parse_affine(field(j, "", "affine"), "/affine");
    } else if (doc.family == "custom") {
        doc.driver = parse_driver(field(j, "", "driver"), "/driver");
        doc.custom = parse_custom(field(j, "", "custom"), "/custom");
    } else {
        throw SchemaError("/family", "expected one of lmm, fpm, affine, custom");
    }
    for (const char* key : {"driver", "lmm", "fpm", "affine", "custom"}) {
        const std::string k = key;
        const bool expected = (k == "driver" && doc.driver) || k == doc.family;
        if (j.contains(k) && !expected) throw SchemaError("/" + k, "not used by family \"" + doc.family + "\"");
    }

    if (j.contains("simulation")) doc.simulation = parse_simulation(j["simulation"], "/simulation");
    if (j.contains("pricing")) {
        require_object(j["pricing"], "/pricing", {"strikes"});
        if (j["pricing"].contains("strikes")) doc.strikes = numbers(j["pricing"]["strikes"], "/pricing/strikes");
    }
    return doc;
}

ojson numbers_json(const std::vector<double>& v) {
    ojson a = ojson::array();
    for (double x : v) a.push_back(x);
    return a;
}

ojson driver_json(const Doc::Driver& d) {
    ojson out;
    out["dimension"] = d.dimension;
    out["truncation"] = d.truncation;
    ojson segs = ojson::array();
    for (const auto& s : d.segments) {
        ojson seg;
        seg["start"] = s.start;
        seg["end"] = s.end;
        seg["drift"] = numbers_json(s.drift);
        ojson diff = ojson::array();
        for (const auto& row : s.diffusion) diff.push_back(numbers_json(row));
        seg["diffusion"] = diff;
        ojson atoms = ojson::array();
        for (const auto& a : s.atoms) {
            ojson atom;
            atom["size"] = numbers_json(a.size);
            atom["intensity"] = a.intensity;
            atoms.push_back(atom);
        }
        seg["atoms"] = atoms;
        segs.push_back(seg);
    }
    out["segments"] = segs;
    return out;
}

ojson scalar_atoms_json(const std::vector<Doc::ScalarAtom>& atoms) {
    ojson out = ojson::array();
    for (const auto& a : atoms) {
        ojson atom;
        atom["size"] = a.size;
        atom["intensity"] = a.intensity;
        out.push_back(atom);
    }
    return out;
}

AtomicJumpMeasure scalar_measure(const std::vector<Doc::ScalarAtom>& atoms) {
    std::vector<JumpAtom> out;
    for (const auto& a : atoms) out.push_back({Vector::Constant(1, a.size), a.intensity});
    return AtomicJumpMeasure(1, std::move(out));
}

LocalCharacteristics build_driver(const Doc::Driver& d) {
    std::vector<CharacteristicSegment> segs;
    for (const auto& s : d.segments) {
        Matrix c(d.dimension, d.dimension);
        for (int i = 0; i < d.dimension; ++i)
            for (int j = 0; j < d.dimension; ++j) c(i, j) = s.diffusion[i][j];
        std::vector<JumpAtom> atoms;
        for (const auto& a : s.atoms)
            atoms.push_back({Eigen::Map<const Vector>(a.size.data(), d.dimension), a.intensity});
        segs.push_back({s.start, s.end, Eigen::Map<const Vector>(s.drift.data(), d.dimension), c,
                        AtomicJumpMeasure(d.dimension, std::move(atoms))});
    }
    return LocalCharacteristics(d.dimension, std::move(segs),
                                d.truncation == "identity" ? Truncation::identity : Truncation::bounded);
}

LevyDriverBlock build_levy(const Doc& doc, const TenorStructure& tenor) {
    LevyDriverBlock block{build_driver(*doc.driver), {}, doc.levy->bound, doc.levy->epsilon};
    const int n = doc.driver->dimension;
    for (std::size_t k = 0; k < doc.levy->volatilities.size(); ++k) {
        const auto& v = doc.levy->volatilities[k];
        if (const auto* constant = std::get_if<std::vector<double>>(&v)) {
            if (static_cast<int>(constant->size()) != n)
                throw InvariantError("volatility of T_" + std::to_string(k + 1) + " does not match the driver dimension");
            const int idx = static_cast<int>(k) + 1;
            if (!tenor.has_index(idx)) throw InvariantError("more volatility functions than rates");
            block.volatilities.push_back(
                VolatilitySchedule(n, {{0.0, tenor.date(idx), Eigen::Map<const Vector>(constant->data(), n)}}));
        } else {
            std::vector<VolatilitySchedule::Piece> pieces;
            for (const auto& p : std::get<std::vector<Doc::VolPiece>>(v)) {
                if (static_cast<int>(p.value.size()) != n)
                    throw InvariantError("volatility piece of T_" + std::to_string(k + 1) +
                                         " does not match the driver dimension");
                pieces.push_back({p.start, p.end, Eigen::Map<const Vector>(p.value.data(), n)});
            }
            block.volatilities.emplace_back(n, std::move(pieces));
        }
    }
    return block;
}

}  // namespace

SpecDocument parse_spec_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError("/", std::string("malformed JSON: ") + e.what());
    }
    return parse_json(j);
}

SpecDocument load_spec_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("/", "cannot open spec file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_spec_text(buffer.str());
}

std::string serialize_spec(const SpecDocument& doc) {
    ojson out;
    out["schema_version"] = doc.schema_version;
    ojson tenor;
    tenor["dates"] = numbers_json(doc.dates);
    if (doc.accruals) tenor["accruals"] = numbers_json(*doc.accruals);
    out["tenor"] = tenor;
    ojson curve = ojson::array();
    for (const auto& [d, p] : doc.initial_curve) curve.push_back(ojson::array({d, p}));
    out["initial_curve"] = curve;
    out["family"] = doc.family;
    if (doc.driver) out["driver"] = driver_json(*doc.driver);
    if (doc.levy) {
        ojson levy;
        ojson vols = ojson::array();
        for (const auto& v : doc.levy->volatilities) {
            if (const auto* constant = std::get_if<std::vector<double>>(&v)) {
                vols.push_back(numbers_json(*constant));
            } else {
                ojson pieces = ojson::array();
                for (const auto& p : std::get<std::vector<Doc::VolPiece>>(v)) {
                    ojson piece;
                    piece["start"] = p.start;
                    piece["end"] = p.end;
                    piece["value"] = numbers_json(p.value);
                    pieces.push_back(piece);
                }
                vols.push_back(pieces);
            }
        }
        levy["volatilities"] = vols;
        levy["bound"] = doc.levy->bound;
        levy["epsilon"] = doc.levy->epsilon;
        out[doc.family] = levy;
    }
    if (doc.affine) {
        const auto& a = *doc.affine;
        ojson aff;
        aff["b_tilde"] = a.b_tilde;
        aff["beta"] = a.beta;
        aff["alpha"] = a.alpha;
        aff["constant_jumps"] = scalar_atoms_json(a.constant_jumps);
        aff["state_jumps"] = scalar_atoms_json(a.state_jumps);
        if (a.calibrate)
            aff["u"] = "calibrate";
        else
            aff["u"] = numbers_json(a.u);
        aff["riccati_step"] = a.riccati_step;
        out["affine"] = aff;
    }
    if (doc.custom) {
        ojson c;
        c["construction"] = doc.custom->construction;
        c["initial_state"] = numbers_json(doc.custom->initial_state);
        ojson fs = ojson::array();
        for (const auto& f : doc.custom->functionals) {
            ojson fj;
            fj["kind"] = f.kind;
            if (f.kind == "affine") {
                fj["alpha"] = f.alpha;
                fj["beta"] = numbers_json(f.beta);
                if (f.lipschitz) fj["lipschitz"] = *f.lipschitz;
            } else {
                fj["coordinate"] = f.coordinate;
                fj["accrual"] = f.accrual;
                fj["initial_rate"] = f.initial_rate;
            }
            fs.push_back(fj);
        }
        c["functionals"] = fs;
        out["custom"] = c;
    }
    ojson sim;
    sim["paths"] = doc.simulation.paths;
    sim["step"] = doc.simulation.step;
    sim["seed"] = doc.simulation.seed;
    sim["workers"] = doc.simulation.workers;
    sim["checkpoints"] = numbers_json(doc.simulation.checkpoints);
    out["simulation"] = sim;
    ojson pricing;
    pricing["strikes"] = numbers_json(doc.strikes);
    out["pricing"] = pricing;
    return out.dump(2) + "\n";
}

ModelSpec build_model(const SpecDocument& doc) {
    TenorStructure tenor = doc.accruals ? TenorStructure(doc.dates, *doc.accruals) : TenorStructure(doc.dates);
    if (static_cast<int>(doc.initial_curve.size()) != tenor.size())
        throw InvariantError("initial curve needs one bond price per date T_1..T_N (" + std::to_string(tenor.size()) +
                             "), got " + std::to_string(doc.initial_curve.size()));
    std::vector<double> prices;
    for (int k = 1; k <= tenor.size(); ++k) {
        const auto& [date, price] = doc.initial_curve[k - 1];
        if (std::abs(date - tenor.date(k)) > 1e-12)
            throw InvariantError("initial curve entry " + std::to_string(k - 1) + " has date " + std::to_string(date) +
                                 ", expected T_" + std::to_string(k) + " = " + std::to_string(tenor.date(k)));
        prices.push_back(price);
    }
    InitialCurve curve(tenor, std::move(prices));

    if (doc.family == "lmm") return ModelSpec::lmm(curve, build_levy(doc, tenor));
    if (doc.family == "fpm") return ModelSpec::fpm(curve, build_levy(doc, tenor));
    if (doc.family == "affine") {
        const auto& a = *doc.affine;
        AffineDriverSpec driver(a.b_tilde, a.beta, a.alpha, scalar_measure(a.constant_jumps),
                                scalar_measure(a.state_jumps));
        std::vector<double> u = a.calibrate ? calibrate_u(driver, curve) : a.u;
        return ModelSpec::affine(curve, AffineModelSpec(driver, tenor, std::move(u), a.riccati_step));
    }
    const auto& c = *doc.custom;
    const int d = doc.driver->dimension;
    std::vector<ForwardFunctional> fs;
    for (const auto& f : c.functionals) {
        if (f.kind == "affine") {
            if (static_cast<int>(f.beta.size()) != d)
                throw InvariantError("affine functional beta does not match the driver dimension");
            Vector beta = Eigen::Map<const Vector>(f.beta.data(), d);
            if (f.lipschitz) {
                const AffineCoefficients coeffs{f.alpha, 0.0, beta, Vector::Zero(d)};
                fs.push_back(ForwardFunctional::affine(d, [coeffs](double) { return coeffs; }, *f.lipschitz));
            } else {
                fs.push_back(ForwardFunctional::affine(f.alpha, beta));
            }
        } else {
            fs.push_back(ForwardFunctional::log_one_plus_exp(d, f.coordinate, f.accrual, f.initial_rate));
        }
    }
    if (static_cast<int>(c.initial_state.size()) != d)
        throw InvariantError("initial state does not match the driver dimension");
    return ModelSpec::custom(curve, c.construction == "backward" ? Construction::backward : Construction::terminal,
                             build_driver(*doc.driver), std::move(fs),
                             Eigen::Map<const Vector>(c.initial_state.data(), d));
}

ModelSpec parse_spec(const std::string& path) { return build_model(load_spec_document(path)); }

}  // namespace liborforge
