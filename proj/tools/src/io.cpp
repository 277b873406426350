#include "io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "satorb/errors.hpp"

namespace satorb::cli {

namespace {

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw ParameterError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParameterError(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? field<T>(j, key) : fallback;
}

void write_value(std::ostream& os, const json& j, int indent, int depth) {
    const std::string pad(indent * (depth + 1), ' ');
    const std::string close(indent * depth, ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << '{' << nl;
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << ',' << nl;
            first = false;
            os << pad << json(it.key()).dump() << (indent > 0 ? ": " : ":");
            write_value(os, it.value(), indent, depth + 1);
        }
        os << nl << close << '}';
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        // Arrays of scalars stay on one line.
        bool flat = true;
        for (const auto& v : j) flat = flat && !v.is_structured();
        if (flat) {
            os << '[';
            for (std::size_t k = 0; k < j.size(); ++k) {
                if (k) os << ", ";
                write_value(os, j[k], 0, 0);
            }
            os << ']';
            return;
        }
        os << '[' << nl;
        for (std::size_t k = 0; k < j.size(); ++k) {
            if (k) os << ',' << nl;
            os << pad;
            write_value(os, j[k], indent, depth + 1);
        }
        os << nl << close << ']';
        return;
    }
    case json::value_t::number_float:
        os << number(j.get<double>());
        return;
    default:
        os << j.dump();
    }
}

json complex_list(const std::vector<std::complex<double>>& v) {
    json a = json::array();
    for (const auto& z : v) a.push_back({z.real(), z.imag()});
    return a;
}

} // namespace

std::string number(double v) {
    if (!std::isfinite(v)) return "null";
    return fmt::format("{:.17g}", v);
}

void write_json(std::ostream& os, const json& j, int indent) {
    write_value(os, j, indent, 0);
    os << '\n';
}

void write_json_file(const std::string& path, const json& j) {
    if (path == "-") {
        write_json(std::cout, j);
        return;
    }
    std::ofstream f(path);
    if (!f) throw ParameterError("cannot write '" + path + "'");
    write_json(f, j);
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParameterError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json read_json_file(const std::string& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ParameterError("'" + path + "' is not valid JSON: " + e.what());
    }
}

MassModel mass_model_from_json(const json& j) {
    MassModel m;
    m.m = field<std::vector<double>>(j, "m");
    m.mSat = field_or<std::vector<std::vector<double>>>(j, "mSat", std::vector<std::vector<double>>(m.m.size()));
    m.mu = field<double>(j, "mu");
    m.nu = field_or<double>(j, "nu", 0.0);
    if (m.mSat.size() != m.m.size()) throw ParameterError("mSat needs one list per planet");
    return m;
}

FrequencySet frequency_set_from_json(const json& j) {
    // Either the explicit table or the resonant recipe.
    if (j.contains("Omega10")) {
        return make_resonant(field<double>(j, "omega"), field<double>(j, "Omega10"), field<double>(j, "T"),
                             field<std::vector<int>>(j, "k"), field<std::vector<std::vector<int>>>(j, "K"),
                             field<double>(j, "c"));
    }
    FrequencySet fs;
    fs.omega = field<double>(j, "omega");
    fs.Omega = field<std::vector<std::vector<double>>>(j, "Omega");
    fs.k = field<std::vector<int>>(j, "k");
    fs.K = field<std::vector<std::vector<int>>>(j, "K");
    fs.T = field<double>(j, "T");
    fs.omega1 = field_or<double>(j, "omega1", fs.omega * (fs.Omega.empty() || fs.Omega[0].empty() ? 0.0 : fs.Omega[0][0]));
    fs.alpha = field_or<double>(j, "alpha", reduce_angle(fs.omega1 * fs.T));
    fs.alphaShift = field_or<int>(j, "alphaShift", static_cast<int>(std::lround((fs.alpha - fs.omega1 * fs.T) / (2 * M_PI))));
    fs.c = field<double>(j, "c");
    return fs;
}

FrequencySet ExperimentConfig::frequencySet() const {
    if (frequencies) return *frequencies;
    if (design) return design_frequencies(*design);
    throw ParameterError("config needs 'frequencySet' or 'design'");
}

ScaleParameters ExperimentConfig::scales() const {
    return derive_scales(frequencySet().omega, masses.mu, masses.nu);
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ParameterError("config must be a JSON object");
    ExperimentConfig c;
    c.masses = mass_model_from_json(field<json>(j, "massModel"));
    if (j.contains("frequencySet")) c.frequencies = frequency_set_from_json(j.at("frequencySet"));
    if (j.contains("design")) {
        const json& d = j.at("design");
        DesignInputs in;
        in.k = field<std::vector<int>>(d, "k");
        in.a = field<double>(d, "a");
        in.N = field<int>(d, "N");
        in.n = field<int>(d, "n");
        in.omega = field<double>(d, "omega");
        in.satellitesPerPlanet = field_or<std::vector<int>>(d, "satellitesPerPlanet", {});
        c.design = in;
    }
    if (j.contains("system")) c.system = system_kind_from_string(field<std::string>(j, "system"));
    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        c.shootTol = field_or<double>(t, "shoot", c.shootTol);
        c.integratorTol = field_or<double>(t, "integrator", c.integratorTol);
    }
    if (j.contains("constants")) {
        c.C1 = field_or<double>(j.at("constants"), "C1", c.C1);
        c.C2 = field_or<double>(j.at("constants"), "C2", c.C2);
    }
    if (j.contains("delta")) c.delta = field<std::vector<std::vector<double>>>(j, "delta");
    c.angles = field_or<std::vector<double>>(j, "angles", {});
    c.seed = field_or<unsigned>(j, "seed", 1u);
    return c;
}

json to_json(const MassModel& m) {
    return json{{"m", m.m}, {"mSat", m.mSat}, {"mu", m.mu}, {"nu", m.nu}};
}

json to_json(const FrequencySet& fs) {
    return json{{"omega", fs.omega}, {"Omega", fs.Omega}, {"k", fs.k},           {"K", fs.K},
                {"T", fs.T},         {"omega1", fs.omega1}, {"alpha", fs.alpha}, {"alphaShift", fs.alphaShift},
                {"c", fs.c}};
}

json to_json(const DesignInputs& d) {
    return json{{"k", d.k},   {"a", d.a}, {"N", d.N}, {"n", d.n}, {"omega", d.omega},
                {"satellitesPerPlanet", d.satellitesPerPlanet}};
}

json to_json(const NondegeneracyReport& r) {
    return json{{"nondegenerate", r.nondegenerate},
                {"nondegenerateC1", r.nondegenerateC1},
                {"delicate", r.delicate},
                {"strong", r.strong},
                {"marginNondegenerate", r.marginNondegenerate},
                {"marginNondegenerateC1", r.marginNondegenerateC1},
                {"marginDelicate", r.marginDelicate},
                {"marginStrong", r.marginStrong},
                {"delta", r.delta}};
}

json to_json(const UnclosingReport& r) {
    json f = json::array();
    for (const auto& z : r.fValues) f.push_back({z.real(), z.imag()});
    return json{{"kappaMatrix", to_json(r.kappaMatrix, "planets")},
                {"fValues", f},
                {"unclosing", r.unclosing},
                {"inM", r.inM},
                {"inMsym", r.inMsym},
                {"undecided", r.undecided},
                {"minResidual", r.minResidual},
                {"witnesses", r.witnesses},
                {"symmetricClosing", r.symmetricClosing}};
}

json to_json(const Eigen::MatrixXd& M, const std::string& frame) {
    std::vector<double> data;
    data.reserve(M.size());
    for (int r = 0; r < M.rows(); ++r)
        for (int c = 0; c < M.cols(); ++c) data.push_back(M(r, c));
    return json{{"frame", frame}, {"rows", M.rows()}, {"cols", M.cols()}, {"order", "row-major"}, {"data", data}};
}

json to_json(const PeriodicOrbit& o) {
    std::vector<double> z(o.initial.z.data(), o.initial.z.data() + o.initial.z.size());
    return json{{"initial", z},
                {"T", o.T},
                {"alpha", o.alpha},
                {"pattern", o.pattern},
                {"residual", o.residual},
                {"closureDefect", o.closureDefect},
                {"torusDistance", o.torusDistance},
                {"iterations", o.iterations},
                {"converged", o.converged},
                {"history", o.history}};
}

PeriodicOrbit orbit_from_json(const json& j, const Layout& l) {
    PeriodicOrbit o;
    o.initial = PhaseState(l);
    const auto z = field<std::vector<double>>(j, "initial");
    if (static_cast<int>(z.size()) != l.dim()) throw ParameterError("orbit state does not match the mass model");
    o.initial.z = Eigen::Map<const Eigen::VectorXd>(z.data(), z.size());
    o.T = field<double>(j, "T");
    o.alpha = field<double>(j, "alpha");
    o.pattern = field_or<std::vector<int>>(j, "pattern", {});
    o.residual = field_or<double>(j, "residual", 0.0);
    o.closureDefect = field_or<double>(j, "closureDefect", 0.0);
    o.torusDistance = field_or<double>(j, "torusDistance", 0.0);
    o.iterations = field_or<int>(j, "iterations", 0);
    o.converged = field_or<bool>(j, "converged", false);
    o.history = field_or<std::vector<double>>(j, "history", {});
    return o;
}

json to_json(const MonodromyReport& r) {
    const Classification& c = r.classification;
    json out{{"frame", r.frame},
             {"formWeight", r.formWeight},
             {"matrix", to_json(r.matrix, r.frame)},
             {"form", to_json(r.form, r.frame)},
             {"symplecticDefect", r.symplecticDefect},
             {"determinant", r.determinant},
             {"eigenvalues", complex_list(r.eigenvalues)},
             {"reduced", r.reduced}};
    if (r.reduced) {
        out["reducedMatrix"] = to_json(r.reducedMatrix, "reduced");
        out["reducedForm"] = to_json(r.reducedForm, "reduced");
        out["reducedSymplecticDefect"] = r.reducedSymplecticDefect;
        out["reducedEigenvalues"] = complex_list(r.reducedEigenvalues);
        out["transversalMatrix"] = to_json(r.transversalMatrix, "transversal");
    }
    out["blockAngles"] = r.blockAngles;
    out["classification"] = json{{"OSSL", c.OSSL},
                                 {"OSL", c.OSL},
                                 {"OSLI", c.OSLI},
                                 {"IN", c.IN},
                                 {"undecided", c.undecided},
                                 {"conditionNumber", c.conditionNumber},
                                 {"unitMargin", c.unitMargin},
                                 {"ellipticMargin", c.ellipticMargin},
                                 {"inMargin", c.inMargin},
                                 {"implicationsHold", c.implicationsHold}};
    return out;
}

} // namespace satorb::cli
