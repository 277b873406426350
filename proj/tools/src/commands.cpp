#include "commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include "io.hpp"
#include "manifest.hpp"
#include "satorb/averaging.hpp"
#include "satorb/errors.hpp"
#include "satorb/potentials.hpp"
#include "svg.hpp"

namespace satorb::cli {

namespace {

struct Options {
    std::string config;
    std::string out = "-";
    std::optional<std::string> system;
    std::optional<double> tol;
    std::optional<double> shootTol;
    std::optional<unsigned> seed;
    double tEnd = 0.0;
    std::string kappaRange = "-11..10";
    std::string prefactor = "radius";
    std::string orbit;
    int index = 0;
    std::string coeffs;
    int samples = 400;
    double periods = 1.0;
    std::vector<double> state;
    std::vector<double> hill;
    double theta = 0.0;
    double rho = 0.0;
    int grid = 8;
    int extraStarts = 0;
    double jitter = 1e-3;
    std::string manifest;
    std::string outDir = "replay";
    std::vector<std::string> argv;
};

json scales_json(const ScaleParameters& s) {
    return json{{"omega", s.omega}, {"mu", s.mu},     {"nu", s.nu}, {"rho", s.rho},
                {"epsilon", s.epsilon}, {"R", s.R}, {"g", s.g}};
}

ExperimentConfig load_config(const Options& o, RunManifest& man) {
    if (o.config.empty()) throw ParameterError("--config is required");
    man.addInput("--config", o.config);
    ExperimentConfig c = parse_config(read_json_file(o.config));
    if (o.system) c.system = system_kind_from_string(*o.system);
    if (o.tol) c.integratorTol = *o.tol;
    if (o.shootTol) c.shootTol = *o.shootTol;
    if (o.seed) c.seed = *o.seed;
    man.setSeed(c.seed);
    return c;
}

SystemModel build_system(const ExperimentConfig& c) {
    const FrequencySet fs = c.frequencySet();
    c.masses.validate();
    switch (c.system) {
    case SystemKind::Full: return make_full(c.masses, c.scales());
    case SystemKind::Model: return make_model(c.masses, fs.omega);
    case SystemKind::Unperturbed: return make_unperturbed(c.masses, fs.omega);
    case SystemKind::ThreeBody:
        if (c.masses.planets() != 1 || c.masses.satellites(0) != 1)
            throw ParameterError("threebody needs one planet with one satellite");
        return make_threebody(c.masses.theta(0), c.masses.m[0], c.masses.mu, fs.omega);
    case SystemKind::Hill:
        if (c.masses.planets() != 1 || c.masses.satellites(0) != 1)
            throw ParameterError("hill needs one planet with one satellite");
        return make_hill(c.masses.m[0], fs.omega);
    }
    throw ParameterError("unknown system kind");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ParameterError("cannot write '" + path + "'");
    return f;
}

// Writes text to a file or stdout ("-").
void emit(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    open_out(path) << text;
}

void finish(RunManifest& man, const std::string& out) {
    man.addOutput(out);
    man.lap("write");
    man.write();
}

// design: frequency set from the design inputs and its nondegeneracy.
int cmd_design(const Options& o) {
    RunManifest man("design", o.argv);
    const ExperimentConfig c = load_config(o, man);
    if (!c.design) throw ParameterError("config has no 'design' section");
    const DesignInputs& d = *c.design;
    const FrequencySet fs = design_frequencies(d);
    const NondegeneracyReport r = check_nondegeneracy(fs, c.delta, c.C1, c.C2);
    man.lap("compute");
    write_json_file(o.out, json{{"design", to_json(d)},
                                {"b", design_b(d.a)},
                                {"c0", design_c0(d.a, d.N, d.n)},
                                {"frequencySet", to_json(fs)},
                                {"nondegeneracy", to_json(r)}});
    finish(man, o.out);
    return 0;
}

int cmd_check(const Options& o) {
    RunManifest man("check", o.argv);
    const ExperimentConfig c = load_config(o, man);
    const FrequencySet fs = c.frequencySet();
    fs.validate();
    c.masses.validate();
    if (Layout::of(fs).sats != Layout::of(c.masses).sats)
        throw ParameterError("frequency set and mass model have different satellite counts");
    const NondegeneracyReport r = check_nondegeneracy(fs, c.delta, c.C1, c.C2);
    man.lap("compute");
    write_json_file(o.out, json{{"massModel", to_json(c.masses)},
                                {"frequencySet", to_json(fs)},
                                {"scales", scales_json(c.scales())},
                                {"constants", {{"C1", c.C1}, {"C2", c.C2}}},
                                {"nondegeneracy", to_json(r)}});
    finish(man, o.out);
    return 0;
}

PhaseState initial_state(const Options& o, const ExperimentConfig& c, const SystemModel& sys) {
    if (!o.state.empty()) {
        if (static_cast<int>(o.state.size()) != sys.dim())
            throw ParameterError(fmt::format("--state needs {} values", sys.dim()));
        PhaseState s(sys.layout);
        s.z = Eigen::Map<const Eigen::VectorXd>(o.state.data(), sys.dim());
        return s;
    }
    std::vector<double> angles = c.angles;
    if (angles.empty()) angles.assign(sys.layout.bodies(), 0.0);
    return circular_state(sys, c.frequencySet(), angles);
}

int cmd_simulate(const Options& o) {
    RunManifest man("simulate", o.argv);
    const ExperimentConfig c = load_config(o, man);
    const SystemModel sys = build_system(c);
    const PhaseState s0 = initial_state(o, c, sys);
    const double tEnd = o.tEnd != 0.0 ? o.tEnd : c.frequencySet().T;
    IntegrationOptions opt;
    opt.tol = c.integratorTol;
    opt.recordSteps = true;
    const Trajectory tr = integrate(sys, s0, tEnd, opt);
    man.lap("integrate");
    spdlog::info("simulate: {} steps, energy drift {:.3e}, momentum drift {:.3e}", tr.t.size(), tr.energyDrift,
                 tr.momentumDrift);

    std::ostringstream csv;
    csv << 't';
    for (int b = 0; b < sys.layout.bodies(); ++b) csv << fmt::format(",x{0},y{0},px{0},py{0}", b);
    csv << ",H,I\n";
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        csv << number(tr.t[k]);
        for (int i = 0; i < tr.z[k].size(); ++i) csv << ',' << number(tr.z[k][i]);
        csv << ',' << number(sys.hamiltonian(tr.z[k])) << ',' << number(sys.angularMomentum(tr.z[k])) << '\n';
    }
    emit(o.out, csv.str());
    finish(man, o.out);
    return 0;
}

int worker_count() {
    if (const char* env = std::getenv("SATORB_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
        throw ParameterError("SATORB_WORKERS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

struct Start {
    SymmetricSeed seed;
    int parent = 0;  // index of the parade seed it came from
};

struct Outcome {
    std::optional<PeriodicOrbit> orbit;
    std::string error;
    std::vector<double> history;
};

int cmd_find_periodic(const Options& o) {
    RunManifest man("find-periodic", o.argv);
    ExperimentConfig c = load_config(o, man);
    const SystemModel sys = build_system(c);
    const FrequencySet fs = c.frequencySet();
    const GeneratingTorus gt = generating_torus(fs, sys);
    const std::vector<SymmetricSeed> seeds = symmetric_seeds(gt);

    // Parade seeds first, then seeded J-symmetric perturbations of them.
    std::vector<Start> starts;
    for (std::size_t k = 0; k < seeds.size(); ++k) starts.push_back({seeds[k], static_cast<int>(k)});
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> gauss;
    const Eigen::MatrixXd dJ = involution_matrix(Involution::J, sys.layout, 0.0);
    for (int k = 0; k < o.extraStarts && !seeds.empty(); ++k) {
        Start s{seeds[k % seeds.size()], static_cast<int>(k % seeds.size())};
        Eigen::VectorXd d(sys.dim());
        for (int i = 0; i < d.size(); ++i) d[i] = gauss(rng);
        d = 0.5 * (d + dJ * d);
        s.seed.state.z += o.jitter * s.seed.state.z.norm() / std::max(d.norm(), 1e-300) * d;
        starts.push_back(std::move(s));
    }

    ShootOptions so;
    so.tol = c.shootTol;
    so.integratorTol = c.integratorTol;
    std::vector<Outcome> results(starts.size());
    const int workers = std::min<int>(worker_count(), std::max<std::size_t>(starts.size(), 1));
    auto job = [&](int w) {
        for (std::size_t k = w; k < starts.size(); k += workers) {
            try {
                results[k].orbit = shoot_symmetric(sys, gt, starts[k].seed, so);
            } catch (const ShootingFailure& e) {
                results[k].error = e.what();
                results[k].history = e.history();
            } catch (const DegenerateDirection& e) {
                results[k].error = e.what();
                results[k].history = e.history();
            } catch (const Error& e) {
                results[k].error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(job, w);
    job(0);
    for (auto& t : pool) t.join();
    man.lap("shoot");

    json orbits = json::array();
    json failures = json::array();
    for (std::size_t k = 0; k < starts.size(); ++k) {
        const Outcome& r = results[k];
        if (r.orbit && r.orbit->converged) {
            json j = to_json(*r.orbit);
            j["start"] = k;
            j["seed"] = starts[k].parent;
            orbits.push_back(std::move(j));
        } else {
            json f{{"start", k}, {"seed", starts[k].parent}, {"pattern", starts[k].seed.pattern}};
            if (r.orbit) {
                f["error"] = "not converged";
                f["history"] = r.orbit->history;
            } else {
                f["error"] = r.error;
                f["history"] = r.history;
            }
            failures.push_back(std::move(f));
        }
    }
    spdlog::info("find-periodic: {} starts, {} converged, {} workers", starts.size(), orbits.size(), workers);
    write_json_file(o.out, json{{"system", to_string(c.system)},
                                {"massModel", to_json(c.masses)},
                                {"frequencySet", to_json(fs)},
                                {"scales", scales_json(c.scales())},
                                {"constants", {{"C1", c.C1}, {"C2", c.C2}}},
                                {"tolerances", {{"shoot", c.shootTol}, {"integrator", c.integratorTol}}},
                                {"seed", c.seed},
                                {"orbits", orbits},
                                {"failures", failures}});
    finish(man, o.out);
    if (orbits.empty()) throw SearchFailure("no start converged");
    return 0;
}

// Rebuilds the experiment stored in an orbits file.
ExperimentConfig config_from_orbits(const json& j) {
    json cfg{{"massModel", j.at("massModel")},
             {"frequencySet", j.at("frequencySet")},
             {"system", j.at("system")}};
    if (j.contains("constants")) cfg["constants"] = j.at("constants");
    if (j.contains("tolerances")) cfg["tolerances"] = j.at("tolerances");
    return parse_config(cfg);
}

PeriodicOrbit pick_orbit(const json& j, int index, const Layout& l) {
    const json& list = j.at("orbits");
    if (index < 0 || index >= static_cast<int>(list.size()))
        throw ParameterError(fmt::format("--index {} outside the {} stored orbits", index, list.size()));
    return orbit_from_json(list.at(index), l);
}

json block_json(const BlockStructureReport& b) {
    return json{{"passes", b.passes()},
                {"offStructure", b.offStructure},
                {"offTolerance", b.offTolerance},
                {"offStructureOk", b.offStructureOk},
                {"fittedAngles", b.fittedAngles},
                {"predictedAngles", b.predictedAngles},
                {"angleDefects", b.angleDefects},
                {"eta", b.eta},
                {"delta", b.delta},
                {"planetAngleDefect", b.planetAngleDefect},
                {"planetAnglesOk", b.planetAnglesOk},
                {"planetBlockDefect", b.planetBlockDefect},
                {"satelliteAngleDefect", b.satelliteAngleDefect},
                {"satelliteWindow", b.satelliteWindow},
                {"satelliteAnglesOk", b.satelliteAnglesOk},
                {"satelliteFrameDeviation", b.satelliteFrameDeviation},
                {"symmetric", b.symmetric},
                {"reversibilityDefect", b.reversibilityDefect},
                {"jFrameDefect", b.jFrameDefect},
                {"normalizedMonodromy", to_json(b.normalizedMonodromy, "normalized")}};
}

int cmd_stability(const Options& o) {
    RunManifest man("stability", o.argv);
    if (o.orbit.empty()) throw ParameterError("--orbit is required");
    man.addInput("--orbit", o.orbit);
    const json oj = read_json_file(o.orbit);
    ExperimentConfig c = config_from_orbits(oj);
    if (o.system) c.system = system_kind_from_string(*o.system);
    if (o.tol) c.integratorTol = *o.tol;
    const SystemModel sys = build_system(c);
    const PeriodicOrbit orbit = pick_orbit(oj, o.index, sys.layout);

    MonodromyReport r = monodromy(sys, orbit, c.integratorTol);
    json out{{"orbitIndex", o.index}, {"system", to_string(c.system)}};
    if (sys.w != 0.0) {
        try {
            reduced_monodromy(sys, orbit, r);
            r.classification = classify(r);
        } catch (const DomainError& e) {
            out["reductionError"] = e.what();
            r.classification.undecided = true;
        }
    } else {
        out["reductionError"] = to_string(c.system) + " has no satellite form weight";
        r.classification.undecided = true;
    }
    out["monodromy"] = to_json(r);
    if (c.system == SystemKind::Unperturbed) {
        const GeneratingTorus gt = generating_torus(c.frequencySet(), sys);
        std::optional<std::vector<double>> delta;
        if (c.delta) {
            delta.emplace();
            for (const auto& row : *c.delta) delta->insert(delta->end(), row.begin(), row.end());
        }
        out["blockStructure"] = block_json(block_structure_check(sys, gt, orbit, c.C2, delta, c.integratorTol));
    }
    man.lap("compute");
    write_json_file(o.out, out);
    finish(man, o.out);
    return 0;
}

std::pair<int, int> parse_range(const std::string& s) {
    static const std::regex re(R"(\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*)");
    std::smatch m;
    if (!std::regex_match(s, m, re)) throw ParameterError("--kappa-range must look like a..b");
    const int a = std::stoi(m[1]);
    const int b = std::stoi(m[2]);
    if (a > b) throw ParameterError("--kappa-range needs a <= b");
    return {a, b};
}

CkPrefactor parse_prefactor(const std::string& s) {
    if (s == "radius") return CkPrefactor::Radius;
    if (s == "sqrt-radius") return CkPrefactor::SqrtRadius;
    throw ParameterError("--prefactor must be radius or sqrt-radius");
}

int cmd_coeffs(const Options& o) {
    RunManifest man("coeffs", o.argv);
    const auto [a, b] = parse_range(o.kappaRange);
    const AveragingCoefficients t = coefficient_table(a, b, o.tol.value_or(1e-13), parse_prefactor(o.prefactor));
    man.lap("compute");
    std::ostringstream csv;
    csv << "kappa,c_kappa,c_kappa_over_kappa2\n";
    for (const auto& [k, v] : t.cTable) csv << k << ',' << number(v) << ',' << number(v / (double(k) * k)) << '\n';
    emit(o.out, csv.str());
    finish(man, o.out);
    return 0;
}

int cmd_unclosing(const Options& o) {
    RunManifest man("unclosing", o.argv);
    const ExperimentConfig c = load_config(o, man);
    const FrequencySet fs = c.frequencySet();
    std::vector<double> w;
    for (int i = 0; i < fs.planets(); ++i) w.push_back(fs.Omega[i][0]);
    if (static_cast<int>(c.masses.m.size()) != fs.planets())
        throw ParameterError("mass model and frequency set have different planet counts");
    std::vector<double> phi = c.angles;
    phi.resize(fs.planets(), 0.0);
    const UnclosingReport at = unclosing_test(c.masses.m, w, phi);
    const UnclosingReport cls = classify_masses(c.masses.m, w, o.grid);
    man.lap("compute");
    write_json_file(o.out, json{{"masses", c.masses.m},
                                {"frequencies", w},
                                {"phase", phi},
                                {"tolerance", unclosing_tolerance(c.masses.m, w)},
                                {"atPhase", to_json(at)},
                                {"classification", to_json(cls)}});
    finish(man, o.out);
    return 0;
}

std::vector<std::pair<double, double>> read_coeff_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::getline(in, line);
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string k, c, r;
        if (!std::getline(ls, k, ',') || !std::getline(ls, c, ',') || !std::getline(ls, r, ','))
            throw ParameterError("'" + path + "' is not a coefficient table");
        rows.emplace_back(std::stod(k), r == "null" ? NAN : std::stod(r));
    }
    return rows;
}

int cmd_plot(const Options& o) {
    RunManifest man("plot", o.argv);
    std::string svg;
    if (!o.coeffs.empty()) {
        man.addInput("--coeffs", o.coeffs);
        Panel p{"c_kappa / kappa^2", "kappa", "c_kappa / kappa^2", {}, false, true};
        Polyline neg{{}, {}, "kappa < 0", false};
        Polyline pos{{}, {}, "kappa > 0", false};
        for (const auto& [k, v] : read_coeff_csv(o.coeffs)) {
            Polyline& l = k < 0 ? neg : pos;
            l.x.push_back(k);
            l.y.push_back(v);
        }
        p.lines = {neg, pos};
        svg = render_svg({p}, "Averaging coefficients");
    } else {
        if (o.orbit.empty()) throw ParameterError("plot needs --orbit or --coeffs");
        man.addInput("--orbit", o.orbit);
        const json oj = read_json_file(o.orbit);
        ExperimentConfig c = config_from_orbits(oj);
        if (o.tol) c.integratorTol = *o.tol;
        const SystemModel sys = build_system(c);
        const PeriodicOrbit orbit = pick_orbit(oj, o.index, sys.layout);
        const int n = std::max(o.samples, 2);
        std::vector<double> times(n);
        for (int k = 0; k < n; ++k) times[k] = orbit.initial.t + o.periods * orbit.T * k / (n - 1);
        const std::vector<Eigen::VectorXd> zs = sample(sys, orbit.initial, times, c.integratorTol);
        man.lap("integrate");

        // Frame rotating by alpha per period, in which the orbit closes.
        const Layout& l = sys.layout;
        Panel planets{"Planets", "x", "y", {}, true, false};
        Panel sats{"Satellites relative to planet", "y1", "y2", {}, true, false};
        for (int b = 0; b < l.bodies(); ++b) {
            Polyline line;
            line.label = l.isPlanet(b) ? fmt::format("planet {}", b + 1)
                                       : fmt::format("satellite {}.{}", l.parentOf(b) + 1, l.satIndex(b) + 1);
            for (int k = 0; k < n; ++k) {
                const double a = -orbit.alpha * (times[k] - orbit.initial.t) / orbit.T;
                const double x = zs[k][4 * b];
                const double y = zs[k][4 * b + 1];
                line.x.push_back(std::cos(a) * x - std::sin(a) * y);
                line.y.push_back(std::sin(a) * x + std::cos(a) * y);
            }
            (l.isPlanet(b) ? planets : sats).lines.push_back(std::move(line));
        }
        std::vector<Panel> panels{planets};
        if (!sats.lines.empty()) panels.push_back(sats);
        svg = render_svg(panels, fmt::format("Orbit {} ({}), rotating frame", o.index, to_string(c.system)));
    }
    emit(o.out, svg);
    finish(man, o.out);
    return 0;
}

int cmd_potential_eval(const Options& o) {
    RunManifest man("potential eval", o.argv);
    json out = json::object();
    if (!o.hill.empty()) {
        if (o.hill.size() != 4) throw ParameterError("--hill needs x1,x2,y1,y2");
        const Vec2 x(o.hill[0], o.hill[1]);
        const Vec2 y(o.hill[2], o.hill[3]);
        const Vec2 g = hill_F_grad_y(x, y);
        out["hill"] = json{{"x", {x[0], x[1]}},
                           {"y", {y[0], y[1]}},
                           {"F", hill_F(x, y)},
                           {"gradY", {g[0], g[1]}},
                           {"theta", o.theta},
                           {"rho", o.rho},
                           {"Fgeneral", hill_F_general(x, y, o.theta, o.rho)}};
    }
    if (!o.config.empty()) {
        ExperimentConfig c = load_config(o, man);
        c.system = SystemKind::Full;
        const SystemModel sys = build_system(c);
        const PhaseState s = initial_state(o, c, sys);
        const ScaleParameters sc = c.scales();
        std::vector<double> z(s.z.data(), s.z.data() + s.z.size());
        json p{{"state", z}};
        try {
            check_analyticity(s, c.masses, sc);
            const Eigen::VectorXd g = perturbation_gradient(s, c.masses, sc);
            p["perturbation"] = perturbation_potential(s, c.masses, sc);
            p["gradient"] = std::vector<double>(g.data(), g.data() + g.size());
            p["analytic"] = true;
        } catch (const DomainError& e) {
            p["analytic"] = false;
            p["reason"] = e.what();
        }
        p["limit"] = perturbation_limit(s, c.masses, c.masses.mu);
        p["hamiltonian"] = sys.hamiltonian(s.z);
        p["angularMomentum"] = sys.angularMomentum(s.z);
        out["system"] = std::move(p);
    }
    if (out.empty()) throw ParameterError("potential eval needs --hill or --config");
    man.lap("compute");
    write_json_file(o.out, out);
    finish(man, o.out);
    return 0;
}

// Re-runs a recorded command with the embedded inputs and compares output hashes.
int cmd_replay(const Options& o) {
    if (o.manifest.empty()) throw ParameterError("--manifest is required");
    const json m = read_json_file(o.manifest);
    std::vector<std::string> args = m.at("argv").get<std::vector<std::string>>();
    namespace fs = std::filesystem;
    fs::create_directories(o.outDir);

    auto replace = [&args](const std::string& flag, const std::string& value) {
        for (std::size_t k = 0; k < args.size(); ++k) {
            if (args[k] == flag && k + 1 < args.size()) args[k + 1] = value;
            else if (args[k].rfind(flag + "=", 0) == 0) args[k] = flag + "=" + value;
        }
    };
    int n = 0;
    for (const auto& in : m.at("inputs")) {
        const std::string path = (fs::path(o.outDir) / fmt::format("input{}_{}", n++,
                                                                    fs::path(in.at("path").get<std::string>()).filename().string())).string();
        emit(path, in.contains("text") ? in.at("text").get<std::string>() : in.at("content").dump(2) + "\n");
        replace(in.at("flag").get<std::string>(), path);
    }
    std::vector<std::pair<std::string, std::string>> outs;
    for (const auto& out : m.at("outputs")) {
        const std::string orig = out.at("path").get<std::string>();
        if (orig == "-") continue;
        const std::string path = (fs::path(o.outDir) / fs::path(orig).filename()).string();
        replace("--out", path);
        outs.emplace_back(out.value("sha256", std::string()), path);
    }
    spdlog::info("replay: {}", fmt::join(args, " "));
    const int status = run(args);

    json report{{"argv", args}, {"status", status}, {"outputs", json::array()}};
    bool same = true;
    for (const auto& [hash, path] : outs) {
        const std::string now = sha256_hex(read_text_file(path));
        same = same && now == hash;
        report["outputs"].push_back({{"path", path}, {"recorded", hash}, {"replayed", now}, {"match", now == hash}});
    }
    report["identical"] = same;
    write_json(std::cout, report);
    if (!same) throw Error("replayed outputs differ from the recorded hashes");
    return status;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Relatively periodic orbits of planets with satellites", "satorb"};
    app.set_version_flag("--version", std::string(SATORB_VERSION));
    app.require_subcommand(1);
    Options o;

    auto config = [&o](CLI::App* s, bool required = true) {
        auto* opt = s->add_option("--config", o.config, "Experiment JSON document");
        if (required) opt->required()->check(CLI::ExistingFile);
        else opt->check(CLI::ExistingFile);
    };
    auto out = [&o](CLI::App* s, const std::string& what) {
        s->add_option("--out", o.out, what + " (- for stdout)")->capture_default_str();
    };
    auto system = [&o](CLI::App* s) {
        s->add_option("--system", o.system, "System kind: full, model, unperturbed, threebody, hill (overrides config)");
    };
    auto tol = [&o](CLI::App* s, const std::string& what) { s->add_option("--tol", o.tol, what); };

    auto* design = app.add_subcommand("design", "Frequency set from design inputs and its nondegeneracy");
    config(design);
    out(design, "JSON report");

    auto* check = app.add_subcommand("check", "Validate a configuration and report the nondegeneracy conditions");
    config(check);
    out(check, "JSON report");

    auto* simulate = app.add_subcommand("simulate", "Integrate one trajectory and write every accepted step");
    config(simulate);
    system(simulate);
    tol(simulate, "Integrator tolerance (overrides config)");
    simulate->add_option("--t-end", o.tEnd, "Final time (default: the period T)");
    simulate->add_option("--state", o.state, "Explicit initial state, 4 values per body")->delimiter(',');
    out(simulate, "CSV trajectory");

    auto* find = app.add_subcommand("find-periodic", "Shoot symmetric periodic orbits from every parade seed");
    config(find);
    system(find);
    find->add_option("--tol", o.shootTol, "Shooting tolerance (overrides config)");
    find->add_option("--integrator-tol", o.tol, "Integrator tolerance for shooting (overrides config)");
    find->add_option("--seed", o.seed, "Random seed for extra starts (overrides config)");
    find->add_option("--extra-starts", o.extraStarts, "Perturbed J-symmetric starts beyond the parade seeds")
        ->capture_default_str();
    find->add_option("--jitter", o.jitter, "Relative size of the start perturbations")->capture_default_str();
    find->footer("Worker threads: SATORB_WORKERS (default: hardware concurrency).");
    out(find, "JSON orbits");

    auto* stab = app.add_subcommand("stability", "Monodromy matrix and linear stability of a stored orbit");
    stab->add_option("--orbit", o.orbit, "Orbits JSON from find-periodic")->required()->check(CLI::ExistingFile);
    stab->add_option("--index", o.index, "Orbit index in the file")->capture_default_str();
    system(stab);
    tol(stab, "Integrator tolerance (overrides the file)");
    out(stab, "JSON report");

    auto* coeffs = app.add_subcommand("coeffs", "Table of the averaging coefficients c_kappa");
    coeffs->add_option("--kappa-range", o.kappaRange, "Integer range a..b; kappa = -1, 0 are skipped")
        ->capture_default_str();
    tol(coeffs, "Quadrature tolerance (default 1e-13)");
    coeffs->add_option("--prefactor", o.prefactor, "radius or sqrt-radius")->capture_default_str();
    out(coeffs, "CSV table");

    auto* uncl = app.add_subcommand("unclosing", "Unclosing test and M classification of the planet masses");
    config(uncl);
    uncl->add_option("--grid", o.grid, "Grid density of the closing search")->capture_default_str();
    out(uncl, "JSON report");

    auto* plot = app.add_subcommand("plot", "SVG of an orbit in the rotating frame or of a coefficient table");
    plot->add_option("--orbit", o.orbit, "Orbits JSON from find-periodic")->check(CLI::ExistingFile);
    plot->add_option("--index", o.index, "Orbit index in the file")->capture_default_str();
    plot->add_option("--coeffs", o.coeffs, "CSV from coeffs")->check(CLI::ExistingFile);
    plot->add_option("--samples", o.samples, "Sample points per trace")->capture_default_str();
    plot->add_option("--periods", o.periods, "Number of periods drawn")->capture_default_str();
    tol(plot, "Integrator tolerance (overrides the file)");
    out(plot, "SVG file");

    auto* pot = app.add_subcommand("potential", "Potential evaluation for debugging");
    pot->require_subcommand(1);
    auto* eval = pot->add_subcommand("eval", "Evaluate the Hill kernel or the perturbation potential at one point");
    config(eval, false);
    eval->add_option("--state", o.state, "Explicit state, 4 values per body")->delimiter(',');
    eval->add_option("--hill", o.hill, "Hill kernel arguments x1,x2,y1,y2")->delimiter(',');
    eval->add_option("--theta", o.theta, "Mass fraction of the generalized kernel")->capture_default_str();
    eval->add_option("--rho", o.rho, "Scale of the generalized kernel")->capture_default_str();
    out(eval, "JSON values");

    auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest and compare outputs");
    replay->add_option("--manifest", o.manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
    replay->add_option("--out-dir", o.outDir, "Directory for the replayed inputs and outputs")->capture_default_str();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        throw ParameterError(e.what());
    }

    // The manifest of every command records the arguments it ran with.
    o.argv = args;
    auto dispatch = [&]() -> int {
        if (design->parsed()) return cmd_design(o);
        if (check->parsed()) return cmd_check(o);
        if (simulate->parsed()) return cmd_simulate(o);
        if (find->parsed()) return cmd_find_periodic(o);
        if (stab->parsed()) return cmd_stability(o);
        if (coeffs->parsed()) return cmd_coeffs(o);
        if (uncl->parsed()) return cmd_unclosing(o);
        if (plot->parsed()) return cmd_plot(o);
        if (eval->parsed()) return cmd_potential_eval(o);
        if (replay->parsed()) return cmd_replay(o);
        throw ParameterError("no subcommand");
    };
    return dispatch();
}

} // namespace satorb::cli
