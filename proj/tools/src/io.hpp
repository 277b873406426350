#pragma once

#include <json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "satorb/averaging.hpp"
#include "satorb/dynamics.hpp"
#include "satorb/params.hpp"
#include "satorb/periodic.hpp"
#include "satorb/stability.hpp"

namespace satorb::cli {

using json = nlohmann::ordered_json;

// One experiment: masses, frequencies and solver settings.
struct ExperimentConfig {
    MassModel masses;
    std::optional<FrequencySet> frequencies;
    std::optional<DesignInputs> design;
    SystemKind system = SystemKind::Full;
    double shootTol = 1e-10;
    double integratorTol = 1e-12;
    double C1 = 1.0;
    double C2 = 1.0;
    std::optional<std::vector<std::vector<double>>> delta;
    std::vector<double> angles;  // initial torus angles for simulate
    unsigned seed = 1;

    // Frequency set, building it from the design inputs when needed.
    FrequencySet frequencySet() const;
    ScaleParameters scales() const;
};

// Throws ParameterError with the offending field.
ExperimentConfig parse_config(const json& j);
json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);

json to_json(const MassModel& m);
json to_json(const FrequencySet& fs);
json to_json(const DesignInputs& d);
json to_json(const NondegeneracyReport& r);
json to_json(const UnclosingReport& r);
json to_json(const PeriodicOrbit& o);
json to_json(const MonodromyReport& r);
json to_json(const Eigen::MatrixXd& M, const std::string& frame);
MassModel mass_model_from_json(const json& j);
FrequencySet frequency_set_from_json(const json& j);
PeriodicOrbit orbit_from_json(const json& j, const Layout& l);

// JSON with every floating-point value printed at 17 significant digits, so
// equal inputs give byte-identical files.
void write_json(std::ostream& os, const json& j, int indent = 2);
void write_json_file(const std::string& path, const json& j);
// CSV field formatting with the same precision.
std::string number(double v);

} // namespace satorb::cli
