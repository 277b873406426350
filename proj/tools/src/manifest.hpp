#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "io.hpp"

namespace satorb::cli {

std::string sha256_hex(const std::string& data);

// Record of one run: arguments, hashed and embedded inputs, outputs, timings.
class RunManifest {
public:
    RunManifest(std::string subcommand, std::vector<std::string> argv);

    // Registers an input file under the flag that named it.
    void addInput(const std::string& flag, const std::string& path);
    void addOutput(const std::string& path);
    void setSeed(unsigned seed) { seed_ = seed; hasSeed_ = true; }
    void lap(const std::string& name);

    json toJson() const;
    // Written next to the first output, or to satorb.manifest.json.
    void write() const;

private:
    std::string subcommand_;
    std::vector<std::string> argv_;
    json inputs_ = json::array();
    std::vector<std::string> outputs_;
    json timings_ = json::object();
    unsigned seed_ = 0;
    bool hasSeed_ = false;
    std::chrono::steady_clock::time_point start_;
    std::chrono::steady_clock::time_point last_;
};

} // namespace satorb::cli
