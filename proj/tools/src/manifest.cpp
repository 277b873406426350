#include "manifest.hpp"

#include <openssl/evp.h>
#include <boost/version.hpp>
#include <Eigen/Core>
#include <fmt/format.h>

#include <filesystem>

#include "satorb/errors.hpp"

#ifndef SATORB_VERSION
#define SATORB_VERSION "unknown"
#endif

namespace satorb::cli {

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

RunManifest::RunManifest(std::string subcommand, std::vector<std::string> argv)
    : subcommand_(std::move(subcommand)), argv_(std::move(argv)), start_(std::chrono::steady_clock::now()),
      last_(start_) {}

void RunManifest::addInput(const std::string& flag, const std::string& path) {
    const std::string text = read_text_file(path);
    json entry{{"flag", flag}, {"path", path}, {"sha256", sha256_hex(text)}};
    try {
        entry["content"] = json::parse(text);
    } catch (const json::parse_error&) {
        entry["text"] = text;
    }
    inputs_.push_back(std::move(entry));
}

void RunManifest::addOutput(const std::string& path) { outputs_.push_back(path); }

void RunManifest::lap(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    timings_[name] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
}

json RunManifest::toJson() const {
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json outs = json::array();
    for (const auto& o : outputs_) {
        json e{{"path", o}};
        if (o != "-" && std::filesystem::exists(o)) e["sha256"] = sha256_hex(read_text_file(o));
        outs.push_back(std::move(e));
    }
    json t = timings_;
    t["total"] = total;
    json j{{"tool", "satorb"},
           {"version", SATORB_VERSION},
           {"subcommand", subcommand_},
           {"argv", argv_},
           {"inputs", inputs_},
           {"outputs", outs},
           {"libraries",
            {{"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
             {"boost", fmt::format("{}.{}.{}", BOOST_VERSION / 100000, BOOST_VERSION / 100 % 1000, BOOST_VERSION % 100)},
             {"fmt", FMT_VERSION}}},
           {"timingsSeconds", t}};
    if (hasSeed_) j["seed"] = seed_;
    return j;
}

void RunManifest::write() const {
    std::string path = "satorb.manifest.json";
    for (const auto& o : outputs_)
        if (o != "-") {
            path = o + ".manifest.json";
            break;
        }
    write_json_file(path, toJson());
}

} // namespace satorb::cli
