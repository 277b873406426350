#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <json.hpp>

#include "commands.hpp"
#include "satorb/errors.hpp"

// Exit codes: 0 success, 2 configuration, 3 domain or integration,
// 4 search failure, 5 internal.
int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("satorb"));
    spdlog::set_pattern("[%l] %v");
    try {
        return satorb::cli::run({argv + 1, argv + argc});
    } catch (const satorb::ParameterError& e) {
        spdlog::error("configuration: {}", e.what());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        spdlog::error("configuration: {}", e.what());
        return 2;
    } catch (const satorb::DomainError& e) {
        spdlog::error("domain: {}", e.what());
        return 3;
    } catch (const satorb::IntegrationError& e) {
        spdlog::error("integration at t = {}: {}", e.lastTime(), e.what());
        return 3;
    } catch (const satorb::SearchFailure& e) {
        spdlog::error("search: {}", e.what());
        return 4;
    } catch (const std::exception& e) {
        spdlog::error("internal: {}", e.what());
        return 5;
    }
}
