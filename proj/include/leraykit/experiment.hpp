#pragma once

#include "leraykit/geometry.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace leray {

using Json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// {family, params, chart_window, resolution}
SurfacePtr build_surface(const Json& cfg);
std::optional<ChartWindow> parse_window(const Json& cfg);
cd parse_complex(const Json& v);

struct ExperimentConfig {
    std::string command;
    Json surface;
    Json dual_surface;  // optional second surface for `pair`
    Json lambda;        // rigid commands
    std::vector<int> resolutions;
    int degree = 4;
    int dual_degree = -1;
    std::map<std::string, double> tolerances;
    Json expect = Json::object();
    std::string output;
    std::uint64_t seed = 0;
    double margin = 0.2;
};

ExperimentConfig parse_config(const Json& j);
ExperimentConfig parse_config_text(const std::string& text);

struct Report {
    Json payload;
    std::string csv;  // per-node table, empty when the command has none
    bool pass = true;
};

// throws ConfigError on invalid configurations and NumericalError on
// numerical breakdown
Report run(const ExperimentConfig& cfg);

// JSON text with every floating-point value printed to 17 significant digits
std::string dump_json(const Json& j, int indent = 2);

}  // namespace leray
