#include "leraykit/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

bool write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"leraykit: projective invariants, duality and Leray transforms of convex hypersurfaces"};
    std::string command, config_path, out_path;
    std::uint64_t seed = 0;
    int resolution = 0;
    bool quiet = false;
    app.add_option("command", command,
                   "invariants | dual | pair | cauchy-norm | leray-norm | efficiency | rigid-check | rigid-build "
                   "(defaults to the command in the config)");
    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--out", out_path, "report path; a CSV table, when produced, is written next to it");
    auto* seed_opt = app.add_option("--seed", seed, "seed for random probes");
    auto* res_opt = app.add_option("--resolution-override", resolution, "run a single resolution");
    app.add_flag("--quiet", quiet, "suppress the summary on stderr");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    leray::ExperimentConfig cfg;
    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw leray::ConfigError("cannot read config file " + config_path);
        std::ostringstream text;
        text << in.rdbuf();
        leray::Json j;
        try {
            j = leray::Json::parse(text.str());
        } catch (const leray::Json::parse_error& e) {
            throw leray::ConfigError(std::string("malformed JSON: ") + e.what());
        }
        if (!command.empty() && j.is_object()) j["command"] = command;
        if (*res_opt) {
            if (resolution < 2) throw leray::ConfigError("--resolution-override must be >= 2");
            j["resolutions"] = leray::Json::array({resolution});
        }
        if (*seed_opt) j["seed"] = seed;
        try {
            cfg = leray::parse_config(j);
        } catch (const leray::Json::exception& e) {
            throw leray::ConfigError(std::string("invalid config: ") + e.what());
        }
        if (out_path.empty()) out_path = cfg.output;
    } catch (const leray::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    leray::Report rep;
    try {
        rep = leray::run(cfg);
    } catch (const leray::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const leray::Json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }

    const std::string json = leray::dump_json(rep.payload) + "\n";
    if (out_path.empty()) {
        std::cout << json;
        if (!rep.csv.empty() && !quiet) std::cerr << "(CSV table omitted without --out)\n";
    } else {
        bool ok = write_file(out_path, json);
        if (!rep.csv.empty()) {
            std::filesystem::path csv_path(out_path);
            csv_path.replace_extension(".csv");
            ok = write_file(csv_path.string(), rep.csv) && ok;
        }
        if (!ok) {
            std::cerr << "cannot write " << out_path << "\n";
            return 3;
        }
    }
    if (!quiet) {
        for (const auto& c : rep.payload["checks"])
            std::cerr << (c["pass"].get<bool>() ? "pass " : "FAIL ") << c["name"].get<std::string>() << " = "
                      << c["value"].dump() << " (tol " << c["tolerance"].dump() << ")\n";
    }
    return rep.pass ? 0 : 1;
}
