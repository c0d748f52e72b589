#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "leraykit/experiment.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace leray;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("leraykit_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string cli() {
    const char* p = std::getenv("LERAYKIT_CLI");
    return p ? p : "leraykit-cli";
}

fs::path write_config(const std::string& name, const std::string& text) {
    fs::path p = workdir() / name;
    std::ofstream(p) << text;
    return p;
}

int run_cli(const std::string& args) {
    std::string cmd = cli() + " " + args + " --quiet >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("malformed JSON exits with 2 and writes nothing") {
    fs::path cfg = write_config("broken.json", "{\"command\": \"cauchy-norm\", ");
    fs::path out = workdir() / "broken_out.json";
    CHECK(run_cli("--config " + cfg.string() + " --out " + out.string()) == 2);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("invalid configurations exit with 2") {
    fs::path a = write_config("unknown.json", R"({"command": "nope", "surface": {"family": "circle"}})");
    CHECK(run_cli("--config " + a.string()) == 2);
    fs::path b = write_config("family.json", R"({"command": "invariants", "surface": {"family": "torus"}})");
    CHECK(run_cli("--config " + b.string()) == 2);
    fs::path c = write_config(
        "ladder.json", R"({"command": "cauchy-norm", "surface": {"family": "circle"}, "resolutions": [64, 32]})");
    CHECK(run_cli("--config " + c.string()) == 2);
    fs::path d = write_config(
        "tol.json", R"({"command": "cauchy-norm", "surface": {"family": "circle"}, "tolerances": {"norm": -1}})");
    CHECK(run_cli("--config " + d.string()) == 2);
    CHECK(run_cli("--config " + (workdir() / "missing.json").string()) == 2);
}

TEST_CASE("circle Cauchy norm report") {
    fs::path cfg = write_config("circle.json", R"({"command": "cauchy-norm", "surface": {"family": "circle"},
        "resolutions": [64, 128], "degree": 6, "expect": {"norm": 1}, "seed": 3})");
    fs::path out = workdir() / "circle_out.json";
    CHECK(run_cli("--config " + cfg.string() + " --out " + out.string()) == 0);
    Json j = Json::parse(slurp(out));
    CHECK(j["schema"] == 1);
    CHECK(j["seed"] == 3);
    CHECK(std::abs(j["norm"].get<double>() - 1) < 1e-6);
    CHECK(j["resolution"] == 128);
    CHECK(j["levels"].size() == 2);
    CHECK(j["residuals"].contains("projection"));
    CHECK(j["residuals"].contains("adjoint"));
    CHECK(j["residuals"].contains("identity"));
    CHECK(j["pass"] == true);
}

TEST_CASE("identical config and seed give byte-identical reports") {
    fs::path cfg = write_config("det.json", R"({"command": "pair", "surface": {"family": "sphere"},
        "resolutions": [8], "degree": 2, "seed": 42})");
    fs::path a = workdir() / "det_a.json", b = workdir() / "det_b.json";
    CHECK(run_cli("--config " + cfg.string() + " --out " + a.string()) == 0);
    CHECK(run_cli("--config " + cfg.string() + " --out " + b.string()) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(run_cli("--config " + cfg.string() + " --seed 43 --out " + b.string()) == 0);
    CHECK(slurp(a) != slurp(b));
}

TEST_CASE("invariants CSV for the lp sphere") {
    fs::path cfg = write_config("lp.json", R"({"command": "invariants",
        "surface": {"family": "lp_sphere", "params": {"p": 3}}, "resolutions": [6]})");
    fs::path out = workdir() / "lp_out.json";
    CHECK(run_cli("--config " + cfg.string() + " --out " + out.string()) == 0);
    std::ifstream csv(workdir() / "lp_out.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line.find("b_abs") != std::string::npos);
    int rows = 0;
    while (std::getline(csv, line)) {
        std::vector<double> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
        REQUIRE(cols.size() == 12);
        CHECK(std::abs(cols[4] - 1.0 / 3) < 1e-6);
        ++rows;
    }
    // at least four profile nodes times a 6 x 6 angular grid
    CHECK(rows == 4 * 6 * 6);
}

TEST_CASE("failed checks exit with 1 and resolution override applies") {
    fs::path cfg = write_config("fail.json", R"({"command": "cauchy-norm",
        "surface": {"family": "ellipse", "params": {"a": 2}}, "resolutions": [64], "expect": {"norm": 1}})");
    fs::path out = workdir() / "fail_out.json";
    CHECK(run_cli("--config " + cfg.string() + " --out " + out.string()) == 1);
    CHECK(run_cli("--config " + cfg.string() + " --resolution-override 96 --out " + out.string()) == 1);
    CHECK(Json::parse(slurp(out))["resolution"] == 96);
}

TEST_CASE("rigid commands") {
    fs::path good = write_config("rigid_good.json", R"({"command": "rigid-check",
        "lambda": {"expr": "conj(z)/z/3"}, "resolutions": [32, 128]})");
    CHECK(run_cli("--config " + good.string()) == 0);
    fs::path bad = write_config("rigid_bad.json", R"J({"command": "rigid-check",
        "lambda": {"expr": "0.5*conj(z)"}, "resolutions": [32, 128]})J");
    CHECK(run_cli("--config " + bad.string()) == 1);
    fs::path build = write_config("rigid_build.json", R"({"command": "rigid-build",
        "lambda": {"expr": "0.3"}, "resolutions": [64, 256]})");
    fs::path out = workdir() / "rigid_out.json";
    CHECK(run_cli("--config " + build.string() + " --out " + out.string()) == 0);
    CHECK(fs::file_size(workdir() / "rigid_out.csv") > 1000);
}

TEST_CASE("config parsing in the library") {
    CHECK_THROWS_AS(parse_config_text("[1, 2"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"command": "dual"})"), ConfigError);
    ExperimentConfig c = parse_config_text(
        R"({"command": "dual", "surface": {"family": "mobius_image", "params": {"base": {"family": "circle"},
            "matrix": [[1, [0.1, 0]], [0, 1]]}}, "seed": 5})");
    CHECK(c.seed == 5);
    CHECK(c.degree == 4);
    CHECK(dump_json(Json::parse("{\"x\": 0.1}"), 0) == "{\"x\":0.10000000000000001}");
}
