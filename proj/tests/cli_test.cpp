#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include "schrolab/cli.hpp"
#include "schrolab/error.hpp"
#include "schrolab/functionals.hpp"
#include "schrolab/interpolation.hpp"
#include "schrolab/io.hpp"

using namespace schrolab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_config(const std::string& harness = "cost") {
    return json::parse(R"({
      "schema": "schrolab.config/1",
      "generator": {"kind": "laplacian", "dimension": 1},
      "grid": {"dimension": 1, "half_width": 8, "points": 257},
      "mu": {"type": "gaussian", "mean": -1, "variance": 1},
      "nu": {"type": "gaussian", "mean": 1, "variance": 1},
      "horizon": 1,
      "solver": {"tol": 1e-10, "max_iter": 100000},
      "harness": {"name": ")" + harness + R"("}
    })");
}

cli::ExperimentConfig parse(const json& doc, const fs::path& base = {}) { return cli::parse_config(doc.dump(), base); }

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "schrolab_cli_tests" / name;
    fs::remove_all(dir);
    return dir;
}

std::vector<std::vector<double>> read_rows(const fs::path& path) {
    std::istringstream in(io::read_file(path));
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        for (const auto& cell : io::split_csv_line(line)) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

int run_main(std::vector<std::string> args) {
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("a valid config parses with defaults") {
    const auto cfg = parse(base_config());
    CHECK(cfg.generator_kind == "laplacian");
    CHECK(cfg.grid_points == 257);
    CHECK(cfg.harness.samples == 65);
    CHECK(cfg.solver.tol == 1e-10);
    CHECK(cfg.output_dir == fs::path("out"));
    CHECK(std::get<GaussianSpec>(cfg.mu).mean[0] == -1.0);
}

TEST_CASE("malformed configs are rejected") {
    auto rejects = [](json doc) { CHECK_THROWS_AS(parse(doc), ConfigError); };
    CHECK_THROWS_AS(cli::parse_config("{ not json"), ConfigError);
    {
        auto d = base_config();
        d["extra"] = 1;
        rejects(d);
    }
    {
        auto d = base_config();
        d["solver"]["max_iterations"] = 10;
        rejects(d);
    }
    {
        auto d = base_config();
        d["schema"] = "schrolab.config/2";
        rejects(d);
    }
    {
        auto d = base_config();
        d.erase("harness");
        rejects(d);
    }
    {
        auto d = base_config();
        d["harness"]["samples"] = 64;
        rejects(d);
    }
    {
        auto d = base_config();
        d["harness"]["radii"] = json::array({1, 2});
        rejects(d);
    }
    {
        auto d = base_config();
        d["mu"]["variance"] = -1;
        rejects(d);
    }
    {
        auto d = base_config();
        d["mu"] = {{"type", "uniform"}};
        rejects(d);
    }
    {
        auto d = base_config();
        d["generator"] = {{"kind", "ornstein_uhlenbeck"}, {"dimension", 2}};
        d["grid"]["dimension"] = 2;
        rejects(d);
    }
    {
        auto d = base_config();
        d["grid"]["dimension"] = 2;
        rejects(d);
    }
    {
        auto d = base_config();
        d["grid"]["points"] = 10.5;
        rejects(d);
    }
    {
        auto d = base_config("derivative");
        d["harness"]["curve_mu"] = {{"kind", "rotation"}};
        rejects(d);
    }
    {
        auto d = base_config("talagrand");
        d["harness"]["branch"] = "negative";
        d["harness"]["horizons"] = json::array({1});
        rejects(d);
    }
    {
        auto d = base_config("continuity");
        rejects(d);  // radii are required
    }
}

TEST_CASE("mixtures, 2D axes and tabulated paths") {
    auto d = base_config();
    d["mu"] = json::parse(R"({"type": "mixture", "components": [
        {"weight": 1, "mean": -2, "variance": 0.5}, {"weight": 2, "mean": 2, "variance": 0.5}]})");
    d["nu"] = json::parse(R"({"type": "tabulated", "path": "nu.csv"})");
    d["output_dir"] = "results";
    const auto cfg = parse(d, "/data/run");
    CHECK(std::get<MixtureSpec>(cfg.mu).components.size() == 2);
    CHECK(std::get<TabulatedSpec>(cfg.nu).path == fs::path("/data/run/nu.csv"));
    CHECK(cfg.output_dir == fs::path("/data/run/results"));

    auto d2 = base_config();
    d2["generator"]["dimension"] = 2;
    d2["grid"]["dimension"] = 2;
    d2["mu"] = {{"type", "gaussian"}, {"mean", {0, 1}}, {"variance", {1, 2}}};
    d2["nu"] = {{"type", "gaussian"}, {"mean", {0, 0}}, {"variance", {1, 1}}};
    const auto cfg2 = parse(d2);
    CHECK(std::get<GaussianSpec>(cfg2.mu).variance[1] == 2.0);
    d2["nu"]["mean"] = 0;
    CHECK_THROWS_AS(parse(d2), ConfigError);
}

TEST_CASE("command and harness must agree") {
    const auto cfg = parse(base_config());
    CHECK(cli::run_command("interpolate", cfg, scratch("mismatch")) == cli::kExitConfig);
    CHECK(cli::run_command("bogus", cfg, scratch("mismatch")) == cli::kExitConfig);
}

TEST_CASE("inputs the library rejects map to the config exit code") {
    auto d = base_config();
    d["grid"]["half_width"] = 4;
    d["nu"]["variance"] = 2;
    CHECK(cli::run_command("cost", parse(d), scratch("domain")) == cli::kExitConfig);
}

TEST_CASE("solver failures map to exit code 3") {
    auto d = base_config();
    d["solver"]["max_iter"] = 2;
    CHECK(cli::run_command("cost", parse(d), scratch("solver")) == cli::kExitSolver);
}

TEST_CASE("cost output is deterministic and lands in a fresh directory") {
    const auto cfg = parse(base_config());
    const fs::path a = scratch("cost_a") / "nested" / "deeper";
    const fs::path b = scratch("cost_b");
    REQUIRE(cli::run_command("cost", cfg, a) == cli::kExitOk);
    REQUIRE(cli::run_command("cost", cfg, b) == cli::kExitOk);
    for (const char* file : {"cost.json", "potentials.csv"}) {
        CAPTURE(file);
        CHECK(io::read_file(a / file) == io::read_file(b / file));
    }
    const auto doc = json::parse(io::read_file(a / "cost.json"));
    CHECK(doc["bbs_residual"].get<double>() < 1e-8);
    CHECK(doc["horizon_extension"] == false);
    CHECK(doc["diagnostics"]["iterations"].get<int>() > 0);
    CHECK(io::read_file(a / "potentials.csv").rfind("x,log_f,log_g\n", 0) == 0);
}

TEST_CASE("interpolate output is consistent with the dynamic cost") {
    auto d = base_config("interpolate");
    d["harness"]["dump_measures"] = true;
    d["harness"]["samples"] = 33;
    const fs::path dir = scratch("interpolate");
    REQUIRE(cli::run_command("interpolate", parse(d), dir) == cli::kExitOk);
    const auto doc = json::parse(io::read_file(dir / "interpolate.json"));
    const auto rows = read_rows(dir / "path.csv");
    REQUIRE(rows.size() == 33);
    std::vector<double> integrand;
    for (const auto& r : rows) integrand.push_back(r[4]);
    CHECK(simpson(integrand, 1.0 / 32.0) == doctest::Approx(doc["c_dynamic"].get<double>()).epsilon(1e-9));
    CHECK(rows[0][0] == 0.0);
    CHECK(rows[0][1] == doctest::Approx(-1.4189385332046727).epsilon(1e-8));
    CHECK(doc["profile_convex"] == true);
    CHECK(fs::exists(dir / "profile.csv"));
    CHECK(fs::exists(dir / "measures" / "sample_000.csv"));
    CHECK(fs::exists(dir / "measures" / "sample_032.csv"));
}

TEST_CASE("OU with stationary marginals has zero cost") {
    auto d = base_config();
    d["generator"]["kind"] = "ornstein_uhlenbeck";
    d["mu"] = {{"type", "gaussian"}, {"mean", 0}, {"variance", 1}};
    d["nu"] = d["mu"];
    const fs::path dir = scratch("ou");
    REQUIRE(cli::run_command("cost", parse(d), dir) == cli::kExitOk);
    const auto doc = json::parse(io::read_file(dir / "cost.json"));
    CHECK(std::abs(doc["sch"].get<double>()) < 1e-10);
    CHECK(std::abs(doc["c_dynamic"].get<double>()) < 1e-10);
}

TEST_CASE("failed checks exit with 4 and are recorded") {
    auto d = base_config("contraction");
    d["harness"]["times"] = json::array({0.1});
    d["harness"]["relative_slack"] = 0.0;
    d["mu"]["variance"] = 0.5;
    d["nu"] = d["mu"];
    // With mu = nu the contraction holds strictly, so it passes even without slack.
    const fs::path ok = scratch("contraction_ok");
    CHECK(cli::run_command("contraction", parse(d), ok) == cli::kExitOk);

    auto t = base_config("derivative");
    // a translation makes Sch exactly quadratic in t, so use a dilation
    t["harness"]["curve_mu"] = {{"kind", "dilation"}, {"rate", 0.5}};
    t["harness"]["curve_nu"] = {{"kind", "fixed"}};
    t["harness"]["t"] = 0.0;
    t["harness"]["h_fd"] = 0.1;
    t["harness"]["tol_static"] = 1e-9;
    const fs::path dir = scratch("derivative_fail");
    CHECK(cli::run_command("derivative", parse(t), dir) == cli::kExitAssertion);
    const auto doc = json::parse(io::read_file(dir / "derivative.json"));
    CHECK(doc["pass"] == false);
    CHECK(doc["checks"][0]["name"] == "rel_err_static");
    CHECK(doc["checks"][0]["pass"] == false);
    CHECK(fs::exists(dir / "derivative.csv"));
}

TEST_CASE("command line entry point") {
    CHECK(run_main({"schrolab"}) == cli::kExitConfig);
    CHECK(run_main({"schrolab", "cost"}) == cli::kExitConfig);
    CHECK(run_main({"schrolab", "cost", "--config", "/nonexistent/config.json"}) == cli::kExitConfig);
    const fs::path dir = scratch("main");
    fs::create_directories(dir);
    io::write_file_atomic(dir / "config.json", base_config().dump());
    CHECK(run_main({"schrolab", "cost", "--config", (dir / "config.json").string(), "--out", (dir / "o").string()}) ==
          cli::kExitOk);
    CHECK(fs::exists(dir / "o" / "cost.json"));
}

TEST_CASE("shipped configs parse") {
    for (const auto& entry : fs::directory_iterator(fs::path(SCHROLAB_SOURCE_DIR) / "configs")) {
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(cli::load_config(entry.path()));
    }
}
