#include "schrolab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>

#include "schrolab/error.hpp"
#include "schrolab/experiments.hpp"
#include "schrolab/functionals.hpp"
#include "schrolab/interpolation.hpp"
#include "schrolab/io.hpp"
#include "schrolab/semigroup.hpp"

namespace schrolab::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

Generator ExperimentConfig::generator() const {
    if (generator_kind == "ornstein_uhlenbeck") return Generator::ornstein_uhlenbeck();
    return Generator::laplacian(dimension);
}

Grid ExperimentConfig::grid() const { return Grid(dimension, half_width, grid_points); }

// ---------------------------------------------------------------- parsing

namespace {

void allow_keys(const json& obj, std::initializer_list<std::string_view> keys, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (auto k : keys) known = known || item.key() == k;
        if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    return obj.at(key);
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + ": expected a finite number");
    return x;
}

int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return v.get<int>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + ": expected a string");
    return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& where) {
    if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
    return v.get<bool>();
}

std::vector<double> as_numbers(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

template <typename T, typename F>
void optional_field(const json& obj, const char* key, T& target, F convert, const std::string& where) {
    if (obj.contains(key)) target = convert(obj.at(key), where + "." + key);
}

// A scalar (1D) or one entry per axis.
std::array<double, 2> per_axis(const json& v, int dimension, double fill, const std::string& where) {
    std::array<double, 2> out{fill, fill};
    if (v.is_number()) {
        if (dimension != 1) throw ConfigError(where + ": expected one value per axis");
        out[0] = as_number(v, where);
        return out;
    }
    const auto values = as_numbers(v, where);
    if (static_cast<int>(values.size()) != dimension) throw ConfigError(where + ": expected one value per axis");
    for (int a = 0; a < dimension; ++a) out[a] = values[a];
    return out;
}

GaussianSpec parse_gaussian(const json& obj, int dimension, const std::string& where,
                            std::initializer_list<std::string_view> keys) {
    allow_keys(obj, keys, where);
    GaussianSpec g;
    g.mean = per_axis(require(obj, "mean", where), dimension, 0.0, where + ".mean");
    g.variance = per_axis(require(obj, "variance", where), dimension, 1.0, where + ".variance");
    for (int a = 0; a < dimension; ++a)
        if (!(g.variance[a] > 0.0)) throw ConfigError(where + ".variance: must be positive");
    return g;
}

MeasureSpec parse_measure(const json& obj, int dimension, const fs::path& base_dir, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    const std::string type = as_string(require(obj, "type", where), where + ".type");
    if (type == "gaussian") return parse_gaussian(obj, dimension, where, {"type", "mean", "variance"});
    if (type == "mixture") {
        allow_keys(obj, {"type", "components"}, where);
        const json& comps = require(obj, "components", where);
        if (!comps.is_array() || comps.empty()) throw ConfigError(where + ".components: expected a non-empty array");
        MixtureSpec mix;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            const std::string w = where + ".components[" + std::to_string(i) + "]";
            const GaussianSpec g = parse_gaussian(comps[i], dimension, w, {"weight", "mean", "variance"});
            const double weight = as_number(require(comps[i], "weight", w), w + ".weight");
            if (!(weight > 0.0)) throw ConfigError(w + ".weight: must be positive");
            mix.components.push_back({weight, g});
        }
        return mix;
    }
    if (type == "tabulated") {
        allow_keys(obj, {"type", "path"}, where);
        fs::path p = as_string(require(obj, "path", where), where + ".path");
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        return TabulatedSpec{p};
    }
    throw ConfigError(where + ".type: unknown measure type '" + type + "'");
}

CurveConfig parse_curve(const json& obj, const std::string& where) {
    allow_keys(obj, {"kind", "speed", "rate"}, where);
    CurveConfig c;
    c.kind = as_string(require(obj, "kind", where), where + ".kind");
    static const std::set<std::string> kinds{"heat_flow", "translation", "dilation", "fixed"};
    if (!kinds.count(c.kind)) throw ConfigError(where + ".kind: unknown curve kind '" + c.kind + "'");
    optional_field(obj, "speed", c.speed, as_number, where);
    optional_field(obj, "rate", c.rate, as_number, where);
    return c;
}

HarnessConfig parse_harness(const json& obj) {
    const std::string where = "harness";
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    HarnessConfig h;
    h.name = as_string(require(obj, "name", where), where + ".name");
    if (h.name == "cost") {
        allow_keys(obj, {"name", "samples"}, where);
    } else if (h.name == "interpolate") {
        allow_keys(obj, {"name", "samples", "dump_measures"}, where);
        optional_field(obj, "dump_measures", h.dump_measures, as_bool, where);
    } else if (h.name == "derivative") {
        allow_keys(obj,
                   {"name", "samples", "curve_mu", "curve_nu", "t", "h_fd", "richardson", "tol_static", "tol_dynamic"},
                   where);
        if (obj.contains("curve_mu")) h.curve_mu = parse_curve(obj.at("curve_mu"), where + ".curve_mu");
        if (obj.contains("curve_nu")) h.curve_nu = parse_curve(obj.at("curve_nu"), where + ".curve_nu");
        optional_field(obj, "t", h.t, as_number, where);
        optional_field(obj, "h_fd", h.h_fd, as_number, where);
        optional_field(obj, "richardson", h.richardson, as_bool, where);
        optional_field(obj, "tol_static", h.tol_static, as_number, where);
        optional_field(obj, "tol_dynamic", h.tol_dynamic, as_number, where);
        if (!(h.h_fd > 0.0)) throw ConfigError(where + ".h_fd: must be positive");
    } else if (h.name == "continuity") {
        allow_keys(obj, {"name", "samples", "radii", "monotone_slack", "final_gap"}, where);
        h.radii = as_numbers(require(obj, "radii", where), where + ".radii");
        optional_field(obj, "monotone_slack", h.monotone_slack, as_number, where);
        optional_field(obj, "final_gap", h.final_gap, as_number, where);
    } else if (h.name == "contraction") {
        allow_keys(obj, {"name", "samples", "times", "relative_slack", "correction_intervals"}, where);
        h.times = as_numbers(require(obj, "times", where), where + ".times");
        optional_field(obj, "relative_slack", h.relative_slack, as_number, where);
        optional_field(obj, "correction_intervals", h.correction_intervals, as_int, where);
    } else if (h.name == "talagrand") {
        allow_keys(obj, {"name", "samples", "branch", "horizons"}, where);
        h.branch = as_string(require(obj, "branch", where), where + ".branch");
        if (h.branch != "positive_curvature" && h.branch != "zero_curvature")
            throw ConfigError(where + ".branch: expected positive_curvature or zero_curvature");
        h.horizons = as_numbers(require(obj, "horizons", where), where + ".horizons");
    } else {
        throw ConfigError(where + ".name: unknown harness '" + h.name + "'");
    }
    optional_field(obj, "samples", h.samples, as_int, where);
    if (h.samples < 33 || h.samples % 2 == 0) throw ConfigError(where + ".samples: must be odd and at least 33");
    return h;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    allow_keys(doc, {"schema", "generator", "grid", "mu", "nu", "horizon", "solver", "harness", "output_dir"}, "config");
    const std::string schema = as_string(require(doc, "schema", "config"), "config.schema");
    if (schema != kSchema) throw ConfigError("config.schema: expected '" + std::string(kSchema) + "', got '" + schema + "'");

    ExperimentConfig cfg;
    const json& gen = require(doc, "generator", "config");
    allow_keys(gen, {"kind", "dimension"}, "generator");
    cfg.generator_kind = as_string(require(gen, "kind", "generator"), "generator.kind");
    if (cfg.generator_kind != "laplacian" && cfg.generator_kind != "ornstein_uhlenbeck")
        throw ConfigError("generator.kind: expected laplacian or ornstein_uhlenbeck");
    int gen_dim = 1;
    optional_field(gen, "dimension", gen_dim, as_int, "generator");

    const json& grid = require(doc, "grid", "config");
    allow_keys(grid, {"dimension", "half_width", "points"}, "grid");
    optional_field(grid, "dimension", cfg.dimension, as_int, "grid");
    optional_field(grid, "half_width", cfg.half_width, as_number, "grid");
    optional_field(grid, "points", cfg.grid_points, as_int, "grid");
    if (cfg.dimension != 1 && cfg.dimension != 2) throw ConfigError("grid.dimension: must be 1 or 2");
    if (gen_dim != cfg.dimension) throw ConfigError("generator.dimension: does not match grid.dimension");
    if (cfg.generator_kind == "ornstein_uhlenbeck" && cfg.dimension != 1)
        throw ConfigError("generator: the Ornstein-Uhlenbeck generator is 1D only");
    if (!(cfg.half_width > 0.0)) throw ConfigError("grid.half_width: must be positive");
    if (cfg.grid_points < 8) throw ConfigError("grid.points: must be at least 8");

    cfg.mu = parse_measure(require(doc, "mu", "config"), cfg.dimension, base_dir, "mu");
    cfg.nu = parse_measure(require(doc, "nu", "config"), cfg.dimension, base_dir, "nu");
    optional_field(doc, "horizon", cfg.horizon, as_number, "config");
    if (!(cfg.horizon > 0.0)) throw ConfigError("config.horizon: must be positive");

    if (doc.contains("solver")) {
        const json& s = doc.at("solver");
        allow_keys(s, {"tol", "max_iter"}, "solver");
        optional_field(s, "tol", cfg.solver.tol, as_number, "solver");
        optional_field(s, "max_iter", cfg.solver.max_iter, as_int, "solver");
        if (!(cfg.solver.tol > 0.0)) throw ConfigError("solver.tol: must be positive");
        if (cfg.solver.max_iter < 1) throw ConfigError("solver.max_iter: must be at least 1");
    }
    cfg.harness = parse_harness(require(doc, "harness", "config"));
    cfg.output_dir = doc.contains("output_dir") ? fs::path(as_string(doc.at("output_dir"), "config.output_dir"))
                                                : fs::path("out");
    if (cfg.output_dir.is_relative() && !base_dir.empty()) cfg.output_dir = base_dir / cfg.output_dir;
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError("cannot read config " + path.string() + ": " + e.what());
    }
    return parse_config(text, path.parent_path());
}

// --------------------------------------------------------------- commands

namespace {

struct Check {
    std::string name;
    double value;
    double threshold;
    bool pass;
};

json checks_json(const std::vector<Check>& checks) {
    json arr = json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
    return arr;
}

json diagnostics_json(const SolverDiagnostics& d) {
    return {{"iterations", d.iterations},
            {"residual_mu", d.residual_mu},
            {"residual_nu", d.residual_nu},
            {"gauge_shift", d.gauge_shift},
            {"kernel_under_resolved", d.kernel_under_resolved}};
}

void write_json(const fs::path& path, const json& doc) { io::write_file_atomic(path, doc.dump(2) + "\n"); }

// Writes the summary and returns the exit code for the checks.
int finish(const fs::path& path, json summary, const std::vector<Check>& checks) {
    bool pass = true;
    for (const auto& c : checks) pass = pass && c.pass;
    summary["checks"] = checks_json(checks);
    summary["pass"] = pass;
    write_json(path, summary);
    for (const auto& c : checks)
        if (!c.pass)
            std::cerr << "assertion failed: " << c.name << " = " << io::format_double(c.value) << " (threshold "
                      << io::format_double(c.threshold) << ")\n";
    return pass ? kExitOk : kExitAssertion;
}

std::string yes_no(bool b) { return b ? "1" : "0"; }

int cmd_cost(const ExperimentConfig& cfg, const fs::path& out) {
    const Grid grid = cfg.grid();
    const auto pot = solve_schroedinger_system(make_grid_measure(cfg.mu, grid), make_grid_measure(cfg.nu, grid),
                                               cfg.generator(), cfg.horizon, cfg.solver);
    const BbsReport r = bbs_report(pot, cfg.harness.samples);
    write_potentials_csv(out / "potentials.csv", pot);
    json doc{{"sch", r.sch},
             {"c_dynamic", r.c_dynamic},
             {"entropy_mu", r.entropy_mu},
             {"entropy_nu", r.entropy_nu},
             {"bbs_residual", r.residual},
             {"horizon", cfg.horizon},
             {"horizon_extension", r.horizon_extension},
             {"samples", cfg.harness.samples},
             {"diagnostics", diagnostics_json(r.diagnostics)}};
    write_json(out / "cost.json", doc);
    return kExitOk;
}

int cmd_interpolate(const ExperimentConfig& cfg, const fs::path& out) {
    const Grid grid = cfg.grid();
    const auto pot = solve_schroedinger_system(make_grid_measure(cfg.mu, grid), make_grid_measure(cfg.nu, grid),
                                               cfg.generator(), cfg.horizon, cfg.solver);
    const DynamicCost cost = dynamic_cost(pot, cfg.harness.samples);
    write_path_csv(out / "path.csv", cost.path);
    json doc{{"samples", cfg.harness.samples}, {"horizon", cfg.horizon}, {"c_dynamic", cost.value},
             {"kinetic", cost.kinetic}, {"diagnostics", diagnostics_json(pot.diagnostics)}};
    if (grid.dimension() == 1 && pot.generator.kind() == Generator::Kind::Laplacian) {
        const auto rows = entropy_profile(pot, cfg.harness.samples);
        std::string csv = "s,entropy,fisher,d1,d2,convex\n";
        bool convex = true;
        for (const auto& r : rows) {
            csv += io::csv_row(std::vector<std::string>{io::format_double(r.s), io::format_double(r.entropy),
                                                        io::format_double(r.fisher), io::format_double(r.d1),
                                                        io::format_double(r.d2), yes_no(r.convex)});
            convex = convex && r.convex;
        }
        io::write_file_atomic(out / "profile.csv", csv);
        doc["profile_convex"] = convex;
    }
    if (cfg.harness.dump_measures) {
        for (std::size_t k = 0; k < cost.path.size(); ++k) {
            char name[32];
            std::snprintf(name, sizeof name, "sample_%03zu.csv", k);
            write_density_csv(out / "measures" / name, cost.path[k].measure);
        }
    }
    write_json(out / "interpolate.json", doc);
    return kExitOk;
}

MeasureCurve build_curve(const CurveConfig& c, const MeasureSpec& spec, const Grid& grid, const Generator& gen,
                         const std::vector<double>& times, const std::string& which) {
    if (c.kind == "heat_flow") return heat_flow_curve(gen, make_grid_measure(spec, grid), times);
    if (c.kind == "fixed") return constant_curve(make_grid_measure(spec, grid), times);
    const auto* g = std::get_if<GaussianSpec>(&spec);
    if (!g) throw ConfigError("harness.curve_" + which + ": " + c.kind + " curves need a gaussian marginal");
    if (c.kind == "translation") return translation_curve(grid, *g, {c.speed, 0.0}, times);
    return dilation_curve(grid, *g, c.rate, times);
}

int cmd_derivative(const ExperimentConfig& cfg, const fs::path& out) {
    const auto& h = cfg.harness;
    const Grid grid = cfg.grid();
    const Generator gen = cfg.generator();
    std::vector<double> times{h.t - h.h_fd, h.t, h.t + h.h_fd};
    if (h.richardson) times = {h.t - h.h_fd, h.t - 0.5 * h.h_fd, h.t, h.t + 0.5 * h.h_fd, h.t + h.h_fd};
    const auto cm = build_curve(h.curve_mu, cfg.mu, grid, gen, times, "mu");
    const auto cn = build_curve(h.curve_nu, cfg.nu, grid, gen, times, "nu");
    const DerivativeRecord r =
        derivative_check(cm, cn, gen, cfg.horizon, h.t, {h.h_fd, h.samples, h.richardson}, cfg.solver);

    std::string csv = "t,h_fd,sch,cost,analytic_static,analytic_dynamic,fd_sch,fd_cost,rel_err_static,rel_err_dynamic\n";
    csv += io::csv_row(std::vector<double>{r.t, r.h_fd, r.sch, r.cost, r.analytic_static, r.analytic_dynamic, r.fd_sch,
                                           r.fd_cost, r.rel_err_static, r.rel_err_dynamic});
    io::write_file_atomic(out / "derivative.csv", csv);
    json doc{{"t", r.t},
             {"h_fd", r.h_fd},
             {"richardson", h.richardson},
             {"sch", r.sch},
             {"cost", r.cost},
             {"analytic_static", r.analytic_static},
             {"analytic_dynamic", r.analytic_dynamic},
             {"fd_sch", r.fd_sch},
             {"fd_cost", r.fd_cost}};
    return finish(out / "derivative.json", doc,
                  {{"rel_err_static", r.rel_err_static, h.tol_static, r.rel_err_static < h.tol_static},
                   {"rel_err_dynamic", r.rel_err_dynamic, h.tol_dynamic, r.rel_err_dynamic < h.tol_dynamic}});
}

int cmd_continuity(const ExperimentConfig& cfg, const fs::path& out) {
    const auto& h = cfg.harness;
    const Grid grid = cfg.grid();
    ContinuityOptions copts;
    copts.horizon = cfg.horizon;
    copts.samples = h.samples;
    copts.monotone_slack = h.monotone_slack;
    copts.final_gap = h.final_gap;
    const auto sweep = continuity_sweep(make_grid_measure(cfg.mu, grid), make_grid_measure(cfg.nu, grid),
                                        cfg.generator(), h.radii, copts, cfg.solver);

    std::string csv = "radius,converged,cost,gap,fisher_mu,fisher_nu,entropy_mu,entropy_nu,w2_mu,w2_nu,alpha_mu,alpha_nu\n";
    auto row = [](const ContinuityRecord& r) {
        return io::csv_row(std::vector<std::string>{
            io::format_double(r.radius), yes_no(r.converged), io::format_double(r.cost), io::format_double(r.gap),
            io::format_double(r.fisher_mu), io::format_double(r.fisher_nu), io::format_double(r.entropy_mu),
            io::format_double(r.entropy_nu), io::format_double(r.w2_mu), io::format_double(r.w2_nu),
            io::format_double(r.alpha_mu), io::format_double(r.alpha_nu)});
    };
    json failures = json::array();
    for (const auto& r : sweep.records) {
        csv += row(r);
        if (!r.converged) failures.push_back({{"radius", r.radius}, {"message", r.failure}});
    }
    csv += row(sweep.reference);
    io::write_file_atomic(out / "continuity.csv", csv);

    const auto& last = sweep.records.back();
    json doc{{"reference_cost", sweep.reference.cost}, {"radii", h.radii}, {"failures", failures}};
    return finish(out / "continuity.json", doc,
                  {{"gap_monotone", sweep.monotone ? 1.0 : 0.0, h.monotone_slack, sweep.monotone},
                   {"final_gap", last.gap, h.final_gap, sweep.final_gap_ok},
                   {"fisher_entropy_bounded", sweep.bounded ? 1.0 : 0.0, copts.bound_fraction, sweep.bounded}});
}

int cmd_contraction(const ExperimentConfig& cfg, const fs::path& out) {
    const auto& h = cfg.harness;
    const Grid grid = cfg.grid();
    if (cfg.generator_kind != "laplacian") throw ConfigError("contraction needs the laplacian generator");
    ContractionOptions copts;
    copts.horizon = cfg.horizon;
    copts.samples = h.samples;
    copts.relative_slack = h.relative_slack;
    copts.correction_intervals = h.correction_intervals;
    const auto report =
        contraction_check(make_grid_measure(cfg.mu, grid), make_grid_measure(cfg.nu, grid), h.times, copts, cfg.solver);

    std::string csv = "t,cost,correction,bound,holds\n";
    std::vector<Check> checks;
    for (const auto& r : report.rows) {
        csv += io::csv_row(std::vector<std::string>{io::format_double(r.t), io::format_double(r.cost),
                                                    io::format_double(r.correction), io::format_double(r.bound),
                                                    yes_no(r.holds)});
        checks.push_back({"contraction_t=" + io::format_double(r.t), r.cost,
                          r.bound + h.relative_slack * std::abs(r.bound), r.holds});
    }
    io::write_file_atomic(out / "contraction.csv", csv);
    return finish(out / "contraction.json", {{"cost0", report.cost0}, {"relative_slack", h.relative_slack}}, checks);
}

int cmd_talagrand(const ExperimentConfig& cfg, const fs::path& out) {
    const auto& h = cfg.harness;
    const Grid grid = cfg.grid();
    const TalagrandBranch branch =
        h.branch == "positive_curvature" ? TalagrandBranch::PositiveCurvature : TalagrandBranch::ZeroCurvature;
    const auto report = talagrand_check(make_grid_measure(cfg.mu, grid), make_grid_measure(cfg.nu, grid),
                                        cfg.generator(), branch, h.horizons, h.samples, cfg.solver);

    std::string csv = "horizon,cost,bound,slack,holds\n";
    std::vector<Check> checks;
    for (const auto& r : report.rows) {
        csv += io::csv_row(std::vector<std::string>{io::format_double(r.horizon), io::format_double(r.cost),
                                                    io::format_double(r.bound), io::format_double(r.slack),
                                                    yes_no(r.holds)});
        checks.push_back({"slack_T=" + io::format_double(r.horizon), r.slack, -kTalagrandTightness, r.holds});
    }
    io::write_file_atomic(out / "talagrand.csv", csv);
    return finish(out / "talagrand.json", {{"branch", to_string(branch)}}, checks);
}

}  // namespace

int run_command(const std::string& command, const ExperimentConfig& config, const std::optional<fs::path>& out) {
    const fs::path dir = out ? *out : config.output_dir;
    try {
        if (command != config.harness.name)
            throw ConfigError("command '" + command + "' does not match harness.name '" + config.harness.name + "'");
        if (command == "cost") return cmd_cost(config, dir);
        if (command == "interpolate") return cmd_interpolate(config, dir);
        if (command == "derivative") return cmd_derivative(config, dir);
        if (command == "continuity") return cmd_continuity(config, dir);
        if (command == "contraction") return cmd_contraction(config, dir);
        if (command == "talagrand") return cmd_talagrand(config, dir);
        throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitSolver;
    }
}

int main(int argc, char** argv) {
    CLI::App app{"Entropic transport experiments on grids"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    for (const char* name : {"cost", "interpolate", "derivative", "continuity", "contraction", "talagrand"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment configuration (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    ExperimentConfig config;
    try {
        config = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    std::optional<fs::path> out;
    if (!out_dir.empty()) out = fs::path(out_dir);
    return run_command(command, config, out);
}

}  // namespace schrolab::cli
