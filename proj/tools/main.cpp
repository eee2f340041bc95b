// binls command line: batch front end over the solver library.
// Subcommands: gn-constant, thresholds, ground-state, scan, mountain-pass, check.
// Exit codes: 0 success, 2 config error, 3 compute error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "binls/ground_state.hpp"
#include "binls/io.hpp"
#include "binls/log.hpp"
#include "binls/model.hpp"
#include "binls/mountain_pass.hpp"
#include "binls/thresholds.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace binls;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key=value view of the config; every recognized key is marked consumed
// so typos surface as config errors instead of being silently ignored.
class FlatConfig {
  public:
    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        consumed_.insert(key);
        return it->second;
    }

    double num(const std::string& key, double fallback) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        consumed_.insert(key);
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": not a number: " + it->second);
        }
    }

    long long integer(const std::string& key, long long fallback) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        consumed_.insert(key);
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": not an integer: " + it->second);
        }
    }

    bool flag(const std::string& key, bool fallback) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        consumed_.insert(key);
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError("config key " + key + ": not a boolean: " + it->second);
    }

    std::vector<double> list(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return {};
        consumed_.insert(key);
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string part;
        while (std::getline(ss, part, ',')) {
            if (part.empty()) continue;
            try {
                out.push_back(std::stod(part));
            } catch (const std::exception&) {
                throw ConfigError("config key " + key + ": bad list entry: " + part);
            }
        }
        return out;
    }

    void reject_unconsumed() const {
        for (const auto& [key, value] : kv_)
            if (!consumed_.count(key))
                throw ConfigError("unknown config key: " + key);
    }

  private:
    std::map<std::string, std::string> kv_;
    std::set<std::string> consumed_;
};

void flatten_json(const json& j, const std::string& prefix, FlatConfig& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items())
            flatten_json(v, prefix.empty() ? k : prefix + "." + k, out);
    } else if (j.is_array()) {
        std::string joined;
        for (const auto& v : j) {
            if (!joined.empty()) joined += ",";
            joined += v.is_number() ? format_g17(v.get<double>()) : v.get<std::string>();
        }
        out.set(prefix, joined);
    } else if (j.is_string()) {
        out.set(prefix, j.get<std::string>());
    } else if (j.is_boolean()) {
        out.set(prefix, j.get<bool>() ? "true" : "false");
    } else if (j.is_number()) {
        out.set(prefix, format_g17(j.get<double>()));
    } else {
        out.set(prefix, "null");
    }
}

FlatConfig load_config(const std::string& path) {
    FlatConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            flatten_json(json::parse(text), "", cfg);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config JSON parse error: ") + e.what());
        }
        return cfg;
    }
    std::stringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t\r");
        line = line.substr(begin, end - begin + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        const auto kend = key.find_last_not_of(" \t");
        key = key.substr(0, kend + 1);
        const auto vbegin = value.find_first_not_of(" \t");
        value = vbegin == std::string::npos ? "" : value.substr(vbegin);
        cfg.set(key, value);
    }
    return cfg;
}

SystemParams params_from(FlatConfig& c) {
    SystemParams p;
    p.dimension = static_cast<int>(c.integer("params.dimension", 1));
    p.alpha1 = c.num("params.alpha1", 1.0);
    p.alpha2 = c.num("params.alpha2", 1.0);
    p.beta = c.num("params.beta", 1.0);
    p.r1 = c.num("params.r1", 2.0);
    p.r2 = c.num("params.r2", 2.0);
    p.rho = c.num("params.rho", 1.0);
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return p;
}

GridSpec grid_from(FlatConfig& c, int dimension) {
    GridSpec g;
    g.dimension = dimension;
    g.points_per_axis = static_cast<int>(c.integer("grid.points_per_axis", 256));
    g.box_length = c.num("grid.box_length", 40.0);
    try {
        g.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return g;
}

SolveConfig solve_from(FlatConfig& c, std::uint64_t seed) {
    SolveConfig s;
    s.step_init = c.num("solve.step_init", s.step_init);
    s.armijo_c = c.num("solve.armijo_c", s.armijo_c);
    s.step_shrink = c.num("solve.step_shrink", s.step_shrink);
    s.grad_tol = c.num("solve.grad_tol", s.grad_tol);
    s.max_iters = static_cast<int>(c.integer("solve.max_iters", s.max_iters));
    s.vanish_energy_eps = c.num("solve.vanish_energy_eps", s.vanish_energy_eps);
    s.vanish_coupling_eps = c.num("solve.vanish_coupling_eps", s.vanish_coupling_eps);
    s.precondition = c.flag("solve.precondition", s.precondition);
    s.seed = seed;
    try {
        s.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return s;
}

double require_finite(double x, const char* name) {
    if (!std::isfinite(x))
        throw std::runtime_error(std::string("non-finite value in output: ") + name);
    return x;
}

void emit_artifact(const fs::path& out_dir, const std::string& name,
                   const std::string& text) {
    fs::create_directories(out_dir);
    atomic_write_text(out_dir / name, text);
    std::cout << text;
}

json report_to_json(const SolveReport& rep, bool include_history) {
    json j;
    j["status"] = to_string(rep.status);
    j["energy"] = require_finite(rep.energy, "energy");
    j["lambda"] = require_finite(rep.lambda, "lambda");
    j["mass_u"] = require_finite(rep.mass_u, "mass_u");
    j["mass_v"] = require_finite(rep.mass_v, "mass_v");
    j["pohozaev_residual"] = require_finite(rep.pohozaev_residual, "pohozaev_residual");
    j["el_residual"] = require_finite(rep.el_residual, "el_residual");
    j["iterations"] = rep.iterations;
    if (include_history) j["energy_history"] = rep.energy_history;
    return j;
}

json threshold_set_to_json(const ThresholdSet& t) {
    json j;
    j["gamma_r"] = require_finite(t.gamma_r, "gamma_r");
    j["r_bar"] = require_finite(t.r_bar, "r_bar");
    j["two_star_star"] = std::isfinite(t.two_star_star) ? json(t.two_star_star) : json("inf");
    j["c_gn"] = require_finite(t.c_gn, "c_gn");
    j["d1"] = require_finite(t.d1, "d1");
    j["d2"] = require_finite(t.d2, "d2");
    j["mass_critical_cap"] = require_finite(t.mass_critical_cap, "mass_critical_cap");
    if (t.c_star) j["c_star"] = require_finite(*t.c_star, "c_star");
    if (t.c_lower_star) j["c_lower_star"] = require_finite(*t.c_lower_star, "c_lower_star");
    if (t.r_estimate) {
        j["r_estimate"] = require_finite(*t.r_estimate, "r_estimate");
        j["r_diverging"] = t.r_diverging;
        j["r_diverging_note"] = "evidence-only";
    }
    if (t.rho_star_estimate)
        j["rho_star_estimate"] = require_finite(*t.rho_star_estimate, "rho_star_estimate");
    return j;
}

std::string scan_to_csv(const ScanResult& scan) {
    std::string csv =
        "rho,status,energy,mj_value,lambda,mass_u,mass_v,pohozaev_residual,"
        "el_residual,iterations\r\n";
    for (const ScanRow& row : scan.rows) {
        csv += format_g17(require_finite(row.rho, "rho"));
        csv += ",";
        csv += to_string(row.status);
        csv += ",";
        csv += format_g17(require_finite(row.energy, "energy"));
        csv += ",";
        csv += format_g17(require_finite(row.mj, "mj_value"));
        csv += ",";
        csv += format_g17(require_finite(row.lambda, "lambda"));
        csv += ",";
        csv += format_g17(require_finite(row.mass_u, "mass_u"));
        csv += ",";
        csv += format_g17(require_finite(row.mass_v, "mass_v"));
        csv += ",";
        csv += format_g17(require_finite(row.pohozaev_residual, "pohozaev_residual"));
        csv += ",";
        csv += format_g17(require_finite(row.el_residual, "el_residual"));
        csv += ",";
        csv += std::to_string(row.iterations);
        csv += "\r\n";
    }
    return csv;
}

json scan_to_json(const ScanResult& scan) {
    json rows = json::array();
    for (const ScanRow& row : scan.rows) {
        rows.push_back({{"rho", row.rho},
                        {"status", to_string(row.status)},
                        {"energy", require_finite(row.energy, "energy")},
                        {"mj_value", row.mj},
                        {"lambda", require_finite(row.lambda, "lambda")},
                        {"mass_u", row.mass_u},
                        {"mass_v", row.mass_v},
                        {"pohozaev_residual", row.pohozaev_residual},
                        {"el_residual", row.el_residual},
                        {"iterations", row.iterations}});
    }
    json checks = json::array();
    for (const SubadditivityCheck& chk : scan.checks) {
        checks.push_back({{"rho_small", chk.rho_small},
                          {"rho_large", chk.rho_large},
                          {"energy_small", chk.energy_small},
                          {"energy_large", chk.energy_large},
                          {"holds", chk.holds}});
    }
    return json{{"rows", rows}, {"subadditivity_checks", checks}};
}

struct CliOptions {
    std::string config_path;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::string format = "csv";
    std::string check_state;
};

int run_gn_constant(FlatConfig& cfg, const CliOptions& opt) {
    const SystemParams params = params_from(cfg);
    const GridSpec grid = grid_from(cfg, params.dimension);
    const double tol = cfg.num("gn.tol", 1e-11);
    const int max_iters = static_cast<int>(cfg.integer("gn.max_iters", 5000));
    const bool dump = cfg.flag("gn.dump_extremal", false);
    cfg.reject_unconsumed();

    const GnEstimate gn = gn_constant_estimate(params.dimension, params.r(), grid, tol,
                                               max_iters);
    json j;
    j["c_gn"] = require_finite(gn.c_gn, "c_gn");
    j["converged"] = gn.converged;
    j["iterations"] = gn.iterations;
    j["r"] = params.r();
    j["grid"] = grid_to_json(grid);
    if (dump) write_field_dump(fs::path(opt.out_dir) / "gn_extremal", gn.extremal);
    emit_artifact(opt.out_dir, "gn_constant.json", j.dump(2) + "\n");
    return 0;
}

int run_thresholds(FlatConfig& cfg, const CliOptions& opt) {
    const SystemParams params = params_from(cfg);
    const GridSpec grid = grid_from(cfg, params.dimension);
    const double given_c_gn = cfg.num("thresholds.c_gn", 0.0);
    const int restarts = static_cast<int>(cfg.integer("thresholds.restarts", 6));
    const bool subcritical = params.r() <= params.r_bar() * (1.0 + 1e-12);
    const bool with_r = cfg.flag("thresholds.estimate_r", subcritical);
    const std::uint64_t seed = opt.seed.value_or(
        static_cast<std::uint64_t>(cfg.integer("run.seed", 0)));
    cfg.reject_unconsumed();
    if (with_r && !subcritical)
        throw ConfigError("thresholds.estimate_r requires r <= r_bar");

    GnEstimate gn;
    double c_gn = given_c_gn;
    if (!(c_gn > 0.0)) {
        gn = gn_constant_estimate(params.dimension, params.r(), grid);
        c_gn = gn.c_gn;
    }
    ThresholdSet t = thresholds(params, c_gn);
    if (with_r) {
        const RealField* extremal = gn.extremal.size() > 0 ? &gn.extremal : nullptr;
        const REstimate r_est = estimate_R(params, grid, restarts, seed, extremal);
        t.r_estimate = r_est.value;
        t.r_diverging = r_est.diverging;
        if (r_est.value > 0.0) t.rho_star_estimate = rho_star_from_R(params, r_est.value);
    }
    emit_artifact(opt.out_dir, "thresholds.json", threshold_set_to_json(t).dump(2) + "\n");
    return 0;
}

int run_ground_state(FlatConfig& cfg, const CliOptions& opt) {
    const SystemParams params = params_from(cfg);
    const GridSpec grid = grid_from(cfg, params.dimension);
    const std::uint64_t seed = opt.seed.value_or(
        static_cast<std::uint64_t>(cfg.integer("run.seed", 0)));
    SolveConfig solve = solve_from(cfg, seed);
    const std::string strategy = cfg.str("run.strategy", "best-of");
    const bool history = cfg.flag("run.history", false);
    const bool dump = cfg.flag("run.dump_state", false);
    cfg.reject_unconsumed();

    SolveReport rep;
    if (strategy == "best-of") {
        rep = best_of_restarts(params, grid, solve, opt.jobs);
    } else {
        InitStrategy s;
        try {
            s = parse_strategy(strategy);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        rep = minimize_ground_state(params, grid, solve, s);
    }
    json j = report_to_json(rep, history);
    j["mj_value"] = mj_value(params);
    if (dump)
        write_state_pair(fs::path(opt.out_dir) / "ground_state.state", rep.final_state,
                         params);
    emit_artifact(opt.out_dir, "ground_state.json", j.dump(2) + "\n");
    return 0;
}

int run_scan(FlatConfig& cfg, const CliOptions& opt) {
    const SystemParams params = params_from(cfg);
    const GridSpec grid = grid_from(cfg, params.dimension);
    const std::uint64_t seed = opt.seed.value_or(
        static_cast<std::uint64_t>(cfg.integer("run.seed", 0)));
    SolveConfig solve = solve_from(cfg, seed);
    const std::vector<double> rhos = cfg.list("scan.rhos");
    cfg.reject_unconsumed();
    if (rhos.empty()) throw ConfigError("scan requires scan.rhos (comma-separated list)");

    const ScanResult scan = dichotomy_scan(params, rhos, grid, solve, opt.jobs);
    if (opt.format == "json") {
        emit_artifact(opt.out_dir, "scan.json", scan_to_json(scan).dump(2) + "\n");
    } else {
        emit_artifact(opt.out_dir, "scan.csv", scan_to_csv(scan));
    }
    return 0;
}

int run_mountain_pass(FlatConfig& cfg, const CliOptions& opt) {
    const SystemParams params = params_from(cfg);
    const GridSpec grid = grid_from(cfg, params.dimension);
    const std::uint64_t seed = opt.seed.value_or(
        static_cast<std::uint64_t>(cfg.integer("run.seed", 0)));
    SaddleConfig sc;
    sc.el_tol = cfg.num("mp.el_tol", sc.el_tol);
    sc.p_tol = cfg.num("mp.p_tol", sc.p_tol);
    sc.max_outer = static_cast<int>(cfg.integer("mp.max_outer", sc.max_outer));
    sc.descent_steps = static_cast<int>(cfg.integer("mp.descent_steps", sc.descent_steps));
    sc.step_init = cfg.num("mp.step_init", sc.step_init);
    sc.seed = seed;
    const std::string profile = cfg.str("mp.profile", "coupled-gaussian");
    if (profile == "gn-extremal")
        sc.profile = SaddleProfile::GnExtremal;
    else if (profile != "coupled-gaussian")
        throw ConfigError("mp.profile must be coupled-gaussian or gn-extremal");
    const bool geometry_only = cfg.flag("mp.geometry_only", false);
    const double given_c_gn = cfg.num("thresholds.c_gn", 0.0);
    const bool dump = cfg.flag("mp.dump_state", false);
    cfg.reject_unconsumed();

    double c_gn = given_c_gn;
    if (!(c_gn > 0.0))
        c_gn = gn_constant_estimate(params.dimension, params.r(), grid).c_gn;
    const ThresholdSet th = thresholds(params, c_gn);

    const GeometryReport geo = bracket_roots_h(params, th);
    json gj;
    gj["feasible"] = geo.feasible;
    gj["t_bar"] = require_finite(geo.t_bar, "t_bar");
    gj["h_max"] = require_finite(geo.h_max, "h_max");
    if (geo.feasible) {
        gj["R0"] = require_finite(geo.R0, "R0");
        gj["R1"] = require_finite(geo.R1, "R1");
    }
    if (geometry_only) {
        emit_artifact(opt.out_dir, "geometry.json", gj.dump(2) + "\n");
        return 0;
    }

    const SaddleReport rep = saddle_search(params, grid, sc, th);
    json j;
    j["accepted"] = rep.accepted;
    j["level"] = require_finite(rep.level, "level");
    j["lambda"] = require_finite(rep.lambda, "lambda");
    j["pohozaev_residual"] = require_finite(rep.pohozaev_residual, "pohozaev_residual");
    j["el_residual"] = require_finite(rep.el_residual, "el_residual");
    j["s_star"] = require_finite(rep.s_star, "s_star");
    j["lambda_bound_ok"] = rep.lambda_bound_ok;
    j["bending"] = require_finite(rep.bending, "bending");
    j["coupling"] = require_finite(rep.coupling, "coupling");
    j["iterations"] = rep.iterations;
    j["geometry"] = gj;
    if (!rep.failure.empty()) j["failure"] = rep.failure;
    if (dump)
        write_state_pair(fs::path(opt.out_dir) / "mountain_pass.state", rep.state, params);
    emit_artifact(opt.out_dir, "mountain_pass.json", j.dump(2) + "\n");
    return 0;
}

int run_check(FlatConfig& cfg, const CliOptions& opt) {
    std::string base = opt.check_state;
    if (base.empty()) base = cfg.str("check.state", "");
    cfg.reject_unconsumed();
    if (base.empty()) throw ConfigError("check requires --state or check.state");

    const LoadedState loaded = read_state_pair(base);
    const StatePair& p = loaded.state;
    const SystemParams& params = loaded.params;

    const double lambda = multiplier_estimate(p, params);
    const SpectralMoments mu = spectral_moments(p.u);
    const SpectralMoments mv = spectral_moments(p.v);
    auto slack = [](const SpectralMoments& m) {
        if (m.grad <= 0.0) return 0.0;
        return 1.0 - m.grad / std::sqrt(m.mass * m.bih);
    };
    json j;
    j["total_mass"] = require_finite(total_mass(p), "total_mass");
    j["mass_target"] = params.mass_target();
    j["mass_u"] = mu.mass;
    j["mass_v"] = mv.mass;
    j["energy_I"] = require_finite(energy_I(p, params), "energy_I");
    j["energy_J"] = energy_J(p, params);
    j["mj_value"] = mj_value(params);
    j["lambda"] = require_finite(lambda, "lambda");
    j["el_residual"] = require_finite(euler_lagrange_residual(p, params, lambda),
                                      "el_residual");
    j["pohozaev_identity_residual"] =
        require_finite(pohozaev_identity_residual(p, params, lambda), "pohozaev");
    j["pohozaev_P"] = require_finite(pohozaev_P(p, params), "pohozaev_P");
    j["coupling_integral"] = coupling_integral(p, params);
    j["interpolation_slack_u"] = slack(mu);
    j["interpolation_slack_v"] = slack(mv);
    emit_artifact(opt.out_dir, "check.json", j.dump(2) + "\n");
    return 0;
}

void print_error(int code, const std::string& message) {
    json err = {{"error", message}, {"code", code}};
    std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"binls: normalized solutions of the mixed-dispersion biharmonic "
                 "NLS system"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "config file (key=value or JSON)");
    app.add_option("--jobs", opt.jobs, "worker pool size")->check(CLI::PositiveNumber);
    std::uint64_t seed_flag = 0;
    const auto* seed_opt = app.add_option("--seed", seed_flag, "master seed (overrides run.seed)");
    app.add_option("--out", opt.out_dir, "output directory");
    app.add_option("--format", opt.format, "scan output format")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI::App* sub_gn = app.add_subcommand("gn-constant", "estimate the GN constant");
    CLI::App* sub_th = app.add_subcommand("thresholds", "closed-form threshold table");
    CLI::App* sub_gs = app.add_subcommand("ground-state", "mass-constrained minimization");
    CLI::App* sub_scan = app.add_subcommand("scan", "dichotomy scan over rho");
    CLI::App* sub_mp = app.add_subcommand("mountain-pass", "supercritical saddle search");
    CLI::App* sub_check = app.add_subcommand("check", "diagnostics of a saved state");
    sub_check->add_option("--state", opt.check_state, "state pair base path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        print_error(2, e.what());
        return 2;
    }
    if (seed_opt->count() > 0) opt.seed = seed_flag;

    FlatConfig cfg;
    try {
        cfg = load_config(opt.config_path);
    } catch (const std::exception& e) {
        print_error(2, e.what());
        return 2;
    }

    try {
        if (sub_gn->parsed()) return run_gn_constant(cfg, opt);
        if (sub_th->parsed()) return run_thresholds(cfg, opt);
        if (sub_gs->parsed()) return run_ground_state(cfg, opt);
        if (sub_scan->parsed()) return run_scan(cfg, opt);
        if (sub_mp->parsed()) return run_mountain_pass(cfg, opt);
        if (sub_check->parsed()) return run_check(cfg, opt);
        print_error(2, "no subcommand");
        return 2;
    } catch (const ConfigError& e) {
        print_error(2, e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error(3, e.what());
        return 3;
    }
}
