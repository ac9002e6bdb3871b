// kirchhoff2d: constrained Kirchhoff minimization on 2D grids.
//
// Subcommands: q solve, wells, oracle, minimize, sweep, fit, report.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kirchhoff/asymptotics.hpp"
#include "kirchhoff/io.hpp"
#include "kirchhoff/minimizer.hpp"

using namespace kirchhoff;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr const char* kDefaultConstants = "q_constants.json";

struct GroundState {
    RadialProfile profile;
    GroundStateConstants constants;
};

// Solve the radial problem (or reuse the cached constants file for a*) and
// keep the constants file up to date.
GroundState ensure_ground_state(const std::string& constants_path, double tol = 1e-10,
                                double rmax = 20.0, double dr = 1e-3) {
    GroundState gs;
    gs.profile = solve_q(tol, rmax, dr);
    gs.constants = ground_state_constants(gs.profile);
    if (!std::filesystem::exists(constants_path))
        atomic_write(constants_path, constants_json(gs.constants));
    return gs;
}

std::vector<double> parse_b_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string cell;
    while (std::getline(in, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

InitSpec parse_init(const json& j) {
    InitSpec init;
    std::string kind = j.value("kind", "gaussian");
    if (kind == "gaussian") {
        init.kind = InitKind::Gaussian;
        if (j.contains("center"))
            init.center = {j["center"].at(0).get<double>(), j["center"].at(1).get<double>()};
        init.sigma = j.value("sigma", 1.0);
    } else if (kind == "random") {
        init.kind = InitKind::Random;
        init.seed = j.value("seed", (uint64_t)1);
    } else if (kind == "field") {
        init.kind = InitKind::FieldSnapshot;
        std::string path = j.at("path").get<std::string>();
        init.snapshot = parse_field_csv(read_file(path), read_file(path + ".json"));
    } else {
        throw std::invalid_argument("config: unknown init kind '" + kind + "'");
    }
    return init;
}

int cmd_q_solve(double tol, double rmax, double dr, const std::string& out,
                const std::string& constants_out) {
    RadialProfile p = solve_q(tol, rmax, dr);
    GroundStateConstants c = ground_state_constants(p);
    atomic_write(out, profile_csv(p));
    atomic_write(constants_out, constants_json(c));
    std::printf("q0_star = %s\na_star = %s\n", fmt17(c.q0_star).c_str(), fmt17(c.a_star).c_str());
    return 0;
}

int cmd_wells(const std::string& pot_path, const std::string& out,
              const std::string& constants_path) {
    PotentialSpec spec = parse_potential_json(read_file(pot_path));
    GroundState gs = ensure_ground_state(constants_path);
    WellAnalysis a = analyze_wells(spec, gs.profile);
    atomic_write(out, wells_json(a, spec));
    std::printf("p = %s, lambda0 = %s, |Z0| = %zu\n", fmt17(a.p).c_str(),
                fmt17(a.lambda0).c_str(), a.z0.size());
    return 0;
}

int cmd_oracle(const std::string& a_text, double b, double p, const std::string& lambda0_text,
               const std::string& out, const std::string& constants_path) {
    GroundState gs = ensure_ground_state(constants_path);
    double a_star = gs.constants.a_star;
    double a = parse_a_value(a_text, a_star);
    double lambda0 = 0.0;
    if (!lambda0_text.empty())
        lambda0 = lambda0_text == "lambda2" ? gs.constants.second_moment
                                            : std::stod(lambda0_text);

    json j;
    j["a"] = a;
    j["b"] = b;
    j["a_star"] = a_star;
    auto rb = r_b(a, b, a_star);
    j["r_b"] = rb ? json(*rb) : json();
    auto ebar = e_bar_closed(a, b, a_star);
    j["e_bar"] = ebar ? json(*ebar) : json("not_applicable");
    if (a >= a_star && (a > a_star || (p > 0.0 && lambda0 > 0.0))) {
        auto eps = theory_epsilon(a, b, a_star, p, lambda0);
        j["epsilon"] = eps ? json(*eps) : json();
    }
    if (p > 0.0 && lambda0 > 0.0) {
        j["p"] = p;
        j["lambda0"] = lambda0;
        j["e_critical"] = theory_energy_astar(b, p, lambda0, a_star);
    }
    std::string text = j.dump(2) + "\n";
    if (out.empty())
        std::fputs(text.c_str(), stdout);
    else
        atomic_write(out, text);
    return 0;
}

int cmd_minimize(const std::string& cfg_path, const std::string& out,
                 const std::string& field_out, const std::string& log_out,
                 const std::string& constants_path) {
    json j = json::parse(read_file(cfg_path));
    Problem problem;
    std::optional<double> a_star;
    if (j.at("a").is_string()) {
        GroundState gs = ensure_ground_state(constants_path);
        a_star = gs.constants.a_star;
    }
    problem.a = j.at("a").is_string() ? parse_a_value(j["a"].get<std::string>(), a_star)
                                      : j["a"].get<double>();
    problem.b = j.at("b").get<double>();
    if (j.contains("potential") && !j["potential"].is_null()) {
        if (j["potential"].is_string())
            problem.potential = parse_potential_json(read_file(j["potential"].get<std::string>()));
        else
            problem.potential = parse_potential_json(j["potential"].dump());
    }
    MinimizeConfig cfg;
    cfg.grid.half_width = j.at("grid").at("L").get<double>();
    cfg.grid.n = j.at("grid").at("n").get<int>();
    cfg.dt = j.value("dt", cfg.dt);
    cfg.tol_energy = j.value("tol_energy", cfg.tol_energy);
    cfg.tol_residual = j.value("tol_residual", cfg.tol_residual);
    cfg.max_iter = j.value("max_iter", cfg.max_iter);
    cfg.theta_max = j.value("theta_max", cfg.theta_max);
    cfg.cg_tol = j.value("cg_tol", cfg.cg_tol);
    if (j.contains("init")) cfg.init = parse_init(j["init"]);
    cfg.record_log = !log_out.empty();

    MinimizerResult res = minimize(problem, cfg);
    atomic_write(out, result_json(res));
    if (!field_out.empty()) {
        atomic_write(field_out, field_csv(res.field));
        atomic_write(field_out + ".json", field_sidecar_json(res.field.grid));
    }
    if (!log_out.empty()) atomic_write(log_out, iteration_log_csv(res.log));
    if (!res.converged) {
        std::fprintf(stderr, "minimize: %s after %d iterations (residual %s, theta %s)\n",
                     res.status == SolveStatus::BlowupDetected ? "blow-up detected"
                                                               : "not converged",
                     res.iterations, fmt17(res.residual).c_str(),
                     fmt17(res.integrals.theta).c_str());
        return 2;
    }
    return 0;
}

int cmd_sweep(const std::string& a_text, const std::string& b_text, const std::string& pot_path,
              double L, int n, double dt, int max_iter, double tol_energy, double tol_residual,
              const std::string& out, const std::string& constants_path) {
    GroundState gs = ensure_ground_state(constants_path);
    Problem problem;
    problem.a = parse_a_value(a_text, gs.constants.a_star);
    std::optional<WellAnalysis> analysis;
    if (!pot_path.empty()) {
        problem.potential = parse_potential_json(read_file(pot_path));
        analysis = analyze_wells(*problem.potential, gs.profile);
    }
    MinimizeConfig cfg;
    cfg.grid = {L, n};
    cfg.dt = dt;
    cfg.max_iter = max_iter;
    cfg.tol_energy = tol_energy;
    cfg.tol_residual = tol_residual;
    cfg.init.kind = InitKind::Gaussian;
    if (problem.potential) cfg.init.center = problem.potential->wells.front().location;
    cfg.init.sigma = 1.0;

    SweepContext ctx;
    ctx.profile = &gs.profile;
    ctx.constants = gs.constants;
    if (analysis) ctx.analysis = &*analysis;

    SweepResult sweep = sweep_b(problem, parse_b_list(b_text), cfg, ctx);
    atomic_write(out, sweep_csv(sweep));
    atomic_write(out + ".meta.json", sweep_meta_json(sweep));
    int bad = 0;
    for (const auto& r : sweep.rows)
        if (!r.converged) ++bad;
    if (sweep.aborted || bad) {
        std::fprintf(stderr, "sweep: %d of %zu rows did not converge%s\n", bad,
                     sweep.rows.size(), sweep.aborted ? " (aborted on blow-up)" : "");
        return 2;
    }
    return 0;
}

int cmd_fit(const std::string& in, const std::string& mode_text, const std::string& out) {
    std::string meta_path = in + ".meta.json";
    std::string meta = std::filesystem::exists(meta_path) ? read_file(meta_path) : "";
    SweepResult sweep = parse_sweep_csv(read_file(in), meta.empty() ? nullptr : &meta);
    FitMode mode;
    if (mode_text == "supercritical_energy")
        mode = FitMode::SupercriticalEnergy;
    else if (mode_text == "critical_energy")
        mode = FitMode::CriticalEnergy;
    else if (mode_text == "epsilon")
        mode = FitMode::Epsilon;
    else
        throw std::invalid_argument("fit: unknown mode '" + mode_text + "'");
    FitResult f = fit_power_law(sweep, mode);
    std::string text = fit_json(f, mode_text);
    if (out.empty())
        std::fputs(text.c_str(), stdout);
    else
        atomic_write(out, text);
    return 0;
}

int cmd_report(const std::string& in, const std::string& analysis_path, const std::string& pot_path,
               const std::string& out) {
    std::string meta_path = in + ".meta.json";
    std::string meta = std::filesystem::exists(meta_path) ? read_file(meta_path) : "";
    SweepResult sweep = parse_sweep_csv(read_file(in), meta.empty() ? nullptr : &meta);
    std::optional<WellAnalysis> analysis;
    std::optional<PotentialSpec> potential;
    if (!analysis_path.empty()) {
        std::vector<Vec2> locs;
        analysis = parse_wells_json(read_file(analysis_path), &locs);
    }
    if (!pot_path.empty()) potential = parse_potential_json(read_file(pot_path));
    DiagnosticsReport rep = verify_limits(sweep, analysis ? &*analysis : nullptr,
                                          potential ? &*potential : nullptr);
    atomic_write(out, report_json(rep));
    for (const auto& c : rep.checks)
        std::printf("%-28s %s  measured=%s\n", c.name.c_str(), to_string(c.verdict).c_str(),
                    fmt17(c.measured).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mass-constrained Kirchhoff energy minimization on 2D grids"};
    app.require_subcommand(0, 1);

    bool show_version = false;
    std::string constants_path = kDefaultConstants;
    int jobs = 1;
    app.add_flag("--version", show_version, "print version and the constants file hash");
    app.add_option("--constants", constants_path, "ground-state constants file");
    app.add_option("--jobs", jobs, "worker cap for multi-start runs");

    // q solve
    auto* q = app.add_subcommand("q", "radial ground state");
    auto* qs = q->add_subcommand("solve", "shooting + bisection for Q");
    double tol = 1e-10, rmax = 20.0, dr = 1e-3;
    std::string q_out = "q.csv";
    qs->add_option("--tol", tol, "bisection width");
    qs->add_option("--rmax", rmax, "integration radius");
    qs->add_option("--dr", dr, "radial step");
    qs->add_option("--out", q_out, "profile CSV (r,q,dq)");

    // wells
    auto* wells = app.add_subcommand("wells", "analyze potential wells");
    std::string wells_pot, wells_out = "wells.json";
    wells->add_option("--potential", wells_pot, "potential JSON")->required();
    wells->add_option("--out", wells_out, "analysis JSON");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "closed-form limit values");
    std::string oracle_a, oracle_l0, oracle_out;
    double oracle_b = 0.0, oracle_p = 0.0;
    oracle->add_option("--a", oracle_a, "interaction strength (number or e.g. 2astar)")
        ->required();
    oracle->add_option("--b", oracle_b, "Kirchhoff coefficient")->required();
    oracle->add_option("--p", oracle_p, "well degree (for a = astar laws)");
    oracle->add_option("--lambda0", oracle_l0, "flattest-well lambda (number or 'lambda2')");
    oracle->add_option("--out", oracle_out, "output JSON (stdout when omitted)");

    // minimize
    auto* minimize_cmd = app.add_subcommand("minimize", "single constrained minimization");
    std::string min_cfg, min_out = "result.json", min_field, min_log;
    minimize_cmd->add_option("--config", min_cfg, "config JSON")->required();
    minimize_cmd->add_option("--out", min_out, "result JSON");
    minimize_cmd->add_option("--field", min_field, "field CSV snapshot");
    minimize_cmd->add_option("--log", min_log, "iteration log CSV");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "warm-started continuation in b");
    std::string sw_a, sw_b, sw_pot, sw_out = "sweep.csv";
    double sw_L = 6.0, sw_dt = 0.05, sw_te = 1e-11, sw_tr = 1e-5;
    int sw_n = 257, sw_maxit = 50000;
    sweep_cmd->add_option("--a", sw_a)->required();
    sweep_cmd->add_option("--b", sw_b, "comma-separated decreasing list")->required();
    sweep_cmd->add_option("--potential", sw_pot, "potential JSON (omit for the free functional)");
    sweep_cmd->add_option("--L", sw_L, "grid half-width");
    sweep_cmd->add_option("--n", sw_n, "grid points per axis");
    sweep_cmd->add_option("--dt", sw_dt);
    sweep_cmd->add_option("--max-iter", sw_maxit);
    sweep_cmd->add_option("--tol-energy", sw_te);
    sweep_cmd->add_option("--tol-residual", sw_tr);
    sweep_cmd->add_option("--out", sw_out, "sweep CSV (meta JSON written alongside)");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "power-law fit of a sweep");
    std::string fit_in, fit_mode = "supercritical_energy", fit_out;
    fit_cmd->add_option("--in", fit_in, "sweep CSV")->required();
    fit_cmd->add_option("--mode", fit_mode, "supercritical_energy | critical_energy | epsilon");
    fit_cmd->add_option("--out", fit_out, "fit JSON (stdout when omitted)");

    // report
    auto* report_cmd = app.add_subcommand("report", "limit-law diagnostics of a sweep");
    std::string rep_in, rep_analysis, rep_pot, rep_out = "report.json";
    report_cmd->add_option("--in", rep_in, "sweep CSV")->required();
    report_cmd->add_option("--analysis", rep_analysis, "wells JSON");
    report_cmd->add_option("--potential", rep_pot, "potential JSON");
    report_cmd->add_option("--out", rep_out, "report JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);  // prints usage or help text
        return code == 0 ? 0 : 1;
    }

    try {
        if (show_version) {
            std::printf("kirchhoff2d %s\n", kVersion);
            auto h = file_hash(constants_path);
            if (h)
                std::printf("constants %s fnv1a64=%016" PRIx64 "\n", constants_path.c_str(), *h);
            else
                std::printf("constants none\n");
            return 0;
        }
        if (qs->parsed()) return cmd_q_solve(tol, rmax, dr, q_out, constants_path);
        if (wells->parsed()) return cmd_wells(wells_pot, wells_out, constants_path);
        if (oracle->parsed())
            return cmd_oracle(oracle_a, oracle_b, oracle_p, oracle_l0, oracle_out, constants_path);
        if (minimize_cmd->parsed())
            return cmd_minimize(min_cfg, min_out, min_field, min_log, constants_path);
        if (sweep_cmd->parsed())
            return cmd_sweep(sw_a, sw_b, sw_pot, sw_L, sw_n, sw_dt, sw_maxit, sw_te, sw_tr,
                             sw_out, constants_path);
        if (fit_cmd->parsed()) return cmd_fit(fit_in, fit_mode, fit_out);
        if (report_cmd->parsed()) return cmd_report(rep_in, rep_analysis, rep_pot, rep_out);
        std::fputs(app.help().c_str(), stdout);
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
