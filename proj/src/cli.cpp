#include "mfgc/cli.hpp"

#include "mfgc/artifacts.hpp"
#include "mfgc/potential_duality.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace mfgc {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Json assumptions_json(const AssumptionReport& report) {
    Json arr = Json::array();
    for (const auto& c : report.checks) {
        arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}, {"witness", c.witness}});
    }
    return arr;
}

Json duality_json(const DualityGap& g) {
    return {{"gap", g.gap},
            {"B",
             {{"total", g.primal.total},
              {"running", g.primal.running},
              {"coupling", g.primal.coupling},
              {"price", g.primal.price},
              {"terminal", g.primal.terminal}}},
            {"D",
             {{"total", g.dual.total},
              {"initial", g.dual.initial},
              {"price_conj", g.dual.price_conj},
              {"coupling_conj", g.dual.coupling_conj},
              {"infinite", g.dual.infinite},
              {"F_star_certified", g.dual.F_star_certified}}},
            {"hjb_defect", g.hjb_defect},
            {"dual_infeasibility", g.dual_infeasibility},
            {"fp_defect", g.fp_defect},
            {"eps_quad", g.eps_quad}};
}

Json residuals_json(const SolveReport& r) {
    Json stages = Json::array();
    for (const auto& s : r.stages) {
        stages.push_back({{"tau", s.tau},
                          {"iterations", s.residuals.size()},
                          {"history", s.residuals},
                          {"converged", s.converged},
                          {"tripwire", s.tripwire}});
    }
    return {{"stages", stages},
            {"total_iterations", r.total_iterations},
            {"final", r.stages.empty() || r.stages.back().residuals.empty() ? Json(nullptr)
                                                                            : Json(r.stages.back().residuals.back())},
            {"equilibrium_per_slice", r.equilibrium_residuals}};
}

Json monitors_json(const Monitors& m) {
    return {{"u_sup", m.u_sup},       {"u_bound", m.u_bound},   {"grad_u_sup", m.grad_u_sup},
            {"grad_u_bound", m.grad_u_bound}, {"P_sup", m.P_sup},   {"P_bound", m.P_bound},
            {"v_sup", m.v_sup},       {"v_bound", m.v_bound},   {"max_projection", m.max_projection},
            {"breaches", m.breaches}};
}

Json tau_path_json(const SolveReport& r) {
    Json arr = Json::array();
    for (const auto& s : r.stages) arr.push_back(s.tau);
    return arr;
}

Json defects_json(const EquationDefects& d) {
    return {{"hjb", d.hjb}, {"hjb_positive", d.hjb_positive}, {"fp", d.fp},
            {"equilibrium", d.equilibrium}, {"mass", d.mass}, {"min_m", d.min_m}};
}

Json skeleton_report(const std::string& status, const std::string& message) {
    return {{"status", status},
            {"message", message},
            {"residuals", Json::object()},
            {"monitors", Json::object()},
            {"duality_gap", nullptr},
            {"tau_path", Json::array()},
            {"timings", Json::object()},
            {"checks", Json::object()}};
}

void fill_report(Json& report, const SolveReport& r) {
    report["residuals"] = residuals_json(r);
    report["monitors"] = monitors_json(r.monitors);
    report["tau_path"] = tau_path_json(r);
    report["checks"]["warnings"] = r.warnings;
}

struct LevelOutcome {
    SolveResult result;
    DualityGap gap;
    double duality_seconds = 0.0;
};

LevelOutcome solve_level(const ModelSpec& model, const Grids& grids, const SolveOptions& options) {
    LevelOutcome out;
    out.result = solve_mfgc(model, grids, options);
    const auto start = Clock::now();
    out.gap = duality_gap(model, grids, out.result.state, options.pde);
    out.result.report.duality = summarize(out.gap);
    out.duality_seconds = seconds_since(start);
    return out;
}

}  // namespace

int cmd_solve(const SolveCommand& command, std::ostream& out, std::ostream& err) {
    const auto start = Clock::now();
    RunConfig cfg;
    try {
        cfg = load_config(command.config);
    } catch (const MfgcError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    const fs::path dir = command.out_dir.empty() ? fs::path(cfg.output_dir) : command.out_dir;
    if (dir.empty()) {
        err << "error: no output directory (use --out or output.dir)\n";
        return kExitUsage;
    }
    if (command.refine_ladder < 0) {
        err << "error: --refine-ladder must be >= 0\n";
        return kExitUsage;
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        err << "error: cannot create " << dir.string() << ": " << ec.message() << '\n';
        return kExitUsage;
    }

    Json report = skeleton_report("error", "");
    auto finish = [&](int code) -> int {
        report["timings"]["total_seconds"] = seconds_since(start);
        try {
            write_json_file(dir / "report.json", report);
        } catch (const MfgcError& e) {
            err << "error: " << e.what() << '\n';
            return kExitUsage;
        }
        return code;
    };

    try {
        write_json_file(dir / "config.json", to_json(cfg));
        const ModelSpec model = build_model(cfg);
        const Grids grids = build_grids(cfg, cfg.grid.n, cfg.grid.nt);

        const AssumptionReport assumptions = validate_assumptions(model, cfg.validation);
        report["checks"] = {{"assumptions", assumptions_json(assumptions)},
                            {"all_passed", assumptions.all_passed()},
                            {"forced", command.force},
                            {"warnings", Json::array()}};
        if (!assumptions.all_passed() && !command.force) {
            std::string names;
            for (const auto& n : assumptions.failed()) names += (names.empty() ? "" : ", ") + n;
            report["status"] = "invalid_model";
            report["message"] = "model validation failed: " + names;
            err << "error: model validation failed: " << names << '\n';
            for (const auto& c : assumptions.checks) {
                if (!c.passed) err << "  " << c.name << ": " << c.detail << '\n';
            }
            err << "  (rerun with --force to solve anyway)\n";
            return finish(kExitUsage);
        }

        LevelOutcome level;
        try {
            level = solve_level(model, grids, cfg.solver);
        } catch (const NonConvergenceError& e) {
            const SolveResult& partial = e.partial();
            fill_report(report, partial.report);
            report["status"] = "non_convergence";
            report["message"] = e.what();
            report["timings"]["solve_seconds"] = partial.report.wall_seconds;
            write_state(dir, model, grids, partial.state);
            err << "non-convergence: " << e.what() << '\n';
            return finish(kExitNonConvergence);
        }

        const SolveResult& res = level.result;
        fill_report(report, res.report);
        report["checks"]["assumptions"] = assumptions_json(assumptions);
        report["residuals"]["equation_defects"] = defects_json(equation_defects(model, grids, res.state, cfg.solver.pde));
        report["duality_gap"] = duality_json(level.gap);
        report["timings"]["solve_seconds"] = res.report.wall_seconds;
        report["timings"]["duality_seconds"] = level.duality_seconds;
        write_state(dir, model, grids, res.state);

        int code = kExitOk;
        if (command.refine_ladder >= 2) {
            if (!model_is_resampleable(cfg.model)) {
                fail(ErrorCode::Schema, "/model: --refine-ladder needs closed-form fields (no samples or csv)");
            }
            Json ladder = Json::array();
            auto entry = [&](int lv, int n, int nt, const LevelOutcome* o, const std::string& status) {
                Json e = {{"level", lv}, {"n", n}, {"nt", nt}, {"h", 1.0 / n}, {"dt", cfg.grid.T / nt}, {"status", status}};
                if (o) {
                    e["gap"] = o->gap.gap;
                    e["B"] = o->gap.primal.total;
                    e["D"] = o->gap.dual.total;
                    e["iterations"] = o->result.report.total_iterations;
                }
                return e;
            };
            ladder.push_back(entry(0, cfg.grid.n, cfg.grid.nt, &level, "converged"));
            for (int lv = 1; lv < command.refine_ladder; ++lv) {
                const int n = cfg.grid.n << lv;
                const int nt = cfg.grid.nt << (2 * lv);
                const ModelSpec fine = build_model(cfg, n);
                try {
                    const LevelOutcome o = solve_level(fine, build_grids(cfg, n, nt), cfg.solver);
                    ladder.push_back(entry(lv, n, nt, &o, "converged"));
                } catch (const NonConvergenceError& e) {
                    ladder.push_back(entry(lv, n, nt, nullptr, "non_convergence"));
                    err << "ladder level " << lv << ": " << e.what() << '\n';
                    code = kExitNonConvergence;
                }
            }
            report["ladder"] = ladder;
        }

        report["status"] = code == kExitOk ? "converged" : "non_convergence";
        out << "converged: " << res.report.total_iterations << " outer iterations, duality gap "
            << format_double(level.gap.gap) << ", artifacts in " << dir.string() << '\n';
        for (const auto& w : res.report.warnings) out << "warning: " << w << '\n';
        return finish(code);
    } catch (const MfgcError& e) {
        report["message"] = e.what();
        err << "error: " << e.what() << '\n';
        if (e.code() == ErrorCode::NonConvergence) {
            report["status"] = "non_convergence";
            return finish(kExitNonConvergence);
        }
        return finish(kExitUsage);
    }
}

namespace {

struct Check {
    std::string name;
    bool passed;
    double value;
    double threshold;
    std::string detail;
};

}  // namespace

int cmd_verify(const fs::path& run_dir, std::ostream& out, std::ostream& err) {
    std::vector<Check> checks;
    try {
        if (!fs::exists(run_dir / "report.json") || !fs::exists(run_dir / "config.json")) {
            err << "error: " << run_dir.string() << " holds no run artifacts (report.json, config.json)\n";
            return kExitUsage;
        }
        const Json report = read_json_file(run_dir / "report.json");
        const RunConfig cfg = parse_config(read_json_file(run_dir / "config.json"), run_dir);
        const ModelSpec model = build_model(cfg);
        const Grids grids = build_grids(cfg, cfg.grid.n, cfg.grid.nt);
        const MfgState state = read_state(run_dir, model, grids);
        const ScalarField gamma = read_scalar_field(run_dir / "gamma.csv", grids);
        const int nt = grids.time.steps();
        const double tol = std::max(1e-9, 100.0 * cfg.solver.outer_tol);

        const std::string status = report.value("status", std::string("missing"));
        checks.push_back({"converged", status == "converged", 0.0, 0.0, "report status: " + status});

        double mass = 0.0;
        double min_m = std::numeric_limits<double>::infinity();
        int worst_mass = 0;
        for (int j = 0; j <= nt; ++j) {
            const double e = std::abs(integrate(grids.space, state.m.slices[j]) - 1.0);
            if (e > mass) {
                mass = e;
                worst_mass = j;
            }
            min_m = std::min(min_m, *std::min_element(state.m.slices[j].begin(), state.m.slices[j].end()));
        }
        checks.push_back({"mass_conservation", mass <= 1e-12, mass, 1e-12,
                          "max |mass - 1| over slices (worst slice " + std::to_string(worst_mass) + ")"});
        checks.push_back({"positivity", min_m >= 0.0, std::max(0.0, -min_m), 0.0, "min over all m values is " + format_double(min_m)});

        const double init = sup_distance(state.m.slices[0], model.initial_m0);
        checks.push_back({"initial_condition", init <= tol, init, tol, "sup |m(0) - m0|"});
        double term = 0.0;
        for (std::size_t i = 0; i < grids.space.size(); ++i) {
            term = std::max(term, std::abs(state.u.slices[nt][i] - model.terminal_g[i]));
        }
        checks.push_back({"terminal_condition", term <= tol, term, tol, "sup |u(T) - g|"});

        const VectorField w = hjb_control_gradients(model, grids, state.u, cfg.solver.pde);
        double eq = 0.0;
        int worst_eq = 0;
        for (int j = 0; j <= nt; ++j) {
            const double r = equilibrium_residual(model, grids.time.t(j), state.v.slices[j], state.P[j],
                                                  state.m.slices[j], w.slices[j]);
            if (r > eq) {
                eq = r;
                worst_eq = j;
            }
        }
        checks.push_back({"equilibrium_residual", eq <= tol, eq, tol,
                          "max over slices of the (v, P) defect (worst slice " + std::to_string(worst_eq) + ")"});

        const double fp = fp_defect(model, grids, state.m, state.v, 1.0, cfg.solver.pde);
        checks.push_back({"fp_residual", fp <= tol, fp, tol, "primal feasibility: sup FP step defect of (m, v)"});

        const ScalarField f = coupling_field(model, grids, state.m);
        const HjbDefect hjb = hjb_defect(model, grids, state.u, state.P, f, 1.0, cfg.solver.pde);
        checks.push_back({"hjb_residual", hjb.abs <= tol, hjb.abs, tol, "sup HJB step defect with source f(m)"});

        const HjbDefect dual = hjb_defect(model, grids, state.u, state.P, gamma, 1.0, cfg.solver.pde);
        checks.push_back({"dual_feasibility", dual.positive <= tol, dual.positive, tol,
                          "sup positive part of the dual constraint with the stored gamma"});

        const PotentialValue B = potential_B_full(model, grids, state.m, state.v);
        const DualValue D = dual_D(model, grids, state.u, state.P, gamma);
        const double gap = B.total - D.total;
        const double eps = 1e-9 * (1.0 + std::abs(B.total));
        checks.push_back({"duality_gap", gap >= -eps - tol && gap <= tol && !D.infinite, gap, tol,
                          "B_full - D with the stored gamma (lower slack " + format_double(eps) + ")"});
    } catch (const MfgcError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    bool all = true;
    Json arr = Json::array();
    for (const Check& c : checks) {
        all = all && c.passed;
        arr.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold},
                       {"detail", c.detail}});
        out << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << format_double(c.value)
            << " threshold=" << format_double(c.threshold) << "  " << c.detail << '\n';
    }
    try {
        write_json_file(run_dir / "verify.json", {{"passed", all}, {"checks", arr}});
    } catch (const MfgcError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return all ? kExitOk : kExitVerifyFailed;
}

int cmd_export_plots(const fs::path& run_dir, std::ostream& out, std::ostream& err) {
    try {
        if (!fs::exists(run_dir / "report.json") || !fs::exists(run_dir / "config.json")) {
            err << "error: " << run_dir.string() << " holds no run artifacts (report.json, config.json)\n";
            return kExitUsage;
        }
        const Json report = read_json_file(run_dir / "report.json");
        const RunConfig cfg = parse_config(read_json_file(run_dir / "config.json"), run_dir);
        const ModelSpec model = build_model(cfg);
        const Grids grids = build_grids(cfg, cfg.grid.n, cfg.grid.nt);
        const ScalarField m = read_scalar_field(run_dir / "m.csv", grids);
        const std::vector<PriceVec> P = read_price_csv(run_dir / "P.csv", grids, model.k);
        const fs::path plots = run_dir / "plots";
        fs::create_directories(plots);
        std::vector<std::string> written;

        {
            std::ofstream f(plots / "residual_history.csv");
            f << "stage,tau,iteration,residual\n";
            const Json& stages = report.at("residuals").at("stages");
            for (std::size_t s = 0; s < stages.size(); ++s) {
                const Json& hist = stages[s].at("history");
                for (std::size_t it = 0; it < hist.size(); ++it) {
                    f << s << ',' << format_double(stages[s].at("tau").get<double>()) << ',' << it + 1 << ','
                      << format_double(hist[it].get<double>()) << '\n';
                }
            }
            written.push_back("residual_history.csv");
        }
        {
            const int nt = grids.time.steps();
            std::vector<int> times;
            for (int q = 0; q <= 4; ++q) {
                const int j = static_cast<int>(std::lround(q * nt / 4.0));
                if (times.empty() || times.back() != j) times.push_back(j);
            }
            std::ofstream f(plots / "m_profiles.csv");
            f << (grids.space.dim() == 2 ? "i,j,x,y" : "i,x");
            for (int j : times) f << ",t=" << format_double(grids.time.t(j));
            f << '\n';
            for (std::size_t node = 0; node < grids.space.size(); ++node) {
                f << grids.space.axis_index(node, 0);
                if (grids.space.dim() == 2) f << ',' << grids.space.axis_index(node, 1);
                for (int c = 0; c < grids.space.dim(); ++c) f << ',' << format_double(grids.space.coord(node, c));
                for (int j : times) f << ',' << format_double(m.slices[j][node]);
                f << '\n';
            }
            written.push_back("m_profiles.csv");
        }
        {
            std::ofstream f(plots / "diagnostics.csv");
            f << "t,mass,min_m,max_m,l2_m";
            for (int c = 0; c < model.k; ++c) f << ",P" << c + 1;
            f << '\n';
            for (int j = 0; j <= grids.time.steps(); ++j) {
                const Slice& s = m.slices[j];
                Slice sq(s.size());
                for (std::size_t i = 0; i < s.size(); ++i) sq[i] = s[i] * s[i];
                f << format_double(grids.time.t(j)) << ',' << format_double(integrate(grids.space, s)) << ','
                  << format_double(*std::min_element(s.begin(), s.end())) << ','
                  << format_double(*std::max_element(s.begin(), s.end())) << ','
                  << format_double(std::sqrt(integrate(grids.space, sq)));
                for (int c = 0; c < model.k; ++c) f << ',' << format_double(P[j](c));
                f << '\n';
            }
            written.push_back("diagnostics.csv");
        }
        if (report.contains("ladder")) {
            std::ofstream f(plots / "gap_ladder.csv");
            f << "level,n,nt,h,dt,gap\n";
            for (const Json& e : report["ladder"]) {
                if (!e.contains("gap")) continue;
                f << e.at("level").get<int>() << ',' << e.at("n").get<int>() << ',' << e.at("nt").get<int>() << ','
                  << format_double(e.at("h").get<double>()) << ',' << format_double(e.at("dt").get<double>()) << ','
                  << format_double(e.at("gap").get<double>()) << '\n';
            }
            written.push_back("gap_ladder.csv");
        }
        for (const auto& name : written) out << (plots / name).string() << '\n';
        return kExitOk;
    } catch (const MfgcError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Json::exception& e) {
        err << "error: malformed report.json: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace mfgc
