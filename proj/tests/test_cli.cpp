#include "doctest.h"
#include "fixtures.hpp"

#include "mfgc/artifacts.hpp"
#include "mfgc/cli.hpp"

#include <fstream>
#include <sstream>

using namespace mfgc;
namespace fs = std::filesystem;

namespace {

Json homogeneous_config() {
    return Json::parse(R"({
      "model": {"sigma": 0.05, "k": 1, "lagrangian": {"type": "quadratic", "weight": 1.0}, "phi": 1.0,
                "price": {"type": "affine", "a": 1.0, "b": 1.0}, "coupling": {"type": "zero"}, "g": 0.0, "m0": 1.0},
      "grid": {"d": 1, "n": 64, "T": 1.0, "nt": 128},
      "solver": {"outer_tol": 1e-10},
      "seed": 3
    })");
}

Json congestion_config(int n = 16, int nt = 16) {
    Json j = Json::parse(R"({
      "model": {"sigma": 0.2, "lagrangian": {"type": "quadratic"}, "price": {"type": "affine", "a": 1.0, "b": 1.0},
                "coupling": {"type": "convolution", "kernel": {"type": "delta"}, "K": {"type": "linear", "slope": 1.0}},
                "m0": {"type": "bump", "center": [0.5], "width": 0.1, "amplitude": 1.0, "floor": 0.2}},
      "solver": {"outer_tol": 1e-8}
    })");
    j["grid"] = {{"d", 1}, {"n", n}, {"T", 1.0}, {"nt", nt}};
    return j;
}

fs::path write_config(const fs::path& dir, const Json& j) {
    const fs::path p = dir / "config_in.json";
    write_json_file(p, j);
    return p;
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run solve(const fs::path& config, const fs::path& out_dir, bool force = false, int ladder = 0) {
    std::ostringstream out, err;
    const int code = cmd_solve({config, out_dir, force, ladder}, out, err);
    return {code, out.str(), err.str()};
}

Run verify(const fs::path& dir) {
    std::ostringstream out, err;
    const int code = cmd_verify(dir, out, err);
    return {code, out.str(), err.str()};
}

Run plots(const fs::path& dir) {
    std::ostringstream out, err;
    const int code = cmd_export_plots(dir, out, err);
    return {code, out.str(), err.str()};
}

Json failed_checks(const fs::path& dir) {
    Json names = Json::array();
    const Json doc = read_json_file(dir / "verify.json");
    for (const Json& c : doc.at("checks")) {
        if (!c.at("passed").get<bool>()) names.push_back(c.at("name"));
    }
    return names;
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

const fs::path& congestion_run() {
    static const fs::path dir = [] {
        const fs::path root = fixtures::scratch_dir("cli_congestion");
        const Run r = solve(write_config(root, congestion_config()), root / "run");
        REQUIRE(r.code == kExitOk);
        return root / "run";
    }();
    return dir;
}

fs::path copy_run(const std::string& name) {
    const fs::path dst = fixtures::scratch_dir(name) / "run";
    fs::copy(congestion_run(), dst, fs::copy_options::recursive);
    return dst;
}

}  // namespace

TEST_CASE("config defaults and round trip") {
    const RunConfig cfg = parse_config(congestion_config(), ".");
    CHECK(cfg.model.at("sigma") == 0.2);
    CHECK(cfg.solver.tau_schedule.size() == 5);
    CHECK(cfg.solver.equilibrium.tol_P == 1e-10);
    const RunConfig again = parse_config(to_json(cfg), ".");
    CHECK(to_json(again) == to_json(cfg));
    const ModelSpec m = build_model(cfg);
    const ModelSpec ref = fixtures::congestion(16);
    CHECK(sup_distance(m.initial_m0, ref.initial_m0) <= 1e-14);
    CHECK(model_is_resampleable(cfg.model));
}

TEST_CASE("config schema errors carry JSON pointer paths") {
    auto message = [](const Json& j) {
        try {
            parse_config(j, ".");
        } catch (const MfgcError& e) {
            return std::string(e.what());
        }
        return std::string("accepted");
    };
    Json j = congestion_config();
    j["grid"]["n"] = "many";
    CHECK(message(j).find("/grid/n") != std::string::npos);
    j = congestion_config();
    j["model"]["price"]["c"] = 1;
    CHECK(message(j).find("/model/price") != std::string::npos);
    CHECK(message(j).find("unknown key") != std::string::npos);
    j = congestion_config();
    j["solver"]["tau_schedule"] = {0.0, 0.8, 0.4, 1.0};
    CHECK(message(j).find("/solver") != std::string::npos);
    j = congestion_config();
    j["grid"]["d"] = 3;
    CHECK(message(j).find("unsupported dimension") != std::string::npos);
    j = congestion_config();
    j["bogus"] = 1;
    CHECK(message(j).find("bogus") != std::string::npos);
    j = congestion_config();
    j["model"]["m0"] = {{"type", "csv"}, {"path", "does_not_exist.csv"}};
    CHECK(message(j) != "accepted");
}

TEST_CASE("fields from samples and csv files") {
    const fs::path dir = fixtures::scratch_dir("cli_csv");
    {
        std::ofstream f(dir / "m0.csv");
        for (int i = 0; i < 8; ++i) f << i << ',' << (i < 4 ? 2.0 : 0.0) << '\n';
    }
    Json j = congestion_config(8, 16);
    j["model"]["m0"] = {{"type", "csv"}, {"path", "m0.csv"}};
    j["model"]["g"] = {{"type", "samples"}, {"values", {0, 1, 2, 3, 4, 5, 6, 7}}};
    const RunConfig cfg = parse_config(j, dir);
    const ModelSpec m = build_model(cfg);
    CHECK(m.initial_m0[0] == 2.0);
    CHECK(m.initial_m0[5] == 0.0);
    CHECK(m.terminal_g[7] == 7.0);
    CHECK_FALSE(model_is_resampleable(cfg.model));
    j["model"]["g"]["values"] = {1, 2};
    CHECK_THROWS_AS(build_model(parse_config(j, dir)), MfgcError);
}

TEST_CASE("field csv round trip is exact") {
    const Grids g = make_grids(2, 4, 1.0, 3);
    Rng rng(71);
    ScalarField s = ScalarField::filled(g, 0.0);
    for (auto& sl : s.slices) sl = fixtures::random_slice(16, rng, -1, 1);
    VectorField v = VectorField::filled(g, 0.0);
    for (auto& sl : v.slices) sl = fixtures::random_slice(32, rng, -1, 1);
    const fs::path dir = fixtures::scratch_dir("cli_roundtrip");
    write_scalar_field(dir / "s.csv", g, s);
    write_vector_field(dir / "v.csv", g, v);
    CHECK(read_scalar_field(dir / "s.csv", g).slices == s.slices);
    CHECK(read_vector_field(dir / "v.csv", g).slices == v.slices);
    CHECK(first_line(dir / "s.csv") == "# slice t=0");
    CHECK_THROWS_AS(read_scalar_field(dir / "s.csv", make_grids(2, 4, 1.0, 4)), MfgcError);
}

TEST_CASE("solve the homogeneous fixture") {
    const fs::path root = fixtures::scratch_dir("cli_homogeneous");
    const Run r = solve(write_config(root, homogeneous_config()), root / "run");
    REQUIRE(r.code == kExitOk);
    const Json report = read_json_file(root / "run" / "report.json");
    for (const char* key : {"residuals", "monitors", "duality_gap", "tau_path", "timings", "checks"}) {
        CHECK(report.contains(key));
    }
    CHECK(report["status"] == "converged");
    const ModelSpec m = fixtures::homogeneous(64);
    for (const PriceVec& p : read_price_csv(root / "run" / "P.csv", make_grids(1, 64, 1.0, 128), 1)) {
        CHECK(std::abs(p(0) - 0.5) <= 1e-6);
    }
    CHECK(first_line(root / "run" / "P.csv") == "t,P1");
    CHECK(verify(root / "run").code == kExitOk);
}

TEST_CASE("unsupported dimension and invalid models exit 1") {
    const fs::path root = fixtures::scratch_dir("cli_invalid");
    Json j = homogeneous_config();
    j["grid"]["d"] = 3;
    Run r = solve(write_config(root, j), root / "d3");
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("unsupported dimension") != std::string::npos);

    j = homogeneous_config();
    j["model"]["price"]["a"] = -1.0;
    r = solve(write_config(root, j), root / "neg");
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("psi_monotone") != std::string::npos);
    const Json report = read_json_file(root / "neg" / "report.json");
    CHECK(report["status"] == "invalid_model");
    CHECK_FALSE(report["checks"]["all_passed"].get<bool>());

    r = solve(root / "missing.json", root / "x");
    CHECK(r.code == kExitUsage);
}

TEST_CASE("non-convergence exits 2 with partial artifacts") {
    const fs::path root = fixtures::scratch_dir("cli_nonconv");
    Json j = congestion_config();
    j["solver"]["max_outer"] = 2;
    const Run r = solve(write_config(root, j), root / "run");
    CHECK(r.code == kExitNonConvergence);
    const Json report = read_json_file(root / "run" / "report.json");
    CHECK(report["status"] == "non_convergence");
    CHECK(report["message"].get<std::string>().find("tau") != std::string::npos);
    CHECK(fs::exists(root / "run" / "m.csv"));
    const Run v = verify(root / "run");
    CHECK(v.code == kExitVerifyFailed);
    CHECK(failed_checks(root / "run").front() == "converged");
}

TEST_CASE("verify round trip and fault injection") {
    const Run ok = verify(congestion_run());
    CHECK(ok.code == kExitOk);
    CHECK(ok.out.find("FAIL") == std::string::npos);

    const Grids g = make_grids(1, 16, 1.0, 16);
    {
        const fs::path dir = copy_run("fault_mass");
        ScalarField m = read_scalar_field(dir / "m.csv", g);
        for (double& x : m.slices[7]) x *= 1.01;
        write_scalar_field(dir / "m.csv", g, m);
        const Run r = verify(dir);
        CHECK(r.code == kExitVerifyFailed);
        CHECK(r.out.find("FAIL mass_conservation") != std::string::npos);
        CHECK(failed_checks(dir).front() == "mass_conservation");
    }
    {
        const fs::path dir = copy_run("fault_v");
        VectorField v = read_vector_field(dir / "v.csv", g);
        v.slices[5][3] += 1e-3;
        write_vector_field(dir / "v.csv", g, v);
        const Run r = verify(dir);
        CHECK(r.code == kExitVerifyFailed);
        CHECK(r.out.find("FAIL equilibrium_residual") != std::string::npos);
    }
    {
        const fs::path dir = copy_run("fault_gamma");
        ScalarField gamma = read_scalar_field(dir / "gamma.csv", g);
        for (auto& sl : gamma.slices) for (double& x : sl) x -= 0.05;
        write_scalar_field(dir / "gamma.csv", g, gamma);
        const Run r = verify(dir);
        CHECK(r.code == kExitVerifyFailed);
        CHECK(r.out.find("FAIL dual_feasibility") != std::string::npos);
        CHECK(r.out.find("PASS mass_conservation") != std::string::npos);
        CHECK(r.out.find("PASS equilibrium_residual") != std::string::npos);
    }
    {
        const fs::path dir = copy_run("fault_missing");
        fs::remove(dir / "u.csv");
        CHECK(verify(dir).code == kExitUsage);
    }
    CHECK(verify(fixtures::scratch_dir("verify_empty")).code == kExitUsage);
}

TEST_CASE("export plots") {
    const fs::path dir = copy_run("plots");
    const Run r = plots(dir);
    CHECK(r.code == kExitOk);
    CHECK(first_line(dir / "plots" / "residual_history.csv") == "stage,tau,iteration,residual");
    CHECK(first_line(dir / "plots" / "m_profiles.csv") == "i,x,t=0,t=0.25,t=0.5,t=0.75,t=1");
    CHECK(first_line(dir / "plots" / "diagnostics.csv") == "t,mass,min_m,max_m,l2_m,P1");
    CHECK_FALSE(fs::exists(dir / "plots" / "gap_ladder.csv"));
    CHECK(plots(fixtures::scratch_dir("plots_empty")).code == kExitUsage);
}

TEST_CASE("refinement ladder writes a gap series") {
    const fs::path root = fixtures::scratch_dir("cli_ladder");
    const Run r = solve(write_config(root, congestion_config(16, 16)), root / "run", false, 3);
    REQUIRE(r.code == kExitOk);
    const Json ladder = read_json_file(root / "run" / "report.json").at("ladder");
    REQUIRE(ladder.size() == 3);
    CHECK(ladder[2]["n"] == 64);
    CHECK(ladder[2]["nt"] == 256);
    REQUIRE(plots(root / "run").code == kExitOk);
    std::ifstream in(root / "run" / "plots" / "gap_ladder.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "level,n,nt,h,dt,gap");
    int rows = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        for (int c = 0; c < 4; ++c) std::getline(ss, cell, ',');
        CHECK(std::stod(cell) > 0.0);
        ++rows;
    }
    CHECK(rows == 3);
}

TEST_CASE("identical configs give identical report numbers") {
    const fs::path root = fixtures::scratch_dir("cli_determinism");
    const fs::path cfg = write_config(root, congestion_config());
    REQUIRE(solve(cfg, root / "a").code == kExitOk);
    REQUIRE(solve(cfg, root / "b").code == kExitOk);
    Json a = read_json_file(root / "a" / "report.json"), b = read_json_file(root / "b" / "report.json");
    a.erase("timings");
    b.erase("timings");
    a["message"] = b["message"];
    CHECK(a == b);
}
