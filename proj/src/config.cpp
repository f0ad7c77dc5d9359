#include "mfgc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mfgc {

namespace fs = std::filesystem;

namespace {

// JSON node with its pointer path for error messages.
struct Node {
    const Json& j;
    std::string ptr;

    [[noreturn]] void error(const std::string& msg) const {
        fail(ErrorCode::Schema, (ptr.empty() ? std::string("/") : ptr) + ": " + msg);
    }

    bool has(const char* key) const { return j.is_object() && j.contains(key); }
    Node at(const char* key) const {
        if (!has(key)) error(std::string("missing required key \"") + key + "\"");
        return Node{j.at(key), ptr + "/" + key};
    }
    Node at(std::size_t i) const { return Node{j.at(i), ptr + "/" + std::to_string(i)}; }

    void expect_object() const {
        if (!j.is_object()) error("expected an object");
    }
    void allow_keys(std::initializer_list<const char*> keys) const {
        expect_object();
        const std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& item : j.items()) {
            if (!allowed.count(item.key())) error("unknown key \"" + item.key() + "\"");
        }
    }
    double number() const {
        if (!j.is_number()) error("expected a number");
        const double v = j.get<double>();
        if (!std::isfinite(v)) error("expected a finite number");
        return v;
    }
    int integer() const {
        if (!j.is_number_integer()) error("expected an integer");
        return j.get<int>();
    }
    std::string string() const {
        if (!j.is_string()) error("expected a string");
        return j.get<std::string>();
    }
    std::vector<double> numbers() const {
        if (!j.is_array()) error("expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(at(i).number());
        return out;
    }
    double number(const char* key, double fallback) const { return has(key) ? at(key).number() : fallback; }
    int integer(const char* key, int fallback) const { return has(key) ? at(key).integer() : fallback; }
    std::string type() const { return at("type").string(); }
};

std::vector<std::vector<double>> read_table_csv(const fs::path& path, std::size_t columns, const Node& where) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, where.ptr + ": cannot read " + path.string());
    std::vector<std::vector<double>> cols(columns);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (line_no == 1) continue;  // header
            where.error(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell");
        }
        if (row.size() != columns) {
            where.error(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                        " columns");
        }
        for (std::size_t c = 0; c < columns; ++c) cols[c].push_back(row[c]);
    }
    return cols;
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : fs::absolute(base / path);
}

double periodic_sq_distance(const TorusGrid& grid, std::size_t node, const std::vector<double>& center) {
    double s = 0.0;
    for (int c = 0; c < grid.dim(); ++c) {
        double d = std::abs(grid.coord(node, c) - center[c]);
        d -= std::floor(d);
        d = std::min(d, 1.0 - d);
        s += d * d;
    }
    return s;
}

std::vector<double> per_axis(const Node& node, const char* key, int d, double fallback) {
    if (!node.has(key)) return std::vector<double>(d, fallback);
    const Node v = node.at(key);
    if (v.j.is_number()) return std::vector<double>(d, v.number());
    std::vector<double> out = v.numbers();
    if (static_cast<int>(out.size()) != d) v.error("expected " + std::to_string(d) + " entries (one per axis)");
    return out;
}

Slice read_field_csv(const fs::path& path, const TorusGrid& grid, const Node& where) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, where.ptr + ": cannot read " + path.string());
    Slice out(grid.size(), 0.0);
    std::vector<bool> seen(grid.size(), false);
    std::string line;
    std::size_t sequential = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        std::size_t node = 0;
        if (row.size() == 1) {
            node = sequential++;
        } else if (static_cast<int>(row.size()) == grid.dim() + 1) {
            const int i0 = static_cast<int>(row[0]);
            const int i1 = grid.dim() == 2 ? static_cast<int>(row[1]) : 0;
            if (i0 < 0 || i0 >= grid.n() || i1 < 0 || i1 >= grid.n()) where.error(path.string() + ": node index out of range");
            node = grid.node(i0, i1);
        } else {
            where.error(path.string() + ": rows must be value or i[,j],value");
        }
        if (node >= grid.size()) where.error(path.string() + ": more rows than grid nodes");
        out[node] = row.back();
        seen[node] = true;
    }
    for (bool s : seen) {
        if (!s) where.error(path.string() + ": does not cover every grid node");
    }
    return out;
}

Slice sample_field(const Node& spec, const TorusGrid& grid, const fs::path& base) {
    const std::size_t N = grid.size();
    if (spec.j.is_number()) return Slice(N, spec.number());
    if (spec.j.is_array()) {
        Slice v = spec.numbers();
        if (v.size() != N) spec.error("expected " + std::to_string(N) + " samples");
        return v;
    }
    const std::string type = spec.type();
    Slice out(N);
    if (type == "constant") {
        spec.allow_keys({"type", "value"});
        return Slice(N, spec.at("value").number());
    }
    if (type == "cosine") {
        spec.allow_keys({"type", "offset", "amplitude", "frequency", "phase"});
        const double offset = spec.number("offset", 0.0);
        const double amplitude = spec.number("amplitude", 1.0);
        const double phase = spec.number("phase", 0.0);
        std::vector<double> freq(grid.dim(), 0.0);
        freq[0] = 1.0;
        if (spec.has("frequency")) freq = per_axis(spec, "frequency", grid.dim(), 1.0);
        for (std::size_t i = 0; i < N; ++i) {
            double arg = phase;
            for (int c = 0; c < grid.dim(); ++c) arg += 2.0 * M_PI * freq[c] * grid.coord(i, c);
            out[i] = offset + amplitude * std::cos(arg);
        }
        return out;
    }
    if (type == "bump") {
        spec.allow_keys({"type", "center", "width", "amplitude", "floor"});
        const std::vector<double> center = per_axis(spec, "center", grid.dim(), 0.5);
        const double width = spec.number("width", 0.1);
        if (!(width > 0.0)) spec.at("width").error("width must be positive");
        const double amplitude = spec.number("amplitude", 1.0);
        const double floor = spec.number("floor", 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = floor + amplitude * std::exp(-periodic_sq_distance(grid, i, center) / (2.0 * width * width));
        }
        return out;
    }
    if (type == "delta") {
        spec.allow_keys({"type"});
        return delta_kernel(grid);
    }
    if (type == "samples") {
        spec.allow_keys({"type", "values"});
        Slice v = spec.at("values").numbers();
        if (v.size() != N) spec.at("values").error("expected " + std::to_string(N) + " samples");
        return v;
    }
    if (type == "csv") {
        spec.allow_keys({"type", "path"});
        return read_field_csv(resolve(base, spec.at("path").string()), grid, spec);
    }
    spec.at("type").error("unknown field type \"" + type + "\" (expected constant, cosine, bump, delta, samples or csv)");
}

std::vector<std::vector<double>> table_columns(const Node& spec, std::initializer_list<const char*> names,
                                               const fs::path& base) {
    if (spec.has("csv")) return read_table_csv(resolve(base, spec.at("csv").string()), names.size(), spec);
    std::vector<std::vector<double>> cols;
    for (const char* name : names) cols.push_back(spec.at(name).numbers());
    return cols;
}

LagrangianFamily parse_lagrangian(const Node& spec, const TorusGrid& grid, const fs::path& base) {
    const std::string type = spec.type();
    if (type == "quadratic") {
        spec.allow_keys({"type", "weight", "offset"});
        QuadraticLagrangian q;
        q.weight = spec.number("weight", 1.0);
        q.offset = spec.has("offset") ? sample_field(spec.at("offset"), grid, base) : Slice(grid.size(), 0.0);
        return q;
    }
    if (type == "custom_1d") {
        spec.allow_keys({"type", "v", "L", "dL", "csv", "convexity"});
        auto cols = table_columns(spec, {"v", "L", "dL"}, base);
        try {
            return TabulatedLagrangian{HermiteTable(cols[0], cols[1], cols[2]), spec.at("convexity").number()};
        } catch (const MfgcError& e) {
            spec.error(e.what());
        }
    }
    spec.at("type").error("unknown lagrangian type \"" + type + "\" (expected quadratic or custom_1d)");
}

PriceMat matrix_of(const Node& node, int k) {
    PriceMat a(k, k);
    if (node.j.is_number()) {
        a.setZero();
        a.diagonal().setConstant(node.number());
        return a;
    }
    if (!node.j.is_array() || static_cast<int>(node.j.size()) != k) node.error("expected a number or a k x k matrix");
    for (int r = 0; r < k; ++r) {
        const std::vector<double> row = node.at(r).numbers();
        if (static_cast<int>(row.size()) != k) node.at(r).error("expected " + std::to_string(k) + " entries");
        for (int c = 0; c < k; ++c) a(r, c) = row[c];
    }
    return a;
}

PriceFamily parse_price(const Node& spec, int k, const fs::path& base) {
    const std::string type = spec.type();
    if (type == "affine") {
        spec.allow_keys({"type", "a", "b"});
        PriceMat a = spec.has("a") ? matrix_of(spec.at("a"), k) : PriceMat::Identity(k, k);
        PriceVec b = PriceVec::Zero(k);
        if (spec.has("b")) {
            const Node nb = spec.at("b");
            if (nb.j.is_number()) {
                b.setConstant(nb.number());
            } else {
                const std::vector<double> v = nb.numbers();
                if (static_cast<int>(v.size()) != k) nb.error("expected " + std::to_string(k) + " entries");
                for (int i = 0; i < k; ++i) b(i) = v[i];
            }
        }
        return AffinePrice{a, b};
    }
    if (type == "custom_1d") {
        spec.allow_keys({"type", "z", "Phi", "psi", "csv"});
        auto cols = table_columns(spec, {"z", "Phi", "psi"}, base);
        try {
            return TabulatedPrice{HermiteTable(cols[0], cols[1], cols[2])};
        } catch (const MfgcError& e) {
            spec.error(e.what());
        }
    }
    spec.at("type").error("unknown price type \"" + type + "\" (expected affine or custom_1d)");
}

CouplingFamily parse_coupling(const Node& spec, const TorusGrid& grid, const fs::path& base) {
    const std::string type = spec.type();
    if (type == "zero") {
        spec.allow_keys({"type"});
        return ZeroCoupling{};
    }
    if (type == "convolution") {
        spec.allow_keys({"type", "kernel", "K"});
        Slice kernel = spec.has("kernel") ? sample_field(spec.at("kernel"), grid, base) : delta_kernel(grid);
        ResponseMap response = LinearResponse{};
        if (spec.has("K")) {
            const Node K = spec.at("K");
            const std::string kt = K.type();
            if (kt == "linear") {
                K.allow_keys({"type", "slope", "offset"});
                response = LinearResponse{K.number("slope", 1.0), K.number("offset", 0.0)};
            } else if (kt == "tabulated") {
                K.allow_keys({"type", "w", "K", "csv"});
                auto cols = table_columns(K, {"w", "K"}, base);
                try {
                    LinearTable table(cols[0], cols[1]);
                    if (!(table.lo() <= 0.0 && table.hi() >= 0.0)) K.error("tabulated K must contain w = 0");
                    response = std::move(table);
                } catch (const MfgcError& e) {
                    if (e.code() == ErrorCode::Schema) throw;
                    K.error(e.what());
                }
            } else {
                K.at("type").error("unknown K type \"" + kt + "\" (expected linear or tabulated)");
            }
        }
        return convolution_coupling(grid, std::move(kernel), std::move(response));
    }
    spec.at("type").error("unknown coupling type \"" + type + "\" (expected zero or convolution)");
}

PhiWeight parse_phi(const Node& spec, const TorusGrid& grid, int k) {
    const int d = grid.dim();
    if (spec.j.is_number()) return PhiWeight::constant(grid, WeightMat::Constant(k, d, spec.number()));
    if (spec.j.is_array()) {
        WeightMat w(k, d);
        if (static_cast<int>(spec.j.size()) != k) spec.error("expected a k x d matrix");
        for (int r = 0; r < k; ++r) {
            const std::vector<double> row = spec.at(r).numbers();
            if (static_cast<int>(row.size()) != d) spec.at(r).error("expected " + std::to_string(d) + " entries");
            for (int c = 0; c < d; ++c) w(r, c) = row[c];
        }
        return PhiWeight::constant(grid, w);
    }
    spec.allow_keys({"type", "values"});
    if (spec.type() != "samples") spec.at("type").error("phi must be a number, a k x d matrix or {type: samples}");
    PhiWeight w;
    w.k = k;
    w.d = d;
    w.values = spec.at("values").numbers();
    if (w.values.size() != grid.size() * k * d) spec.at("values").error("expected n^d * k * d samples");
    return w;
}

void absolutize_paths(Json& j, const fs::path& base) {
    if (j.is_object()) {
        const bool csv_field = j.contains("type") && j["type"] == "csv";
        for (auto& item : j.items()) {
            if (item.value().is_string() && ((csv_field && item.key() == "path") || item.key() == "csv")) {
                item.value() = resolve(base, item.value().get<std::string>()).string();
            } else {
                absolutize_paths(item.value(), base);
            }
        }
    } else if (j.is_array()) {
        for (auto& v : j) absolutize_paths(v, base);
    }
}

bool field_resampleable(const Json& spec) {
    if (spec.is_array()) return false;
    if (spec.is_object() && spec.contains("type")) {
        const std::string t = spec["type"].is_string() ? spec["type"].get<std::string>() : "";
        return t != "samples" && t != "csv";
    }
    return true;
}

}  // namespace

bool model_is_resampleable(const Json& model) {
    for (const char* key : {"g", "m0"}) {
        if (model.contains(key) && !field_resampleable(model[key])) return false;
    }
    if (model.contains("phi") && !field_resampleable(model["phi"]) && !model["phi"].is_array()) return false;
    if (model.contains("lagrangian") && model["lagrangian"].contains("offset") &&
        !field_resampleable(model["lagrangian"]["offset"])) {
        return false;
    }
    if (model.contains("coupling") && model["coupling"].contains("kernel") &&
        !field_resampleable(model["coupling"]["kernel"])) {
        return false;
    }
    return true;
}

RunConfig parse_config(const Json& document, const fs::path& base_dir) {
    const Node root{document, ""};
    root.allow_keys({"model", "grid", "solver", "equilibrium", "pde", "output", "seed", "validation"});
    RunConfig cfg;
    cfg.base_dir = base_dir;

    const Node grid = root.at("grid");
    grid.allow_keys({"d", "n", "T", "nt"});
    cfg.grid.d = grid.at("d").integer();
    cfg.grid.n = grid.at("n").integer();
    cfg.grid.T = grid.at("T").number();
    cfg.grid.nt = grid.at("nt").integer();
    try {
        make_grids(cfg.grid.d, cfg.grid.n, cfg.grid.T, cfg.grid.nt);
    } catch (const MfgcError& e) {
        fail(e.code(), std::string("/grid: ") + e.what());
    }

    if (root.has("solver")) {
        const Node s = root.at("solver");
        s.allow_keys({"outer_tol", "max_outer", "damping_u", "damping_m", "tau_schedule", "tripwire_factor"});
        cfg.solver.outer_tol = s.number("outer_tol", cfg.solver.outer_tol);
        cfg.solver.max_outer = s.integer("max_outer", cfg.solver.max_outer);
        cfg.solver.damping_u = s.number("damping_u", cfg.solver.damping_u);
        cfg.solver.damping_m = s.number("damping_m", cfg.solver.damping_m);
        cfg.solver.tripwire_factor = s.number("tripwire_factor", cfg.solver.tripwire_factor);
        if (s.has("tau_schedule")) cfg.solver.tau_schedule = s.at("tau_schedule").numbers();
    }
    if (root.has("equilibrium")) {
        const Node e = root.at("equilibrium");
        e.allow_keys({"tol_P", "max_iter", "damping", "jacobian_fd_step"});
        auto& eq = cfg.solver.equilibrium;
        eq.tol_P = e.number("tol_P", eq.tol_P);
        eq.max_iter = e.integer("max_iter", eq.max_iter);
        eq.damping = e.number("damping", eq.damping);
        eq.jacobian_fd_step = e.number("jacobian_fd_step", eq.jacobian_fd_step);
    }
    if (root.has("pde")) {
        const Node p = root.at("pde");
        p.allow_keys({"theta", "cfl_safety", "linear_solver_tol"});
        auto& pde = cfg.solver.pde;
        pde.theta = p.number("theta", pde.theta);
        pde.cfl_safety = p.number("cfl_safety", pde.cfl_safety);
        pde.linear_solver_tol = p.number("linear_solver_tol", pde.linear_solver_tol);
    }
    try {
        cfg.solver.validate(false);
    } catch (const MfgcError& e) {
        fail(ErrorCode::Schema, std::string("/solver: ") + e.what());
    }
    if (root.has("output")) {
        const Node o = root.at("output");
        o.allow_keys({"dir"});
        if (o.has("dir")) cfg.output_dir = o.at("dir").string();
    }
    if (root.has("seed")) {
        const Node s = root.at("seed");
        if (!s.j.is_number_unsigned() && !(s.j.is_number_integer() && s.j.get<long long>() >= 0)) {
            s.error("expected a non-negative integer");
        }
        cfg.seed = s.j.get<std::uint64_t>();
    }
    cfg.validation.seed = cfg.seed;
    if (root.has("validation")) {
        const Node v = root.at("validation");
        v.allow_keys({"constant", "samples", "v_radius", "z_radius"});
        cfg.validation.constant = v.number("constant", cfg.validation.constant);
        cfg.validation.samples = v.integer("samples", cfg.validation.samples);
        cfg.validation.v_radius = v.number("v_radius", cfg.validation.v_radius);
        cfg.validation.z_radius = v.number("z_radius", cfg.validation.z_radius);
    }

    cfg.model = root.at("model").j;
    absolutize_paths(cfg.model, base_dir);
    build_model(cfg);  // surface model schema errors at load time
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot read config " + path.string());
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        fail(ErrorCode::Schema, path.string() + ": invalid JSON: " + e.what());
    }
    return parse_config(doc, fs::absolute(path).parent_path());
}

ModelSpec build_model(const RunConfig& cfg) { return build_model(cfg, cfg.grid.n); }

ModelSpec build_model(const RunConfig& cfg, int n) {
    const Node model{cfg.model, "/model"};
    model.allow_keys({"sigma", "k", "lagrangian", "phi", "price", "coupling", "g", "m0"});
    ModelSpec spec;
    spec.grid = TorusGrid::make(cfg.grid.d, n);
    spec.horizon = cfg.grid.T;
    spec.sigma = model.at("sigma").number();
    spec.k = model.integer("k", 1);
    if (spec.k < 1 || spec.k > kMaxPrice) model.at("k").error("k must lie in 1..4");
    const fs::path& base = cfg.base_dir;
    spec.lagrangian = model.has("lagrangian") ? parse_lagrangian(model.at("lagrangian"), spec.grid, base)
                                              : LagrangianFamily{quadratic_lagrangian(spec.grid, 1.0)};
    if (model.has("phi")) spec.phi = parse_phi(model.at("phi"), spec.grid, spec.k);
    spec.price = model.has("price") ? parse_price(model.at("price"), spec.k, base)
                                    : PriceFamily{affine_price(PriceMat::Identity(spec.k, spec.k), PriceVec::Zero(spec.k))};
    spec.coupling = model.has("coupling") ? parse_coupling(model.at("coupling"), spec.grid, base) : CouplingFamily{ZeroCoupling{}};
    if (model.has("g")) spec.terminal_g = sample_field(model.at("g"), spec.grid, base);
    if (model.has("m0")) spec.initial_m0 = sample_field(model.at("m0"), spec.grid, base);
    try {
        return finalize_model(std::move(spec));
    } catch (const MfgcError& e) {
        fail(e.code(), std::string("/model: ") + e.what());
    }
}

Grids build_grids(const RunConfig& cfg, int n, int nt) { return make_grids(cfg.grid.d, n, cfg.grid.T, nt); }

Json to_json(const RunConfig& cfg) {
    Json j;
    j["model"] = cfg.model;
    j["grid"] = {{"d", cfg.grid.d}, {"n", cfg.grid.n}, {"T", cfg.grid.T}, {"nt", cfg.grid.nt}};
    const SolveOptions& s = cfg.solver;
    j["solver"] = {{"outer_tol", s.outer_tol},     {"max_outer", s.max_outer},
                   {"damping_u", s.damping_u},     {"damping_m", s.damping_m},
                   {"tau_schedule", s.tau_schedule}, {"tripwire_factor", s.tripwire_factor}};
    j["equilibrium"] = {{"tol_P", s.equilibrium.tol_P},
                        {"max_iter", s.equilibrium.max_iter},
                        {"damping", s.equilibrium.damping},
                        {"jacobian_fd_step", s.equilibrium.jacobian_fd_step}};
    j["pde"] = {{"theta", s.pde.theta}, {"cfl_safety", s.pde.cfl_safety}, {"linear_solver_tol", s.pde.linear_solver_tol}};
    j["output"] = Json::object();
    if (!cfg.output_dir.empty()) j["output"]["dir"] = cfg.output_dir;
    j["seed"] = cfg.seed;
    j["validation"] = {{"constant", cfg.validation.constant},
                       {"samples", cfg.validation.samples},
                       {"v_radius", cfg.validation.v_radius},
                       {"z_radius", cfg.validation.z_radius}};
    return j;
}

}  // namespace mfgc
