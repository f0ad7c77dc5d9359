#include "mfgc/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mfgc {

namespace fs = std::filesystem;

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "missing artifact " + path.string());
    return in;
}

void write_index(std::ostream& out, const TorusGrid& grid, std::size_t node) {
    out << grid.axis_index(node, 0);
    if (grid.dim() == 2) out << ',' << grid.axis_index(node, 1);
}

void write_field(const fs::path& path, const Grids& grids, const std::vector<std::vector<double>>& slices, int comps) {
    std::ofstream out = open_out(path);
    const TorusGrid& grid = grids.space;
    for (std::size_t j = 0; j < slices.size(); ++j) {
        out << "# slice t=" << format_double(grids.time.t(static_cast<int>(j))) << '\n';
        for (std::size_t node = 0; node < grid.size(); ++node) {
            write_index(out, grid, node);
            for (int c = 0; c < comps; ++c) out << ',' << format_double(slices[j][node * comps + c]);
            out << '\n';
        }
    }
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<std::vector<double>> read_field(const fs::path& path, const Grids& grids, int comps) {
    std::ifstream in = open_in(path);
    const TorusGrid& grid = grids.space;
    const int d = grid.dim();
    std::vector<std::vector<double>> slices;
    std::vector<std::size_t> filled;
    std::string line;
    int line_no = 0;
    auto bad = [&](const std::string& msg) {
        fail(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.rfind("# slice", 0) == 0) {
            slices.emplace_back(grid.size() * comps, 0.0);
            filled.push_back(0);
            continue;
        }
        if (line[0] == '#') continue;
        if (slices.empty()) bad("row before the first slice header");
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        try {
            while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        } catch (const std::exception&) {
            bad("non-numeric cell");
        }
        if (static_cast<int>(row.size()) != d + comps) bad("expected " + std::to_string(d + comps) + " columns");
        const int i0 = static_cast<int>(row[0]);
        const int i1 = d == 2 ? static_cast<int>(row[1]) : 0;
        if (i0 < 0 || i0 >= grid.n() || i1 < 0 || i1 >= grid.n()) bad("node index out of range");
        const std::size_t node = grid.node(i0, i1);
        for (int c = 0; c < comps; ++c) slices.back()[node * comps + c] = row[d + c];
        ++filled.back();
    }
    const std::size_t expected = static_cast<std::size_t>(grids.time.steps()) + 1;
    if (slices.size() != expected) {
        fail(ErrorCode::Io, path.string() + ": expected " + std::to_string(expected) + " slices, found " +
                                std::to_string(slices.size()));
    }
    for (std::size_t f : filled) {
        if (f != grid.size()) fail(ErrorCode::Io, path.string() + ": slice does not cover every node");
    }
    return slices;
}

}  // namespace

void write_scalar_field(const fs::path& path, const Grids& grids, const ScalarField& field) {
    write_field(path, grids, field.slices, 1);
}

void write_vector_field(const fs::path& path, const Grids& grids, const VectorField& field) {
    write_field(path, grids, field.slices, grids.space.dim());
}

ScalarField read_scalar_field(const fs::path& path, const Grids& grids) {
    return ScalarField{read_field(path, grids, 1)};
}

VectorField read_vector_field(const fs::path& path, const Grids& grids) {
    return VectorField{read_field(path, grids, grids.space.dim())};
}

void write_price_csv(const fs::path& path, const Grids& grids, const std::vector<PriceVec>& P) {
    std::ofstream out = open_out(path);
    const int k = P.empty() ? 0 : static_cast<int>(P.front().size());
    out << 't';
    for (int c = 0; c < k; ++c) out << ",P" << c + 1;
    out << '\n';
    for (std::size_t j = 0; j < P.size(); ++j) {
        out << format_double(grids.time.t(static_cast<int>(j)));
        for (int c = 0; c < k; ++c) out << ',' << format_double(P[j](c));
        out << '\n';
    }
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<PriceVec> read_price_csv(const fs::path& path, const Grids& grids, int k) {
    std::ifstream in = open_in(path);
    std::string line;
    std::getline(in, line);
    std::vector<PriceVec> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        try {
            while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        } catch (const std::exception&) {
            fail(ErrorCode::Io, path.string() + ": non-numeric cell");
        }
        if (static_cast<int>(row.size()) != k + 1) fail(ErrorCode::Io, path.string() + ": expected t and k prices per row");
        PriceVec p(k);
        for (int c = 0; c < k; ++c) p(c) = row[c + 1];
        out.push_back(p);
    }
    if (out.size() != static_cast<std::size_t>(grids.time.steps()) + 1) {
        fail(ErrorCode::Io, path.string() + ": expected one row per time node");
    }
    return out;
}

Json read_json_file(const fs::path& path) {
    std::ifstream in = open_in(path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        fail(ErrorCode::Io, path.string() + ": invalid JSON: " + e.what());
    }
}

void write_json_file(const fs::path& path, const Json& value) {
    std::ofstream out = open_out(path);
    out << value.dump(2) << '\n';
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

void write_state(const fs::path& dir, const ModelSpec& model, const Grids& grids, const MfgState& state) {
    write_scalar_field(dir / "u.csv", grids, state.u);
    write_scalar_field(dir / "m.csv", grids, state.m);
    write_vector_field(dir / "v.csv", grids, state.v);
    write_scalar_field(dir / "gamma.csv", grids, coupling_field(model, grids, state.m));
    write_price_csv(dir / "P.csv", grids, state.P);
}

MfgState read_state(const fs::path& dir, const ModelSpec& model, const Grids& grids) {
    MfgState s;
    s.u = read_scalar_field(dir / "u.csv", grids);
    s.m = read_scalar_field(dir / "m.csv", grids);
    s.v = read_vector_field(dir / "v.csv", grids);
    s.P = read_price_csv(dir / "P.csv", grids, model.k);
    s.tau = 1.0;
    return s;
}

}  // namespace mfgc
