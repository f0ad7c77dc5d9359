#pragma once

#include "mfgc/config.hpp"

#include <filesystem>

namespace mfgc {

/// Field CSV: per slice a `# slice t=<value>` line, then `i[,j],value` rows
/// (vector fields: `i[,j],v1[,v2]`). Numbers are written with %.17g so a
/// read-back is bitwise exact.
void write_scalar_field(const std::filesystem::path& path, const Grids& grids, const ScalarField& field);
void write_vector_field(const std::filesystem::path& path, const Grids& grids, const VectorField& field);
ScalarField read_scalar_field(const std::filesystem::path& path, const Grids& grids);
VectorField read_vector_field(const std::filesystem::path& path, const Grids& grids);

/// P.csv: header `t,P1..Pk`, one row per time node
void write_price_csv(const std::filesystem::path& path, const Grids& grids, const std::vector<PriceVec>& P);
std::vector<PriceVec> read_price_csv(const std::filesystem::path& path, const Grids& grids, int k);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& value);

/// u.csv, m.csv, v.csv, gamma.csv and P.csv for one state
void write_state(const std::filesystem::path& dir, const ModelSpec& model, const Grids& grids, const MfgState& state);
MfgState read_state(const std::filesystem::path& dir, const ModelSpec& model, const Grids& grids);

std::string format_double(double value);

}  // namespace mfgc
