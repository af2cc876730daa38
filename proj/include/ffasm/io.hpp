#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "json.hpp"

#include "ffasm/fda.hpp"
#include "ffasm/model.hpp"

namespace ffasm {

// Shortest decimal representation that parses back to exactly the same
// double; keeps CSV output readable and bit-stable.
std::string format_double(double x);

// Longitudinal CSV with header subject,covariate,time,value. Covariate ids
// are 1-based in the file and 0-based in the returned records. Parse
// problems raise IoError naming the line and field.
std::vector<ObservationRecord> read_longitudinal_csv(const std::string& path);

// Dense CSV: first column subject, then one column per (covariate, grid
// point) with header g{index}_t{point}. Every covariate must carry the same
// grid. Row order defines subject order.
FunctionalSample read_dense_csv(const std::string& path);
void write_dense_csv(const std::string& path, const FunctionalSample& sample);

// Single-column response CSV; an optional non-numeric first line is treated
// as a header.
Eigen::VectorXd read_response_csv(const std::string& path);
void write_response_csv(const std::string& path, const Eigen::VectorXd& y);

// JSON round-trips. Covariate ids are 1-based in JSON. fit_from_json
// restores everything predict() needs (curves, means, grid, base); the
// factor decomposition and eigensystems are summarized, not round-tripped.
nlohmann::json fit_to_json(const FfasmFit& fit);
FfasmFit fit_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const FfasmConfig& cfg);
FfasmConfig config_from_json(const nlohmann::json& j);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace ffasm
