#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ulight/plan.hpp"

namespace ulight::io {

/// Reads a dataset CSV (header row, finite decimal floats, rectangular).
/// Throws IoError naming the path on any problem.
Eigen::MatrixXd read_csv(const std::string& path);

/// Writes a CSV with the given header columns; floats use 17 significant
/// digits so values round-trip losslessly.
void write_csv(const std::string& path, const Eigen::MatrixXd& data,
               const std::vector<std::string>& columns);

/// "x0", "x1", ... column names.
std::vector<std::string> indexed_columns(const std::string& prefix, int count);

struct Checkpoint {
    PlanModel plan;
    std::uint64_t seed = 0;
    long steps_trained = 0;
};

/// JSON checkpoint, schema_version 1. Array shapes are validated on load.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

} // namespace ulight::io
