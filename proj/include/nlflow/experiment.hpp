#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "nlflow/config.hpp"
#include "nlflow/verifiers.hpp"

namespace nlflow {

inline constexpr int kSchemaVersion = 1;
std::string_view tool_version();

/// Names accepted by `verify`, in the order `verify all` runs them.
const std::vector<std::string>& check_names();

/// Builds the configured corpus field; ConfigError on an unknown name or
/// parameter.
CoefficientField resolve_field(const ExperimentConfig& config);

/// Every run writes config.ini (the resolved configuration) and VERSION into
/// `out_dir` next to its own outputs. Nothing written depends on the clock or
/// on the worker count.
void run_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                  std::ostream& log);

/// Writes <check>.json and, when the check has estimate rows, <check>.csv.
/// `check` may also be "all". UnknownNameError for other names.
Verdict run_verify(const ExperimentConfig& config, std::string_view check,
                   const std::filesystem::path& out_dir, std::ostream& log);

/// Writes bounds.json, an array of {operation, inputs, value, method}.
void run_bounds(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                std::ostream& log);

void print_corpus(std::ostream& out);

}  // namespace nlflow
