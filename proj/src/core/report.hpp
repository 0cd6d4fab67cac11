#pragma once

#include <string>
#include <vector>

#include "core/trainer.hpp"

namespace oodcl::report {

// JSON with fixed key order and all fractions at six decimal places, so
// reports are byte-diffable golden files.
std::string to_json(const std::string& model_name,
                    const std::string& score_name,
                    const train::EvalReport& report);

struct NamedReport {
  std::string model_name;
  train::EvalReport report;
};

std::string compare_json(const std::string& score_name,
                         std::span<const NamedReport> reports);

// Human table mirroring the per-dataset layout of the evaluation: one row
// per OOD set plus the average, one column group per model, metrics printed
// as percentages with two decimals.
std::string compare_table(std::span<const NamedReport> reports);

}  // namespace oodcl::report
