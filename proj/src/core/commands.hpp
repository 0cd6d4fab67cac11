#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "core/run_config.hpp"

namespace oodcl::cmd {

// Writes the ID train/test splits, the auxiliary OOD set and every configured
// test OOD set under out.dir; returns a per-file summary.
std::string gen_data(const config::RunConfig& cfg);

// Dispatches to the training protocol for the variant, then writes the
// checkpoint and history files. Returns a summary.
std::string train(const config::RunConfig& cfg, config::CliVariant variant);

struct EvalOutput {
  std::string json;
  std::filesystem::path path;
};

EvalOutput eval(const config::RunConfig& cfg,
                const std::filesystem::path& checkpoint_path,
                proto::ScoreFunction score);

struct CompareOutput {
  std::string table;
  std::string json;
  std::filesystem::path table_path;
  std::filesystem::path json_path;
};

CompareOutput compare(const config::RunConfig& cfg,
                      const std::vector<config::CliVariant>& variants);

}  // namespace oodcl::cmd
