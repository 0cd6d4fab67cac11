#pragma once

#include <filesystem>

#include "core/trainer.hpp"

namespace oodcl::checkpoint {

// Versioned text checkpoint: dims, class ids, the eight network tensors and
// the classifier matrix (prototype rows or linear weights) in a fixed order,
// floats at 17 significant digits. Round-trips bit-exactly.
void save_model(const train::TrainedModel& model,
                const std::filesystem::path& path);
train::TrainedModel load_model(const std::filesystem::path& path);

// One line per epoch: index, component losses, total, lr.
void save_history(const train::TrainedModel& model,
                  const std::filesystem::path& path);

}  // namespace oodcl::checkpoint
