#ifndef EMDLOT_CHECKPOINT_HPP
#define EMDLOT_CHECKPOINT_HPP

#include <filesystem>

#include "emdlot/config.hpp"
#include "emdlot/model.hpp"

namespace emdlot {

// Versioned binary container: magic + version, the TrainConfig and model
// dimensions as a JSON blob, then every named tensor with shape metadata and
// raw little-endian doubles. Written to a temporary file and renamed so a
// crash never leaves a torn checkpoint.
void save_checkpoint(const std::filesystem::path& path, EmdlotModel& model,
                     const TrainConfig& config);

struct Checkpoint {
  EmdlotModel model;
  TrainConfig config;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace emdlot

#endif
