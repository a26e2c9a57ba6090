#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "generation/model.hpp"
#include "generation/tokenizer.hpp"

namespace polyg2p {

// Everything a toy backend needs at inference time.
struct ToyModel {
  ToyGlmConfig config;
  ModelParams params;
  Vocabulary vocab;
};

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

// Layout (little-endian):
//   8 bytes  magic "PG2PCKPT"
//   u32      format version
//   u64      header length, then a JSON header (config, vocabulary,
//            tensor names and shapes in ModelParams::for_each order)
//   f64[]    tensor data, row-major, in header order
//   u64      FNV-1a of the tensor bytes
void save_checkpoint(const ToyModel& model, const std::filesystem::path& path);
// Throws Error(Io) or Error(Checkpoint).
ToyModel load_checkpoint(const std::filesystem::path& path);

}  // namespace polyg2p
