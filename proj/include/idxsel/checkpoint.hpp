#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "idxsel/agent.hpp"
#include "idxsel/qnetwork.hpp"

namespace idxsel {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  QNetwork net;
  Hyperparams hyperparams;
};

// Byte layout (little-endian throughout), see docs/checkpoint_format.md:
//   "IDXSELQN"                       8 bytes
//   u32 version
//   u32 input_dim, u32 action_count
//   u32 hidden_count, u32 width[hidden_count]
//   u32 hyperparam_count, { u16 name_len, name, f64 value }[...]
//   u32 tensor_count, { u32 rows, u32 cols, f64 data[rows*cols] row-major }[...]
//   u64 FNV-1a of every preceding byte
// Tensors follow QNetworkParams::for_each_tensor order.
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace idxsel
