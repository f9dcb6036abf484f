#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "f2p/autodiff/nn.hpp"

namespace f2p {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointTensor {
  std::string name;
  ad::Shape shape;
  std::vector<float> values;
};

/// "F2PC" | u32 version | u32 count | per tensor (u16 name length, name,
/// u8 rank, u32 dims, f32 payload) | u32 CRC32 of everything before it.
/// All integers and floats little-endian.
std::string encode_checkpoint(const ad::StateList<float>& state);
std::vector<CheckpointTensor> decode_checkpoint(const std::string& bytes);

/// Copies decoded tensors into `state` after checking every name and shape;
/// nothing is written when any entry mismatches.
void assign_checkpoint(const std::vector<CheckpointTensor>& tensors, const ad::StateList<float>& state);

void save_checkpoint(const std::filesystem::path& path, const ad::StateList<float>& state);
std::vector<CheckpointTensor> read_checkpoint(const std::filesystem::path& path);
void load_checkpoint(const std::filesystem::path& path, const ad::StateList<float>& state);

}  // namespace f2p
