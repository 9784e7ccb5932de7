#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "mixad/tensor.hpp"

namespace mixad {

// Self-describing binary checkpoint: string metadata plus named f64 tensors.
// Values are stored as raw little-endian doubles so a save/load round trip is
// bit-exact. Ordered maps keep the file layout deterministic.
struct Checkpoint {
  std::map<std::string, std::string> metadata;
  std::map<std::string, Tensor> tensors;

  const Tensor& require(const std::string& name) const;
  const std::string& require_meta(const std::string& key) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mixad
