#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "eduvsum/model/fusion_model.hpp"

namespace eduvsum::model {

inline constexpr std::uint32_t kArchiveVersion = 1;

// Binary layout, little-endian:
//   "EDUVSUMM" | u32 version | u64 n, config JSON (n bytes) | u32 tensor count |
//   per tensor: u32 n, name | u64 rows | u64 cols | rows*cols f64 column-major |
//   u32 CRC-32 of everything before it.
void save_model(const FusionModel& model, const std::filesystem::path& path);

// Checksum on truncation or corruption; ModelLoad when the tensors disagree
// with the embedded config.
FusionModel load_model(const std::filesystem::path& path);

namespace detail {
// Serialises arbitrary config + tensors, so tests can build inconsistent files.
std::string encode_archive(const nlohmann::json& config, std::span<const Tensor> tensors);
}

}  // namespace eduvsum::model
