#pragma once

#include <cstdint>

#include "eduvsum/core/types.hpp"

namespace eduvsum {

// Stratified shuffle split. Every topic keeps at least one train and one test
// video, and its train count stays within one video of n_topic * train_fraction.
// The global train count is round(N * train_fraction) whenever the per-topic
// bounds allow it (98 videos at 0.847 -> 83 / 15).
SplitSpec split_dataset(const DatasetManifest& manifest, double train_fraction, std::uint64_t seed);

}  // namespace eduvsum
