#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "eduvsum/ingest/media.hpp"

namespace eduvsum::ingest {

// Writes frames/<video_id>/<frame_index>.png under `root`.
void write_frame_cache(const std::filesystem::path& root, const std::string& video_id,
                       std::span<const SampledFrame> frames);

RgbImage read_cached_frame(const std::filesystem::path& root, const std::string& video_id, int frame_index);

}  // namespace eduvsum::ingest
