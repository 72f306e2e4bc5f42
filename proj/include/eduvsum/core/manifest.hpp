#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "eduvsum/core/types.hpp"

namespace eduvsum {

nlohmann::json to_json(const VideoRecord& video);
nlohmann::json to_json(const AnnotationSet& annotation);
nlohmann::json to_json(const DatasetManifest& manifest);
nlohmann::json to_json(const SplitSpec& split);

// Field-level decoding; errors name the JSON path of the offending field.
VideoRecord video_from_json(const nlohmann::json& j, const std::string& path = "video");
DatasetManifest manifest_from_json(const nlohmann::json& j);
SplitSpec split_from_json(const nlohmann::json& j);

// Checks every manifest invariant: schema version, positive durations and
// rates, unique ids, referential integrity, score range and per-video
// segment counts. Throws Validation / Referential errors.
void validate_manifest(const DatasetManifest& manifest);

// Parses and validates. Malformed JSON reports line and column.
DatasetManifest parse_manifest(std::string_view text, std::string_view origin = "<memory>");

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

std::string utc_timestamp_now();

}  // namespace eduvsum
