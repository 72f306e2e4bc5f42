#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eduvsum {

inline constexpr double kSegmentSeconds = 5.0;
inline constexpr int kMinScore = 1;
inline constexpr int kMaxScore = 10;
inline constexpr const char* kManifestSchemaVersion = "1";

struct VideoRecord {
    std::string video_id;
    std::string media_path;
    double duration = 0.0;    // seconds
    double native_fps = 0.0;  // frames per second
    std::optional<std::string> subtitle_path;
    std::string topic;
    std::string source;

    bool operator==(const VideoRecord&) const = default;
};

// Half-open interval [start, end) in seconds.
struct Segment {
    int segment_index = 0;
    double start = 0.0;
    double end = 0.0;

    double length() const { return end - start; }
    bool contains(double t) const { return start <= t && t < end; }
    bool operator==(const Segment&) const = default;
};

struct AnnotationSet {
    std::string video_id;
    std::string annotator_id;
    std::vector<int> scores;  // one per segment, each in [1, 10]
    std::string created_at;   // ISO-8601 UTC

    bool operator==(const AnnotationSet&) const = default;
};

struct DatasetManifest {
    std::string schema_version = kManifestSchemaVersion;
    std::vector<VideoRecord> videos;
    std::vector<AnnotationSet> annotations;
    // Videos exported before every segment was scored; they carry no AnnotationSet.
    std::vector<std::string> partial_video_ids;

    const VideoRecord* find_video(const std::string& video_id) const;
    const AnnotationSet* find_annotation(const std::string& video_id) const;

    bool operator==(const DatasetManifest&) const = default;
};

struct SplitSpec {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::uint64_t seed = 0;

    bool operator==(const SplitSpec&) const = default;
};

}  // namespace eduvsum
