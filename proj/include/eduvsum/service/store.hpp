#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "eduvsum/core/types.hpp"

struct sqlite3;

namespace eduvsum::service {

inline constexpr const char* kDefaultAnnotator = "default";

enum class TaskStatus { New, InProgress, Done };

const char* to_string(TaskStatus s);

struct AnnotationTask {
    std::string video_id;
    int total_segments = 0;
    int completed_segments = 0;
    TaskStatus status = TaskStatus::New;
};

struct ExportResult {
    DatasetManifest manifest;
    // Videos left out (or, with partial export, flagged) because some
    // segments are unscored: "id: 3/5 segments scored".
    std::vector<std::string> incomplete;
};

// Single-file SQLite store. One connection, serialised by a mutex; each write
// is its own transaction and is synced before the call returns.
class AnnotationStore {
public:
    // ":memory:" gives a private in-memory store.
    explicit AnnotationStore(const std::filesystem::path& db_path);
    ~AnnotationStore();
    AnnotationStore(const AnnotationStore&) = delete;
    AnnotationStore& operator=(const AnnotationStore&) = delete;

    // Inserts or refreshes video rows; existing scores are kept.
    void import_videos(const std::vector<VideoRecord>& videos);

    std::vector<AnnotationTask> tasks(const std::string& annotator = kDefaultAnnotator) const;
    std::optional<VideoRecord> video(const std::string& video_id) const;
    std::optional<AnnotationTask> task(const std::string& video_id, const std::string& annotator = kDefaultAnnotator) const;
    // One entry per segment, nullopt where unscored. NotFound for unknown ids.
    std::vector<std::optional<int>> scores(const std::string& video_id,
                                           const std::string& annotator = kDefaultAnnotator) const;

    // Upsert. NotFound for an unknown video or segment, Validation for a score
    // outside 1..10. Returns the recomputed task.
    AnnotationTask put_score(const std::string& video_id, int segment_index, int score,
                             const std::string& annotator = kDefaultAnnotator);

    // DONE videos only, unless `partial` adds in-progress ones (listed in
    // partial_video_ids, without annotations). Always passes validate_manifest.
    ExportResult export_manifest(bool partial = false, const std::string& annotator = kDefaultAnnotator) const;

private:
    std::optional<AnnotationTask> task_locked(const std::string& video_id, const std::string& annotator) const;

    mutable std::mutex mutex_;
    sqlite3* db_ = nullptr;
};

}  // namespace eduvsum::service
