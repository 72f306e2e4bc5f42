#include "eduvsum/service/store.hpp"

#include <sqlite3.h>

#include <spdlog/spdlog.h>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/core/manifest.hpp"
#include "eduvsum/core/segments.hpp"

namespace eduvsum::service {

namespace {

class Statement {
public:
    Statement(sqlite3* db, const char* sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
            fail(ErrorKind::Io, std::string("sqlite prepare: ") + sqlite3_errmsg(db));
        }
    }
    ~Statement() { sqlite3_finalize(stmt_); }
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;

    Statement& bind(int i, const std::string& v) {
        check(sqlite3_bind_text(stmt_, i, v.c_str(), -1, SQLITE_TRANSIENT));
        return *this;
    }
    Statement& bind(int i, int v) {
        check(sqlite3_bind_int(stmt_, i, v));
        return *this;
    }
    Statement& bind(int i, double v) {
        check(sqlite3_bind_double(stmt_, i, v));
        return *this;
    }
    Statement& bind(int i, const std::optional<std::string>& v) {
        check(v ? sqlite3_bind_text(stmt_, i, v->c_str(), -1, SQLITE_TRANSIENT) : sqlite3_bind_null(stmt_, i));
        return *this;
    }

    // True while a row is available.
    bool step() {
        const int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        fail(ErrorKind::Io, std::string("sqlite step: ") + sqlite3_errmsg(db_));
    }

    std::string text(int col) const {
        const auto* p = sqlite3_column_text(stmt_, col);
        return p ? reinterpret_cast<const char*>(p) : "";
    }
    std::optional<std::string> maybe_text(int col) const {
        if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
        return text(col);
    }
    int integer(int col) const { return sqlite3_column_int(stmt_, col); }
    double real(int col) const { return sqlite3_column_double(stmt_, col); }

private:
    void check(int rc) const {
        if (rc != SQLITE_OK) fail(ErrorKind::Io, std::string("sqlite bind: ") + sqlite3_errmsg(db_));
    }

    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

void exec(sqlite3* db, const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        fail(ErrorKind::Io, "sqlite: " + msg);
    }
}

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS videos (
    video_id TEXT PRIMARY KEY,
    media_path TEXT NOT NULL,
    duration REAL NOT NULL,
    native_fps REAL NOT NULL,
    subtitle_path TEXT,
    topic TEXT NOT NULL,
    source TEXT NOT NULL,
    segment_count INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS scores (
    video_id TEXT NOT NULL REFERENCES videos(video_id),
    annotator_id TEXT NOT NULL,
    segment_index INTEGER NOT NULL,
    score INTEGER NOT NULL CHECK (score BETWEEN 1 AND 10),
    updated_at TEXT NOT NULL,
    PRIMARY KEY (video_id, annotator_id, segment_index)
);
)sql";

constexpr const char* kVideoColumns =
    "video_id, media_path, duration, native_fps, subtitle_path, topic, source, segment_count";

VideoRecord read_video(const Statement& st) {
    VideoRecord v;
    v.video_id = st.text(0);
    v.media_path = st.text(1);
    v.duration = st.real(2);
    v.native_fps = st.real(3);
    v.subtitle_path = st.maybe_text(4);
    v.topic = st.text(5);
    v.source = st.text(6);
    return v;
}

AnnotationTask make_task(std::string id, int total, int done) {
    AnnotationTask t{std::move(id), total, done, TaskStatus::New};
    if (done >= total) t.status = TaskStatus::Done;
    else if (done > 0) t.status = TaskStatus::InProgress;
    return t;
}

}  // namespace

const char* to_string(TaskStatus s) {
    switch (s) {
        case TaskStatus::New: return "NEW";
        case TaskStatus::InProgress: return "IN_PROGRESS";
        case TaskStatus::Done: return "DONE";
    }
    return "NEW";
}

AnnotationStore::AnnotationStore(const std::filesystem::path& db_path) {
    if (sqlite3_open_v2(db_path.string().c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                        nullptr) != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        fail(ErrorKind::Io, "cannot open annotation store " + db_path.string() + ": " + msg);
    }
    sqlite3_busy_timeout(db_, 5000);
    if (db_path != ":memory:") exec(db_, "PRAGMA journal_mode=WAL;");
    exec(db_, "PRAGMA synchronous=FULL; PRAGMA foreign_keys=ON;");
    exec(db_, kSchema);
}

AnnotationStore::~AnnotationStore() { sqlite3_close(db_); }

void AnnotationStore::import_videos(const std::vector<VideoRecord>& videos) {
    std::lock_guard lock(mutex_);
    exec(db_, "BEGIN IMMEDIATE;");
    try {
        for (const auto& v : videos) {
            const int segments = segment_count(v.duration);
            Statement st(db_,
                         "INSERT INTO videos VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8) "
                         "ON CONFLICT(video_id) DO UPDATE SET media_path=excluded.media_path, "
                         "duration=excluded.duration, native_fps=excluded.native_fps, "
                         "subtitle_path=excluded.subtitle_path, topic=excluded.topic, source=excluded.source, "
                         "segment_count=excluded.segment_count;");
            st.bind(1, v.video_id).bind(2, v.media_path).bind(3, v.duration).bind(4, v.native_fps);
            st.bind(5, v.subtitle_path).bind(6, v.topic).bind(7, v.source).bind(8, segments);
            st.step();
            // A shorter duration would strand scores past the new last segment.
            Statement prune(db_, "DELETE FROM scores WHERE video_id = ?1 AND segment_index >= ?2;");
            prune.bind(1, v.video_id).bind(2, segments);
            prune.step();
        }
        exec(db_, "COMMIT;");
    } catch (...) {
        exec(db_, "ROLLBACK;");
        throw;
    }
}

std::optional<AnnotationTask> AnnotationStore::task_locked(const std::string& video_id,
                                                           const std::string& annotator) const {
    Statement st(db_,
                 "SELECT v.segment_count, (SELECT COUNT(*) FROM scores s WHERE s.video_id = v.video_id "
                 "AND s.annotator_id = ?2) FROM videos v WHERE v.video_id = ?1;");
    st.bind(1, video_id).bind(2, annotator);
    if (!st.step()) return std::nullopt;
    return make_task(video_id, st.integer(0), st.integer(1));
}

std::vector<AnnotationTask> AnnotationStore::tasks(const std::string& annotator) const {
    std::lock_guard lock(mutex_);
    Statement st(db_,
                 "SELECT v.video_id, v.segment_count, (SELECT COUNT(*) FROM scores s WHERE s.video_id = v.video_id "
                 "AND s.annotator_id = ?1) FROM videos v ORDER BY v.video_id;");
    st.bind(1, annotator);
    std::vector<AnnotationTask> out;
    while (st.step()) out.push_back(make_task(st.text(0), st.integer(1), st.integer(2)));
    return out;
}

std::optional<VideoRecord> AnnotationStore::video(const std::string& video_id) const {
    std::lock_guard lock(mutex_);
    Statement st(db_, (std::string("SELECT ") + kVideoColumns + " FROM videos WHERE video_id = ?1;").c_str());
    st.bind(1, video_id);
    if (!st.step()) return std::nullopt;
    return read_video(st);
}

std::optional<AnnotationTask> AnnotationStore::task(const std::string& video_id, const std::string& annotator) const {
    std::lock_guard lock(mutex_);
    return task_locked(video_id, annotator);
}

std::vector<std::optional<int>> AnnotationStore::scores(const std::string& video_id,
                                                        const std::string& annotator) const {
    std::lock_guard lock(mutex_);
    const auto t = task_locked(video_id, annotator);
    if (!t) fail(ErrorKind::NotFound, "unknown video " + video_id);
    std::vector<std::optional<int>> out(t->total_segments);
    Statement st(db_, "SELECT segment_index, score FROM scores WHERE video_id = ?1 AND annotator_id = ?2;");
    st.bind(1, video_id).bind(2, annotator);
    while (st.step()) {
        const int idx = st.integer(0);
        if (idx >= 0 && idx < t->total_segments) out[idx] = st.integer(1);
    }
    return out;
}

AnnotationTask AnnotationStore::put_score(const std::string& video_id, int segment_index, int score,
                                          const std::string& annotator) {
    if (score < kMinScore || score > kMaxScore) {
        fail(ErrorKind::Validation, "score must be an integer between 1 and 10, got " + std::to_string(score));
    }
    std::lock_guard lock(mutex_);
    const auto t = task_locked(video_id, annotator);
    if (!t) fail(ErrorKind::NotFound, "unknown video " + video_id);
    if (segment_index < 0 || segment_index >= t->total_segments) {
        fail(ErrorKind::NotFound, video_id + " has no segment " + std::to_string(segment_index));
    }
    Statement st(db_,
                 "INSERT INTO scores VALUES (?1, ?2, ?3, ?4, ?5) ON CONFLICT(video_id, annotator_id, segment_index) "
                 "DO UPDATE SET score=excluded.score, updated_at=excluded.updated_at;");
    st.bind(1, video_id).bind(2, annotator).bind(3, segment_index).bind(4, score).bind(5, utc_timestamp_now());
    st.step();
    return *task_locked(video_id, annotator);
}

ExportResult AnnotationStore::export_manifest(bool partial, const std::string& annotator) const {
    std::lock_guard lock(mutex_);
    ExportResult out;
    Statement st(db_, (std::string("SELECT ") + kVideoColumns + " FROM videos ORDER BY video_id;").c_str());
    std::vector<std::pair<VideoRecord, int>> videos;
    while (st.step()) videos.emplace_back(read_video(st), st.integer(7));

    for (auto& [video, total] : videos) {
        Statement sc(db_,
                     "SELECT segment_index, score, updated_at FROM scores WHERE video_id = ?1 AND annotator_id = ?2 "
                     "ORDER BY segment_index;");
        sc.bind(1, video.video_id).bind(2, annotator);
        std::vector<int> scores(total, 0);
        int done = 0;
        std::string latest;
        while (sc.step()) {
            const int idx = sc.integer(0);
            if (idx < 0 || idx >= total) continue;
            scores[idx] = sc.integer(1);
            ++done;
            latest = std::max(latest, sc.text(2));
        }
        if (done == total) {
            out.manifest.annotations.push_back({video.video_id, annotator, scores, latest});
            out.manifest.videos.push_back(std::move(video));
            continue;
        }
        if (done == 0) continue;
        out.incomplete.push_back(video.video_id + ": " + std::to_string(done) + "/" + std::to_string(total) +
                                 " segments scored");
        if (partial) {
            out.manifest.partial_video_ids.push_back(video.video_id);
            out.manifest.videos.push_back(std::move(video));
        }
    }
    validate_manifest(out.manifest);
    return out;
}

}  // namespace eduvsum::service
