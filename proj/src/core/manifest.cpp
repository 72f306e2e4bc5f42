#include "eduvsum/core/manifest.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/core/segments.hpp"

namespace eduvsum {

using nlohmann::json;

const VideoRecord* DatasetManifest::find_video(const std::string& video_id) const {
    for (const auto& v : videos) {
        if (v.video_id == video_id) return &v;
    }
    return nullptr;
}

const AnnotationSet* DatasetManifest::find_annotation(const std::string& video_id) const {
    for (const auto& a : annotations) {
        if (a.video_id == video_id) return &a;
    }
    return nullptr;
}

namespace {

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) fail(ErrorKind::Parse, path + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(ErrorKind::Parse, path + "." + key + ": missing field");
    return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_string()) fail(ErrorKind::Parse, path + "." + key + ": expected a string");
    return v.get<std::string>();
}

double number_field(const json& obj, const char* key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_number()) fail(ErrorKind::Parse, path + "." + key + ": expected a number");
    return v.get<double>();
}

const json& array_field(const json& obj, const char* key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_array()) fail(ErrorKind::Parse, path + "." + key + ": expected an array");
    return v;
}

std::string indexed(const std::string& base, std::size_t i) {
    return base + "[" + std::to_string(i) + "]";
}

AnnotationSet annotation_from_json(const json& j, const std::string& path) {
    AnnotationSet a;
    a.video_id = string_field(j, "video_id", path);
    a.annotator_id = string_field(j, "annotator_id", path);
    a.created_at = string_field(j, "created_at", path);
    const json& scores = array_field(j, "scores", path);
    a.scores.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!scores[i].is_number_integer()) {
            fail(ErrorKind::Parse, indexed(path + ".scores", i) + ": expected an integer");
        }
        a.scores.push_back(scores[i].get<int>());
    }
    return a;
}

}  // namespace

json to_json(const VideoRecord& video) {
    json j;
    j["video_id"] = video.video_id;
    j["media_path"] = video.media_path;
    j["duration"] = video.duration;
    j["native_fps"] = video.native_fps;
    j["subtitle_path"] = video.subtitle_path ? json(*video.subtitle_path) : json(nullptr);
    j["topic"] = video.topic;
    j["source"] = video.source;
    return j;
}

json to_json(const AnnotationSet& annotation) {
    json j;
    j["video_id"] = annotation.video_id;
    j["annotator_id"] = annotation.annotator_id;
    j["scores"] = annotation.scores;
    j["created_at"] = annotation.created_at;
    return j;
}

json to_json(const DatasetManifest& manifest) {
    json j;
    j["schema_version"] = manifest.schema_version;
    j["videos"] = json::array();
    for (const auto& v : manifest.videos) j["videos"].push_back(to_json(v));
    j["annotations"] = json::array();
    for (const auto& a : manifest.annotations) j["annotations"].push_back(to_json(a));
    if (!manifest.partial_video_ids.empty()) j["partial_video_ids"] = manifest.partial_video_ids;
    return j;
}

json to_json(const SplitSpec& split) {
    return json{{"train_ids", split.train_ids}, {"test_ids", split.test_ids}, {"seed", split.seed}};
}

VideoRecord video_from_json(const json& j, const std::string& path) {
    VideoRecord v;
    v.video_id = string_field(j, "video_id", path);
    v.media_path = string_field(j, "media_path", path);
    v.duration = number_field(j, "duration", path);
    v.native_fps = number_field(j, "native_fps", path);
    if (auto it = j.find("subtitle_path"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) fail(ErrorKind::Parse, path + ".subtitle_path: expected a string or null");
        v.subtitle_path = it->get<std::string>();
    }
    v.topic = string_field(j, "topic", path);
    v.source = j.contains("source") ? string_field(j, "source", path) : std::string{};
    return v;
}

DatasetManifest manifest_from_json(const json& j) {
    DatasetManifest m;
    m.schema_version = string_field(j, "schema_version", "$");
    if (m.schema_version != kManifestSchemaVersion) {
        fail(ErrorKind::Validation, "$.schema_version: unsupported version \"" + m.schema_version + "\"");
    }
    const json& videos = array_field(j, "videos", "$");
    for (std::size_t i = 0; i < videos.size(); ++i) {
        m.videos.push_back(video_from_json(videos[i], indexed("$.videos", i)));
    }
    const json& annotations = array_field(j, "annotations", "$");
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        m.annotations.push_back(annotation_from_json(annotations[i], indexed("$.annotations", i)));
    }
    if (auto it = j.find("partial_video_ids"); it != j.end()) {
        if (!it->is_array()) fail(ErrorKind::Parse, "$.partial_video_ids: expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            if (!(*it)[i].is_string()) {
                fail(ErrorKind::Parse, indexed("$.partial_video_ids", i) + ": expected a string");
            }
            m.partial_video_ids.push_back((*it)[i].get<std::string>());
        }
    }
    return m;
}

SplitSpec split_from_json(const json& j) {
    SplitSpec s;
    s.train_ids = field(j, "train_ids", "$").get<std::vector<std::string>>();
    s.test_ids = field(j, "test_ids", "$").get<std::vector<std::string>>();
    s.seed = field(j, "seed", "$").get<std::uint64_t>();
    return s;
}

void validate_manifest(const DatasetManifest& manifest) {
    if (manifest.schema_version != kManifestSchemaVersion) {
        fail(ErrorKind::Validation, "unsupported schema_version \"" + manifest.schema_version + "\"");
    }
    std::set<std::string> ids;
    for (std::size_t i = 0; i < manifest.videos.size(); ++i) {
        const auto& v = manifest.videos[i];
        const std::string path = indexed("$.videos", i);
        if (v.video_id.empty()) fail(ErrorKind::Validation, path + ".video_id: empty");
        if (!ids.insert(v.video_id).second) {
            fail(ErrorKind::Validation, path + ".video_id: duplicate id \"" + v.video_id + "\"");
        }
        if (!std::isfinite(v.duration) || v.duration <= 0.0) {
            fail(ErrorKind::Validation, path + ".duration: must be > 0");
        }
        if (!std::isfinite(v.native_fps) || v.native_fps <= 0.0) {
            fail(ErrorKind::Validation, path + ".native_fps: must be > 0");
        }
    }
    for (const auto& pid : manifest.partial_video_ids) {
        if (!ids.count(pid)) {
            fail(ErrorKind::Referential, "$.partial_video_ids: unknown video_id \"" + pid + "\"");
        }
    }
    for (std::size_t i = 0; i < manifest.annotations.size(); ++i) {
        const auto& a = manifest.annotations[i];
        const std::string path = indexed("$.annotations", i);
        const VideoRecord* video = manifest.find_video(a.video_id);
        if (video == nullptr) {
            fail(ErrorKind::Referential, path + ".video_id: \"" + a.video_id + "\" does not match any video");
        }
        for (std::size_t s = 0; s < a.scores.size(); ++s) {
            if (a.scores[s] < kMinScore || a.scores[s] > kMaxScore) {
                fail(ErrorKind::Validation, indexed(path + ".scores", s) + ": score " +
                                                std::to_string(a.scores[s]) + " outside [1, 10]");
            }
        }
        const int expected = segment_count(video->duration);
        if (static_cast<int>(a.scores.size()) != expected) {
            fail(ErrorKind::Validation, path + ".scores: " + std::to_string(a.scores.size()) +
                                            " scores for " + std::to_string(expected) + " segments of \"" +
                                            a.video_id + "\"");
        }
    }
}

DatasetManifest parse_manifest(std::string_view text, std::string_view origin) {
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line:column.
        std::size_t line = 1, column = 1;
        const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::ostringstream os;
        os << origin << ":" << line << ":" << column << ": " << e.what();
        fail(ErrorKind::Parse, os.str());
    }
    DatasetManifest m;
    try {
        m = manifest_from_json(j);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Parse) fail(ErrorKind::Parse, std::string(origin) + ": " + e.what());
        throw;
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string(origin) + ": " + e.what());
    }
    validate_manifest(m);
    return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open manifest " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_manifest(buffer.str(), path.string());
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    validate_manifest(manifest);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write manifest " + path.string());
    out << to_json(manifest).dump(2) << "\n";
    if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

std::string utc_timestamp_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace eduvsum
