#include "eduvsum/features/cache.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>
#include <zlib.h>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/core/rng.hpp"

namespace eduvsum::features {

using nlohmann::json;

namespace {

json spec_json(const BackendSpec& s) { return json{{"name", s.name}, {"dim", s.output_dim}}; }

std::string hex32(std::uint32_t v) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", v);
    return buf;
}

void write_atomically(const std::filesystem::path& path, const std::string& bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::Io, "cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) fail(ErrorKind::Io, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::optional<std::string> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::filesystem::path entry(const std::filesystem::path& dir, const char* name, const std::string& fp,
                            const char* ext) {
    return dir / (std::string(name) + "." + fp + ext);
}

std::optional<FeatureMatrix> load_matrix(const std::filesystem::path& dir, Modality m, const std::string& fp,
                                         Eigen::Index frames, bool& present) {
    const auto header_text = read_file(entry(dir, to_string(m), fp, ".json"));
    const auto payload = read_file(entry(dir, to_string(m), fp, ".bin"));
    if (!header_text || !payload) return std::nullopt;
    json header;
    try {
        header = json::parse(*header_text);
        if (header.at("fingerprint").get<std::string>() != fp || header.at("dtype").get<std::string>() != "float32") {
            return std::nullopt;
        }
        const auto rows = header.at("rows").get<Eigen::Index>();
        const auto cols = header.at("cols").get<Eigen::Index>();
        if (rows != frames || cols <= 0 ||
            payload->size() != static_cast<std::size_t>(rows * cols) * sizeof(float)) {
            spdlog::warn("{}: cached {} matrix has the wrong size; recomputing", dir.string(), to_string(m));
            return std::nullopt;
        }
        if (header.at("checksum").get<std::string>() != hex32(crc32_of(payload->data(), payload->size()))) {
            spdlog::warn("{}: checksum mismatch in cached {} features; recomputing", dir.string(), to_string(m));
            return std::nullopt;
        }
        present = header.at("present").get<bool>();
        FeatureMatrix mat(rows, cols);
        std::memcpy(mat.data(), payload->data(), payload->size());
        return mat;
    } catch (const json::exception& e) {
        spdlog::warn("{}: unreadable cache header ({}); recomputing", dir.string(), e.what());
        return std::nullopt;
    }
}

}  // namespace

std::uint32_t crc32_of(const void* data, std::size_t size) {
    uLong crc = crc32(0L, Z_NULL, 0);
    const auto* bytes = static_cast<const Bytef*>(data);
    while (size > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
        crc = crc32(crc, bytes, chunk);
        bytes += chunk;
        size -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

json FeatureConfig::to_json() const {
    return json{{"visual", spec_json(visual)},
                {"audio", spec_json(audio)},
                {"text", spec_json(text)},
                {"sample_rate", sample_rate},
                {"segment_length", segment_length},
                {"audio_window", audio_window},
                {"audio_step", audio_step},
                {"audio_rate", audio_rate},
                {"stub_seed", stub_seed}};
}

std::string FeatureConfig::fingerprint() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json().dump())));
    return buf;
}

void cache_features(const FeatureBundle& bundle, const std::string& fingerprint,
                    const std::filesystem::path& cache_dir) {
    bundle.validate();
    const auto dir = cache_dir / bundle.video_id;
    std::filesystem::create_directories(dir);
    for (Modality m : {Modality::Visual, Modality::Audio, Modality::Text}) {
        const FeatureMatrix& mat = bundle.matrix(m);
        std::string bytes(reinterpret_cast<const char*>(mat.data()), static_cast<std::size_t>(mat.size()) * sizeof(float));
        json header{{"video_id", bundle.video_id},
                    {"modality", to_string(m)},
                    {"rows", mat.rows()},
                    {"cols", mat.cols()},
                    {"dtype", "float32"},
                    {"fingerprint", fingerprint},
                    {"present", bundle.present.contains(m)},
                    {"checksum", hex32(crc32_of(bytes.data(), bytes.size()))}};
        write_atomically(entry(dir, to_string(m), fingerprint, ".bin"), bytes);
        write_atomically(entry(dir, to_string(m), fingerprint, ".json"), header.dump(2));
    }
    json frames{{"video_id", bundle.video_id},
                {"fingerprint", fingerprint},
                {"timestamps", bundle.timestamps},
                {"segment_index", bundle.segment_index}};
    // Written last: its presence marks a complete entry.
    write_atomically(entry(dir, "frames", fingerprint, ".json"), frames.dump());
}

std::optional<FeatureBundle> load_cached(const std::string& video_id, const std::string& fingerprint,
                                         const std::filesystem::path& cache_dir) {
    const auto dir = cache_dir / video_id;
    const auto frames_text = read_file(entry(dir, "frames", fingerprint, ".json"));
    if (!frames_text) return std::nullopt;
    FeatureBundle bundle;
    bundle.video_id = video_id;
    try {
        const json frames = json::parse(*frames_text);
        if (frames.at("fingerprint").get<std::string>() != fingerprint) return std::nullopt;
        bundle.timestamps = frames.at("timestamps").get<std::vector<double>>();
        bundle.segment_index = frames.at("segment_index").get<std::vector<int>>();
    } catch (const json::exception& e) {
        spdlog::warn("{}: unreadable frame index ({}); recomputing", dir.string(), e.what());
        return std::nullopt;
    }
    const auto n = static_cast<Eigen::Index>(bundle.timestamps.size());
    bool present = false;
    for (Modality m : {Modality::Visual, Modality::Audio, Modality::Text}) {
        auto mat = load_matrix(dir, m, fingerprint, n, present);
        if (!mat) return std::nullopt;
        bundle.matrix(m) = std::move(*mat);
        switch (m) {
            case Modality::Visual: bundle.present.visual = present; break;
            case Modality::Audio: bundle.present.audio = present; break;
            case Modality::Text: bundle.present.text = present; break;
        }
    }
    try {
        bundle.validate();
    } catch (const Error& e) {
        spdlog::warn("{}: invalid cached bundle ({}); recomputing", dir.string(), e.what());
        return std::nullopt;
    }
    return bundle;
}

}  // namespace eduvsum::features
