#include "eduvsum/model/archive.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/features/cache.hpp"

namespace eduvsum::model {

namespace {

constexpr char kMagic[8] = {'E', 'D', 'U', 'V', 'S', 'U', 'M', 'M'};

template <typename T>
void put(std::string& out, T v) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class Reader {
public:
    Reader(const std::string& data, std::size_t end, std::string origin)
        : data_(data), end_(end), origin_(std::move(origin)) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    std::string bytes(std::size_t n) {
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == end_; }

private:
    void need(std::size_t n) const {
        if (n > end_ - pos_) fail(ErrorKind::ModelLoad, origin_ + ": archive ends inside a record");
    }

    const std::string& data_;
    std::size_t end_;
    std::size_t pos_ = sizeof(kMagic);
    std::string origin_;
};

}  // namespace

namespace detail {

std::string encode_archive(const nlohmann::json& config, std::span<const Tensor> tensors) {
    std::string out(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kArchiveVersion);
    const std::string cfg = config.dump();
    put<std::uint64_t>(out, cfg.size());
    out += cfg;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
        out += t.name;
        put<std::uint64_t>(out, static_cast<std::uint64_t>(t.value.rows()));
        put<std::uint64_t>(out, static_cast<std::uint64_t>(t.value.cols()));
        out.append(reinterpret_cast<const char*>(t.value.data()), static_cast<std::size_t>(t.value.size()) * sizeof(double));
    }
    put<std::uint32_t>(out, features::crc32_of(out.data(), out.size()));
    return out;
}

}  // namespace detail

void save_model(const FusionModel& model, const std::filesystem::path& path) {
    const std::string bytes = detail::encode_archive(model.config().to_json(), model.parameters());
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
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

FusionModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot read model " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string data = buf.str();
    const std::string origin = path.string();

    if (data.size() < sizeof(kMagic) + 4 || std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
        fail(ErrorKind::Checksum, origin + ": not a model archive or truncated");
    }
    const std::size_t body = data.size() - 4;
    std::uint32_t stored;
    std::memcpy(&stored, data.data() + body, 4);
    if (stored != features::crc32_of(data.data(), body)) {
        fail(ErrorKind::Checksum, origin + ": checksum mismatch (file truncated or corrupted)");
    }

    Reader r(data, body, origin);
    const auto version = r.get<std::uint32_t>();
    if (version != kArchiveVersion) {
        fail(ErrorKind::ModelLoad, origin + ": unsupported archive version " + std::to_string(version));
    }
    nlohmann::json cfg_json;
    try {
        cfg_json = nlohmann::json::parse(r.bytes(r.get<std::uint64_t>()));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ModelLoad, origin + ": bad embedded config: " + e.what());
    }
    ModelConfig config;
    try {
        config = ModelConfig::from_json(cfg_json);
    } catch (const Error& e) {
        fail(ErrorKind::ModelLoad, origin + ": " + e.what());
    }

    FusionModel model(config);
    auto& params = model.parameters();
    const auto count = r.get<std::uint32_t>();
    if (count != params.size()) {
        fail(ErrorKind::ModelLoad, origin + ": " + std::to_string(count) + " tensors, config implies " +
                                       std::to_string(params.size()));
    }
    for (auto& p : params) {
        const std::string name = r.bytes(r.get<std::uint32_t>());
        const auto rows = r.get<std::uint64_t>();
        const auto cols = r.get<std::uint64_t>();
        if (name != p.name || rows != static_cast<std::uint64_t>(p.value.rows()) ||
            cols != static_cast<std::uint64_t>(p.value.cols())) {
            fail(ErrorKind::ModelLoad, origin + ": tensor " + name + " is " + std::to_string(rows) + "x" +
                                           std::to_string(cols) + ", config expects " + p.name + " " +
                                           std::to_string(p.value.rows()) + "x" + std::to_string(p.value.cols()));
        }
        const std::string raw = r.bytes(rows * cols * sizeof(double));
        std::memcpy(p.value.data(), raw.data(), raw.size());
    }
    if (!r.done()) fail(ErrorKind::ModelLoad, origin + ": trailing bytes after the last tensor");
    return model;
}

}  // namespace eduvsum::model
