#include "eduvsum/service/server.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "eduvsum/core/errors.hpp"
#include "eduvsum/core/manifest.hpp"
#include "eduvsum/core/segments.hpp"
#include "eduvsum/features/extractor.hpp"

// After Eigen: <resolv.h>, pulled in here, defines a _res macro.
#include <httplib.h>

namespace eduvsum::service {

using nlohmann::json;

namespace {

json task_json(const AnnotationTask& t) {
    return json{{"video_id", t.video_id},
                {"total_segments", t.total_segments},
                {"completed_segments", t.completed_segments},
                {"status", to_string(t.status)}};
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, const char* field = nullptr) {
    json body{{"error", message}};
    if (field) body["field"] = field;
    send_json(res, body, status);
}

std::string annotator_of(const httplib::Request& req) {
    if (req.has_param("annotator")) return req.get_param_value("annotator");
    if (req.has_header("X-Annotator")) return req.get_header_value("X-Annotator");
    return kDefaultAnnotator;
}

std::string media_type(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    if (ext == ".mp4" || ext == ".m4v") return "video/mp4";
    if (ext == ".webm") return "video/webm";
    if (ext == ".mkv") return "video/x-matroska";
    if (ext == ".avi") return "video/x-msvideo";
    if (ext == ".mov") return "video/quicktime";
    if (ext == ".ogv") return "video/ogg";
    return "application/octet-stream";
}

}  // namespace

struct AnnotationServer::Impl {
    AnnotationStore& store;
    ServerOptions options;
    httplib::Server http;
    bool bound = false;

    Impl(AnnotationStore& s, ServerOptions o) : store(s), options(std::move(o)) {}

    void routes() {
        http.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                  {"Access-Control-Allow-Methods", "GET, PUT, OPTIONS"},
                                  {"Access-Control-Allow-Headers", "Content-Type, Range, X-Annotator"},
                                  {"Access-Control-Expose-Headers", "Content-Range, Content-Length, Accept-Ranges"}});
        http.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                spdlog::error("request failed: {}", e.what());
                send_error(res, 500, e.what());
            }
        });

        http.Get("/videos", [this](const httplib::Request& req, httplib::Response& res) {
            json out = json::array();
            for (const auto& t : store.tasks(annotator_of(req))) out.push_back(task_json(t));
            send_json(res, out);
        });

        http.Get(R"(/videos/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const auto video = store.video(id);
            if (!video) return send_error(res, 404, "unknown video " + id);
            const auto who = annotator_of(req);
            json segments = json::array();
            for (const auto& s : segmentize(video->duration)) {
                segments.push_back({{"segment_index", s.segment_index}, {"start", s.start}, {"end", s.end}});
            }
            json scores = json::array();
            for (const auto& s : store.scores(id, who)) scores.push_back(s ? json(*s) : json(nullptr));
            send_json(res, {{"video", eduvsum::to_json(*video)},
                            {"segments", segments},
                            {"scores", scores},
                            {"task", task_json(*store.task(id, who))}});
        });

        http.Get(R"(/videos/([^/]+)/media)", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const auto video = store.video(id);
            if (!video) return send_error(res, 404, "unknown video " + id);
            const auto path = features::resolve_media(options.media_root, video->media_path);
            std::error_code ec;
            const auto size = std::filesystem::file_size(path, ec);
            if (ec) return send_error(res, 404, "media for " + id + " is not available");
            res.set_header("Accept-Ranges", "bytes");
            // Status left unset so a Range request turns into 206 with the right slice.
            res.set_content_provider(
                size, media_type(path),
                [path](std::size_t offset, std::size_t length, httplib::DataSink& sink) {
                    std::ifstream in(path, std::ios::binary);
                    if (!in) return false;
                    in.seekg(static_cast<std::streamoff>(offset));
                    std::vector<char> buf(std::min<std::size_t>(length, 1 << 16));
                    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
                    const auto got = static_cast<std::size_t>(in.gcount());
                    if (got == 0) return false;
                    return sink.write(buf.data(), got);
                });
        });

        http.Put(R"(/videos/([^/]+)/segments/(-?\d+)/score)", [this](const httplib::Request& req,
                                                                    httplib::Response& res) {
            const std::string id = req.matches[1];
            int index = 0;
            try {
                index = std::stoi(req.matches[2]);
            } catch (const std::exception&) {
                return send_error(res, 404, "no such segment");
            }
            json body;
            try {
                body = json::parse(req.body);
            } catch (const json::exception&) {
                return send_error(res, 422, "body must be JSON like {\"score\": 7}", "score");
            }
            if (!body.is_object() || !body.contains("score") || !body["score"].is_number_integer()) {
                return send_error(res, 422, "score must be an integer between 1 and 10", "score");
            }
            const auto score = body["score"].get<long long>();
            if (score < kMinScore || score > kMaxScore) {
                return send_error(res, 422, "score must be an integer between 1 and 10", "score");
            }
            try {
                const auto task = store.put_score(id, index, static_cast<int>(score), annotator_of(req));
                send_json(res, {{"video_id", id}, {"segment_index", index}, {"score", score}, {"task", task_json(task)}});
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::NotFound) return send_error(res, 404, e.what());
                if (e.kind() == ErrorKind::Validation) return send_error(res, 422, e.what(), "score");
                throw;
            }
        });

        http.Get("/export", [this](const httplib::Request& req, httplib::Response& res) {
            const bool partial = req.has_param("partial") && req.get_param_value("partial") == "true";
            const auto result = store.export_manifest(partial, annotator_of(req));
            send_json(res, eduvsum::to_json(result.manifest));
        });

        if (options.ui_root) {
            if (!http.set_mount_point("/", options.ui_root->string())) {
                fail(ErrorKind::Io, "UI root " + options.ui_root->string() + " is not a directory");
            }
        }
    }
};

AnnotationServer::AnnotationServer(AnnotationStore& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
    impl_->routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind() {
    auto& o = impl_->options;
    if (o.port == 0) {
        port_ = impl_->http.bind_to_any_port(o.host);
    } else {
        port_ = impl_->http.bind_to_port(o.host, o.port) ? o.port : -1;
    }
    if (port_ <= 0) fail(ErrorKind::Io, "cannot bind " + o.host + ":" + std::to_string(o.port));
    impl_->bound = true;
    return port_;
}

void AnnotationServer::listen() {
    if (!impl_->bound) bind();
    spdlog::info("annotation service on http://{}:{}", impl_->options.host, port_);
    impl_->http.listen_after_bind();
}

void AnnotationServer::stop() {
    if (impl_) impl_->http.stop();
}

}  // namespace eduvsum::service
