#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "eduvsum/service/store.hpp"

namespace eduvsum::service {

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::filesystem::path media_root = ".";
    // Static UI assets served from "/" when set.
    std::optional<std::filesystem::path> ui_root;
    std::string cors_origin = "*";
};

// JSON over HTTP:
//   GET  /videos                              task list
//   GET  /videos/{id}                         record, segment layout, scores, task
//   GET  /videos/{id}/media                   media bytes, Range aware
//   PUT  /videos/{id}/segments/{i}/score      body {"score": n}; 422 out of range, 404 unknown
//   GET  /export[?partial=true]               dataset manifest
// The annotator defaults to "default"; override with ?annotator= or an
// X-Annotator header.
class AnnotationServer {
public:
    AnnotationServer(AnnotationStore& store, ServerOptions options);
    ~AnnotationServer();

    // Binds the socket and returns the bound port. Io error on failure.
    int bind();
    // Blocks until stop(). Binds first if needed.
    void listen();
    void stop();
    // Bound port; after bind().
    int port() const { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace eduvsum::service
