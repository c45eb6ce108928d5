#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "reconkit/annotation/store.hpp"
#include "reconkit/harness/dataset.hpp"

namespace reconkit::annotation {

/// Image URLs for tasks and the files behind them, addressed by checksum.
struct ImageIndex {
    std::map<std::string, std::string> urls;                    // image id -> "/images/<checksum>"
    std::map<std::string, std::filesystem::path> files;         // checksum -> file
    std::map<std::string, std::string> content_types;           // checksum -> MIME type
};

ImageIndex index_images(const harness::DatasetManifest& dataset);

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::optional<std::filesystem::path> static_dir;
};

/// JSON over HTTP:
///   POST /api/sessions                               {"annotator_id", "seed"?}
///   GET  /api/sessions/:id                           session summary
///   GET  /api/sessions/:id/next                      task or {"done": true}
///   POST /api/sessions/:id/tasks/:task/ranking       {"ranking": [display ranks]}
///   POST /api/sessions/:id/tasks/:task/adjudicate    {"ranking", "note"?}
///   GET  /api/export[?session=id]                    JSON Lines
///   GET  /api/rubric
///   GET  /images/:checksum
/// plus the UI assets under "/" when static_dir is set. Errors are
/// {"error": code, "message": text}.
class AnnotationServer {
public:
    AnnotationServer(std::shared_ptr<AnnotationStore> store, ImageIndex images, ServerOptions options = {});
    ~AnnotationServer();

    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    /// Binds and returns the port; throws "bind-failed".
    int bind();
    /// Serves until stop(); bind() first.
    void serve();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace reconkit::annotation
