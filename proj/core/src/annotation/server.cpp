#include "reconkit/annotation/server.hpp"

#include <fstream>
#include <iterator>

#include <httplib.h>

#include "reconkit/error.hpp"

namespace reconkit::annotation {

using nlohmann::json;

ImageIndex index_images(const harness::DatasetManifest& dataset) {
    ImageIndex index;
    for (const auto& entry : dataset.entries) {
        const ImageRecord image = dataset.load_image(entry);
        index.urls[entry.image_id] = "/images/" + image.checksum;
        index.files[image.checksum] = entry.image;
        index.content_types[image.checksum] = image.format == "png" ? "image/png" : "image/x-portable-anymap";
    }
    return index;
}

namespace {

int status_for(const std::string& code) {
    if (code == "unknown-session" || code == "unknown-task" || code == "not-found") return 404;
    if (code == "already-completed" || code == "not-completed") return 409;
    return 400;
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const std::string& code, const std::string& message) {
    send_json(res, {{"error", code}, {"message", message}}, status_for(code));
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        throw Error("bad-request", std::string("invalid JSON body: ") + e.what());
    }
}

std::vector<int> ranking_field(const json& body) {
    if (!body.contains("ranking") || !body["ranking"].is_array())
        throw Error("bad-request", "body needs a \"ranking\" array");
    std::vector<int> out;
    for (const auto& v : body["ranking"]) {
        if (!v.is_number_integer()) throw Error("not-a-permutation", "ranks must be integers");
        out.push_back(v.get<int>());
    }
    return out;
}

json progress(const AnnotationSession& s) {
    return {{"done", s.completed.size()}, {"total", s.task_order.size()}};
}

}  // namespace

struct AnnotationServer::Impl {
    std::shared_ptr<AnnotationStore> store;
    ImageIndex images;
    ServerOptions options;
    httplib::Server server;

    template <typename Fn>
    httplib::Server::Handler guarded(Fn fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const Error& e) {
                send_error(res, e.code(), e.detail());
            } catch (const json::exception& e) {
                send_error(res, "bad-request", e.what());
            }
        };
    }

    void routes() {
        server.Post("/api/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const json body = parse_body(req);
                        const std::string annotator = body.value("annotator_id", std::string());
                        if (annotator.empty()) throw Error("bad-request", "annotator_id is required");
                        const auto s = store->create_session(annotator, body.value("seed", std::uint64_t{0}));
                        send_json(res, {{"session_id", s.session_id}, {"progress", progress(s)}}, 201);
                    }));
        server.Get("/api/sessions/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       const auto s = store->session(req.path_params.at("id"));
                       send_json(res, {{"session_id", s.session_id},
                                       {"annotator_id", s.annotator_id},
                                       {"progress", progress(s)},
                                       {"created_at", s.created_at},
                                       {"updated_at", s.updated_at}});
                   }));
        server.Get("/api/sessions/:id/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       const std::string id = req.path_params.at("id");
                       if (auto task = store->next_task(id)) {
                           send_json(res, task->client_json());
                       } else {
                           send_json(res, {{"done", true}, {"progress", progress(store->session(id))}});
                       }
                   }));
        server.Post("/api/sessions/:id/tasks/:task/ranking",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const auto s = store->submit_ranking(req.path_params.at("id"), req.path_params.at("task"),
                                                             ranking_field(parse_body(req)));
                        send_json(res, {{"ok", true}, {"progress", progress(s)}});
                    }));
        server.Post("/api/sessions/:id/tasks/:task/adjudicate",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const json body = parse_body(req);
                        const auto s = store->adjudicate(req.path_params.at("id"), req.path_params.at("task"),
                                                         ranking_field(body), body.value("note", std::string()));
                        send_json(res, {{"ok", true}, {"progress", progress(s)}});
                    }));
        server.Get("/api/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       std::vector<std::string> ids;
                       if (req.has_param("session")) ids.push_back(req.get_param_value("session"));
                       std::string body;
                       for (const auto& p : store->export_preferences(ids)) body += stats::to_json(p).dump() + "\n";
                       res.set_content(body, "application/x-ndjson");
                   }));
        server.Get("/api/rubric", guarded([](const httplib::Request&, httplib::Response& res) {
                       send_json(res, rubric());
                   }));
        server.Get("/images/:checksum", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       const std::string checksum = req.path_params.at("checksum");
                       auto it = images.files.find(checksum);
                       if (it == images.files.end()) throw Error("not-found", "no image " + checksum);
                       std::ifstream in(it->second, std::ios::binary);
                       std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
                       res.set_content(bytes, images.content_types.at(checksum));
                   }));
        if (options.static_dir && !server.set_mount_point("/", options.static_dir->string()))
            throw Error("bad-static-dir", "cannot serve " + options.static_dir->string());
    }
};

AnnotationServer::AnnotationServer(std::shared_ptr<AnnotationStore> store, ImageIndex images, ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
    if (!store) throw Error("invalid-argument", "annotation server needs a store");
    impl_->store = std::move(store);
    impl_->images = std::move(images);
    impl_->options = std::move(options);
    impl_->routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind() {
    const auto& o = impl_->options;
    if (o.port == 0) {
        const int port = impl_->server.bind_to_any_port(o.host);
        if (port < 0) throw Error("bind-failed", "cannot bind " + o.host);
        return port;
    }
    if (!impl_->server.bind_to_port(o.host, o.port))
        throw Error("bind-failed", "cannot bind " + o.host + ":" + std::to_string(o.port));
    return o.port;
}

void AnnotationServer::serve() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}

void AnnotationServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace reconkit::annotation
