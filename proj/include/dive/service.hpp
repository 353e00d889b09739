#pragma once

// Session-oriented engine behind the HTTP API. Routing is transport-free:
// handle() maps a request to a response, so it can be driven directly by
// tests, the CLI and the Python bindings, and HttpServer only adapts sockets.
//
// Routes:
//   POST   /documents                     dive/1 text -> {documentId}
//   GET    /documents/{id}                canonical serialization
//   POST   /sessions                      {documentId, targets[]}
//   GET    /sessions/{id}                 session summary
//   GET    /sessions/{id}/isolate?element=...
//   PUT    /sessions/{id}/refutations     {disabled[], version?}
//   PUT    /sessions/{id}/policy          {andPolicy, orPolicy, appraisalAggregator,
//                                          defaultSeed, version?}
//   GET    /sessions/{id}/confidence
//   GET    /sessions/{id}/dot
//   DELETE /sessions/{id}

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "dive/analysis.hpp"
#include "dive/propagate.hpp"

namespace dive {

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

int http_status_for(ErrorCode code);

class Service {
 public:
  struct Options {
    // Documents are stored as <dir>/documents/<id>.dive.json and session
    // mutations appended to <dir>/sessions.journal; both are replayed on
    // construction. No directory means memory only.
    std::optional<std::filesystem::path> data_dir;
    // Timestamp source; defaults to UTC wall clock in ISO-8601.
    std::function<std::string()> clock;
    LabelOptions label_options;
  };

  explicit Service(Options options = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpResponse handle(const HttpRequest& request);

  // Typed operations behind the routes. They throw Error; handle() turns
  // errors into status codes.
  std::string add_document(std::string_view text);
  std::string document_text(const std::string& document_id) const;
  nlohmann::json create_session(const std::string& document_id,
                                const std::set<NodeId>& targets);
  nlohmann::json session_summary(const std::string& session_id) const;
  nlohmann::json isolate(const std::string& session_id, std::string_view element) const;
  nlohmann::json set_refutations(const std::string& session_id,
                                 const std::vector<std::string>& disabled,
                                 std::optional<std::int64_t> expected_version);
  nlohmann::json set_policy(const std::string& session_id, const nlohmann::json& policy,
                            std::optional<std::int64_t> expected_version);
  nlohmann::json confidence(const std::string& session_id) const;
  std::string dot(const std::string& session_id) const;
  void delete_session(const std::string& session_id);

  std::size_t session_count() const;

 private:
  struct StoredDocument;
  struct Session;

  std::shared_ptr<const StoredDocument> find_document(const std::string& id) const;
  std::shared_ptr<Session> find_session(const std::string& id) const;
  void journal(const nlohmann::json& entry);
  void replay();

  // Mutations shared by the public API and journal replay.
  std::shared_ptr<Session> open_session(const std::string& session_id,
                                        const std::string& document_id,
                                        const std::set<NodeId>& targets,
                                        const std::string& at);
  static void apply_refutations(Session& s, const std::vector<std::string>& disabled);

  Options options_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const StoredDocument>> documents_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_session_ = 1;
  std::mutex journal_mutex_;
  bool replaying_ = false;
};

// Binds cpp-httplib to a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  // Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Parses "host:port"; throws BadRequest.
std::pair<std::string, int> parse_address(std::string_view address);

}  // namespace dive
