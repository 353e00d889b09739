#include "dive/service.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <regex>
#include <sstream>

#include "dive/api_json.hpp"
#include "dive/document_io.hpp"
#include "dive/dot_export.hpp"

namespace dive {

using nlohmann::json;

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownNode:
    case ErrorCode::UnknownElement:
      return 404;
    case ErrorCode::VersionConflict:
      return 409;
    case ErrorCode::ValidationFailed:
    case ErrorCode::CyclicProvenance:
    case ErrorCode::LabelExplosion:
      return 422;
    case ErrorCode::IoError:
    case ErrorCode::InconsistentState:
      return 500;
    default:
      return 400;
  }
}

struct Service::StoredDocument {
  std::string id;
  ProvDocument doc;
  std::string canonical;
};

struct Service::Session {
  std::string id;
  std::shared_ptr<const StoredDocument> document;
  std::set<NodeId> targets;
  Analysis analysis;
  WhatIfState state;
  PolicyConfig cfg;
  std::int64_t version = 1;
  std::string created_at;
  std::string updated_at;
  mutable std::mutex mutex;
};

namespace {

std::string utc_now() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string document_id_for(std::string_view canonical) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "doc-%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

HttpResponse json_response(int status, const json& j) { return {status, dump(j)}; }

json parse_body(std::string_view body) {
  try {
    return json::parse(body.begin(), body.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::BadRequest, std::string("malformed JSON body: ") + e.what());
  }
}

std::optional<std::int64_t> version_of(const json& body) {
  auto it = body.find("version");
  if (it == body.end()) return std::nullopt;
  if (!it->is_number_integer()) throw Error(ErrorCode::BadRequest, "version must be an integer");
  return it->get<std::int64_t>();
}

void write_file_atomically(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Service::Service(Options options) : options_(std::move(options)) {
  if (!options_.clock) options_.clock = utc_now;
  if (options_.data_dir) {
    std::filesystem::create_directories(*options_.data_dir / "documents");
    replay();
  }
}

Service::~Service() = default;

std::size_t Service::session_count() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

void Service::journal(const json& entry) {
  if (!options_.data_dir || replaying_) return;
  std::lock_guard lock(journal_mutex_);
  std::ofstream out(*options_.data_dir / "sessions.journal", std::ios::app | std::ios::binary);
  out << entry.dump() << "\n";
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "cannot append to session journal");
}

void Service::replay() {
  replaying_ = true;
  const auto& dir = *options_.data_dir;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "documents")) {
    auto name = entry.path().filename().string();
    if (!name.ends_with(kDocumentExtension)) continue;
    try {
      add_document(read_file(entry.path()));
    } catch (const Error&) {
      // A damaged file must not keep the service from starting.
    }
  }

  std::ifstream in(dir / "sessions.journal");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;  // torn final write
    try {
      auto op = j.at("op").get<std::string>();
      auto sid = j.at("sessionId").get<std::string>();
      if (op == "create") {
        open_session(sid, j.at("documentId").get<std::string>(),
                     j.at("targets").get<std::set<NodeId>>(), j.value("at", ""));
        // Session ids are "s<n>"; keep issuing past the highest replayed one.
        if (sid.size() > 1 && sid[0] == 's')
          next_session_ = std::max<std::uint64_t>(next_session_, std::stoull(sid.substr(1)) + 1);
      } else if (auto s = find_session(sid)) {
        std::lock_guard lock(s->mutex);
        if (op == "refute") {
          apply_refutations(*s, j.at("disabled").get<std::vector<std::string>>());
          ++s->version;
        } else if (op == "policy") {
          s->cfg = api::policy_from_json(j.at("policy"));
          ++s->version;
        } else if (op == "delete") {
          std::unique_lock maps(mutex_);
          sessions_.erase(sid);
        }
        s->updated_at = j.value("at", s->updated_at);
      }
    } catch (const std::exception&) {
      // Entries that no longer apply (e.g. document removed) are skipped.
    }
  }
  replaying_ = false;
}

std::string Service::add_document(std::string_view text) {
  auto doc = parse_document(text);
  auto canonical = serialize_document(doc);
  auto id = document_id_for(canonical);
  {
    std::shared_lock lock(mutex_);
    if (documents_.count(id)) return id;
  }
  auto stored = std::make_shared<StoredDocument>(StoredDocument{id, std::move(doc), canonical});
  if (options_.data_dir && !replaying_)
    write_file_atomically(*options_.data_dir / "documents" /
                              (id + std::string(kDocumentExtension)),
                          canonical);
  std::unique_lock lock(mutex_);
  documents_.emplace(id, std::move(stored));
  return id;
}

std::shared_ptr<const Service::StoredDocument> Service::find_document(
    const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = documents_.find(id);
  if (it == documents_.end())
    throw Error(ErrorCode::NotFound, "unknown document '" + id + "'", {id});
  return it->second;
}

std::shared_ptr<Service::Session> Service::find_session(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end())
    throw Error(ErrorCode::NotFound, "unknown session '" + id + "'", {id});
  return it->second;
}

std::string Service::document_text(const std::string& document_id) const {
  return find_document(document_id)->canonical;
}

std::shared_ptr<Service::Session> Service::open_session(const std::string& session_id,
                                                        const std::string& document_id,
                                                        const std::set<NodeId>& targets,
                                                        const std::string& at) {
  if (targets.empty()) throw Error(ErrorCode::BadRequest, "targets must not be empty");
  auto session = std::make_shared<Session>();
  session->id = session_id;
  session->document = find_document(document_id);
  session->targets = targets;
  session->analysis = Analysis::build(session->document->doc, targets, options_.label_options);
  session->state = refute_assumptions(session->analysis.labels, {});
  session->created_at = at;
  session->updated_at = at;
  std::unique_lock lock(mutex_);
  sessions_[session_id] = session;
  return session;
}

json Service::create_session(const std::string& document_id, const std::set<NodeId>& targets) {
  std::string sid;
  {
    std::unique_lock lock(mutex_);
    sid = "s" + std::to_string(next_session_++);
  }
  auto at = options_.clock();
  auto s = open_session(sid, document_id, targets, at);
  journal(json{{"op", "create"}, {"sessionId", sid}, {"documentId", document_id},
               {"targets", targets}, {"at", at}});

  const auto& a = s->analysis;
  json appraisals = json::array();
  for (const auto& [_, ap] : s->document->doc.appraisals())
    if (a.subgraph.contains(ap.appraised)) appraisals.push_back(appraisal_to_json(ap));

  return json{{"sessionId", sid},
              {"documentId", document_id},
              {"version", s->version},
              {"createdAt", s->created_at},
              {"targets", targets},
              {"subgraph", api::subgraph_to_json(a.subgraph)},
              {"justifications", api::justifications_to_json(a.graph)},
              {"labels", api::labels_summary(a.labels, targets)},
              {"catalog", api::catalog_to_json(a.catalog, a.index)},
              {"factorIndex", api::factor_index_to_json(a.index)},
              {"appraisals", std::move(appraisals)},
              {"policy", api::policy_to_json(s->cfg)},
              {"statuses", api::statuses_to_json(s->state)}};
}

json Service::session_summary(const std::string& session_id) const {
  auto s = find_session(session_id);
  std::lock_guard lock(s->mutex);
  return json{{"sessionId", s->id},
              {"documentId", s->document->id},
              {"version", s->version},
              {"createdAt", s->created_at},
              {"updatedAt", s->updated_at},
              {"targets", s->targets},
              {"disabled", s->state.disabled},
              {"policy", api::policy_to_json(s->cfg)},
              {"statuses", api::statuses_to_json(s->state)}};
}

json Service::isolate(const std::string& session_id, std::string_view element) const {
  auto s = find_session(session_id);
  auto parsed = parse_element(element);
  // Analysis is immutable after creation; no session lock needed.
  auto view = dive::isolate(s->analysis.labels, s->analysis.catalog, s->analysis.subgraph, parsed);
  return api::isolation_to_json(to_string(parsed), view);
}

void Service::apply_refutations(Session& s, const std::vector<std::string>& disabled) {
  std::vector<Element> elements;
  elements.reserve(disabled.size());
  for (const auto& text : disabled) elements.push_back(parse_element(text));
  s.state = refute(s.analysis.labels, s.analysis.catalog, elements);
}

json Service::set_refutations(const std::string& session_id,
                              const std::vector<std::string>& disabled,
                              std::optional<std::int64_t> expected_version) {
  auto s = find_session(session_id);
  std::lock_guard lock(s->mutex);
  if (expected_version && *expected_version != s->version)
    throw Error(ErrorCode::VersionConflict,
                "session is at version " + std::to_string(s->version) + ", request expected " +
                    std::to_string(*expected_version));
  apply_refutations(*s, disabled);
  ++s->version;
  s->updated_at = options_.clock();
  journal(json{{"op", "refute"}, {"sessionId", s->id}, {"disabled", s->state.disabled},
               {"at", s->updated_at}});
  auto out = api::whatif_to_json(s->state);
  out["sessionId"] = s->id;
  out["version"] = s->version;
  return out;
}

json Service::set_policy(const std::string& session_id, const json& policy,
                         std::optional<std::int64_t> expected_version) {
  auto s = find_session(session_id);
  std::lock_guard lock(s->mutex);
  if (expected_version && *expected_version != s->version)
    throw Error(ErrorCode::VersionConflict,
                "session is at version " + std::to_string(s->version) + ", request expected " +
                    std::to_string(*expected_version));
  s->cfg = api::policy_from_json(policy, s->cfg);
  ++s->version;
  s->updated_at = options_.clock();
  journal(json{{"op", "policy"}, {"sessionId", s->id}, {"policy", api::policy_to_json(s->cfg)},
               {"at", s->updated_at}});
  return json{{"sessionId", s->id}, {"version", s->version},
              {"policy", api::policy_to_json(s->cfg)}};
}

json Service::confidence(const std::string& session_id) const {
  auto s = find_session(session_id);
  std::lock_guard lock(s->mutex);
  const auto& a = s->analysis;
  auto seeds = seed_confidences(s->document->doc, a.subgraph, s->cfg);
  auto conf = propagate(a.labels, a.graph, seeds, s->cfg, s->state);
  auto out = api::confidence_to_json(conf, s->state, s->cfg);
  out["sessionId"] = s->id;
  out["version"] = s->version;
  return out;
}

std::string Service::dot(const std::string& session_id) const {
  auto s = find_session(session_id);
  std::lock_guard lock(s->mutex);
  const auto& a = s->analysis;
  auto seeds = seed_confidences(s->document->doc, a.subgraph, s->cfg);
  auto conf = propagate(a.labels, a.graph, seeds, s->cfg, s->state);
  return export_dot(a.subgraph, s->state, conf);
}

void Service::delete_session(const std::string& session_id) {
  {
    std::unique_lock lock(mutex_);
    if (!sessions_.erase(session_id))
      throw Error(ErrorCode::NotFound, "unknown session '" + session_id + "'", {session_id});
  }
  journal(json{{"op", "delete"}, {"sessionId", session_id}, {"at", options_.clock()}});
}

HttpResponse Service::handle(const HttpRequest& request) {
  static const std::regex document_route("^/documents/([^/]+)$");
  static const std::regex session_route("^/sessions/([^/]+)(/(isolate|refutations|policy|confidence|dot))?$");
  const auto& method = request.method;
  std::smatch m;

  try {
    if (request.path == "/documents") {
      if (method != "POST") return json_response(405, {{"error", "MethodNotAllowed"}});
      auto id = add_document(request.body);
      return json_response(201, {{"documentId", id}});
    }
    if (std::regex_match(request.path, m, document_route)) {
      if (method != "GET") return json_response(405, {{"error", "MethodNotAllowed"}});
      return {200, document_text(m[1].str())};
    }
    if (request.path == "/sessions") {
      if (method != "POST") return json_response(405, {{"error", "MethodNotAllowed"}});
      auto body = parse_body(request.body);
      if (!body.is_object() || !body.contains("documentId") || !body["documentId"].is_string() ||
          !body.contains("targets") || !body["targets"].is_array())
        throw Error(ErrorCode::BadRequest, "expected {documentId: string, targets: [string]}");
      std::set<NodeId> targets;
      for (const auto& t : body["targets"]) {
        if (!t.is_string()) throw Error(ErrorCode::BadRequest, "targets must be strings");
        targets.insert(t.get<std::string>());
      }
      return json_response(201, create_session(body["documentId"].get<std::string>(), targets));
    }
    if (std::regex_match(request.path, m, session_route)) {
      auto sid = m[1].str();
      auto action = m[3].str();
      if (action.empty()) {
        if (method == "GET") return json_response(200, session_summary(sid));
        if (method == "DELETE") {
          delete_session(sid);
          return json_response(200, {{"deleted", sid}});
        }
      } else if (action == "isolate" && method == "GET") {
        auto it = request.query.find("element");
        if (it == request.query.end())
          throw Error(ErrorCode::BadRequest, "missing query parameter 'element'");
        return json_response(200, isolate(sid, it->second));
      } else if (action == "refutations" && method == "PUT") {
        auto body = parse_body(request.body);
        if (!body.is_object() || !body.contains("disabled") || !body["disabled"].is_array())
          throw Error(ErrorCode::BadRequest, "expected {disabled: [element]}");
        std::vector<std::string> disabled;
        for (const auto& d : body["disabled"]) {
          if (!d.is_string()) throw Error(ErrorCode::BadRequest, "disabled entries must be strings");
          disabled.push_back(d.get<std::string>());
        }
        return json_response(200, set_refutations(sid, disabled, version_of(body)));
      } else if (action == "policy" && method == "PUT") {
        auto body = parse_body(request.body);
        if (!body.is_object()) throw Error(ErrorCode::BadRequest, "policy must be a JSON object");
        return json_response(200, set_policy(sid, body, version_of(body)));
      } else if (action == "confidence" && method == "GET") {
        return json_response(200, confidence(sid));
      } else if (action == "dot" && method == "GET") {
        return {200, dot(sid), "text/vnd.graphviz"};
      }
      return json_response(405, {{"error", "MethodNotAllowed"}});
    }
    return json_response(404, {{"error", "NotFound"}, {"message", "no route " + request.path}});
  } catch (const Error& e) {
    return json_response(http_status_for(e.code()), api::error_to_json(e));
  } catch (const std::exception& e) {
    return json_response(500, {{"error", "Internal"}, {"message", e.what()}});
  }
}

std::pair<std::string, int> parse_address(std::string_view address) {
  auto colon = address.rfind(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorCode::BadRequest, "address must be host:port");
  std::string host(address.substr(0, colon));
  std::string port_text(address.substr(colon + 1));
  int port = 0;
  try {
    size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadRequest, "invalid port '" + port_text + "'");
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::BadRequest, "port out of range");
  if (host.empty()) host = "127.0.0.1";
  return {host, port};
}

}  // namespace dive
