#include "dive/document_io.hpp"

#include <algorithm>

namespace dive {

using nlohmann::json;

namespace {

constexpr size_t kMaxNesting = 128;

[[noreturn]] void schema_error(const std::string& message) {
  throw Error(ErrorCode::SchemaError, message);
}

// nlohmann's parser recurses per nesting level; bound it before parsing.
void check_nesting(std::string_view text) {
  size_t depth = 0;
  bool in_string = false;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      if (++depth > kMaxNesting)
        throw Error(ErrorCode::SyntaxError,
                    "nesting deeper than " + std::to_string(kMaxNesting) +
                        " at byte " + std::to_string(i));
    } else if ((c == ']' || c == '}') && depth > 0) {
      --depth;
    }
  }
}

const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) schema_error(where + " must be an object");
  return j;
}

std::string get_string(const json& obj, const char* key,
                       const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where + " is missing \"" + key + "\"");
  if (!it->is_string()) schema_error(where + "." + key + " must be a string");
  return it->get<std::string>();
}

std::optional<std::string> get_optional_string(const json& obj, const char* key,
                                               const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (!it->is_string()) schema_error(where + "." + key + " must be a string");
  return it->get<std::string>();
}

double get_number(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where + " is missing \"" + key + "\"");
  if (!it->is_number()) schema_error(where + "." + key + " must be a number");
  return it->get<double>();
}

std::optional<double> get_optional_number(const json& obj, const char* key,
                                          const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (!it->is_number()) schema_error(where + "." + key + " must be a number");
  return it->get<double>();
}

void reject_unknown_keys(const json& obj,
                         std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      schema_error(where + " has unknown key \"" + key + "\"");
}

const json* optional_array(const json& root, const char* key) {
  auto it = root.find(key);
  if (it == root.end()) return nullptr;
  if (!it->is_array()) schema_error(std::string("\"") + key + "\" must be an array");
  return &*it;
}

ProvNode parse_node(const json& j, const std::string& where) {
  require_object(j, where);
  ProvNode node;
  node.id = get_string(j, "id", where);
  auto kind_text = get_string(j, "kind", where);
  auto kind = parse_node_kind(kind_text);
  if (!kind) schema_error(where + ".kind \"" + kind_text + "\" is not Entity/Activity/Agent");
  node.kind = *kind;
  node.label = get_optional_string(j, "label", where).value_or("");
  node.source_class = get_optional_string(j, "sourceClass", where);
  node.source_id = get_optional_string(j, "sourceId", where);
  node.operation_class = get_optional_string(j, "operationClass", where);

  if (auto it = j.find("attrs"); it != j.end()) {
    if (!it->is_object()) schema_error(where + ".attrs must be an object");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_string()) schema_error(where + ".attrs." + key + " must be a string");
      node.attrs[key] = value.get<std::string>();
    }
  }
  // Unrecognized string-valued node keys are kept as attributes.
  static const std::set<std::string> known{"id", "kind", "label", "attrs",
                                           "sourceClass", "sourceId",
                                           "operationClass"};
  for (const auto& [key, value] : j.items()) {
    if (known.count(key)) continue;
    if (!value.is_string())
      schema_error(where + " has unknown non-string key \"" + key + "\"");
    if (!node.attrs.emplace(key, value.get<std::string>()).second)
      schema_error(where + " defines attribute \"" + key + "\" twice");
  }
  return node;
}

}  // namespace

ProvDocument parse_document(std::string_view text) {
  check_nesting(text);
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError,
                "syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  } catch (const json::exception& e) {
    // e.g. a number literal outside double range
    throw Error(ErrorCode::SyntaxError, e.what());
  }

  // Any nlohmann type error below is a schema problem, never a crash.
  try {
    if (!root.is_object()) schema_error("document must be a JSON object");
    reject_unknown_keys(root,
                        {"nodes", "edges", "appraisals", "evidence",
                         "preferences", "nexuses", "meta"},
                        "document");
    auto meta = root.find("meta");
    if (meta == root.end()) schema_error("document is missing \"meta\"");
    require_object(*meta, "meta");
    reject_unknown_keys(*meta, {"formatVersion"}, "meta");
    auto version = get_string(*meta, "formatVersion", "meta");
    if (version != kFormatVersion)
      schema_error("unsupported formatVersion \"" + version + "\", expected \"" +
                   std::string(kFormatVersion) + "\"");

    ProvDocument doc;
    std::vector<Violation> violations;
    auto note_duplicate = [&](bool inserted, const NodeId& id) {
      if (!inserted)
        violations.push_back({ErrorCode::DuplicateId, {id},
                              "id '" + id + "' appears more than once"});
    };

    if (auto* nodes = optional_array(root, "nodes")) {
      for (size_t i = 0; i < nodes->size(); ++i) {
        auto node = parse_node((*nodes)[i], "nodes[" + std::to_string(i) + "]");
        auto id = node.id;
        note_duplicate(doc.insert_unchecked(std::move(node)), id);
      }
    }

    if (auto* edges = optional_array(root, "edges")) {
      for (size_t i = 0; i < edges->size(); ++i) {
        std::string where = "edges[" + std::to_string(i) + "]";
        const auto& e = require_object((*edges)[i], where);
        reject_unknown_keys(e, {"relation", "from", "to"}, where);
        auto relation_text = get_string(e, "relation", where);
        auto from = get_string(e, "from", where);
        auto to = get_string(e, "to", where);
        if (auto relation = parse_relation(relation_text))
          doc.insert_unchecked(ProvEdge{from, to, *relation});
        else if (relation_text.empty() || from.empty() || to.empty())
          schema_error(where + " has empty fields");
        else
          doc.insert_unchecked(OpaqueRelation{from, to, relation_text});
      }
    }

    if (auto* appraisals = optional_array(root, "appraisals")) {
      for (size_t i = 0; i < appraisals->size(); ++i) {
        std::string where = "appraisals[" + std::to_string(i) + "]";
        const auto& a = require_object((*appraisals)[i], where);
        reject_unknown_keys(a, {"id", "appraiser", "appraised", "confidence",
                                "likelihood", "rationale"}, where);
        Appraisal appraisal{get_string(a, "id", where),
                            get_string(a, "appraiser", where),
                            get_string(a, "appraised", where),
                            get_number(a, "confidence", where),
                            get_optional_number(a, "likelihood", where),
                            get_optional_string(a, "rationale", where)};
        auto id = appraisal.id;
        note_duplicate(doc.insert_unchecked(std::move(appraisal)), id);
      }
    }

    if (auto* evidence = optional_array(root, "evidence")) {
      for (size_t i = 0; i < evidence->size(); ++i) {
        std::string where = "evidence[" + std::to_string(i) + "]";
        const auto& e = require_object((*evidence)[i], where);
        reject_unknown_keys(e, {"id", "agent", "related", "indicated",
                                "polarity", "strength"}, where);
        auto polarity_text = get_string(e, "polarity", where);
        auto polarity = parse_polarity(polarity_text);
        if (!polarity)
          schema_error(where + ".polarity \"" + polarity_text +
                       "\" is not supporting/counter");
        Evidence ev{get_string(e, "id", where), get_string(e, "agent", where),
                    get_string(e, "related", where),
                    get_string(e, "indicated", where), *polarity,
                    get_optional_number(e, "strength", where)};
        auto id = ev.id;
        note_duplicate(doc.insert_unchecked(std::move(ev)), id);
      }
    }

    if (auto* preferences = optional_array(root, "preferences")) {
      for (size_t i = 0; i < preferences->size(); ++i) {
        std::string where = "preferences[" + std::to_string(i) + "]";
        const auto& p = require_object((*preferences)[i], where);
        reject_unknown_keys(p, {"id", "agent", "preferred", "dispreferred"}, where);
        Preference pref{get_string(p, "id", where), get_string(p, "agent", where),
                        get_string(p, "preferred", where),
                        get_string(p, "dispreferred", where)};
        auto id = pref.id;
        note_duplicate(doc.insert_unchecked(std::move(pref)), id);
      }
    }

    if (auto* nexuses = optional_array(root, "nexuses")) {
      for (size_t i = 0; i < nexuses->size(); ++i) {
        std::string where = "nexuses[" + std::to_string(i) + "]";
        const auto& n = require_object((*nexuses)[i], where);
        reject_unknown_keys(n, {"id", "agent", "members", "jointLikelihood"}, where);
        Nexus nexus{get_string(n, "id", where), get_string(n, "agent", where), {},
                    get_number(n, "jointLikelihood", where)};
        auto members = n.find("members");
        if (members == n.end() || !members->is_array())
          schema_error(where + ".members must be an array");
        for (const auto& m : *members) {
          if (!m.is_string()) schema_error(where + ".members must hold strings");
          if (!nexus.members.insert(m.get<std::string>()).second)
            violations.push_back({ErrorCode::InvalidAnnotation, {nexus.id},
                                  "nexus '" + nexus.id + "' lists member '" +
                                      m.get<std::string>() + "' twice"});
        }
        auto id = nexus.id;
        note_duplicate(doc.insert_unchecked(std::move(nexus)), id);
      }
    }

    auto rest = validate(doc);
    violations.insert(violations.end(), rest.begin(), rest.end());
    if (!violations.empty()) {
      std::string message = "document has " + std::to_string(violations.size()) +
                            " violation(s); first: " + violations.front().message;
      throw Error(ErrorCode::ValidationFailed, std::move(message),
                  std::move(violations));
    }
    return doc;
  } catch (const json::exception& e) {
    schema_error(e.what());
  }
}

json node_to_json(const ProvNode& node) {
  json j{{"id", node.id},
         {"kind", std::string(to_string(node.kind))},
         {"label", node.label}};
  if (!node.attrs.empty()) j["attrs"] = node.attrs;
  if (node.source_class) j["sourceClass"] = *node.source_class;
  if (node.source_id) j["sourceId"] = *node.source_id;
  if (node.operation_class) j["operationClass"] = *node.operation_class;
  return j;
}

json edge_to_json(const ProvEdge& edge) {
  return json{{"relation", std::string(to_string(edge.relation))},
              {"from", edge.from},
              {"to", edge.to}};
}

json appraisal_to_json(const Appraisal& a) {
  json j{{"id", a.id},
         {"appraiser", a.appraiser},
         {"appraised", a.appraised},
         {"confidence", a.confidence}};
  if (a.likelihood) j["likelihood"] = *a.likelihood;
  if (a.rationale) j["rationale"] = *a.rationale;
  return j;
}

json document_to_json(const ProvDocument& doc) {
  json nodes = json::array();
  for (const auto& [_, node] : doc.nodes()) nodes.push_back(node_to_json(node));

  // Modeled and opaque relations interleave in (from, to, relation) order.
  std::vector<std::tuple<NodeId, NodeId, std::string>> all_edges;
  for (const auto& e : doc.edges())
    all_edges.emplace_back(e.from, e.to, std::string(to_string(e.relation)));
  for (const auto& o : doc.opaque_relations())
    all_edges.emplace_back(o.from, o.to, o.relation);
  std::sort(all_edges.begin(), all_edges.end());
  json edges = json::array();
  for (const auto& [from, to, relation] : all_edges)
    edges.push_back(json{{"relation", relation}, {"from", from}, {"to", to}});

  json appraisals = json::array();
  for (const auto& [_, a] : doc.appraisals()) appraisals.push_back(appraisal_to_json(a));

  json evidence = json::array();
  for (const auto& [_, e] : doc.evidence()) {
    json j{{"id", e.id},
           {"agent", e.agent},
           {"related", e.related},
           {"indicated", e.indicated},
           {"polarity", std::string(to_string(e.polarity))}};
    if (e.strength) j["strength"] = *e.strength;
    evidence.push_back(std::move(j));
  }

  json preferences = json::array();
  for (const auto& [_, p] : doc.preferences())
    preferences.push_back(json{{"id", p.id},
                               {"agent", p.agent},
                               {"preferred", p.preferred},
                               {"dispreferred", p.dispreferred}});

  json nexuses = json::array();
  for (const auto& [_, n] : doc.nexuses())
    nexuses.push_back(json{{"id", n.id},
                           {"agent", n.agent},
                           {"members", n.members},
                           {"jointLikelihood", n.joint_likelihood}});

  return json{{"meta", {{"formatVersion", std::string(kFormatVersion)}}},
              {"nodes", std::move(nodes)},
              {"edges", std::move(edges)},
              {"appraisals", std::move(appraisals)},
              {"evidence", std::move(evidence)},
              {"preferences", std::move(preferences)},
              {"nexuses", std::move(nexuses)}};
}

std::string serialize_document(const ProvDocument& doc) {
  require_valid(doc);
  return document_to_json(doc).dump(2) + "\n";
}

}  // namespace dive
