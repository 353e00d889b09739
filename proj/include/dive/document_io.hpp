#pragma once

// The "dive/1" document format: a UTF-8 JSON object with top-level keys
// nodes, edges, appraisals, evidence, preferences, nexuses and meta.
// Canonical output sorts every collection by id (edges by from, to,
// relation), uses a stable key order, two-space indentation and a trailing LF.

#include <string>
#include <string_view>

#include <json.hpp>

#include "dive/model.hpp"

namespace dive {

inline constexpr std::string_view kFormatVersion = "dive/1";
inline constexpr std::string_view kDocumentExtension = ".dive.json";

// Throws Error with SyntaxError (message carries the byte offset),
// SchemaError, or ValidationFailed (carrying every violation).
ProvDocument parse_document(std::string_view text);

// Throws Error(ValidationFailed) if the document does not validate.
std::string serialize_document(const ProvDocument& doc);

// Same canonical structure as serialize_document, without the validity gate.
// Used to embed documents and subgraphs in API responses.
nlohmann::json document_to_json(const ProvDocument& doc);

nlohmann::json node_to_json(const ProvNode& node);
nlohmann::json edge_to_json(const ProvEdge& edge);
nlohmann::json appraisal_to_json(const Appraisal& appraisal);

}  // namespace dive
