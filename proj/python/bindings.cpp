// Python extension `_dive`. Documents cross the boundary as dive/1 text and
// results come back as JSON text in the same shapes the HTTP API returns;
// the pure-Python package decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "dive/analysis.hpp"
#include "dive/api_json.hpp"
#include "dive/document_io.hpp"
#include "dive/dot_export.hpp"
#include "dive/fixture.hpp"
#include "dive/service.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

struct Prepared {
  dive::ProvDocument doc;
  dive::Analysis analysis;
  dive::WhatIfState state;
};

Prepared prepare(const std::string& text, const std::vector<std::string>& targets,
                 const std::vector<std::string>& disabled) {
  auto doc = dive::parse_document(text);
  auto a = dive::Analysis::build(doc, std::set<dive::NodeId>(targets.begin(), targets.end()));
  std::vector<dive::Element> elements;
  for (const auto& d : disabled) elements.push_back(dive::parse_element(d));
  auto state = dive::refute(a.labels, a.catalog, elements);
  return {std::move(doc), std::move(a), std::move(state)};
}

dive::PolicyConfig policy_from(const std::string& policy_json) {
  if (policy_json.empty()) return {};
  try {
    return dive::api::policy_from_json(json::parse(policy_json));
  } catch (const json::exception& e) {
    throw dive::Error(dive::ErrorCode::BadRequest, e.what());
  }
}

std::string provenance(const std::string& text, const std::vector<std::string>& targets) {
  auto p = prepare(text, targets, {});
  const auto& a = p.analysis;
  return json{{"subgraph", dive::api::subgraph_to_json(a.subgraph)},
              {"justifications", dive::api::justifications_to_json(a.graph)},
              {"labels", dive::api::labels_to_json(a.labels)},
              {"catalog", dive::api::catalog_to_json(a.catalog, a.index)},
              {"factorIndex", dive::api::factor_index_to_json(a.index)}}
      .dump();
}

std::string validate(const std::string& text) {
  try {
    dive::parse_document(text);
    return json{{"valid", true}, {"violations", json::array()}}.dump();
  } catch (const dive::Error& e) {
    if (e.code() != dive::ErrorCode::ValidationFailed) throw;
    return json{{"valid", false}, {"violations", dive::api::violations_to_json(e.violations())}}
        .dump();
  }
}

std::string confidence(const std::string& text, const std::vector<std::string>& targets,
                       const std::vector<std::string>& disabled, const std::string& policy_json,
                       bool as_dot) {
  auto cfg = policy_from(policy_json);
  auto p = prepare(text, targets, disabled);
  auto seeds = dive::seed_confidences(p.doc, p.analysis.subgraph, cfg);
  auto conf = dive::propagate(p.analysis.labels, p.analysis.graph, seeds, cfg, p.state);
  if (as_dot) return dive::export_dot(p.analysis.subgraph, p.state, conf);
  return dive::api::confidence_to_json(conf, p.state, cfg).dump();
}

}  // namespace

PYBIND11_MODULE(_dive, m) {
  m.doc() = "Provenance truth maintenance engine";
  m.attr("FORMAT_VERSION") = std::string(dive::kFormatVersion);

  // Raised as DiveError(code, message, detail_json); detail is the error body
  // the HTTP API would send.
  static py::exception<dive::Error> dive_error(m, "DiveError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const dive::Error& e) {
      py::object args = py::make_tuple(std::string(dive::to_string(e.code())), e.what(),
                                       dive::api::error_to_json(e).dump());
      PyErr_SetObject(dive_error.ptr(), args.ptr());
    }
  });

  m.def("fixture", [] { return dive::serialize_document(dive::build_lady_ada_fixture()); },
        "Canonical text of the built-in Lady Ada scenario.");
  m.def("canonicalize", [](const std::string& text) {
    return dive::serialize_document(dive::parse_document(text));
  }, py::arg("text"));
  m.def("validate", &validate, py::arg("text"));
  m.def("provenance", &provenance, py::arg("text"), py::arg("targets"));
  m.def("refute",
        [](const std::string& text, const std::vector<std::string>& targets,
           const std::vector<std::string>& disabled) {
          return dive::api::whatif_to_json(prepare(text, targets, disabled).state).dump();
        },
        py::arg("text"), py::arg("targets"), py::arg("disabled"));
  m.def("confidence",
        [](const std::string& text, const std::vector<std::string>& targets,
           const std::vector<std::string>& disabled, const std::string& policy) {
          return confidence(text, targets, disabled, policy, false);
        },
        py::arg("text"), py::arg("targets"), py::arg("disabled"), py::arg("policy") = "");
  m.def("export_dot",
        [](const std::string& text, const std::vector<std::string>& targets,
           const std::vector<std::string>& disabled, const std::string& policy) {
          return confidence(text, targets, disabled, policy, true);
        },
        py::arg("text"), py::arg("targets"), py::arg("disabled"), py::arg("policy") = "");

  py::class_<dive::Service>(m, "Service")
      .def(py::init([](std::optional<std::string> data_dir, std::optional<std::string> clock) {
             dive::Service::Options o;
             if (data_dir) o.data_dir = *data_dir;
             if (clock) o.clock = [c = *clock] { return c; };
             return std::make_unique<dive::Service>(std::move(o));
           }),
           py::arg("data_dir") = py::none(), py::arg("fixed_clock") = py::none())
      .def("handle",
           [](dive::Service& s, const std::string& method, const std::string& path,
              const std::string& body, const std::map<std::string, std::string>& query) {
             dive::HttpResponse r;
             {
               py::gil_scoped_release release;
               r = s.handle({method, path, query, body});
             }
             return py::make_tuple(r.status, r.body, r.content_type);
           },
           py::arg("method"), py::arg("path"), py::arg("body") = "",
           py::arg("query") = std::map<std::string, std::string>{})
      .def_property_readonly("session_count", &dive::Service::session_count);
}
