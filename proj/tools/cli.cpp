#include "cli.hpp"

#include <atomic>
#include <charconv>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dive/analysis.hpp"
#include "dive/api_json.hpp"
#include "dive/document_io.hpp"
#include "dive/dot_export.hpp"
#include "dive/fixture.hpp"
#include "dive/service.hpp"

namespace dive::cli {

namespace {

using nlohmann::json;

struct Common {
  std::string file;
  std::vector<std::string> targets;
  std::vector<std::string> disabled;
  bool as_json = false;
};

struct PolicyFlags {
  std::string and_policy = "min";
  std::string or_policy = "max";
  std::string aggregator = "avg";
  double default_seed = 1.0;

  PolicyConfig config() const {
    return api::policy_from_json(json{{"andPolicy", and_policy},
                                      {"orPolicy", or_policy},
                                      {"appraisalAggregator", aggregator},
                                      {"defaultSeed", default_seed}});
  }
};

std::string read_input(const std::string& file, std::istream& in) {
  std::ostringstream ss;
  if (file == "-") {
    ss << in.rdbuf();
    return ss.str();
  }
  std::ifstream f(file, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + file + "'");
  ss << f.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
}

std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string env_text(const Environment& env) {
  std::string s = "{";
  for (size_t i = 0; i < env.size(); ++i) s += (i ? ", " : "") + env[i];
  return s + "}";
}

std::vector<Element> parse_elements(const std::vector<std::string>& items) {
  std::vector<Element> out;
  for (const auto& d : items) out.push_back(parse_element(d));
  return out;
}

Analysis analyze(const Common& c, std::istream& in, ProvDocument& doc) {
  doc = parse_document(read_input(c.file, in));
  return Analysis::build(doc, std::set<NodeId>(c.targets.begin(), c.targets.end()));
}

void add_common(CLI::App* cmd, Common& c, bool with_disable) {
  cmd->add_option("file", c.file, "dive/1 document ('-' for stdin)")->required();
  cmd->add_option("--target,-t", c.targets, "Target node id (repeatable)")->required();
  if (with_disable)
    cmd->add_option("--disable,-d", c.disabled,
                    "Element to disable: node id or kind:key factor (repeatable)");
  cmd->add_flag("--json", c.as_json, "Emit dive/1 JSON");
}

void add_policy(CLI::App* cmd, PolicyFlags& p) {
  std::vector<std::string> names{"min", "max", "avg"};
  cmd->add_option("--and", p.and_policy, "AND junction policy")
      ->check(CLI::IsMember(names))->capture_default_str();
  cmd->add_option("--or", p.or_policy, "OR junction policy")
      ->check(CLI::IsMember(names))->capture_default_str();
  cmd->add_option("--aggregator", p.aggregator, "Combiner for several appraisals of one node")
      ->check(CLI::IsMember(names))->capture_default_str();
  cmd->add_option("--default-seed", p.default_seed, "Seed for unappraised nodes")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
}

int cmd_validate(const std::string& file, bool as_json, std::istream& in, std::ostream& out) {
  auto text = read_input(file, in);
  try {
    auto doc = parse_document(text);
    if (as_json)
      out << json{{"valid", true}, {"violations", json::array()}}.dump(2) << "\n";
    else
      out << "valid: " << doc.nodes().size() << " nodes, " << doc.edges().size() << " edges, "
          << doc.appraisals().size() << " appraisals\n";
    return 0;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ValidationFailed) throw;
    if (as_json) {
      out << json{{"valid", false}, {"violations", api::violations_to_json(e.violations())}}
                 .dump(2)
          << "\n";
    } else {
      out << "invalid: " << e.violations().size() << " violation(s)\n";
      for (const auto& v : e.violations()) out << "  " << to_string(v.rule) << ": " << v.message << "\n";
    }
    return 1;
  }
}

void print_provenance(const Analysis& a, bool as_json, std::ostream& out) {
  if (as_json) {
    out << json{{"subgraph", api::subgraph_to_json(a.subgraph)},
                {"justifications", api::justifications_to_json(a.graph)},
                {"labels", api::labels_to_json(a.labels)},
                {"catalog", api::catalog_to_json(a.catalog, a.index)},
                {"factorIndex", api::factor_index_to_json(a.index)}}
               .dump(2)
        << "\n";
    return;
  }
  out << "nodes: " << a.subgraph.nodes.size() << ", edges: " << a.subgraph.edges.size()
      << ", assumptions: " << a.labels.assumptions().size() << "\n";
  out << "justifications:\n";
  for (const auto& j : a.graph.justifications) {
    out << "  " << j.consequent << " <= " << j.via << " [";
    bool first = true;
    for (const auto& ant : j.antecedents) {
      out << (first ? "" : ", ") << ant;
      first = false;
    }
    out << "]\n";
  }
  out << "environments:\n";
  for (const auto& [id, envs] : a.labels.all()) {
    out << "  " << id << (a.labels.is_assumption(id) ? " (assumption)" : "") << ":\n";
    for (const auto& env : envs) out << "    " << env_text(env) << "\n";
  }
}

void print_statuses(const WhatIfState& state, bool as_json, std::ostream& out) {
  if (as_json) {
    out << api::whatif_to_json(state).dump(2) << "\n";
    return;
  }
  for (const auto& [id, s] : state.statuses) out << id << "\t" << to_string(s) << "\n";
}

void print_confidence(const ConfidenceMap& conf, const WhatIfState& state,
                      const PolicyConfig& cfg, bool as_json, std::ostream& out) {
  if (as_json) {
    out << api::confidence_to_json(conf, state, cfg).dump(2) << "\n";
    return;
  }
  for (const auto& [id, s] : state.statuses) {
    auto it = conf.values.find(id);
    out << id << "\t" << (it == conf.values.end() ? std::string("-") : shortest(it->second))
        << "\t" << to_string(s) << "\n";
  }
}

std::atomic<HttpServer*> g_server{nullptr};

void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

int cmd_serve(const std::string& addr, const std::string& data_dir, std::ostream& out) {
  Service::Options options;
  if (!data_dir.empty()) options.data_dir = data_dir;
  Service service(std::move(options));
  HttpServer server(service);
  auto [host, port] = parse_address(addr);
  int bound = server.bind(host, port);
  if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind " + addr);
  out << "listening on http://" << host << ":" << bound << std::endl;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.listen_after_bind();
  g_server = nullptr;
  return 0;
}

void report(const Error& e, bool as_json, std::ostream& err) {
  if (as_json) {
    err << api::error_to_json(e).dump(2) << "\n";
    return;
  }
  err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
  for (const auto& v : e.violations()) err << "  " << to_string(v.rule) << ": " << v.message << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Provenance interpretation engine: truth-maintenance environments, "
               "refutation and confidence propagation over dive/1 documents"};
  app.require_subcommand(1);

  std::string validate_file;
  bool validate_json = false;
  auto* validate = app.add_subcommand("validate", "Check a document against every invariant");
  validate->add_option("file", validate_file, "dive/1 document ('-' for stdin)")->required();
  validate->add_flag("--json", validate_json, "Emit violations as JSON");

  std::string format_file, format_out;
  auto* format = app.add_subcommand("format", "Rewrite a document in canonical form");
  format->add_option("file", format_file, "dive/1 document ('-' for stdin)")->required();
  format->add_option("-o,--output", format_out, "Output file (default stdout)");

  std::string fixture_name, fixture_out;
  auto* fixture = app.add_subcommand("fixture", "Write a built-in scenario document");
  fixture->add_option("name", fixture_name, "Scenario name")
      ->required()
      ->check(CLI::IsMember({"lady-ada"}));
  fixture->add_option("-o,--output", fixture_out, "Output file (default stdout)");

  Common prov_args;
  auto* provenance = app.add_subcommand("provenance", "Print upstream subgraph and environments");
  add_common(provenance, prov_args, false);

  Common refute_args;
  auto* refute_cmd = app.add_subcommand("refute", "Print node statuses with elements disabled");
  add_common(refute_cmd, refute_args, true);

  Common conf_args;
  PolicyFlags conf_policy;
  auto* confidence = app.add_subcommand("confidence", "Propagate confidence to every node");
  add_common(confidence, conf_args, true);
  add_policy(confidence, conf_policy);

  Common dot_args;
  PolicyFlags dot_policy;
  std::string dot_out;
  auto* export_dot_cmd = app.add_subcommand("export-dot", "Render the provenance as Graphviz DOT");
  add_common(export_dot_cmd, dot_args, true);
  add_policy(export_dot_cmd, dot_policy);
  export_dot_cmd->add_option("-o,--output", dot_out, "Output file (default stdout)");

  std::string serve_addr = "127.0.0.1:8080", serve_dir;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--addr", serve_addr, "Listen address host:port")
      ->envname("DIVE_ADDR")
      ->capture_default_str();
  serve->add_option("--data-dir", serve_dir, "Directory for documents and session journal")
      ->envname("DIVE_DATA_DIR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
    return 2;
  }

  bool as_json = false;
  try {
    if (*validate) {
      as_json = validate_json;
      return cmd_validate(validate_file, validate_json, in, out);
    }
    if (*format) {
      auto doc = parse_document(read_input(format_file, in));
      write_output(format_out, serialize_document(doc), out);
      return 0;
    }
    if (*fixture) {
      write_output(fixture_out, serialize_document(build_lady_ada_fixture()), out);
      return 0;
    }
    if (*provenance) {
      as_json = prov_args.as_json;
      ProvDocument doc;
      print_provenance(analyze(prov_args, in, doc), as_json, out);
      return 0;
    }
    if (*refute_cmd) {
      as_json = refute_args.as_json;
      ProvDocument doc;
      auto a = analyze(refute_args, in, doc);
      print_statuses(refute(a.labels, a.catalog, parse_elements(refute_args.disabled)), as_json,
                     out);
      return 0;
    }
    if (*confidence || *export_dot_cmd) {
      const bool dot = export_dot_cmd->parsed();
      const auto& args = dot ? dot_args : conf_args;
      auto cfg = (dot ? dot_policy : conf_policy).config();
      as_json = args.as_json;
      ProvDocument doc;
      auto a = analyze(args, in, doc);
      auto state = refute(a.labels, a.catalog, parse_elements(args.disabled));
      auto seeds = seed_confidences(doc, a.subgraph, cfg);
      auto conf = propagate(a.labels, a.graph, seeds, cfg, state);
      if (dot)
        write_output(dot_out, export_dot(a.subgraph, state, conf), out);
      else
        print_confidence(conf, state, cfg, as_json, out);
      return 0;
    }
    if (*serve) return cmd_serve(serve_addr, serve_dir, out);
  } catch (const Error& e) {
    report(e, as_json, err);
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace dive::cli
