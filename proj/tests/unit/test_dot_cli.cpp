#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "dive/analysis.hpp"
#include "dive/document_io.hpp"
#include "dive/dot_export.hpp"
#include "dive/fixture.hpp"
#include "schema_check.hpp"

using namespace dive;
using nlohmann::json;
namespace la = dive::lady_ada;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run_cli(std::vector<std::string> args, const std::string& stdin_text = {}) {
  args.insert(args.begin(), "dive");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  int code = dive::cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture_path() {
  static const std::string path = [] {
    auto p = std::filesystem::temp_directory_path() /
             ("dive-cli-fixture-" + std::to_string(::getpid()) + ".dive.json");
    std::ofstream(p) << serialize_document(build_lady_ada_fixture());
    return p.string();
  }();
  return path;
}

const dive::testing::SchemaCheck& schema() {
  static const auto s = dive::testing::SchemaCheck::load(DIVE_SCHEMA_PATH);
  return s;
}

std::map<std::string, std::string> dot_attrs(const std::string& dot, const std::string& id) {
  std::map<std::string, std::string> out;
  std::istringstream lines(dot);
  std::string line;
  const std::string head = "  \"" + id + "\" [";
  while (std::getline(lines, line)) {
    if (line.rfind(head, 0) != 0) continue;
    static const std::regex attr(R"re((\w+)=("(?:[^"\\]|\\.)*"|[^,\]]+))re");
    for (std::sregex_iterator it(line.begin() + head.size(), line.end(), attr), end; it != end; ++it) {
      auto v = (*it)[2].str();
      if (v.front() == '"') v = v.substr(1, v.size() - 2);
      out[(*it)[1].str()] = v;
    }
  }
  return out;
}

}  // namespace

TEST(ConfidenceColor, RunsRedToGreen) {
  EXPECT_EQ(confidence_color(0.0), "#dc2832");
  EXPECT_EQ(confidence_color(1.0), "#1eaa32");
  EXPECT_EQ(confidence_color(-4.0), confidence_color(0.0));
  EXPECT_EQ(confidence_color(7.0), confidence_color(1.0));
  // Red channel falls and green rises monotonically.
  int last_red = 256, last_green = -1;
  for (int i = 0; i <= 10; ++i) {
    auto c = confidence_color(i / 10.0);
    int red = std::stoi(c.substr(1, 2), nullptr, 16), green = std::stoi(c.substr(3, 2), nullptr, 16);
    EXPECT_LE(red, last_red);
    EXPECT_GE(green, last_green);
    last_red = red;
    last_green = green;
  }
}

TEST(ExportDot, EncodesStatusConfidenceAndKinds) {
  auto doc = build_lady_ada_fixture();
  auto a = Analysis::build(doc, {NodeId(la::kTarget)});
  auto state = refute(a.labels, a.catalog, {parse_element("sourceClass:SELF-REPORT")});
  auto conf = propagate(a.labels, a.graph, seed_confidences(doc, a.subgraph, {}), {}, state);
  auto dot = export_dot(a.subgraph, state, conf);
  EXPECT_EQ(dot.rfind("digraph provenance {\n  rankdir=LR;", 0), 0u);
  EXPECT_EQ(dot.back(), '\n');

  auto geo = dot_attrs(dot, std::string(la::kGeoInfer));
  EXPECT_EQ(geo["shape"], "box");
  EXPECT_EQ(geo["status"], "Refuted");
  EXPECT_NE(geo["style"].find("dashed"), std::string::npos);

  auto target = dot_attrs(dot, std::string(la::kTarget));
  EXPECT_EQ(target["status"], "PartiallyAffected");
  EXPECT_EQ(target["peripheries"], "2");
  EXPECT_EQ(target["penwidth"], "2");
  EXPECT_EQ(target["fillcolor"], confidence_color(1.0));

  auto article = dot_attrs(dot, std::string(la::kArticle));
  EXPECT_EQ(article["shape"], "ellipse");
  EXPECT_EQ(article["fillcolor"], confidence_color(0.1));
  EXPECT_EQ(dot_attrs(dot, std::string(la::kNlpAgent))["shape"], "house");

  // Edges follow the flow of information: used input -> activity.
  EXPECT_NE(dot.find("\"ais-report\" -> \"geo-infer\" [label=\"used\"]"), std::string::npos);
  EXPECT_NE(dot.find("\"geo-infer\" -> \"lady-ada-in-usa\" [label=\"wasGeneratedBy\"]"),
            std::string::npos);
  EXPECT_EQ(dot, export_dot(a.subgraph, state, conf));
}

TEST(ExportDot, QuotesAwkwardIds) {
  ProvDocument d;
  d.add_node(make_entity("say \"hi\"", "multi\nline"));
  auto a = Analysis::build(d, {"say \"hi\""});
  auto state = refute_assumptions(a.labels, {});
  auto dot = export_dot(a.subgraph, state, propagate(a.labels, a.graph, {}, {}, state));
  EXPECT_NE(dot.find(R"("say \"hi\"")"), std::string::npos);
  EXPECT_NE(dot.find(R"(multi\nline)"), std::string::npos);
}

TEST(Cli, FixturePipesIntoValidate) {
  auto fx = run_cli({"fixture", "lady-ada"});
  ASSERT_EQ(fx.code, 0) << fx.err;
  auto v = run_cli({"validate", "-"}, fx.out);
  EXPECT_EQ(v.code, 0) << v.err;
  EXPECT_EQ(v.out.rfind("valid:", 0), 0u);
  auto vj = run_cli({"validate", "--json", "-"}, fx.out);
  auto j = json::parse(vj.out);
  EXPECT_TRUE(schema().errors(j, "validation").empty());
  EXPECT_EQ(j["valid"], true);
}

TEST(Cli, FixtureWritesFileAndFormatIsIdempotent) {
  auto path = std::filesystem::temp_directory_path() / ("dive-cli-out-" + std::to_string(::getpid()) + ".dive.json");
  ASSERT_EQ(run_cli({"fixture", "lady-ada", "-o", path.string()}).code, 0);
  auto formatted = run_cli({"format", path.string()});
  EXPECT_EQ(formatted.code, 0);
  EXPECT_EQ(formatted.out, serialize_document(build_lady_ada_fixture()));
  std::filesystem::remove(path);
}

TEST(Cli, ValidateReportsViolations) {
  auto bad = json::parse(serialize_document(build_lady_ada_fixture()));
  bad["edges"].push_back({{"from", "ais-report"}, {"to", "geo-infer"}, {"relation", "used"}});
  auto r = run_cli({"validate", "--json", "-"}, bad.dump());
  EXPECT_EQ(r.code, 1);
  auto j = json::parse(r.out);
  EXPECT_TRUE(schema().errors(j, "validation").empty());
  EXPECT_EQ(j["valid"], false);
  EXPECT_EQ(j["violations"][0]["rule"], "KindConstraintViolation");
  auto text = run_cli({"validate", "-"}, bad.dump());
  EXPECT_EQ(text.code, 1);
  EXPECT_NE(text.out.find("KindConstraintViolation"), std::string::npos);
}

TEST(Cli, ProvenanceTextAndJson) {
  auto r = run_cli({"provenance", fixture_path(), "--target", std::string(la::kTarget)});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("{ais-report, geo-infer, geoint-agent}"), std::string::npos);
  auto j = run_cli({"provenance", fixture_path(), "-t", std::string(la::kTarget), "--json"});
  auto body = json::parse(j.out);
  EXPECT_TRUE(schema().errors(body, "provenance").empty()) << schema().errors(body, "provenance").front();
  EXPECT_EQ(body["labels"]["environments"][std::string(la::kTarget)].size(), 3u);
}

TEST(Cli, RefuteSelfReport) {
  auto r = run_cli({"refute", fixture_path(), "--target", std::string(la::kTarget), "--disable",
                "sourceClass:SELF-REPORT"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("lady-ada-in-usa\tPartiallyAffected\n"), std::string::npos);
  EXPECT_NE(r.out.find("geo-infer\tRefuted\n"), std::string::npos);
  auto j = run_cli({"refute", fixture_path(), "-t", std::string(la::kTarget), "-d", "sourceClass:SELF-REPORT",
                "-d", "operationClass:Named Entity Recognition", "--json"});
  auto body = json::parse(j.out);
  EXPECT_TRUE(schema().errors(body, "whatIf").empty());
  EXPECT_EQ(body["statuses"][std::string(la::kTarget)], "Refuted");
}

TEST(Cli, ConfidenceMatchesClosedForm) {
  auto doc = build_lady_ada_fixture();
  auto a = Analysis::build(doc, {NodeId(la::kTarget)});
  auto expected = closed_form_check(a.labels, seed_confidences(doc, a.subgraph, {}));

  auto r = run_cli({"confidence", fixture_path(), "--target", std::string(la::kTarget), "--and", "min",
                "--or", "max"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::size_t seen = 0;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::string id, value, status;
    std::getline(fields, id, '\t');
    std::getline(fields, value, '\t');
    std::getline(fields, status, '\t');
    EXPECT_EQ(std::stod(value), expected.values.at(id)) << id;
    ++seen;
  }
  EXPECT_EQ(seen, expected.values.size());

  auto j = run_cli({"confidence", fixture_path(), "-t", std::string(la::kTarget), "--json"});
  auto body = json::parse(j.out);
  EXPECT_TRUE(schema().errors(body, "confidence").empty());
  EXPECT_EQ(body["values"][std::string(la::kTarget)].get<double>(), expected.values.at(NodeId(la::kTarget)));
  EXPECT_EQ(body["values"][std::string(la::kArticle)].get<double>(), 0.1);
}

TEST(Cli, ExportDotToFile) {
  auto path = std::filesystem::temp_directory_path() / ("dive-cli-" + std::to_string(::getpid()) + ".dot");
  auto r = run_cli({"export-dot", fixture_path(), "-t", std::string(la::kTarget), "-d", "twitter-post", "-o",
                path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(dot_attrs(ss.str(), "twitter-post")["status"], "Refuted");
  std::filesystem::remove(path);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"refute", fixture_path()}).code, 2);                       // missing --target
  EXPECT_EQ(run_cli({"confidence", fixture_path(), "-t", "x", "--and", "median"}).code, 2);
  EXPECT_EQ(run_cli({"fixture", "atlantis"}).code, 2);
  auto help = run_cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("export-dot"), std::string::npos);
}

TEST(Cli, EngineErrorsAreStructured) {
  auto r = run_cli({"refute", fixture_path(), "-t", std::string(la::kTarget), "-d", "sourceClass:"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("MalformedFactorRef"), std::string::npos);
  auto j = run_cli({"refute", fixture_path(), "-t", "ghost", "--json"});
  EXPECT_EQ(j.code, 1);
  auto body = json::parse(j.err);
  EXPECT_TRUE(schema().errors(body, "error").empty());
  EXPECT_EQ(body["error"], "UnknownNode");
  EXPECT_EQ(run_cli({"validate", "/nonexistent/file.dive.json"}).code, 1);
  EXPECT_EQ(run_cli({"validate", "-"}, "{").code, 1);
}
