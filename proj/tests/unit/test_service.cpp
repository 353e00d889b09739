#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dive/document_io.hpp"
#include "dive/fixture.hpp"
#include "dive/service.hpp"
#include "schema_check.hpp"

using namespace dive;
using nlohmann::json;
namespace la = dive::lady_ada;

namespace {

const dive::testing::SchemaCheck& schema() {
  static const auto s = dive::testing::SchemaCheck::load(DIVE_SCHEMA_PATH);
  return s;
}

void expect_schema(const json& body, const std::string& def) {
  auto errs = schema().errors(body, def);
  EXPECT_TRUE(errs.empty()) << def << ": " << (errs.empty() ? "" : errs.front()) << "\n"
                            << body.dump(2).substr(0, 2000);
}

Service::Options fixed_clock() {
  Service::Options o;
  o.clock = [] { return std::string("2024-01-01T00:00:00Z"); };
  return o;
}

struct Client {
  Service& service;
  HttpResponse call(std::string method, std::string path, std::string body = {},
                    std::map<std::string, std::string> query = {}) {
    return service.handle({std::move(method), std::move(path), std::move(query), std::move(body)});
  }
  json ok(std::string method, std::string path, const json& body = nullptr, int status = 200,
          std::map<std::string, std::string> query = {}) {
    auto r = call(std::move(method), std::move(path), body.is_null() ? "" : body.dump(),
                  std::move(query));
    EXPECT_EQ(r.status, status) << r.body;
    return json::parse(r.body);
  }
};

std::string fixture_text() { return serialize_document(build_lady_ada_fixture()); }

class ServiceTest : public ::testing::Test {
 protected:
  Service service{fixed_clock()};
  Client client{service};
  std::string doc_id;
  std::string sid;

  void SetUp() override {
    auto r = client.call("POST", "/documents", fixture_text());
    ASSERT_EQ(r.status, 201) << r.body;
    doc_id = json::parse(r.body)["documentId"];
    auto created = client.ok("POST", "/sessions",
                             {{"documentId", doc_id}, {"targets", {la::kTarget}}}, 201);
    sid = created["sessionId"];
  }
};

}  // namespace

TEST_F(ServiceTest, DocumentsAreContentAddressedAndCanonical) {
  auto r = client.call("POST", "/documents", fixture_text());
  EXPECT_EQ(r.status, 201);
  expect_schema(json::parse(r.body), "documentCreated");
  EXPECT_EQ(json::parse(r.body)["documentId"], doc_id);
  auto got = client.call("GET", "/documents/" + doc_id);
  EXPECT_EQ(got.status, 200);
  EXPECT_EQ(got.body, fixture_text());
  EXPECT_EQ(client.call("GET", "/documents/doc-0000000000000000").status, 404);
}

TEST_F(ServiceTest, InvalidDocumentYields422WithViolations) {
  auto bad = json::parse(fixture_text());
  bad["appraisals"].push_back({{"id", "dup"}, {"appraiser", "analyst"},
                               {"appraised", "sni-article"}, {"confidence", 0.5}});
  auto r = client.call("POST", "/documents", bad.dump());
  EXPECT_EQ(r.status, 422);
  auto body = json::parse(r.body);
  expect_schema(body, "error");
  EXPECT_EQ(body["error"], "ValidationFailed");
  ASSERT_FALSE(body["violations"].empty());
  EXPECT_EQ(body["violations"][0]["rule"], "DuplicateAppraisal");
  EXPECT_EQ(client.call("POST", "/documents", "{not json").status, 400);
}

TEST_F(ServiceTest, SessionCreationCarriesTheWholeView) {
  auto body = client.ok("POST", "/sessions", {{"documentId", doc_id}, {"targets", {la::kTarget}}}, 201);
  expect_schema(body, "sessionCreated");
  int to_target = 0;
  for (const auto& j : body["justifications"]) to_target += j["consequent"] == la::kTarget;
  EXPECT_EQ(to_target, 3);
  EXPECT_EQ(body["labels"]["targetEnvironments"][std::string(la::kTarget)].size(), 3u);
  ASSERT_EQ(body["appraisals"].size(), 1u);
  EXPECT_EQ(body["appraisals"][0]["confidence"], 0.1);
  EXPECT_EQ(body["createdAt"], "2024-01-01T00:00:00Z");
  EXPECT_NE(body["sessionId"], sid);
}

TEST_F(ServiceTest, SessionCreationErrors) {
  EXPECT_EQ(client.call("POST", "/sessions", json{{"documentId", "nope"}, {"targets", {"x"}}}.dump()).status, 404);
  EXPECT_EQ(client.call("POST", "/sessions", json{{"documentId", doc_id}, {"targets", {"ghost"}}}.dump()).status, 404);
  EXPECT_EQ(client.call("POST", "/sessions", json{{"documentId", doc_id}}.dump()).status, 400);
  EXPECT_EQ(client.call("POST", "/sessions", json{{"documentId", doc_id}, {"targets", json::array()}}.dump()).status, 400);
}

TEST_F(ServiceTest, IsolateByFactorAndNode) {
  auto body = client.ok("GET", "/sessions/" + sid + "/isolate", nullptr, 200,
                        {{"element", "operationClass:Named Entity Recognition"}});
  expect_schema(body, "isolation");
  std::set<std::string> emph = body["emphasized"];
  for (auto n : {la::kArticleLadyAda, la::kArticleUsa, la::kTweetLadyAda, la::kTweetUsa})
    EXPECT_TRUE(emph.count(std::string(n)));
  EXPECT_EQ(client.call("GET", "/sessions/" + sid + "/isolate", "", {{"element", "sourceClass:"}}).status, 400);
  EXPECT_EQ(client.call("GET", "/sessions/" + sid + "/isolate", "", {{"element", "ghost"}}).status, 404);
  EXPECT_EQ(client.call("GET", "/sessions/" + sid + "/isolate").status, 400);
}

TEST_F(ServiceTest, RefuteThenConfidence) {
  auto body = client.ok("PUT", "/sessions/" + sid + "/refutations",
                        {{"disabled", {"sourceClass:SELF-REPORT", "operationClass:Named Entity Recognition"}}});
  expect_schema(body, "whatIf");
  EXPECT_EQ(body["statuses"][std::string(la::kTarget)], "Refuted");
  EXPECT_EQ(body["version"], 2);
  auto conf = client.ok("GET", "/sessions/" + sid + "/confidence");
  expect_schema(conf, "confidence");
  EXPECT_FALSE(conf["values"].contains(std::string(la::kTarget)));
  EXPECT_EQ(conf["statuses"][std::string(la::kTarget)], "Refuted");

  auto cleared = client.ok("PUT", "/sessions/" + sid + "/refutations", {{"disabled", json::array()}});
  for (const auto& [n, s] : cleared["statuses"].items()) EXPECT_EQ(s, "Active") << n;
  EXPECT_EQ(client.call("PUT", "/sessions/" + sid + "/refutations",
                        json{{"disabled", {"colour:red"}}}.dump()).status, 404);
  EXPECT_EQ(client.call("PUT", "/sessions/" + sid + "/refutations",
                        json{{"disabled", {"sourceClass:"}}}.dump()).status, 400);
  EXPECT_EQ(client.call("PUT", "/sessions/" + sid + "/refutations",
                        json{{"disabled", {std::string(la::kArticleUsa)}}}.dump()).status, 404);
}

TEST_F(ServiceTest, PolicyIsAcknowledgedAndUsed) {
  auto ack = client.ok("PUT", "/sessions/" + sid + "/policy",
                       {{"andPolicy", "avg"}, {"orPolicy", "min"}, {"appraisalAggregator", "max"},
                        {"defaultSeed", 0.5}});
  expect_schema(ack, "policyAck");
  EXPECT_EQ(ack["policy"]["andPolicy"], "avg");
  auto conf = client.ok("GET", "/sessions/" + sid + "/confidence");
  EXPECT_EQ(conf["policy"], ack["policy"]);
  EXPECT_EQ(conf["seeds"][std::string(la::kTweet)], 0.5);
  EXPECT_EQ(client.call("PUT", "/sessions/" + sid + "/policy", json{{"andPolicy", "median"}}.dump()).status, 400);
  EXPECT_EQ(client.call("PUT", "/sessions/" + sid + "/policy", json{{"defaultSeed", 2}}.dump()).status, 400);
  EXPECT_EQ(client.call("PUT", "/sessions/" + sid + "/policy", json{{"colour", "red"}}.dump()).status, 400);
}

TEST_F(ServiceTest, StaleVersionIsAConflict) {
  auto v = client.ok("GET", "/sessions/" + sid)["version"].get<int>();
  client.ok("PUT", "/sessions/" + sid + "/refutations", {{"disabled", json::array()}, {"version", v}});
  auto r = client.call("PUT", "/sessions/" + sid + "/refutations",
                       json{{"disabled", {"sourceClass:SELF-REPORT"}}, {"version", v}}.dump());
  EXPECT_EQ(r.status, 409);
  expect_schema(json::parse(r.body), "error");
  EXPECT_EQ(client.call("PUT", "/sessions/" + sid + "/policy",
                        json{{"andPolicy", "min"}, {"version", v}}.dump()).status, 409);
  // Nothing changed.
  auto summary = client.ok("GET", "/sessions/" + sid);
  expect_schema(summary, "sessionSummary");
  EXPECT_EQ(summary["disabled"], json::array());
  EXPECT_EQ(summary["version"], v + 1);
}

TEST_F(ServiceTest, ReadsAreByteIdentical) {
  client.ok("PUT", "/sessions/" + sid + "/refutations", {{"disabled", {"sourceClass:SELF-REPORT"}}});
  for (const char* path : {"", "/confidence", "/dot"}) {
    auto a = client.call("GET", "/sessions/" + sid + path);
    auto b = client.call("GET", "/sessions/" + sid + path);
    EXPECT_EQ(a.status, 200);
    EXPECT_EQ(a.body, b.body) << path;
  }
  auto dot = client.call("GET", "/sessions/" + sid + "/dot");
  EXPECT_EQ(dot.content_type, "text/vnd.graphviz");
  EXPECT_EQ(dot.body.rfind("digraph", 0), 0u);
}

TEST_F(ServiceTest, SessionsAreIsolatedFromEachOther) {
  auto other = client.ok("POST", "/sessions", {{"documentId", doc_id}, {"targets", {la::kTarget}}}, 201);
  std::string sid2 = other["sessionId"];
  auto before = client.call("GET", "/sessions/" + sid2 + "/confidence").body;
  client.ok("PUT", "/sessions/" + sid + "/refutations", {{"disabled", {"sourceClass:SELF-REPORT"}}});
  client.ok("PUT", "/sessions/" + sid + "/policy", {{"orPolicy", "avg"}});
  EXPECT_EQ(client.call("GET", "/sessions/" + sid2 + "/confidence").body, before);
}

TEST_F(ServiceTest, DeleteAndUnknownRoutes) {
  auto del = client.ok("DELETE", "/sessions/" + sid);
  expect_schema(del, "deleted");
  EXPECT_EQ(client.call("GET", "/sessions/" + sid).status, 404);
  EXPECT_EQ(client.call("DELETE", "/sessions/" + sid).status, 404);
  EXPECT_EQ(client.call("GET", "/elsewhere").status, 404);
  EXPECT_EQ(client.call("GET", "/documents").status, 405);
}

TEST(ServicePersistence, JournalReplayRestoresSessions) {
  auto dir = std::filesystem::temp_directory_path() / ("dive-service-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::string doc_id, sid, confidence_before;
  {
    auto o = fixed_clock();
    o.data_dir = dir;
    Service s(o);
    Client c{s};
    auto r = s.handle({"POST", "/documents", {}, fixture_text()});
    doc_id = json::parse(r.body)["documentId"];
    sid = c.ok("POST", "/sessions", {{"documentId", doc_id}, {"targets", {la::kTarget}}}, 201)["sessionId"];
    c.ok("PUT", "/sessions/" + sid + "/refutations", {{"disabled", {"sourceClass:SELF-REPORT"}}});
    c.ok("PUT", "/sessions/" + sid + "/policy", {{"orPolicy", "avg"}});
    auto gone = c.ok("POST", "/sessions", {{"documentId", doc_id}, {"targets", {la::kTarget}}}, 201);
    c.ok("DELETE", "/sessions/" + gone["sessionId"].get<std::string>());
    confidence_before = c.call("GET", "/sessions/" + sid + "/confidence").body;
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "documents" / (doc_id + ".dive.json")));
  {
    auto o = fixed_clock();
    o.data_dir = dir;
    Service s(o);
    Client c{s};
    EXPECT_EQ(s.session_count(), 1u);
    EXPECT_EQ(c.call("GET", "/sessions/" + sid + "/confidence").body, confidence_before);
    EXPECT_EQ(c.ok("GET", "/sessions/" + sid)["version"], 3);
    // New sessions continue the counter; the deleted s2 is not reused.
    auto fresh = c.ok("POST", "/sessions", {{"documentId", doc_id}, {"targets", {la::kTarget}}}, 201);
    EXPECT_EQ(fresh["sessionId"], "s3");
  }
  std::filesystem::remove_all(dir);
}

TEST(HttpServer, ServesTheApiOverTcp) {
  Service service(fixed_clock());
  HttpServer server(service);
  int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread loop([&] { server.listen_after_bind(); });

  httplib::Client cli("127.0.0.1", port);
  auto posted = cli.Post("/documents", fixture_text(), "application/json");
  ASSERT_TRUE(posted);
  EXPECT_EQ(posted->status, 201);
  std::string doc_id = json::parse(posted->body)["documentId"];
  auto created = cli.Post("/sessions", json{{"documentId", doc_id}, {"targets", {la::kTarget}}}.dump(),
                          "application/json");
  ASSERT_TRUE(created);
  std::string sid = json::parse(created->body)["sessionId"];
  auto iso = cli.Get("/sessions/" + sid + "/isolate?element=sourceClass%3ASELF-REPORT");
  ASSERT_TRUE(iso);
  EXPECT_EQ(iso->status, 200);
  EXPECT_EQ(json::parse(iso->body)["element"], "sourceClass:SELF-REPORT");
  auto put = cli.Put("/sessions/" + sid + "/refutations",
                     json{{"disabled", {"sourceClass:SELF-REPORT"}}}.dump(), "application/json");
  ASSERT_TRUE(put);
  EXPECT_EQ(json::parse(put->body)["statuses"][std::string(la::kTarget)], "PartiallyAffected");
  auto del = cli.Delete("/sessions/" + sid);
  ASSERT_TRUE(del);
  EXPECT_EQ(del->status, 200);
  EXPECT_EQ(cli.Get("/sessions/" + sid)->status, 404);

  server.stop();
  loop.join();
}

TEST(HttpServer, AddressParsing) {
  EXPECT_EQ(parse_address("0.0.0.0:8080"), (std::pair<std::string, int>{"0.0.0.0", 8080}));
  EXPECT_EQ(parse_address(":9000"), (std::pair<std::string, int>{"127.0.0.1", 9000}));
  EXPECT_THROW(parse_address("localhost"), Error);
  EXPECT_THROW(parse_address("h:70000"), Error);
  EXPECT_THROW(parse_address("h:12x"), Error);
}
