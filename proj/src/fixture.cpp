#include "dive/fixture.hpp"

namespace dive::lady_ada {

namespace {

NodeId id(std::string_view v) { return NodeId(v); }

ProvNode source(std::string_view node, std::string label,
                std::string_view source_class, std::string source_id) {
  auto n = make_entity(id(node), std::move(label));
  n.source_class = std::string(source_class);
  n.source_id = std::move(source_id);
  return n;
}

ProvNode operation(std::string_view node, std::string label,
                   std::string_view operation_class) {
  auto n = make_activity(id(node), std::move(label));
  n.operation_class = std::string(operation_class);
  return n;
}

void link(ProvDocument& doc, std::string_view from, std::string_view to,
          Relation relation) {
  doc.add_edge(ProvEdge{id(from), id(to), relation});
}

// source document -> NER -> two named entities -> pattern inference -> target
void add_nlp_path(ProvDocument& doc, std::string_view document,
                  std::string_view ner, std::string_view lady_ada,
                  std::string_view usa, std::string_view pattern,
                  const std::string& suffix) {
  doc.add_node(operation(ner, "NER (" + suffix + ")", kNer));
  auto ne_lady_ada = make_entity(id(lady_ada), "Lady Ada");
  ne_lady_ada.attrs["entityType"] = "Vessel";
  auto ne_usa = make_entity(id(usa), "USA");
  ne_usa.attrs["entityType"] = "Country";
  doc.add_node(std::move(ne_lady_ada));
  doc.add_node(std::move(ne_usa));
  doc.add_node(operation(pattern, "Pattern Inference (" + suffix + ")",
                         kPatternInference));

  link(doc, ner, document, Relation::Used);
  link(doc, ner, kNlpAgent, Relation::WasAssociatedWith);
  link(doc, lady_ada, ner, Relation::WasGeneratedBy);
  link(doc, usa, ner, Relation::WasGeneratedBy);
  link(doc, pattern, lady_ada, Relation::Used);
  link(doc, pattern, usa, Relation::Used);
  link(doc, pattern, kPatternAgent, Relation::WasAssociatedWith);
  link(doc, kTarget, pattern, Relation::WasGeneratedBy);
}

}  // namespace

ProvDocument build_fixture() {
  ProvDocument doc;

  doc.add_node(make_entity(id(kTarget), "Lady Ada located in USA"));

  // Agents
  doc.add_node(make_agent(id(kGeointAgent), "GEOINT Analyzer"));
  doc.add_node(make_agent(id(kShippingNews), "Shipping News International"));
  doc.add_node(make_agent(id(kTwitterUser), "Twitter User"));
  doc.add_node(make_agent(id(kNlpAgent), "NLP Agent"));
  doc.add_node(make_agent(id(kPatternAgent), "Pattern Inference Agent"));
  auto analyst = make_agent(id(kAnalyst), "Human Analyst");
  analyst.attrs["agentType"] = "human";
  doc.add_node(std::move(analyst));

  // 1. GEOINT via the vessel's own AIS transponder
  doc.add_node(source(kAisReport, "AIS transponder report", kSelfReport,
                      "AIS transponder (Lady Ada)"));
  doc.add_node(operation(kGeoInfer, "Geo Infer", kGeoInference));
  link(doc, kGeoInfer, kAisReport, Relation::Used);
  link(doc, kGeoInfer, kGeointAgent, Relation::WasAssociatedWith);
  link(doc, kTarget, kGeoInfer, Relation::WasGeneratedBy);

  // 2. Shipping News International article
  doc.add_node(source(kArticle, "Shipping News International article",
                      "NEWS", "Shipping News International"));
  link(doc, kArticle, kShippingNews, Relation::WasAttributedTo);
  add_nlp_path(doc, kArticle, kNerArticle, kArticleLadyAda, kArticleUsa,
               kPatternArticle, "Shipping News");

  // 3. Twitter post
  doc.add_node(source(kTweet, "Twitter post", "SOCIAL-MEDIA", "Twitter"));
  link(doc, kTweet, kTwitterUser, Relation::WasAttributedTo);
  add_nlp_path(doc, kTweet, kNerTweet, kTweetLadyAda, kTweetUsa, kPatternTweet,
               "Twitter");

  doc.attach(Appraisal{id(kArticleAppraisal), id(kAnalyst), id(kArticle),
                       kArticleConfidence, std::nullopt,
                       "Unreliable outlet; story not corroborated"});
  return doc;
}

}  // namespace dive::lady_ada
