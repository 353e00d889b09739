#include <gtest/gtest.h>

#include <random>

#include "dive/analysis.hpp"
#include "dive/fixture.hpp"
#include "dive/propagate.hpp"
#include "oracle.hpp"
#include "random_docs.hpp"

using namespace dive;
namespace la = dive::lady_ada;

namespace {

struct Fixture {
  ProvDocument doc = build_lady_ada_fixture();
  Analysis a = Analysis::build(doc, {NodeId(la::kTarget)});
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::IoError;
}

ProvDocument chain(double premise, double activity, double agent) {
  ProvDocument d;
  d.add_node(make_entity("p", "premise"));
  d.add_node(make_activity("a", "step"));
  d.add_node(make_agent("g", "agent"));
  d.add_node(make_agent("judge", "judge"));
  d.add_node(make_entity("c", "conclusion"));
  d.add_edge({"a", "p", Relation::Used});
  d.add_edge({"a", "g", Relation::WasAssociatedWith});
  d.add_edge({"c", "a", Relation::WasGeneratedBy});
  d.attach(Appraisal{"s1", "judge", "p", premise, std::nullopt, std::nullopt});
  d.attach(Appraisal{"s2", "judge", "a", activity, std::nullopt, std::nullopt});
  d.attach(Appraisal{"s3", "judge", "g", agent, std::nullopt, std::nullopt});
  return d;
}

ConfidenceMap run(const Analysis& a, const SeedMap& seeds, const PolicyConfig& cfg,
                  const WhatIfState* state = nullptr) {
  return propagate(a.labels, a.graph, seeds, cfg,
                   state ? *state : refute_assumptions(a.labels, {}));
}

}  // namespace

TEST(Policies, NamesAndRules) {
  for (auto p : {Policy::Min, Policy::Max, Policy::Avg})
    EXPECT_EQ(parse_policy(to_string(p)), p);
  EXPECT_FALSE(parse_policy("median"));
  std::vector<double> xs{0.2, 0.8, 0.5};
  EXPECT_EQ(builtin_rule(Policy::Min)(xs), 0.2);
  EXPECT_EQ(builtin_rule(Policy::Max)(xs), 0.8);
  EXPECT_DOUBLE_EQ(builtin_rule(Policy::Avg)(xs), 0.5);
  PolicyConfig cfg;
  EXPECT_EQ(cfg.and_policy, Policy::Min);
  EXPECT_EQ(cfg.or_policy, Policy::Max);
  EXPECT_EQ(cfg.appraisal_aggregator, Policy::Avg);
  EXPECT_EQ(cfg.default_seed, 1.0);
  cfg.default_seed = 1.5;
  EXPECT_EQ(code_of([&] { check_policy(cfg); }), ErrorCode::RangeError);
}

TEST(SeedConfidences, Examples) {
  const auto& f = fx();
  auto seeds = seed_confidences(f.doc, f.a.subgraph, {});
  EXPECT_EQ(seeds.at(NodeId(la::kArticle)), 0.1);
  EXPECT_EQ(seeds.at(NodeId(la::kTweet)), 1.0);
  EXPECT_EQ(seeds.size(), f.a.subgraph.nodes.size());

  ProvDocument d;
  d.add_node(make_entity("x", "x"));
  d.add_node(make_entity("y", "y"));
  d.add_node(make_agent("h1", "h1"));
  d.add_node(make_agent("h2", "h2"));
  d.attach(Appraisal{"ap1", "h1", "x", 0.2, std::nullopt, std::nullopt});
  d.attach(Appraisal{"ap2", "h2", "x", 0.8, std::nullopt, std::nullopt});
  auto sub = retrieve_upstream(d, {"x", "y"});
  EXPECT_DOUBLE_EQ(seed_confidences(d, sub, {}).at("x"), 0.5);
  PolicyConfig lo;
  lo.appraisal_aggregator = Policy::Min;
  lo.default_seed = 0.3;
  EXPECT_EQ(seed_confidences(d, sub, lo).at("x"), 0.2);
  EXPECT_EQ(seed_confidences(d, sub, lo).at("y"), 0.3);

  // A nexus adds its joint likelihood as one more appraisal of each member.
  d.attach(Nexus{"nx", "h1", {"x", "y"}, 0.6});
  auto with_nexus = seed_confidences(d, sub, {});
  EXPECT_DOUBLE_EQ(with_nexus.at("x"), (0.2 + 0.8 + 0.6) / 3);
  EXPECT_EQ(with_nexus.at("y"), 0.6);
}

TEST(Propagate, AllOnesStayOne) {
  const auto& f = fx();
  for (auto p : {Policy::Min, Policy::Max, Policy::Avg}) {
    PolicyConfig cfg{p, p, Policy::Avg, 1.0};
    auto conf = run(f.a, {}, cfg);
    EXPECT_EQ(conf.values.size(), f.a.labels.all().size());
    for (const auto& [n, v] : conf.values) EXPECT_EQ(v, 1.0) << n;
  }
}

TEST(Propagate, LowAppraisalDominatesItsPathOnly) {
  const auto& f = fx();
  auto seeds = seed_confidences(f.doc, f.a.subgraph, {});
  auto conf = run(f.a, seeds, {});
  for (auto n : {la::kArticle, la::kNerArticle, la::kArticleLadyAda, la::kArticleUsa, la::kPatternArticle})
    EXPECT_EQ(conf.values.at(NodeId(n)), 0.1) << n;
  EXPECT_EQ(conf.values.at(NodeId(la::kTarget)), 1.0);
  EXPECT_EQ(conf.values, closed_form_check(f.a.labels, seeds).values);

  // Excising the article keeps the target via the other two paths.
  auto state = refute(f.a.labels, f.a.catalog, {NodeId(la::kArticle)});
  auto after = run(f.a, seeds, {}, &state);
  EXPECT_EQ(state.statuses.at(NodeId(la::kTarget)), Status::PartiallyAffected);
  EXPECT_EQ(after.values.at(NodeId(la::kTarget)), 1.0);
  EXPECT_FALSE(after.values.count(NodeId(la::kArticleUsa)));
  EXPECT_FALSE(after.values.count(NodeId(la::kArticle)));
}

TEST(Propagate, OwnAppraisalCombinesThroughAndPolicy) {
  auto doc = build_lady_ada_fixture();
  doc.attach(Appraisal{"ap-target", NodeId(la::kAnalyst), NodeId(la::kTarget), 0.7, std::nullopt,
                       std::nullopt});
  auto a = Analysis::build(doc, {NodeId(la::kTarget)});
  auto seeds = seed_confidences(doc, a.subgraph, {});
  EXPECT_EQ(run(a, seeds, {}).values.at(NodeId(la::kTarget)), 0.7);
  // The closed form only covers assumption seeds.
  EXPECT_EQ(code_of([&] { closed_form_check(a.labels, seeds); }), ErrorCode::PreconditionViolated);
}

TEST(Propagate, AveragePolicies) {
  auto doc = chain(0.4, 0.9, 0.7);
  auto a = Analysis::build(doc, {"c"});
  auto seeds = seed_confidences(doc, a.subgraph, {});
  PolicyConfig avg{Policy::Avg, Policy::Max, Policy::Avg, 1.0};
  auto conf = run(a, seeds, avg);
  // activity: avg(0.9, 0.4, 0.7); justification: avg(activity, 0.4, 0.7); entity: avg(1, that)
  double act = (0.9 + 0.4 + 0.7) / 3;
  double just = (act + 0.4 + 0.7) / 3;
  EXPECT_DOUBLE_EQ(conf.values.at("a"), act);
  EXPECT_DOUBLE_EQ(conf.values.at("c"), (1.0 + just) / 2);
}

TEST(Propagate, InconsistentStateIsRejected) {
  const auto& f = fx();
  auto other = Analysis::build(chain(0.4, 0.9, 0.7), {"c"});
  auto foreign = refute_assumptions(other.labels, {});
  EXPECT_EQ(code_of([&] { run(f.a, {}, {}, &foreign); }), ErrorCode::InconsistentState);
}

TEST(ClosedForm, Examples) {
  auto doc = chain(0.4, 0.9, 0.7);
  auto a = Analysis::build(doc, {"c"});
  auto seeds = seed_confidences(doc, a.subgraph, {});
  EXPECT_EQ(closed_form_check(a.labels, seeds).values.at("c"), 0.4);

  // Two disjoint paths with minima 0.1 and 0.8.
  ProvDocument d;
  d.add_node(make_entity("c", "c"));
  d.add_node(make_agent("judge", "judge"));
  for (auto [name, lo] : {std::pair{"x", 0.1}, std::pair{"y", 0.8}}) {
    std::string p = std::string(name) + "-premise", act = std::string(name) + "-act";
    d.add_node(make_entity(p, p));
    d.add_node(make_activity(act, act));
    d.add_edge({act, p, Relation::Used});
    d.add_edge({"c", act, Relation::WasGeneratedBy});
    d.attach(Appraisal{"ap-" + p, "judge", p, lo, std::nullopt, std::nullopt});
  }
  auto b = Analysis::build(d, {"c"});
  auto s = seed_confidences(d, b.subgraph, {});
  EXPECT_EQ(closed_form_check(b.labels, s).values.at("c"), 0.8);
  EXPECT_EQ(run(b, s, {}).values.at("c"), 0.8);

  PolicyConfig other{Policy::Avg, Policy::Max, Policy::Avg, 1.0};
  EXPECT_EQ(code_of([&] { closed_form_check(b.labels, s, other); }), ErrorCode::PreconditionViolated);
}

TEST(PropagateProperties, FixtureRandomSeedsMatchClosedForm) {
  const auto& f = fx();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    SeedMap seeds;
    for (const auto& [x, _] : f.a.labels.assumptions()) seeds[x] = u(rng);
    auto conf = run(f.a, seeds, {});
    ASSERT_EQ(conf.values, closed_form_check(f.a.labels, seeds).values);
    ASSERT_EQ(conf.values, dive::testing::Oracle(f.a.subgraph).closed_form(seeds));
  }
}

TEST(PropagateProperties, RangeMonotonicityDominanceAndRefutationConsistency) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Policy ps[] = {Policy::Min, Policy::Max, Policy::Avg};
  for (const auto& rd : dive::testing::random_corpus(100, 777)) {
    auto a = Analysis::build(rd.doc, rd.targets);
    SeedMap seeds;
    for (const auto& [n, _] : a.subgraph.nodes) seeds[n] = u(rng);
    PolicyConfig cfg{ps[rng() % 3], ps[rng() % 3], Policy::Avg, u(rng)};
    std::set<NodeId> blocked;
    for (const auto& [x, _] : a.labels.assumptions())
      if (rng() % 5 == 0) blocked.insert(x);
    auto state = refute_assumptions(a.labels, blocked);
    auto conf = run(a, seeds, cfg, &state);
    for (const auto& [n, st] : state.statuses)
      ASSERT_EQ(conf.values.count(n) == 0, st == Status::Refuted) << n;
    for (const auto& [n, v] : conf.values) ASSERT_TRUE(v >= 0.0 && v <= 1.0);

    // Raising one seed never lowers anything.
    auto bumped = seeds;
    auto it = std::next(bumped.begin(), static_cast<long>(rng() % bumped.size()));
    it->second = std::min(1.0, it->second + u(rng) * (1.0 - it->second));
    auto conf2 = run(a, bumped, cfg, &state);
    for (const auto& [n, v] : conf.values) ASSERT_GE(conf2.values.at(n), v) << n;

    // With and=min, confidence never exceeds the seed of an assumption shared
    // by all of a node's environments.
    if (cfg.and_policy == Policy::Min && blocked.empty()) {
      for (const auto& [n, envs] : a.labels.all()) {
        if (envs.empty()) continue;
        for (const auto& x : envs.front()) {
          bool everywhere = std::all_of(envs.begin(), envs.end(), [&](const Environment& e) {
            return std::binary_search(e.begin(), e.end(), x);
          });
          if (everywhere) ASSERT_LE(conf.values.at(n), seeds.at(x)) << n << " " << x;
        }
      }
    }
  }
}
