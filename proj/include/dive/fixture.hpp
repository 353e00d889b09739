#pragma once

// Built-in "Lady Ada" scenario: one assertion derived along three paths.
//
//   1. GEOINT: a self-reported AIS transponder record feeds a Geo Infer
//      activity.
//   2. An article authored by Shipping News International goes through named
//      entity recognition and pattern inference.
//   3. A Twitter post goes through the same NER / pattern inference chain.
//
// A human analyst appraises the Shipping News article at 0.1.

#include <string_view>

#include "dive/model.hpp"

namespace dive::lady_ada {

inline constexpr std::string_view kTarget = "lady-ada-in-usa";

// Path 1
inline constexpr std::string_view kAisReport = "ais-report";
inline constexpr std::string_view kGeoInfer = "geo-infer";
inline constexpr std::string_view kGeointAgent = "geoint-agent";

// Path 2
inline constexpr std::string_view kShippingNews = "shipping-news-international";
inline constexpr std::string_view kArticle = "sni-article";
inline constexpr std::string_view kNerArticle = "ner-sni";
inline constexpr std::string_view kArticleLadyAda = "sni-ne-lady-ada";
inline constexpr std::string_view kArticleUsa = "sni-ne-usa";
inline constexpr std::string_view kPatternArticle = "pattern-sni";

// Path 3
inline constexpr std::string_view kTwitterUser = "twitter-user";
inline constexpr std::string_view kTweet = "twitter-post";
inline constexpr std::string_view kNerTweet = "ner-twitter";
inline constexpr std::string_view kTweetLadyAda = "twitter-ne-lady-ada";
inline constexpr std::string_view kTweetUsa = "twitter-ne-usa";
inline constexpr std::string_view kPatternTweet = "pattern-twitter";

// Agents shared by paths 2 and 3
inline constexpr std::string_view kNlpAgent = "nlp-agent";
inline constexpr std::string_view kPatternAgent = "pattern-agent";

// Appraisal layer
inline constexpr std::string_view kAnalyst = "analyst";
inline constexpr std::string_view kArticleAppraisal = "appraisal-sni-article";
inline constexpr double kArticleConfidence = 0.1;

inline constexpr std::string_view kSelfReport = "SELF-REPORT";
inline constexpr std::string_view kNer = "Named Entity Recognition";
inline constexpr std::string_view kPatternInference = "Pattern Inference";
inline constexpr std::string_view kGeoInference = "Geospatial Inference";

ProvDocument build_fixture();

}  // namespace dive::lady_ada

namespace dive {

inline ProvDocument build_lady_ada_fixture() { return lady_ada::build_fixture(); }

}  // namespace dive
