#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "amlgraph/red_flags.hpp"
#include "amlgraph/retrieval.hpp"

namespace aml {

/// A retrieved clause with the text needed to quote it.
struct GroundingClause {
  std::string clause_id;
  std::string source;
  std::string text;
  double similarity = 0.0;
};

struct AlertContext {
  Transaction transaction;
  double score = 0.0;
  double threshold = 0.5;
  NodeFeatures features;  // sender's
  std::vector<GroundingClause> clauses;  // retrieval order
  RedFlagRules rules;
};

/// Joins a retrieval result with clause sources and texts from the index.
std::vector<GroundingClause> grounding_clauses(const ClauseIndex& index, const RetrievalResult& retrieved);

enum class Generator { Template, External };
std::string_view to_string(Generator g);

struct Explanation {
  std::string text;
  std::vector<std::string> cited_clause_ids;
  Generator generator = Generator::Template;
  std::optional<std::string> fallback_reason;  // set when an external attempt fell back
};

/// Deterministic template. Clause lines have the form
///   [<rank>] <clause_id> | <source> | similarity <s>
/// followed by the quoted clause text, in retrieval order.
/// Throws Error("no grounding clauses") on empty retrieval and Error when the
/// score does not exceed the threshold.
Explanation render_explanation(const AlertContext& ctx);

/// Clause ids cited by a rendered template explanation, in order of appearance.
std::vector<std::string> parse_template_citations(const std::string& text);

struct ExternalGeneratorConfig {
  std::string endpoint;  // http://host[:port]/path; empty disables the external path
  std::chrono::milliseconds timeout{5000};
  std::string token;     // bearer token, normally from EXPLAIN_API_TOKEN
};

/// Request body of the external generator wire contract.
nlohmann::json external_request_body(const AlertContext& ctx);

/// Posts the context to an external generator. Any failure (unset endpoint,
/// transport error, timeout, non-2xx, malformed body, text citing none of the
/// retrieved clause ids) falls back to render_explanation.
Explanation external_generate(const ExternalGeneratorConfig& cfg, const AlertContext& ctx);

}  // namespace aml
