#include "amlgraph/explain.hpp"

#include <cstdio>
#include <regex>
#include <sstream>

#include <httplib.h>

namespace aml {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string_view to_string(Generator g) { return g == Generator::External ? "external" : "template"; }

std::vector<GroundingClause> grounding_clauses(const ClauseIndex& index, const RetrievalResult& retrieved) {
  std::vector<GroundingClause> out;
  out.reserve(retrieved.size());
  for (const auto& r : retrieved) {
    const auto& c = index.at(r.clause_id);
    out.push_back({c.clause_id, c.source, c.text, r.similarity});
  }
  return out;
}

Explanation render_explanation(const AlertContext& ctx) {
  if (ctx.clauses.empty()) throw Error("no grounding clauses");
  if (!(ctx.score > ctx.threshold)) throw Error("explanations are only rendered for flagged transactions");

  const Transaction& tx = ctx.transaction;
  std::ostringstream out;
  out << "Transaction " << tx.tx_id << " from " << tx.sender << " to " << tx.receiver << " for amount "
      << fixed(tx.amount, 2) << " at timestamp " << tx.timestamp << " was flagged as suspicious.\n";
  out << "Model score " << fixed(ctx.score, 4) << " exceeds the alert threshold " << fixed(ctx.threshold, 4)
      << ".\n";

  auto flags = red_flags(tx, ctx.features, ctx.rules);
  out << "Structural red flags: ";
  if (flags.empty()) {
    out << "none beyond the model score";
  } else {
    for (std::size_t i = 0; i < flags.size(); ++i) out << (i ? "; " : "") << flags[i].description;
  }
  out << ".\n";
  out << "Narrative: " << (tx.narrative.empty() ? std::string("(empty)") : "\"" + tx.narrative + "\"") << "\n";
  out << "Relevant regulatory clauses:\n";

  Explanation ex;
  for (std::size_t i = 0; i < ctx.clauses.size(); ++i) {
    const auto& c = ctx.clauses[i];
    out << "[" << (i + 1) << "] " << c.clause_id << " | " << c.source << " | similarity " << fixed(c.similarity, 4)
        << "\n    \"" << c.text << "\"\n";
    ex.cited_clause_ids.push_back(c.clause_id);
  }
  ex.text = out.str();
  ex.generator = Generator::Template;
  return ex;
}

std::vector<std::string> parse_template_citations(const std::string& text) {
  static const std::regex line(R"(^\[(\d+)\] (\S+) \| )", std::regex::multiline);
  std::vector<std::string> ids;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), line); it != std::sregex_iterator(); ++it) {
    ids.push_back((*it)[2].str());
  }
  return ids;
}

nlohmann::json external_request_body(const AlertContext& ctx) {
  const Transaction& tx = ctx.transaction;
  nlohmann::json flags = nlohmann::json::array();
  for (const auto& f : red_flags(tx, ctx.features, ctx.rules)) flags.push_back(f.description);
  nlohmann::json clauses = nlohmann::json::array();
  for (const auto& c : ctx.clauses) {
    clauses.push_back({{"clause_id", c.clause_id}, {"source", c.source}, {"text", c.text}, {"similarity", c.similarity}});
  }
  return {{"transaction",
           {{"tx_id", tx.tx_id},
            {"sender", tx.sender},
            {"receiver", tx.receiver},
            {"amount", tx.amount},
            {"timestamp", tx.timestamp},
            {"narrative", tx.narrative}}},
          {"score", ctx.score},
          {"flags", flags},
          {"clauses", clauses}};
}

Explanation external_generate(const ExternalGeneratorConfig& cfg, const AlertContext& ctx) {
  auto fallback = [&](std::string reason) {
    Explanation ex = render_explanation(ctx);
    ex.fallback_reason = std::move(reason);
    return ex;
  };
  if (ctx.clauses.empty()) throw Error("no grounding clauses");
  if (cfg.endpoint.empty()) return fallback("external generator endpoint not configured");

  static const std::regex url(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg.endpoint, m, url)) return fallback("unsupported endpoint URL: " + cfg.endpoint);
  const std::string origin = m[1].str();
  const std::string path = m[2].matched ? m[2].str() : "/";

  httplib::Client client(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!cfg.token.empty()) headers.emplace("Authorization", "Bearer " + cfg.token);

  auto res = client.Post(path, headers, external_request_body(ctx).dump(), "application/json");
  if (!res) return fallback("request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) return fallback("non-success status " + std::to_string(res->status));

  auto body = nlohmann::json::parse(res->body, nullptr, false);
  if (body.is_discarded() || !body.is_object() || !body.contains("text") || !body["text"].is_string()) {
    return fallback("malformed generator response");
  }
  Explanation ex;
  ex.text = body["text"].get<std::string>();
  if (ex.text.empty()) return fallback("empty generator response");
  for (const auto& c : ctx.clauses) {
    if (ex.text.find(c.clause_id) != std::string::npos) ex.cited_clause_ids.push_back(c.clause_id);
  }
  if (ex.cited_clause_ids.empty()) return fallback("generator text cites no retrieved clause");
  ex.generator = Generator::External;
  return ex;
}

}  // namespace aml
