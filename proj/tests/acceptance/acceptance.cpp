// Acceptance run: one PASS/FAIL/SKIP line per criterion, exit status 1 if
// any criterion fails. Criteria that exercise the command-line tool drive the
// real amlmon binary.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "amlgraph/betweenness.hpp"
#include "amlgraph/elliptic.hpp"
#include "amlgraph/pipeline.hpp"
#include "amlgraph/random_instances.hpp"
#include "amlgraph/training.hpp"
#include "model_oracles.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using nlohmann::json;
using namespace aml;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Outcome {
  enum class Status { Pass, Fail, Skip } status = Status::Fail;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Status::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Status::Fail, std::move(d)}; }
Outcome verdict(bool ok, std::string d) { return ok ? pass(std::move(d)) : fail(std::move(d)); }

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

json amlmon(const std::string& args) {
  auto r = testing::run(testing::amlmon_path() + " " + args);
  if (r.exit_code != 0) throw std::runtime_error("amlmon " + args + " exited with " + std::to_string(r.exit_code));
  return json::parse(r.out);
}

// Shared state: the end-to-end run feeds criteria 1, 9, 10 and 11.
struct EndToEnd {
  testing::TempDir dir{"acceptance"};
  std::filesystem::path data = dir / "stream.jsonl";
  std::filesystem::path checkpoint = dir / "model.ckpt";
  std::filesystem::path index = dir / "rules.index.json";
  std::filesystem::path alerts_a = dir / "alerts_a.jsonl";
  std::filesystem::path alerts_b = dir / "alerts_b.jsonl";
  std::filesystem::path scores = dir / "scores.jsonl";
  json monitor_a, monitor_b;
  bool ran = false;
};

EndToEnd e2e;
std::vector<Alert> grounding_pool;  // every alert produced during the run

// 1. Separability oracle, then train/monitor/evaluate with default settings.
Outcome planted_benchmark() {
  const auto t0 = Clock::now();
  amlmon("generate --out " + q(e2e.data));

  // Logistic regression on [log1p structural || narrative] for every training example.
  PipelineConfig cfg;
  auto stream = read_transactions_file(e2e.data.string());
  auto emb = make_embedder(cfg.embedder);
  auto split = chronological_split(stream, cfg.train_ratio);
  auto graph = replay_graph(cfg, split.train, &emb);
  auto examples = sender_examples(split.train);
  const auto bet = betweenness_all(graph);
  auto batch = full_batch(graph, bet, emb, &examples);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (const auto& ex : batch.examples) {
    std::vector<double> row;
    const auto raw = node_structural_features(graph, batch.node_ids[ex.row], bet);
    for (double v : {raw.in_degree, raw.out_degree, raw.betweenness, raw.frequency}) row.push_back(std::log1p(v));
    for (std::size_t c = 0; c < batch.narrative.cols; ++c) row.push_back(batch.narrative(ex.row, c));
    rows.push_back(std::move(row));
    labels.push_back(ex.label);
  }
  const double oracle_f1 = oracle::logistic_regression_f1(rows, labels);

  amlmon("train --data " + q(e2e.data) + " --checkpoint " + q(e2e.checkpoint));
  amlmon("index-rules --rules " + q(testing::rules_corpus()) + " --out " + q(e2e.index));
  e2e.monitor_a = amlmon("monitor --checkpoint " + q(e2e.checkpoint) + " --rules " + q(e2e.index) + " --data " +
                         q(e2e.data) + " --alerts-out " + q(e2e.alerts_a) + " --scores-out " + q(e2e.scores));
  auto report = amlmon("evaluate --scores " + q(e2e.scores) + " --data " + q(e2e.data) + " --holdout-ratio 0.8");
  const double elapsed = seconds_since(t0);
  e2e.ran = true;

  const auto& m = report["metrics"];
  const double f1 = m["f1"].get<double>();
  const bool ok = oracle_f1 >= 0.97 && f1 >= 0.95 && elapsed < 180.0;
  return verdict(ok, "oracle F1 " + fmt(oracle_f1) + " (need >= 0.97), held-out F1 " + fmt(f1) + " P " +
                         fmt(m["precision"].get<double>()) + " R " + fmt(m["recall"].get<double>()) + " on " +
                         std::to_string(report["evaluated"].get<std::size_t>()) + " tx (need >= 0.95), " +
                         fmt(elapsed, 1) + " s (budget 180 s)");
}

// 2. Finite-difference gradient check on random small instances.
Outcome gradients() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::size_t checked = 0, skipped = 0;
  double worst = 0.0;
  while (checked < 25) {
    auto dims = random_small_dims(8, 3, rng);
    auto batch = random_batch(2 + rng() % 5, dims.embed_dim, 0.5, rng);
    auto model = GcnModel::initialize(dims, rng());
    if (relu_margin(model, batch) < 1e-3) {
      ++skipped;
      continue;
    }
    worst = std::max(worst, gradient_check(model, batch, 1.0 + static_cast<double>(checked % 3)).max_relative_error);
    ++checked;
  }
  const double elapsed = seconds_since(t0);
  return verdict(worst < 1e-4 && elapsed < 30.0, std::to_string(checked) + " instances, max relative error " +
                                                     sci(worst) + ", " + fmt(elapsed, 2) + " s (" +
                                                     std::to_string(skipped) + " near-kink draws redrawn)");
}

// 3. Graph convolution and full forward pass against dense matrices.
Outcome gcn_oracle() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t % 6);
    auto g = oracle::random_graph(n, 0.45, rng);
    auto dims = random_small_dims(8, 4, rng);
    auto model = GcnModel::initialize(dims, rng());
    std::uniform_real_distribution<double> u(-1, 1);
    GraphBatch b;
    b.structural = Matrix(n, kStructuralInputs);
    for (double& v : b.structural.data) v = 3.0 * std::abs(u(rng));
    b.narrative = Matrix(n, dims.embed_dim);
    for (double& v : b.narrative.data) v = u(rng);
    for (std::size_t i = 0; i < n; ++i) b.node_ids.push_back(std::to_string(i));
    b.adjacency = NormalizedAdjacency::from_neighbors(g.neighbors);

    const auto a_hat = oracle::normalized_adjacency(g.adjacency);
    auto fp = forward(model, b);
    auto want = oracle::dense_scores(model, a_hat, b.structural, b.narrative);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(fp.scores[i] - want[i]));

    Matrix fused(n, dims.fused_width);
    for (double& v : fused.data) v = std::abs(u(rng));
    auto got = gcn_forward(model, b.adjacency, fused);
    std::vector<oracle::Dense> weights;
    for (const auto& w : model.layers) weights.push_back(oracle::to_dense(w));
    auto dense = oracle::gcn(a_hat, oracle::to_dense(fused), weights);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < dims.hidden_width; ++j) worst = std::max(worst, std::abs(got(i, j) - dense[i][j]));
    }
  }
  return verdict(worst < 1e-10, "100 graphs, max abs deviation " + sci(worst));
}

// 4. Brandes against exhaustive shortest-path enumeration.
Outcome betweenness_exact() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> unit(0, 1);
  double worst = 0.0;
  std::size_t mismatched = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 5);
    const double p = 0.1 + 0.6 * unit(rng);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        if (unit(rng) < p) edges.emplace_back(u, v);
        if (unit(rng) < 0.05) edges.emplace_back(u, v);
      }
    }
    TransactionGraph g;
    for (std::size_t v = 0; v < n; ++v) g.add_node("v" + std::to_string(v), 0);
    std::size_t k = 0;
    for (auto [u, v] : edges) {
      g.insert({"e" + std::to_string(k++), "v" + std::to_string(u), "v" + std::to_string(v), 1.0, 0, "", Label::Unknown});
    }
    auto got = betweenness_all(g);
    auto want = oracle::brute_betweenness(n, edges);
    for (std::size_t v = 0; v < n; ++v) {
      const double exact = want[v].value();
      const double diff = std::abs(got.at("v" + std::to_string(v)) - exact);
      worst = std::max(worst, diff);
      if (diff > 1e-12 * std::max(1.0, exact)) ++mismatched;
    }
  }
  return verdict(mismatched == 0, "200 digraphs, " + std::to_string(mismatched) +
                                      " mismatches, max deviation from exact fractions " + sci(worst));
}

std::vector<double> unit_vector(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 1);
  std::vector<double> v(dim);
  double n = 0;
  for (double& x : v) {
    x = g(rng);
    n += x * x;
  }
  for (double& x : v) x /= std::sqrt(n);
  return v;
}

// 5. Top-k against a full sort, with duplicated embeddings forcing ties.
Outcome retrieval_exact() {
  std::mt19937_64 rng(505);
  std::size_t mismatched = 0, tie_trials = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<RegulatoryClause> entries;
    std::vector<std::size_t> perm(100);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < 100; ++i) {
      RegulatoryClause c;
      c.clause_id = "C" + std::to_string(1000 + perm[i]);
      c.embedding = (i > 0 && rng() % 4 == 0) ? entries[rng() % entries.size()].embedding : unit_vector(16, rng);
      entries.push_back(std::move(c));
    }
    ClauseIndex index(16, "acceptance", entries);
    auto query = t % 3 == 0 ? entries[rng() % 100].embedding : unit_vector(16, rng);

    std::vector<double> sims;
    std::vector<std::string> ids;
    for (const auto& c : entries) {
      double s = 0;
      for (std::size_t j = 0; j < 16; ++j) s += query[j] * c.embedding[j];
      sims.push_back(s);
      ids.push_back(c.clause_id);
    }
    auto want = oracle::brute_top_k(sims, ids, 5);
    auto got = query_top_k(index, query, 5);
    bool same = got.size() == want.size();
    for (std::size_t r = 0; same && r < got.size(); ++r) {
      same = got[r].clause_id == ids[want[r]] && got[r].similarity == sims[want[r]];
    }
    mismatched += !same;
    for (std::size_t r = 1; r < want.size(); ++r) {
      if (sims[want[r]] == sims[want[r - 1]]) {
        ++tie_trials;
        break;
      }
    }
  }
  return verdict(mismatched == 0 && tie_trials > 0, "1000 trials, " + std::to_string(mismatched) + " mismatches, " +
                                                        std::to_string(tie_trials) + " with ties inside the top 5");
}

// 6. Incremental window statistics against a recount.
Outcome incremental_stats() {
  std::mt19937_64 rng(606);
  const double alpha = 2e-3, horizon = 600.0;
  TransactionGraph g(DecayParams{alpha}, horizon);
  oracle::RecountOracle o;
  o.alpha = alpha;
  o.horizon = horizon;
  std::uniform_int_distribution<int> node(0, 80), step(0, 6), late(0, 700), op(0, 19);
  Timestamp t = 0;
  std::size_t inserts = 0, prunes = 0, stale = 0;
  for (int i = 0; i < 10000; ++i) {
    if (op(rng) == 0) {
      if (g.prune() != o.prune()) return fail("prune count differs at op " + std::to_string(i));
      ++prunes;
    } else {
      t += step(rng);
      const Timestamp ts = op(rng) < 3 ? t - late(rng) : t;
      const std::string s = "n" + std::to_string(node(rng)), d = "n" + std::to_string(node(rng));
      bool accepted = true;
      try {
        g.insert({"t" + std::to_string(i), s, d, 1.0, ts, "", Label::Unknown});
      } catch (const StaleTransaction&) {
        accepted = false;
      }
      if (accepted != o.insert(s, d, ts)) return fail("staleness differs at op " + std::to_string(i));
      accepted ? ++inserts : ++stale;
    }
    if (i % 500 == 499) {
      if (auto diff = oracle::recount_mismatch(g, o); !diff.empty()) {
        return fail("after op " + std::to_string(i) + ": " + diff);
      }
    }
  }
  g.prune();
  o.prune();
  auto diff = oracle::recount_mismatch(g, o);
  return verdict(diff.empty(), "10000 ops (" + std::to_string(inserts) + " inserts, " + std::to_string(stale) +
                                   " stale, " + std::to_string(prunes) + " prunes), " +
                                   (diff.empty() ? "degrees exact, frequency within 1e-9" : diff));
}

// 7. Loader counts on the public Elliptic export.
Outcome elliptic_smoke() {
  const char* dir = std::getenv("ELLIPTIC_DIR");
  if (dir == nullptr) return {Outcome::Status::Skip, "ELLIPTIC_DIR not set"};
  for (const char* f : {"elliptic_txs_features.csv", "elliptic_txs_classes.csv", "elliptic_txs_edgelist.csv"}) {
    if (!std::filesystem::exists(std::filesystem::path(dir) / f)) {
      return {Outcome::Status::Skip, std::string(f) + " not found in " + dir};
    }
  }
  auto ds = load_elliptic(dir);
  auto split = chronological_split(ds.transactions, 0.8);
  const auto boundary = split.boundary;
  const bool ok = ds.node_count() == 203769 && ds.edge_count() == 234355 &&
                  ds.features.size() == ds.node_count() * kEllipticFeatureWidth && ds.time_step_count() == 49 &&
                  ds.labeled_count() == 119341 && boundary >= 37 && boundary <= 41;
  return verdict(ok, "nodes " + std::to_string(ds.node_count()) + ", edges " + std::to_string(ds.edge_count()) +
                         ", features " + std::to_string(kEllipticFeatureWidth) + ", steps " +
                         std::to_string(ds.time_step_count()) + ", labelled " + std::to_string(ds.labeled_count()) +
                         " (expected 119341), split boundary at step " + std::to_string(boundary));
}

// 8. Loss at the uninformative point and at the clamp.
Outcome loss_sanity() {
  const double ln2 = std::log(2.0);
  const std::vector<double> half{0.5};
  double worst = 0.0;
  for (int y : {0, 1}) worst = std::max(worst, std::abs(bce_loss(half, std::vector<int>{y}, 1.0).value - ln2));
  const std::vector<double> perfect{1.0, 0.0};
  const double clamped = bce_loss(perfect, std::vector<int>{1, 0}, 1.0).value;
  return verdict(worst < 1e-9 && clamped < 1e-6,
                 "|bce(0.5) - ln 2| = " + sci(worst) + ", clamped perfect loss " + sci(clamped));
}

// 9. Two monitor runs over identical inputs.
Outcome determinism() {
  if (!e2e.ran) return fail("end-to-end run did not complete");
  e2e.monitor_b = amlmon("monitor --checkpoint " + q(e2e.checkpoint) + " --rules " + q(e2e.index) + " --data " +
                         q(e2e.data) + " --alerts-out " + q(e2e.alerts_b));
  const auto a = testing::read_file(e2e.alerts_a), b = testing::read_file(e2e.alerts_b);
  const auto n = testing::read_lines(e2e.alerts_a).size();
  return verdict(a == b && n > 0, std::to_string(n) + " alerts, " + std::to_string(a.size()) + " bytes, " +
                                      (a == b ? "byte-identical" : "files differ"));
}

// 10. Every explanation cites only clauses retrieved for its alert.
Outcome grounding() {
  if (!e2e.ran) return fail("end-to-end run did not complete");
  for (const auto& path : {e2e.alerts_a, e2e.alerts_b}) {
    if (!std::filesystem::exists(path)) continue;
    auto alerts = read_alerts(path);
    grounding_pool.insert(grounding_pool.end(), alerts.begin(), alerts.end());
  }
  std::size_t violations = 0, uncited = 0, citations = 0;
  for (const auto& a : grounding_pool) {
    std::set<std::string> retrieved;
    for (const auto& c : a.clauses) retrieved.insert(c.clause_id);
    auto cited = parse_template_citations(a.explanation);
    if (cited.empty()) ++uncited;
    for (const auto& id : cited) {
      ++citations;
      violations += !retrieved.contains(id);
    }
  }
  const bool ok = !grounding_pool.empty() && violations == 0 && uncited == 0;
  return verdict(ok, std::to_string(grounding_pool.size()) + " explanations, " + std::to_string(citations) +
                         " citations, " + std::to_string(violations) + " outside the retrieved set, " +
                         std::to_string(uncited) + " without citations");
}

// 11. Monitor throughput on the benchmark stream with the default refresh interval.
Outcome throughput() {
  if (!e2e.ran) return fail("end-to-end run did not complete");
  std::vector<double> runs{e2e.monitor_a["throughput_tps"].get<double>()};
  if (!e2e.monitor_b.is_null()) runs.push_back(e2e.monitor_b["throughput_tps"].get<double>());
  const double worst = *std::min_element(runs.begin(), runs.end());
  const auto interval = e2e.monitor_a["config"]["betweenness_interval"].get<std::size_t>();
  std::string detail = "B=" + std::to_string(interval) + ", " +
                       std::to_string(e2e.monitor_a["transactions"].get<std::size_t>()) + " tx, measured";
  for (double r : runs) detail += " " + fmt(r, 0);
  detail += " tx/s (target >= 1000)";
  return verdict(worst >= 1000.0 && interval == 500, detail);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"planted-pattern benchmark", planted_benchmark},
      {"gradient check", gradients},
      {"dense graph-convolution oracle", gcn_oracle},
      {"exact betweenness", betweenness_exact},
      {"exact retrieval", retrieval_exact},
      {"incremental graph statistics", incremental_stats},
      {"Elliptic loader", elliptic_smoke},
      {"loss sanity", loss_sanity},
      {"end-to-end determinism", determinism},
      {"explanation grounding", grounding},
      {"monitor throughput", throughput},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = fail(std::string("error: ") + e.what());
    }
    const char* tag = o.status == Outcome::Status::Pass ? "PASS" : o.status == Outcome::Status::Skip ? "SKIP" : "FAIL";
    failures += o.status == Outcome::Status::Fail;
    std::cout << tag << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria met" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
