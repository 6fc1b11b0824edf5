#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <random>

#include "amlgraph/betweenness.hpp"
#include "amlgraph/checkpoint.hpp"
#include "amlgraph/features.hpp"
#include "amlgraph/random_instances.hpp"
#include "amlgraph/training.hpp"
#include "model_oracles.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace aml;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(r, c);
  for (double& v : m.data) v = u(rng);
  return m;
}

GcnModel random_model(const ModelDims& dims, std::mt19937_64& rng) {
  return GcnModel::initialize(dims, rng());
}

Transaction tx(const std::string& id, const std::string& s, const std::string& r, Timestamp t,
               const std::string& narrative = "") {
  return Transaction{id, s, r, 1.0, t, narrative, Label::Unknown};
}

}  // namespace

TEST_CASE("structural encoder") {
  StructuralEncoder enc{Matrix(3, 4), {1.5, -2.0, 0.25}};
  CHECK(encode_structural(enc, std::vector<double>{9, 8, 7, 6}) == std::vector<double>{1.5, -2.0, 0.25});

  StructuralEncoder id{Matrix::identity(4), std::vector<double>(4, 0.0)};
  CHECK(encode_structural(id, std::vector<double>{1, 2, 3, 4}) == std::vector<double>{1, 2, 3, 4});

  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    StructuralEncoder e{random_matrix(16, 4, rng), {}};
    for (int k = 0; k < 16; ++k) e.bias.push_back(std::uniform_real_distribution<double>(-1, 1)(rng));
    std::vector<double> x = {1.0 * t, 0.5, -3.0, 2.25};
    auto z = encode_structural(e, x);
    for (std::size_t r = 0; r < 16; ++r) {
      double want = e.bias[r];
      for (std::size_t c = 0; c < 4; ++c) want += e.weight(r, c) * x[c];
      CHECK(std::abs(z[r] - want) < 1e-12);
    }
  }
  CHECK_THROWS_AS(encode_structural(id, std::vector<double>{1, NAN, 3, 4}), Error);

  auto in = structural_input({3, 0, 99, 0.5});
  CHECK(in[0] == std::log1p(3.0));
  CHECK(in[1] == 0.0);
  CHECK(in[2] == std::log1p(99.0));
  CHECK(in[3] == std::log1p(0.5));
}

TEST_CASE("fusion layer") {
  const std::vector<double> z = {0.5, 2.0};
  const std::vector<double> e = {0.6, 0.8, 0.0};
  FusionLayer id{Matrix::identity(5), std::vector<double>(5, 0.0)};
  CHECK(fuse(id, z, e) == std::vector<double>{0.5, 2.0, 0.6, 0.8, 0.0});

  FusionLayer clamp{Matrix::identity(5), std::vector<double>(5, -1e6)};
  CHECK(fuse(clamp, z, e) == std::vector<double>(5, 0.0));

  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    FusionLayer fl{random_matrix(7, 5, rng), {}};
    for (int k = 0; k < 7; ++k) fl.bias.push_back(std::uniform_real_distribution<double>(-1, 1)(rng));
    auto out = fuse(fl, z, e);
    std::vector<double> concat = {0.5, 2.0, 0.6, 0.8, 0.0};
    for (std::size_t r = 0; r < 7; ++r) {
      double want = fl.bias[r];
      for (std::size_t c = 0; c < 5; ++c) want += fl.weight(r, c) * concat[c];
      CHECK(std::abs(out[r] - std::max(want, 0.0)) < 1e-12);
      CHECK(out[r] >= 0.0);
    }
  }
  CHECK_THROWS_WITH_AS(fuse(id, z, std::vector<double>{1.0}), doctest::Contains("dimension mismatch"), Error);
}

TEST_CASE("classifier head") {
  ModelDims dims;
  dims.hidden_width = 4;
  GcnModel m = GcnModel::zeros(dims);
  const std::vector<double> h = {1, -2, 3, 0.5};
  CHECK(classify(m, h) == 0.5);
  m.classifier_bias = 20;
  CHECK(classify(m, h) > 0.999999);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 100; ++t) {
    m.classifier_weight = {u(rng), u(rng), u(rng), u(rng)};
    m.classifier_bias = u(rng);
    double s = m.classifier_bias;
    for (std::size_t j = 0; j < 4; ++j) s += m.classifier_weight[j] * h[j];
    CHECK(std::abs(classify(m, h) - 1.0 / (1.0 + std::exp(-s))) < 1e-12);
  }
  for (double s : {-1e4, -745.0, -40.0, 40.0, 1e4}) {
    CHECK(sigmoid(s) > 0.0);
    CHECK(sigmoid(s) < 1.0);
  }
}

TEST_CASE("binary cross-entropy") {
  const double ln2 = std::log(2.0);
  const std::vector<double> half = {0.5};
  CHECK(std::abs(bce_loss(half, std::vector<int>{1}, 1.0).value - ln2) < 1e-12);
  CHECK(std::abs(bce_loss(half, std::vector<int>{0}, 1.0).value - ln2) < 1e-12);
  const std::vector<double> halves(5, 0.5);
  CHECK(std::abs(bce_loss(halves, std::vector<int>(5, 0), 1.0).value - ln2) < 1e-12);

  const std::vector<double> near_one = {1.0 - kScoreEpsilon};
  CHECK(bce_loss(near_one, std::vector<int>{1}, 1.0).value < 1e-6);
  const std::vector<double> exact_one = {1.0};
  CHECK(bce_loss(exact_one, std::vector<int>{1}, 1.0).value < 1e-6);
  const std::vector<double> exact_zero = {0.0};
  CHECK(std::isfinite(bce_loss(exact_zero, std::vector<int>{1}, 1.0).value));

  const std::vector<double> s = {0.2, 0.9, 0.6};
  const std::vector<int> y = {0, 1, 1};
  auto l = bce_loss(s, y, 3.0);
  REQUIRE(l.terms.size() == 3);
  CHECK(l.terms[0] == doctest::Approx(-std::log(0.8)));
  CHECK(l.terms[1] == doctest::Approx(-3.0 * std::log(0.9)));
  CHECK(l.terms[2] == doctest::Approx(-3.0 * std::log(0.6)));
  CHECK(l.value == doctest::Approx((l.terms[0] + l.terms[1] + l.terms[2]) / 3.0));
  CHECK_THROWS_AS(bce_loss(s, std::vector<int>{0, 1}, 1.0), Error);
}

TEST_CASE("graph convolution basics") {
  ModelDims dims;
  dims.fused_width = 3;
  dims.hidden_width = 3;
  dims.layers = 1;
  GcnModel m = GcnModel::zeros(dims);
  m.layers[0] = Matrix::identity(3);
  auto single = NormalizedAdjacency::from_neighbors({{}});
  Matrix f(1, 3);
  f.data = {0.5, 0.0, 2.0};
  CHECK(gcn_forward(m, single, f).data == f.data);

  // Two disconnected nodes do not see each other.
  std::mt19937_64 rng(8);
  dims.layers = 3;
  GcnModel deep = GcnModel::initialize(dims, 4);
  auto pair = NormalizedAdjacency::from_neighbors({{}, {}});
  Matrix two = random_matrix(2, 3, rng);
  auto base = gcn_forward(deep, pair, two);
  two(1, 0) += 10.0;
  two(1, 2) -= 3.0;
  auto moved = gcn_forward(deep, pair, two);
  for (std::size_t j = 0; j < 3; ++j) CHECK(base(0, j) == moved(0, j));

  Matrix wrong(2, 5);
  CHECK_THROWS_AS(gcn_forward(deep, pair, wrong), Error);
}

TEST_CASE("graph convolution matches the dense normalized-adjacency oracle") {
  std::mt19937_64 rng(11);
  SUBCASE("4-node path, two layers") {
    oracle::RandomGraph g{{{0, 1, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}, {0, 0, 1, 0}}, {{1}, {0, 2}, {1, 3}, {2}}};
    ModelDims dims;
    dims.fused_width = 5;
    dims.hidden_width = 4;
    dims.layers = 2;
    GcnModel m = random_model(dims, rng);
    Matrix f = random_matrix(4, 5, rng);
    for (double& v : f.data) v = std::abs(v);
    auto got = gcn_forward(m, NormalizedAdjacency::from_neighbors(g.neighbors), f);
    auto want = oracle::gcn(oracle::normalized_adjacency(g.adjacency), oracle::to_dense(f),
                            {oracle::to_dense(m.layers[0]), oracle::to_dense(m.layers[1])});
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(got(i, j) - want[i][j]) < 1e-10);
    }
  }
  SUBCASE("random graphs up to 6 nodes, whole network") {
    for (int t = 0; t < 100; ++t) {
      const std::size_t n = 1 + static_cast<std::size_t>(t % 6);
      auto g = oracle::random_graph(n, 0.45, rng);
      auto dims = random_small_dims(8, 4, rng);
      GcnModel m = random_model(dims, rng);
      GraphBatch b;
      b.structural = random_matrix(n, kStructuralInputs, rng, 3.0);
      b.narrative = random_matrix(n, dims.embed_dim, rng);
      for (std::size_t i = 0; i < n; ++i) b.node_ids.push_back(std::to_string(i));
      b.adjacency = NormalizedAdjacency::from_neighbors(g.neighbors);
      auto fp = forward(m, b);
      auto want = oracle::dense_scores(m, oracle::normalized_adjacency(g.adjacency), b.structural, b.narrative);
      for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(fp.scores[i] - want[i]) < 1e-10);
    }
  }
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(21);
  int checked = 0;
  while (checked < 25) {
    auto dims = random_small_dims(6, 3, rng);
    auto batch = random_batch(2 + rng() % 5, dims.embed_dim, 0.5, rng);
    GcnModel m = random_model(dims, rng);
    if (relu_margin(m, batch) < 1e-3) continue;  // too close to a kink for finite differences
    for (double pw : {1.0, 2.5}) {
      auto r = gradient_check(m, batch, pw);
      CHECK(r.max_relative_error < 1e-4);
      CHECK(r.parameters_checked == m.parameter_count());
    }
    ++checked;
  }
}

TEST_CASE("saturated correct predictions give a flat loss") {
  std::mt19937_64 rng(5);
  ModelDims dims{3, 4, 3, 3, 2};
  auto batch = random_batch(4, dims.embed_dim, 0.6, rng);
  for (auto& ex : batch.examples) ex.label = 1;
  GcnModel m = GcnModel::initialize(dims, 9);
  for (double& w : m.classifier_weight) w = 0.0;
  m.classifier_bias = 40.0;  // every score pinned at the clamp
  auto r = gradient_check(m, batch);
  CHECK(r.max_abs_gradient < 1e-6);
}

TEST_CASE("node narrative is the decay-weighted mean of incoming embeddings") {
  auto emb = Embedder::hashing(32);
  TransactionGraph one;
  one.insert(tx("1", "a", "b", 100, "wire for rent"));
  auto single = node_narrative(one, "b", emb, one.decay());
  auto want = normalize(emb.embed("wire for rent"));
  for (std::size_t i = 0; i < 32; ++i) CHECK(std::abs(single.values[i] - want.values[i]) < 1e-15);
  CHECK(node_narrative(one, "a", emb, one.decay()).is_zero());

  const DecayParams decay{0.1};
  TransactionGraph two(decay);
  two.insert(tx("1", "x", "c", 0, "consulting fee shell company"));
  two.insert(tx("2", "y", "c", 10, "urgent offshore transfer"));
  two.insert(tx("3", "y", "c", 10, ""));  // empty narrative carries no weight
  auto got = node_narrative(two, "c", emb, decay);
  auto e1 = normalize(emb.embed("consulting fee shell company")).values;
  auto e2 = normalize(emb.embed("urgent offshore transfer")).values;
  const double w1 = std::exp(-1.0), w2 = 1.0;
  std::vector<double> mean(32);
  double norm = 0;
  for (std::size_t i = 0; i < 32; ++i) {
    mean[i] = (w1 * e1[i] + w2 * e2[i]) / (w1 + w2);
    norm += mean[i] * mean[i];
  }
  CHECK(got.normalized);
  for (std::size_t i = 0; i < 32; ++i) CHECK(std::abs(got.values[i] - mean[i] / std::sqrt(norm)) < 1e-12);

  TransactionGraph blank;
  blank.insert(tx("1", "a", "b", 0, ""));
  CHECK(node_narrative(blank, "b", emb, blank.decay()).is_zero());
}

TEST_CASE("ego neighbourhood reproduces the full-graph score of its center") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> node(0, 39);
  auto emb = Embedder::hashing(16);
  const char* phrases[] = {"rent", "salary deposit", "urgent offshore transfer", "", "invoice 42"};
  TransactionGraph g(DecayParams{1e-3});
  for (int i = 0; i < 120; ++i) {
    g.insert(tx("t" + std::to_string(i), "n" + std::to_string(node(rng)), "n" + std::to_string(node(rng)), i * 3,
                phrases[i % 5]));
  }
  auto bet = betweenness_all(g);
  ModelDims dims{5, 16, 6, 6, 3};
  GcnModel m = GcnModel::initialize(dims, 2);
  auto full = full_batch(g, bet, emb);
  auto full_scores = forward(m, full).scores;
  for (std::size_t i = 0; i < full.size(); ++i) {
    auto ego = ego_batch(g, g.require(full.node_ids[i]), dims.layers, bet, emb);
    CHECK(ego.node_ids[0] == full.node_ids[i]);
    CHECK(std::abs(forward(m, ego).scores[0] - full_scores[i]) < 1e-12);
  }
}

TEST_CASE("insertion order does not change scores") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> node(0, 14);
  std::vector<Transaction> txs;
  for (int i = 0; i < 60; ++i) {
    txs.push_back(tx("t" + std::to_string(i), "n" + std::to_string(node(rng)), "n" + std::to_string(node(rng)), 500,
                     i % 2 ? "cash structuring deposit split" : "grocery purchase"));
  }
  auto emb = Embedder::hashing(16);
  ModelDims dims{4, 16, 5, 5, 3};
  GcnModel m = GcnModel::initialize(dims, 6);
  auto score_by_node = [&](const std::vector<Transaction>& order) {
    TransactionGraph g(DecayParams{1e-4});
    for (const auto& t : order) g.insert(t);
    auto b = full_batch(g, betweenness_all(g), emb);
    auto s = forward(m, b).scores;
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < b.size(); ++i) out[b.node_ids[i]] = s[i];
    return out;
  };
  auto base = score_by_node(txs);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(txs.begin(), txs.end(), rng);
    auto other = score_by_node(txs);
    REQUIRE(other.size() == base.size());
    for (const auto& [id, s] : base) CHECK(std::abs(other.at(id) - s) < 1e-9);
  }
}

TEST_CASE("training on two planted clusters") {
  // Illicit cluster: a dense ring exchanging illicit-pool narratives.
  // Licit cluster: a sparse chain with licit-pool narratives.
  const std::vector<std::string> bad = {"urgent offshore transfer", "consulting fee shell company",
                                        "nominee account layering"};
  const std::vector<std::string> good = {"monthly rent payment", "grocery purchase", "salary deposit"};
  TransactionGraph g(DecayParams{1e-5});
  std::vector<NodeExample> examples;
  int k = 0;
  for (int i = 0; i < 12; ++i) {
    for (int j = 1; j <= 3; ++j) {
      std::string s = "r" + std::to_string(i), r = "r" + std::to_string((i + j) % 12);
      g.insert(tx("b" + std::to_string(k), s, r, 1000 + k, bad[k % 3]));
      examples.emplace_back(s, 1);
      ++k;
    }
  }
  for (int i = 0; i < 40; ++i) {
    std::string s = "p" + std::to_string(i), r = "p" + std::to_string((i + 1) % 40);
    g.insert(tx("g" + std::to_string(k), s, r, 1000 + k, good[k % 3]));
    examples.emplace_back(s, 0);
    ++k;
  }
  auto emb = Embedder::hashing(64);
  auto batch = full_batch(g, betweenness_all(g), emb, &examples);
  REQUIRE(batch.examples.size() == examples.size());

  // Separability first: logistic regression on [log1p features || narrative].
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (const auto& ex : batch.examples) {
    std::vector<double> row(batch.structural.row(ex.row).begin(), batch.structural.row(ex.row).end());
    row.insert(row.end(), batch.narrative.row(ex.row).begin(), batch.narrative.row(ex.row).end());
    rows.push_back(row);
    labels.push_back(ex.label);
  }
  CHECK(oracle::logistic_regression_f1(rows, labels) == 1.0);

  TrainConfig cfg;
  auto result = fit(ModelDims{}, batch, cfg);
  REQUIRE(result.loss_history.size() == 200);
  CHECK(batch_loss(result.model, batch, 1.0) < 0.05);
  for (std::size_t e = 20; e < result.loss_history.size(); ++e) {
    CHECK(result.loss_history[e] <= result.loss_history[e - 20]);
  }

  auto again = fit(ModelDims{}, batch, cfg);
  CHECK(again.model == result.model);
  CHECK(again.loss_history == result.loss_history);

  TrainConfig frozen = cfg;
  frozen.learning_rate = 0.0;
  frozen.epochs = 5;
  CHECK(fit(ModelDims{}, batch, frozen).model == GcnModel::initialize(ModelDims{}, cfg.seed));

  TrainConfig plain = cfg;
  plain.optimizer = Optimizer::GradientDescent;
  plain.epochs = 3;
  CHECK(fit(ModelDims{}, batch, plain).loss_history.size() == 3);

  auto one_class = batch;
  for (auto& ex : one_class.examples) ex.label = 0;
  CHECK_THROWS_WITH_AS(fit(ModelDims{}, one_class, cfg), doctest::Contains("degenerate labels"), Error);

  TrainConfig bad_cfg;
  bad_cfg.pos_weight = 0.5;
  CHECK_THROWS_AS(bad_cfg.validate(), Error);
}

TEST_CASE("checkpoint round trip and validation") {
  testing::TempDir dir("ckpt");
  std::mt19937_64 rng(12);
  for (int t = 0; t < 5; ++t) {
    auto dims = random_small_dims(9, 4, rng);
    GcnModel m = GcnModel::initialize(dims, rng());
    m.classifier_bias = -0.0;
    save_checkpoint(m, dir / "m.ckpt");
    GcnModel back = load_checkpoint(dir / "m.ckpt");
    CHECK(back.dims == m.dims);
    std::vector<double> a, b;
    m.for_each_block([&](std::span<double> s) { a.insert(a.end(), s.begin(), s.end()); });
    back.for_each_block([&](std::span<double> s) { b.insert(b.end(), s.begin(), s.end()); });
    REQUIRE(a.size() == b.size());
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  }

  GcnModel m = GcnModel::initialize(ModelDims{}, 1);
  save_checkpoint(m, dir / "good.ckpt");
  const std::string bytes = testing::read_file(dir / "good.ckpt");
  CHECK(bytes.substr(0, 4) == "CGNN");
  std::size_t expected = 4 + 4 + 4 + 6 * 4 + m.parameter_count() * 8;
  CHECK(bytes.size() == expected);

  std::string corrupt = bytes;
  corrupt[0] = 'X';
  testing::write_file(dir / "bad.ckpt", corrupt);
  CHECK_THROWS_WITH_AS(load_checkpoint(dir / "bad.ckpt"), "bad checkpoint magic", Error);

  std::string wrong_version = bytes;
  wrong_version[4] = 9;
  testing::write_file(dir / "ver.ckpt", wrong_version);
  CHECK_THROWS_WITH_AS(load_checkpoint(dir / "ver.ckpt"), doctest::Contains("version mismatch"), Error);

  testing::write_file(dir / "short.ckpt", bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_WITH_AS(load_checkpoint(dir / "short.ckpt"), doctest::Contains("truncated"), Error);
  testing::write_file(dir / "long.ckpt", bytes + "x");
  CHECK_THROWS_AS(load_checkpoint(dir / "long.ckpt"), Error);

  CHECK_NOTHROW(require_embedding_dim(m, 64));
  CHECK_THROWS_WITH_AS(require_embedding_dim(m, 32), doctest::Contains("dimension mismatch"), Error);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), Error);
}
