#include "amlgraph/elliptic.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <string_view>

namespace aml {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& c : cells) {
    while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.remove_suffix(1);
    while (!c.empty() && c.front() == ' ') c.remove_prefix(1);
  }
  return cells;
}

bool is_numeric(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::ifstream open_required(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("missing Elliptic file: " + p.string());
  return in;
}

}  // namespace

std::size_t EllipticDataset::labeled_count() const {
  std::size_t n = 0;
  for (const auto& [_, l] : labels) n += l != Label::Unknown;
  return n;
}

std::size_t EllipticDataset::illicit_count() const {
  std::size_t n = 0;
  for (const auto& [_, l] : labels) n += l == Label::Illicit;
  return n;
}

std::size_t EllipticDataset::time_step_count() const {
  std::set<Timestamp> steps;
  for (const auto& tx : transactions) steps.insert(tx.timestamp);
  return steps.size();
}

std::vector<float> EllipticDataset::node_features(const std::string& node) const {
  auto it = node_row.find(node);
  if (it == node_row.end()) throw Error("unknown Elliptic node: " + node);
  auto first = features.begin() + static_cast<std::ptrdiff_t>(it->second * kEllipticFeatureWidth);
  return {first, first + static_cast<std::ptrdiff_t>(kEllipticFeatureWidth)};
}

EllipticDataset load_elliptic(const std::filesystem::path& dir) {
  const auto features_path = dir / "elliptic_txs_features.csv";
  const auto classes_path = dir / "elliptic_txs_classes.csv";
  const auto edges_path = dir / "elliptic_txs_edgelist.csv";
  auto features_in = open_required(features_path);
  auto classes_in = open_required(classes_path);
  auto edges_in = open_required(edges_path);

  EllipticDataset ds;
  std::unordered_map<std::string, Timestamp> step_of;
  std::string line;
  std::size_t line_no = 0;

  // Features: node id, then 166 columns; the first of those is the time step.
  while (std::getline(features_in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv(line);
    if (cells.size() != kEllipticFeatureWidth + 1) {
      throw Error("feature-width mismatch at " + features_path.string() + ":" + std::to_string(line_no) +
                  ": expected " + std::to_string(kEllipticFeatureWidth) + " feature columns, got " +
                  std::to_string(cells.size() - 1));
    }
    if (line_no == 1 && !is_numeric(cells[1])) continue;  // header
    std::string id(cells[0]);
    std::size_t row = ds.node_row.size();
    if (!ds.node_row.emplace(id, row).second) throw Error("duplicate Elliptic node id: " + id);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0;
      auto [ptr, ec] = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (ec != std::errc() || ptr != cells[c].data() + cells[c].size()) {
        throw Error("non-numeric feature at " + features_path.string() + ":" + std::to_string(line_no));
      }
      ds.features.push_back(static_cast<float>(v));
    }
    step_of[id] = static_cast<Timestamp>(ds.features[row * kEllipticFeatureWidth]);
  }

  line_no = 0;
  while (std::getline(classes_in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv(line);
    if (cells.size() != 2) throw Error("malformed class row at line " + std::to_string(line_no));
    if (line_no == 1 && cells[1] == "class") continue;
    Label label;
    if (cells[1] == "1") {
      label = Label::Illicit;
    } else if (cells[1] == "2") {
      label = Label::Licit;
    } else if (cells[1] == "unknown") {
      label = Label::Unknown;
    } else {
      throw Error("unknown class code '" + std::string(cells[1]) + "' at " + classes_path.string() + ":" +
                  std::to_string(line_no));
    }
    ds.labels[std::string(cells[0])] = label;
  }

  line_no = 0;
  std::size_t row = 0;
  while (std::getline(edges_in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv(line);
    if (cells.size() != 2) throw Error("malformed edge row at line " + std::to_string(line_no));
    if (line_no == 1 && !is_numeric(cells[0])) continue;
    std::string src(cells[0]);
    std::string dst(cells[1]);
    auto step = step_of.find(src);
    if (step == step_of.end() || !step_of.contains(dst)) {
      throw Error("edge references unknown node at " + edges_path.string() + ":" + std::to_string(line_no));
    }
    Transaction tx;
    char id[32];
    std::snprintf(id, sizeof id, "e%07zu", row++);
    tx.tx_id = id;
    tx.sender = std::move(src);
    tx.receiver = std::move(dst);
    tx.amount = 1.0;
    tx.timestamp = step->second;
    auto lab = ds.labels.find(tx.sender);
    tx.label = lab == ds.labels.end() ? Label::Unknown : lab->second;
    ds.transactions.push_back(std::move(tx));
  }
  sort_stream(ds.transactions);
  return ds;
}

}  // namespace aml
