#include "amlgraph/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

namespace aml {

std::vector<std::string> SyntheticConfig::default_licit_phrases() {
  return {"monthly rent payment",      "grocery store purchase",   "salary deposit march",
          "utility bill electricity",  "birthday gift for sister", "restaurant dinner split",
          "gym membership renewal",    "school tuition installment", "car insurance premium",
          "phone plan subscription",   "book club dues",           "pharmacy prescription refill",
          "plumber repair invoice",    "holiday flight tickets",   "coffee shop tab",
          "shared taxi ride home",     "weekly farmers market",    "streaming service family plan",
          "childcare weekly fee",      "dentist checkup copay",    "garden supplies hardware",
          "concert tickets friends",   "internet bill april",      "charity donation local shelter"};
}

std::vector<std::string> SyntheticConfig::default_illicit_phrases() {
  return {"urgent offshore transfer",         "consulting fee shell company",   "cash structuring deposit split",
          "crypto mixer withdrawal",          "invoice overbilling trade",      "nominee account layering",
          "anonymous prepaid voucher",        "rapid forwarding instruction",   "loan back scheme funds",
          "undisclosed beneficial owner",     "high risk jurisdiction wire",    "smurfing batch transfer",
          "gambling chips cashout",           "precious metals quick resale",   "bearer bond redemption",
          "trust pass via intermediary",      "front business revenue",         "bulk cash courier",
          "fictitious commission payout",     "sanctioned entity proxy",        "round tripping capital",
          "layered remittance chain",         "unregistered money transmitter", "phantom shipment settlement"};
}

void SyntheticConfig::validate() const {
  if (!(illicit_fraction > 0.0 && illicit_fraction < 1.0)) {
    throw Error("illicit_fraction must lie in (0,1)");
  }
  if (mix.fan_in < 0 || mix.cycle < 0 || mix.pass_through < 0 ||
      std::abs(mix.fan_in + mix.cycle + mix.pass_through - 1.0) > 1e-9) {
    throw Error("pattern mix weights must be non-negative and sum to 1");
  }
  if (licit_phrases.empty() || illicit_phrases.empty()) throw Error("phrase pools must be non-empty");
  std::set<std::string> licit(licit_phrases.begin(), licit_phrases.end());
  for (const auto& p : illicit_phrases) {
    if (licit.contains(p)) throw Error("phrase pools must be disjoint; shared phrase: " + p);
  }
  if (!(mean_gap_seconds > 0)) throw Error("mean_gap_seconds must be positive");
}

namespace {

struct Event {
  double time;
  std::size_t order;
  std::size_t sender;
  std::size_t receiver;
  double amount;
  std::string narrative;
  Label label;
};

double cents(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

std::vector<Transaction> generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  const std::size_t n = cfg.n_transactions;
  const std::size_t n_illicit = std::binomial_distribution<std::size_t>(n, cfg.illicit_fraction)(rng);
  const std::size_t n_licit = n - n_illicit;
  const double span = static_cast<double>(n) * cfg.mean_gap_seconds;

  const std::size_t ring_size = std::max<std::size_t>(8, n_illicit / 8);
  const std::size_t population = std::max<std::size_t>(10, n_licit / 2);

  // Account ids are shuffled so the id never reveals ring membership.
  std::vector<std::size_t> account_ids(ring_size + population);
  std::iota(account_ids.begin(), account_ids.end(), 0);
  std::shuffle(account_ids.begin(), account_ids.end(), rng);
  auto ring_account = [&](std::size_t i) { return account_ids[i]; };
  auto licit_account = [&](std::size_t i) { return account_ids[ring_size + i]; };

  std::vector<Event> events;
  events.reserve(n);

  for (std::size_t i = 0; i < n_licit; ++i) {
    std::size_t s = pick(population);
    std::size_t r = pick(population - 1);
    if (r >= s) ++r;
    double amount = cents(std::exp(std::normal_distribution<double>(4.5, 1.0)(rng)));
    events.push_back({uniform(0.0, span), events.size(), licit_account(s), licit_account(r), amount,
                      cfg.licit_phrases[pick(cfg.licit_phrases.size())], Label::Licit});
  }

  auto distinct_ring_members = [&](std::size_t count) {
    std::vector<std::size_t> members;
    while (members.size() < count) {
      std::size_t m = ring_account(pick(ring_size));
      if (std::find(members.begin(), members.end(), m) == members.end()) members.push_back(m);
    }
    return members;
  };

  const double total_weight = cfg.mix.fan_in + cfg.mix.cycle + cfg.mix.pass_through;
  std::size_t planted = 0;
  while (planted < n_illicit) {
    double t = uniform(0.0, span);
    double w = uniform(0.0, total_weight);
    std::vector<std::pair<std::size_t, std::size_t>> legs;
    if (w < cfg.mix.fan_in) {
      auto members = distinct_ring_members(1 + 3 + pick(4));
      for (std::size_t k = 1; k < members.size(); ++k) legs.emplace_back(members[k], members[0]);
    } else if (w < cfg.mix.fan_in + cfg.mix.cycle) {
      auto members = distinct_ring_members(3 + pick(3));
      for (std::size_t k = 0; k < members.size(); ++k) legs.emplace_back(members[k], members[(k + 1) % members.size()]);
    } else {
      auto members = distinct_ring_members(3 + pick(2));
      for (std::size_t k = 0; k + 1 < members.size(); ++k) legs.emplace_back(members[k], members[k + 1]);
    }
    double amount = cents(uniform(8000.0, 9900.0));
    for (const auto& [s, r] : legs) {
      if (planted == n_illicit) break;
      t += uniform(30.0, 600.0);
      events.push_back({t, events.size(), s, r, amount, cfg.illicit_phrases[pick(cfg.illicit_phrases.size())],
                        Label::Illicit});
      amount = cents(amount * uniform(0.97, 0.995));
      ++planted;
    }
  }

  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    auto ta = static_cast<Timestamp>(a.time);
    auto tb = static_cast<Timestamp>(b.time);
    if (ta != tb) return ta < tb;
    return a.order < b.order;
  });

  std::vector<Transaction> out;
  out.reserve(events.size());
  char buf[32];
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& ev = events[i];
    Transaction tx;
    std::snprintf(buf, sizeof buf, "tx%07zu", i + 1);
    tx.tx_id = buf;
    std::snprintf(buf, sizeof buf, "acct%05zu", ev.sender);
    tx.sender = buf;
    std::snprintf(buf, sizeof buf, "acct%05zu", ev.receiver);
    tx.receiver = buf;
    tx.amount = ev.amount;
    tx.timestamp = cfg.start_time + static_cast<Timestamp>(ev.time);
    tx.narrative = ev.narrative;
    tx.label = ev.label;
    out.push_back(std::move(tx));
  }
  return out;
}

}  // namespace aml
