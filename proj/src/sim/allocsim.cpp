#include "matchrep/sim/allocsim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "matchrep/data/csv.hpp"
#include "matchrep/error.hpp"
#include "matchrep/numkit/rng.hpp"

namespace matchrep::sim {

using nlohmann::json;

void StreamConfig::validate() const {
  if (!(days_per_step > 0.0) || !std::isfinite(days_per_step)) {
    throw ConfigError("days_per_step must be a positive number");
  }
}

json StreamConfig::to_json() const {
  return {{"window", window}, {"days_per_step", days_per_step}};
}

StreamConfig StreamConfig::from_json(const json& j) {
  StreamConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "window") {
        c.window = value.get<std::size_t>();
      } else if (key == "days_per_step") {
        c.days_per_step = value.get<double>();
      } else {
        throw ConfigError("unknown stream setting '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("stream settings: ") + e.what());
  }
  c.validate();
  return c;
}

EventStream build_stream(const data::Dataset& dataset, const StreamConfig& config,
                         std::uint64_t seed) {
  config.validate();
  num::RngStream rng = num::RngStream(seed).split("stream");
  EventStream s;
  s.days_per_step = config.days_per_step;
  const std::size_t n = dataset.size();
  std::vector<std::size_t> partner(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.recipients.push_back({i, i});
    const std::size_t lag = static_cast<std::size_t>(rng.uniform_int(config.window + 1));
    s.donors.push_back({i, i + lag});
    partner[i] = i;
  }
  std::stable_sort(s.donors.begin(), s.donors.end(), [](const Arrival& a, const Arrival& b) {
    return a.step != b.step ? a.step < b.step : a.id < b.id;
  });
  s.factual_partner = std::move(partner);
  return s;
}

OutcomeOracle OutcomeOracle::from_dataset(const data::Dataset& dataset) {
  if (!dataset.has_ground_truth()) {
    throw UnsupportedDatasetError("simulation needs potential outcomes and untreated survival");
  }
  const data::Dataset* ds = &dataset;
  OutcomeOracle o;
  o.outcome = [ds](std::size_t r, std::size_t d) {
    const auto k = static_cast<std::size_t>(*(*ds)[d].true_donor_type);
    return (*(*ds)[r].true_potentials).at(k);
  };
  o.untreated = [ds](std::size_t r) { return *(*ds)[r].untreated_survival; };
  return o;
}

std::string Policy::name() const {
  std::string base;
  switch (rule) {
    case Rule::real: base = "real"; break;
    case Rule::fcfs: base = "fcfs"; break;
    case Rule::utility_first: base = "uf"; break;
    case Rule::benefit_first: base = "bf"; break;
  }
  return guided ? "guided-" + base : base;
}

Policy Policy::from_name(const std::string& name) {
  Policy p;
  std::string base = name;
  if (base.rfind("guided-", 0) == 0) {
    p.guided = true;
    base = base.substr(7);
  }
  if (base == "real" && !p.guided) {
    p.rule = Rule::real;
  } else if (base == "fcfs") {
    p.rule = Rule::fcfs;
  } else if (base == "uf") {
    p.rule = Rule::utility_first;
  } else if (base == "bf") {
    p.rule = Rule::benefit_first;
  } else {
    throw ConfigError("unknown policy '" + name +
                      "' (expected real, fcfs, uf, bf, guided-fcfs, guided-uf or guided-bf)");
  }
  return p;
}

std::optional<std::size_t> policy_select(const Policy& policy, std::span<const Candidate> waiting,
                                         std::size_t donor, const Scorer* scorer,
                                         const std::vector<std::size_t>* factual_partner) {
  if (waiting.empty()) return std::nullopt;
  if (policy.rule == Rule::real) {
    if (factual_partner == nullptr) throw ConfigError("the real policy needs the factual matches");
    const std::size_t partner = factual_partner->at(donor);
    for (const auto& c : waiting) {
      if (c.recipient == partner) return partner;
    }
    return std::nullopt;
  }
  if ((policy.guided || policy.rule != Rule::fcfs) && scorer == nullptr) {
    throw ConfigError("policy '" + policy.name() + "' needs a scoring model");
  }

  std::vector<Candidate> pool;
  if (policy.guided) {
    const std::size_t type = scorer->donor_type(donor);
    for (const auto& c : waiting) {
      if (scorer->best_type(c.recipient) == type) pool.push_back(c);
    }
  }
  if (pool.empty()) pool.assign(waiting.begin(), waiting.end());
  std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    return a.arrival != b.arrival ? a.arrival < b.arrival : a.recipient < b.recipient;
  });
  if (policy.rule == Rule::fcfs) return pool.front().recipient;

  std::vector<std::size_t> ids;
  for (const auto& c : pool) ids.push_back(c.recipient);
  const std::vector<double> scores = scorer->score(ids, donor);
  if (scores.size() != ids.size()) throw InvalidInputError("scorer returned the wrong count");
  std::size_t best = 0;
  double best_value = -INFINITY;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double v =
        policy.rule == Rule::utility_first ? scores[i] : scores[i] - pool[i].remaining;
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return pool[best].recipient;
}

std::string to_string(Fate f) {
  switch (f) {
    case Fate::waiting: return "waiting";
    case Fate::transplanted: return "transplanted";
    case Fate::dead: return "dead";
  }
  return "";
}

SimReport run_policy(const EventStream& stream, const Policy& policy, const Scorer* scorer,
                     const OutcomeOracle& oracle) {
  if (policy.rule == Rule::real && !stream.factual_partner) {
    throw ConfigError("the real policy needs a stream with factual matches");
  }
  SimReport report;
  report.policy = policy.name();
  std::size_t n = 0;
  for (const auto& r : stream.recipients) n = std::max(n, r.id + 1);
  report.total = stream.recipients.size();
  report.ledger.resize(n);
  for (std::size_t i = 0; i < n; ++i) report.ledger[i].recipient_id = i;

  std::size_t last = 0;
  if (!stream.recipients.empty()) last = std::max(last, stream.recipients.back().step);
  if (!stream.donors.empty()) last = std::max(last, stream.donors.back().step);

  std::vector<Candidate> waiting;
  std::vector<double> untreated(n, 0.0);
  auto remaining_at = [&](const Candidate& c, std::size_t step) {
    return untreated[c.recipient] - static_cast<double>(step - c.arrival) * stream.days_per_step;
  };
  std::size_t ri = 0, di = 0;
  const std::vector<std::size_t>* partner =
      stream.factual_partner ? &*stream.factual_partner : nullptr;
  for (std::size_t step = 0; step <= last; ++step) {
    std::vector<Candidate> still;
    for (auto& c : waiting) {
      c.remaining = remaining_at(c, step);
      if (c.remaining <= 0.0) {
        auto& e = report.ledger[c.recipient];
        e.fate = Fate::dead;
        e.step_of_fate = step;
      } else {
        still.push_back(c);
      }
    }
    waiting.swap(still);
    while (ri < stream.recipients.size() && stream.recipients[ri].step == step) {
      const auto& a = stream.recipients[ri++];
      untreated[a.id] = oracle.untreated(a.id);
      report.ledger[a.id].arrival = a.step;
      waiting.push_back({a.id, a.step, untreated[a.id]});
    }
    while (di < stream.donors.size() && stream.donors[di].step == step) {
      const std::size_t donor = stream.donors[di++].id;
      const auto chosen = policy_select(policy, waiting, donor, scorer, partner);
      if (!chosen) {
        ++report.donors_discarded;
        continue;
      }
      auto it = std::find_if(waiting.begin(), waiting.end(),
                             [&](const Candidate& c) { return c.recipient == *chosen; });
      auto& e = report.ledger[*chosen];
      e.fate = Fate::transplanted;
      e.step_of_fate = step;
      e.donor_id = donor;
      e.realized_survival = oracle.outcome(*chosen, donor);
      e.benefit = *e.realized_survival - it->remaining;
      waiting.erase(it);
    }
  }

  double survival = 0.0, benefit = 0.0;
  for (const auto& e : report.ledger) {
    if (e.fate == Fate::transplanted) {
      ++report.transplanted;
      survival += *e.realized_survival;
      benefit += *e.benefit;
    } else if (e.fate == Fate::dead) {
      ++report.dead;
    } else {
      ++report.waiting;
    }
  }
  report.death_rate =
      report.total > 0 ? static_cast<double>(report.dead) / static_cast<double>(report.total) : 0.0;
  if (report.transplanted > 0) {
    report.avg_survival = survival / static_cast<double>(report.transplanted);
    report.avg_benefit = benefit / static_cast<double>(report.transplanted);
  }
  return report;
}

void compare_to_reference(SimReport& report, const SimReport& reference,
                          const data::Dataset& dataset, int recipient_type, int donor_type) {
  if (report.ledger.size() != reference.ledger.size()) {
    throw InvalidInputError("flipped ratio: reports cover different recipients");
  }
  std::size_t eligible = 0, flipped = 0;
  for (std::size_t i = 0; i < report.ledger.size(); ++i) {
    const auto& before = reference.ledger[i];
    const auto& after = report.ledger[i];
    if (dataset[i].true_recipient_type != recipient_type) continue;
    if (!before.donor_id || !after.donor_id) continue;
    if (dataset[*before.donor_id].true_donor_type != donor_type) continue;
    ++eligible;
    if (dataset[*after.donor_id].true_donor_type != donor_type) ++flipped;
  }
  report.flipped_ratio = eligible > 0
                             ? std::optional<double>(static_cast<double>(flipped) /
                                                     static_cast<double>(eligible))
                             : std::nullopt;
}

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string opt_csv(const std::optional<double>& v) {
  return v ? data::format_double(*v) : std::string("n.a.");
}

}  // namespace

json SimReport::to_json() const {
  return {{"policy", policy},
          {"total", total},
          {"transplanted", transplanted},
          {"dead", dead},
          {"waiting", waiting},
          {"donors_discarded", donors_discarded},
          {"death_rate", death_rate},
          {"avg_survival", opt_json(avg_survival)},
          {"avg_benefit", opt_json(avg_benefit)},
          {"flipped_ratio", opt_json(flipped_ratio)}};
}

std::string SimReport::csv_header() {
  return "policy,death_rate,avg_survival,avg_benefit,flipped_ratio,transplanted,dead,waiting,"
         "donors_discarded";
}

std::string SimReport::csv_row() const {
  std::ostringstream out;
  out << policy << ',' << data::format_double(death_rate) << ',' << opt_csv(avg_survival) << ','
      << opt_csv(avg_benefit) << ',' << opt_csv(flipped_ratio) << ',' << transplanted << ','
      << dead << ',' << waiting << ',' << donors_discarded;
  return out.str();
}

std::string SimReport::ledger_csv() const {
  std::ostringstream out;
  out << "recipient_id,arrival,fate,step_of_fate,donor_id,realized_survival,benefit\n";
  for (const auto& e : ledger) {
    out << e.recipient_id << ',' << e.arrival << ',' << to_string(e.fate) << ','
        << (e.step_of_fate ? std::to_string(*e.step_of_fate) : "") << ','
        << (e.donor_id ? std::to_string(*e.donor_id) : "") << ','
        << (e.realized_survival ? data::format_double(*e.realized_survival) : "") << ','
        << (e.benefit ? data::format_double(*e.benefit) : "") << '\n';
  }
  return out.str();
}

}  // namespace matchrep::sim
