#pragma once
// Discrete-step simulation of donor allocation from a waitlist.
//
// Recipient i joins the waitlist at step i. The donor observed with recipient
// i arrives `lag` steps later, lag uniform on {0..window}. Each step is
// processed as: waiting deaths, recipient arrivals, donor arrivals. A waiting
// recipient dies at the first step where its untreated survival, reduced by
// days_per_step for every step waited, is no longer positive. A donor
// arriving to an empty waitlist (or refused by every candidate rule) is
// discarded.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "matchrep/data/dataset.hpp"

namespace matchrep::sim {

struct StreamConfig {
  std::size_t window = 50;
  double days_per_step = 11.0;

  void validate() const;
  nlohmann::json to_json() const;
  static StreamConfig from_json(const nlohmann::json& j);
};

struct Arrival {
  std::size_t id = 0;  // record index
  std::size_t step = 0;

  friend bool operator==(const Arrival&, const Arrival&) = default;
};

struct EventStream {
  std::vector<Arrival> recipients;  // ordered by step, then id
  std::vector<Arrival> donors;      // ordered by step, then id
  // donor id -> recipient id of the observed match, when known.
  std::optional<std::vector<std::size_t>> factual_partner;
  double days_per_step = 11.0;

  std::size_t event_count() const noexcept { return recipients.size() + donors.size(); }
  friend bool operator==(const EventStream&, const EventStream&) = default;
};

EventStream build_stream(const data::Dataset& dataset, const StreamConfig& config,
                         std::uint64_t seed);

// Ground truth used to realize transplants and waiting deaths.
struct OutcomeOracle {
  std::function<double(std::size_t recipient, std::size_t donor)> outcome;
  std::function<double(std::size_t recipient)> untreated;

  // Realized outcome = the recipient's potential under the donor's true type.
  static OutcomeOracle from_dataset(const data::Dataset& dataset);
};

// Model predictions consulted by utility/benefit rules and guided variants.
struct Scorer {
  // Predicted outcome for each candidate recipient given one donor.
  std::function<std::vector<double>(std::span<const std::size_t> recipients, std::size_t donor)>
      score;
  // Needed only for guided policies.
  std::function<std::size_t(std::size_t recipient)> best_type;
  std::function<std::size_t(std::size_t donor)> donor_type;
};

enum class Rule { real, fcfs, utility_first, benefit_first };

struct Policy {
  Rule rule = Rule::fcfs;
  // Restrict candidates to recipients whose predicted best donor type equals
  // the arriving donor's type; fall back to all waiting recipients if none.
  bool guided = false;

  std::string name() const;  // real, fcfs, uf, bf, guided-fcfs, guided-uf, guided-bf
  static Policy from_name(const std::string& name);
  friend bool operator==(const Policy&, const Policy&) = default;
};

struct Candidate {
  std::size_t recipient = 0;
  std::size_t arrival = 0;
  double remaining = 0.0;  // untreated days left at the current step
};

// The recipient index chosen for `donor` among `waiting`, or nullopt.
// `waiting` is ordered by arrival; every rule breaks ties toward the earliest
// arrival, then the lowest record index.
std::optional<std::size_t> policy_select(const Policy& policy, std::span<const Candidate> waiting,
                                         std::size_t donor, const Scorer* scorer,
                                         const std::vector<std::size_t>* factual_partner);

enum class Fate { waiting, transplanted, dead };
std::string to_string(Fate f);

struct LedgerEntry {
  std::size_t recipient_id = 0;
  std::size_t arrival = 0;
  Fate fate = Fate::waiting;
  std::optional<std::size_t> step_of_fate;
  std::optional<std::size_t> donor_id;
  std::optional<double> realized_survival;
  std::optional<double> benefit;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

struct SimReport {
  std::string policy;
  std::size_t total = 0, transplanted = 0, dead = 0, waiting = 0;
  std::size_t donors_discarded = 0;
  double death_rate = 0.0;
  std::optional<double> avg_survival;
  std::optional<double> avg_benefit;
  std::optional<double> flipped_ratio;  // filled by compare_to_reference
  std::vector<LedgerEntry> ledger;      // indexed by recipient id

  nlohmann::json to_json() const;  // summary only
  static std::string csv_header();
  std::string csv_row() const;
  std::string ledger_csv() const;

  friend bool operator==(const SimReport&, const SimReport&) = default;
};

SimReport run_policy(const EventStream& stream, const Policy& policy, const Scorer* scorer,
                     const OutcomeOracle& oracle);

// Sets report.flipped_ratio: among recipients of true type `recipient_type`
// who received a donor of true type `donor_type` under `reference`, the
// fraction who received a donor of another type under `report`. Recipients
// left untransplanted by either run are excluded.
void compare_to_reference(SimReport& report, const SimReport& reference,
                          const data::Dataset& dataset, int recipient_type = 0,
                          int donor_type = 0);

}  // namespace matchrep::sim
