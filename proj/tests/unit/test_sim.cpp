#include "doctest.h"
#include "matchrep/error.hpp"
#include "matchrep/sim/allocsim.hpp"
#include "matchrep/synth/synthgen.hpp"

using namespace matchrep;
using namespace matchrep::sim;

namespace {

data::Dataset preset(std::size_t n, std::uint64_t seed) {
  auto c = synth::SyntheticConfig::paper_preset();
  c.n = n;
  c.seed = seed;
  return synth::sample_dataset(c);
}

Scorer table_scorer(std::vector<double> scores) {
  Scorer s;
  s.score = [scores](std::span<const std::size_t> ids, std::size_t) {
    std::vector<double> v;
    for (auto r : ids) v.push_back(scores.at(r));
    return v;
  };
  return s;
}

}  // namespace

TEST_CASE("stream construction") {
  auto ds = preset(200, 1);
  auto s = build_stream(ds, {}, 9);
  CHECK(s.event_count() == 400);
  CHECK(build_stream(ds, {}, 9) == s);
  CHECK_FALSE(build_stream(ds, {}, 10) == s);
  for (std::size_t i = 1; i < s.donors.size(); ++i) CHECK(s.donors[i - 1].step <= s.donors[i].step);
  for (const auto& d : s.donors) {
    CHECK(d.step >= d.id);
    CHECK(d.step <= d.id + 50);
  }
  CHECK_THROWS_AS(StreamConfig::from_json({{"days_per_step", 0.0}}), ConfigError);
  CHECK_THROWS_AS(StreamConfig::from_json({{"speed", 1}}), ConfigError);
}

TEST_CASE("zero window replays the observed pairs") {
  auto ds = preset(300, 2);
  StreamConfig cfg;
  cfg.window = 0;
  auto s = build_stream(ds, cfg, 1);
  auto oracle = OutcomeOracle::from_dataset(ds);
  auto fcfs = run_policy(s, {Rule::fcfs, false}, nullptr, oracle);
  auto real = run_policy(s, {Rule::real, false}, nullptr, oracle);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(fcfs.ledger[i].donor_id == i);
    CHECK(real.ledger[i].donor_id == i);
    CHECK(*fcfs.ledger[i].realized_survival == doctest::Approx(ds[i].outcome));
  }
  CHECK(fcfs.death_rate == 0.0);
}

TEST_CASE("policy selection rules") {
  std::vector<Candidate> one{{4, 2, 300.0}};
  auto s = table_scorer({0, 0, 0, 0, 5.0});
  std::vector<std::size_t> partner{4};
  for (auto rule : {Rule::real, Rule::fcfs, Rule::utility_first, Rule::benefit_first}) {
    CHECK(policy_select({rule, false}, one, 0, &s, &partner) == std::size_t{4});
  }
  CHECK_FALSE(policy_select({Rule::fcfs, false}, {}, 0, &s, &partner).has_value());

  std::vector<Candidate> two{{0, 0, 950.0}, {1, 1, 100.0}};
  auto uf_scores = table_scorer({10.0, 20.0});
  CHECK(policy_select({Rule::utility_first, false}, two, 0, &uf_scores, nullptr) == std::size_t{1});
  // Scores (1000, 900) with remaining (950, 100): benefits 50 and 800.
  auto bf_scores = table_scorer({1000.0, 900.0});
  CHECK(policy_select({Rule::utility_first, false}, two, 0, &bf_scores, nullptr) == std::size_t{0});
  CHECK(policy_select({Rule::benefit_first, false}, two, 0, &bf_scores, nullptr) == std::size_t{1});

  auto flat = table_scorer({7.0, 7.0});
  CHECK(policy_select({Rule::utility_first, false}, two, 0, &flat, nullptr) == std::size_t{0});

  Scorer guided = bf_scores;
  guided.best_type = [](std::size_t r) { return r == 0 ? std::size_t{2} : std::size_t{1}; };
  guided.donor_type = [](std::size_t d) { return d; };
  CHECK(policy_select({Rule::fcfs, true}, two, 1, &guided, nullptr) == std::size_t{1});
  CHECK(policy_select({Rule::utility_first, true}, two, 1, &guided, nullptr) == std::size_t{1});
  // No candidate prefers type 0: fall back to everyone.
  CHECK(policy_select({Rule::utility_first, true}, two, 0, &guided, nullptr) == std::size_t{0});

  CHECK_THROWS_AS(policy_select({Rule::utility_first, false}, two, 0, nullptr, nullptr), ConfigError);
  CHECK_THROWS_AS(policy_select({Rule::real, false}, two, 0, nullptr, nullptr), ConfigError);
}

TEST_CASE("policy names") {
  for (const char* n : {"real", "fcfs", "uf", "bf", "guided-fcfs", "guided-uf", "guided-bf"}) {
    CHECK(Policy::from_name(n).name() == n);
  }
  CHECK_THROWS_AS(Policy::from_name("guided-real"), ConfigError);
  CHECK_THROWS_AS(Policy::from_name("lottery"), ConfigError);
}

TEST_CASE("simulation bookkeeping") {
  auto ds = preset(500, 3);
  auto oracle = OutcomeOracle::from_dataset(ds);
  auto stream = build_stream(ds, {}, 4);
  std::vector<double> means;
  for (const auto& r : ds.records()) means.push_back(r.outcome);
  auto scorer = table_scorer(means);
  for (auto rule : {Rule::real, Rule::fcfs, Rule::utility_first, Rule::benefit_first}) {
    auto r = run_policy(stream, {rule, false}, &scorer, oracle);
    CHECK(r.transplanted + r.dead + r.waiting == r.total);
    CHECK(r.death_rate == doctest::Approx(static_cast<double>(r.dead) / r.total));
    std::vector<int> used(ds.size(), 0);
    double survival = 0.0;
    for (const auto& e : r.ledger) {
      if (e.donor_id) {
        CHECK(++used[*e.donor_id] == 1);
        survival += *e.realized_survival;
      }
      if (e.fate == Fate::dead) {
        // The recipient was alive one step earlier and out of time now.
        const double left = *ds[e.recipient_id].untreated_survival -
                            static_cast<double>(*e.step_of_fate - e.arrival) * stream.days_per_step;
        CHECK(left <= 0.0);
        CHECK(left + stream.days_per_step > 0.0);
      }
    }
    CHECK(*r.avg_survival == doctest::Approx(survival / r.transplanted));
    CHECK(run_policy(stream, {rule, false}, &scorer, oracle) == r);
  }

  // Identical outcomes everywhere: utility-first falls back to arrival order.
  auto flat = table_scorer(std::vector<double>(ds.size(), 1.0));
  auto uf = run_policy(stream, {Rule::utility_first, false}, &flat, oracle);
  auto fcfs = run_policy(stream, {Rule::fcfs, false}, nullptr, oracle);
  CHECK(uf.ledger == fcfs.ledger);

  auto real = run_policy(stream, {Rule::real, false}, nullptr, oracle);
  compare_to_reference(real, real, ds);
  CHECK(*real.flipped_ratio == 0.0);

  EventStream no_partner = stream;
  no_partner.factual_partner.reset();
  CHECK_THROWS_AS(run_policy(no_partner, {Rule::real, false}, nullptr, oracle), ConfigError);

  const std::string ledger = fcfs.ledger_csv();
  CHECK(ledger.rfind("recipient_id,arrival,fate,step_of_fate,donor_id,realized_survival,benefit\n", 0) == 0);
}

TEST_CASE("donors without recipients") {
  auto ds = preset(20, 5);
  EventStream s;
  s.days_per_step = 1000.0;
  s.recipients = {{0, 0}, {1, 1}};
  s.donors = {{5, 3}, {6, 4}};
  auto r = run_policy(s, {Rule::fcfs, false}, nullptr, OutcomeOracle::from_dataset(ds));
  CHECK(r.dead == 2);
  CHECK(r.transplanted == 0);
  CHECK(r.donors_discarded == 2);
  CHECK_FALSE(r.avg_survival.has_value());
  CHECK(r.csv_row().find("n.a.") != std::string::npos);
}
