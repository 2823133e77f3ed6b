#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "matchrep/error.hpp"
#include "matchrep/synth/synthgen.hpp"

using namespace matchrep;
using namespace matchrep::synth;

TEST_CASE("preset values") {
  auto c = SyntheticConfig::preset("paper-5.1");
  CHECK(c.n == 5000);
  CHECK(c.match_table[0] == std::vector<double>{0.6, 0.2, 0.2});
  CHECK(c.match_table[1] == std::vector<double>{0.1, 0.7, 0.2});
  CHECK(true_potential_means(c, 0) == std::vector<double>{500, 1000, 1100});
  CHECK(true_potential_means(c, 1) == std::vector<double>{100, 800, 900});
  auto m1 = true_potential_means(c, 0);
  CHECK(std::max_element(m1.begin(), m1.end()) - m1.begin() == 2);
  CHECK_THROWS_AS(true_potential_means(c, 2), InvalidInputError);
  CHECK_THROWS_AS(SyntheticConfig::preset("nope"), ConfigError);
}

TEST_CASE("config validation and json round trip") {
  auto c = SyntheticConfig::paper_preset();
  auto back = SyntheticConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  auto j = c.to_json();
  j["match_table"][0] = {0.5, 0.2, 0.2};
  CHECK_THROWS_AS(SyntheticConfig::from_json(j), ConfigError);
  auto p = SyntheticConfig::from_json({{"preset", "paper-5.1"}, {"n", 10}, {"seed", 3}});
  CHECK(p.n == 10);
  CHECK(p.seed == 3);
}

TEST_CASE("sampled preset data: marginals, selection bias, consistency") {
  auto c = SyntheticConfig::paper_preset();
  c.seed = 17;
  auto d = sample_dataset(c);
  REQUIRE(d.size() == 5000);
  CHECK(d.has_ground_truth());
  std::vector<double> freq(3, 0.0);
  double m2 = 0, m2k1 = 0;
  for (const auto& r : d.records()) {
    freq[*r.true_donor_type] += 1.0 / 5000;
    CHECK(r.outcome == (*r.true_potentials)[*r.true_donor_type]);
    CHECK(*r.untreated_survival >= 1.0);
    if (*r.true_recipient_type == 1) {
      m2 += 1;
      if (*r.true_donor_type == 0) m2k1 += 1;
    }
  }
  CHECK(std::abs(freq[0] - 0.35) <= 0.02);
  CHECK(std::abs(freq[1] - 0.45) <= 0.02);
  CHECK(std::abs(freq[2] - 0.20) <= 0.02);
  CHECK(m2k1 / m2 < 0.15);

  double sum = 0, count = 0;
  for (const auto& r : d.records()) {
    if (*r.true_recipient_type == 0 && *r.true_donor_type == 0) {
      sum += r.outcome;
      count += 1;
    }
  }
  CHECK(std::abs(sum / count - 500.0) < 2.0);
  CHECK(sample_dataset(c) == d);
}

TEST_CASE("semi-synthetic surrogate") {
  auto c = SyntheticConfig::paper_preset();
  c.n = 300;
  auto base = sample_dataset(c);
  auto a = semi_synthetic_outcomes(base, 3, 9);
  CHECK(a == semi_synthetic_outcomes(base, 3, 9));
  CHECK(a.has_ground_truth());
  for (const auto& r : a.records()) {
    for (double y : *r.true_potentials) CHECK(y > 0.0);
    CHECK(r.outcome == (*r.true_potentials)[*r.true_donor_type]);
  }

  // Identical recipients with zero noise share a potential vector.
  std::vector<data::MatchRecord> recs(base.records().begin(), base.records().begin() + 20);
  for (auto& r : recs) r.recipient = recs[0].recipient;
  recs[1].recipient[0] += 1.0;  // keeps the standardization well defined
  data::Dataset same(base.schema(), recs);
  SemiSyntheticOptions quiet;
  quiet.noise_sd = 0.0;
  auto s = semi_synthetic_outcomes(same, 2, 4, quiet);
  for (std::size_t i = 2; i < s.size(); ++i) CHECK(*s[i].true_potentials == *s[0].true_potentials);
}
