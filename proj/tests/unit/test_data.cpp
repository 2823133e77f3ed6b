#include <cmath>
#include <sstream>

#include "doctest.h"
#include "matchrep/data/csv.hpp"
#include "matchrep/data/normalize.hpp"
#include "matchrep/data/split.hpp"
#include "matchrep/error.hpp"

using namespace matchrep;
using namespace matchrep::data;

namespace {

SchemaConfig basic_config() {
  SchemaConfig c;
  c.recipient_columns = {"age", "blood"};
  c.donor_columns = {"d_age"};
  c.outcome_column = "survival";
  c.categorical = {{"blood", {"A", "B", "O"}}};
  return c;
}

}  // namespace

TEST_CASE("load_csv parses a small file") {
  std::istringstream in("age,blood,d_age,survival,extra\n50,A,30,700,x\n61.5,O,45,320,y\n");
  Dataset d = load_csv(in, basic_config());
  CHECK(d.size() == 2);
  CHECK(d.schema().recipient_features ==
        std::vector<std::string>{"age", "blood=A", "blood=B", "blood=O"});
  CHECK(d.schema().donor_dim() == 1);
  CHECK(d[1].recipient == std::vector<double>{61.5, 0, 0, 1});
  CHECK(d[0].outcome == 700);
}

TEST_CASE("missing numeric cells are mean-imputed with an indicator") {
  std::istringstream in("age,blood,d_age,survival\n50,A,30,700\n,B,40,500\n70,O,NA,300\n");
  Dataset d = load_csv(in, basic_config());
  CHECK(d.schema().recipient_features[1] == "age__missing");
  CHECK(d[1].recipient[0] == doctest::Approx(60.0));
  CHECK(d[1].recipient[1] == 1.0);
  CHECK(d[0].recipient[1] == 0.0);
  CHECK(d[2].donor == std::vector<double>{35.0, 1.0});
}

TEST_CASE("ingestion errors name row and column") {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      load_csv(in, basic_config());
    } catch (const IngestionError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("age,d_age,survival\n1,2,3\n").find("'blood'") != std::string::npos);
  auto bad_cell = message("age,blood,d_age,survival\n50,A,30,700\nfifty,A,30,700\n");
  CHECK(bad_cell.find("row 3") != std::string::npos);
  CHECK(bad_cell.find("'age'") != std::string::npos);
  auto bad_cat = message("age,blood,d_age,survival\n50,AB,30,700\n");
  CHECK(bad_cat.find("undeclared category 'AB'") != std::string::npos);
}

TEST_CASE("csv round trip is exact") {
  std::istringstream in(
      "age,blood,d_age,survival\n50.125,A,30,700\n,B,40,500.5\n70,O,,300\n1e-7,O,3,1\n");
  auto cfg = basic_config();
  Dataset d = load_csv(in, cfg);
  std::stringstream out;
  write_csv(d, cfg, out);
  Dataset again = load_csv(out, cfg);
  CHECK(again == d);
}

TEST_CASE("schema config json round trip") {
  auto cfg = basic_config();
  auto back = SchemaConfig::from_json(cfg.to_json());
  CHECK(back.recipient_columns == cfg.recipient_columns);
  CHECK(back.categorical == cfg.categorical);
  CHECK_THROWS_AS(SchemaConfig::from_json(nlohmann::json{{"recipient_columns", 3}}), ConfigError);
}

TEST_CASE("ground truth side file round trip") {
  Schema s{{"r"}, {"o"}};
  std::vector<MatchRecord> recs(2);
  for (int i = 0; i < 2; ++i) {
    recs[i].recipient = {double(i)};
    recs[i].donor = {double(-i)};
    recs[i].true_potentials = std::vector<double>{10.0 + i, 20.0, 30.25};
    recs[i].outcome = (*recs[i].true_potentials)[i];
    recs[i].untreated_survival = 400.5;
    recs[i].true_recipient_type = i;
    recs[i].true_donor_type = i;
  }
  Dataset full(s, recs);
  std::stringstream gt;
  write_ground_truth(full, gt);
  for (auto& r : recs) {
    r.true_potentials.reset();
    r.untreated_survival.reset();
    r.true_recipient_type.reset();
    r.true_donor_type.reset();
  }
  Dataset bare(s, recs);
  attach_ground_truth(bare, gt);
  CHECK(bare == full);
}

TEST_CASE("split sizes, determinism, and uniformity") {
  auto s = split(10, 0.9, 1);
  CHECK(s.train.size() == 9);
  CHECK(s.validation.size() == 1);
  CHECK(split(137, 0.9, 5) == split(137, 0.9, 5));
  CHECK_THROWS_AS(split(9, 0.9, 1), InsufficientDataError);

  auto t = split(5000, 0.9, 3);
  CHECK(t.validation.size() == 500);
  std::vector<int> seen(5000, 0);
  for (auto i : t.train) seen[i]++;
  for (auto i : t.validation) seen[i]++;
  for (int v : seen) CHECK(v == 1);

  std::vector<int> in_val(20, 0);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    for (auto i : split(20, 0.9, seed).validation) in_val[i]++;
  }
  for (int c : in_val) CHECK(std::abs(c / 1000.0 - 0.10) <= 0.03);
}

TEST_CASE("normalization uses training statistics only") {
  Schema s{{"a", "const"}, {"o"}};
  std::vector<MatchRecord> recs;
  const double a[5] = {1, 2, 3, 4, 100};
  for (double v : a) recs.push_back(MatchRecord{{v, 7.0}, {2 * v}, v, {}, {}, {}, {}});
  Dataset d(s, recs);
  SplitIndices sp{{0, 1, 2, 3}, {4}};
  Dataset n = normalize_fit_transform(d, sp);
  const double mean = 2.5, sd = std::sqrt(1.25);
  CHECK(n[4].recipient[0] == doctest::Approx((100 - mean) / sd));
  CHECK(n[0].recipient[0] == doctest::Approx((1 - mean) / sd));
  CHECK(n[2].recipient[1] == 0.0);
  CHECK(n.normalization()->recipient_scale[1] == 1.0);
  CHECK(n.normalization()->zero_variance_features == std::vector<std::string>{"const"});
  CHECK(n[4].outcome == 100);

  double m = 0, v = 0;
  for (auto i : sp.train) m += n[i].donor[0];
  m /= 4;
  for (auto i : sp.train) v += (n[i].donor[0] - m) * (n[i].donor[0] - m);
  CHECK(std::abs(m) < 1e-9);
  CHECK(std::abs(v / 4 - 1) < 1e-6);

  Dataset back = denormalize(n);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back[i].recipient[0] == doctest::Approx(d[i].recipient[0]).epsilon(1e-12));
    CHECK(back[i].donor[0] == doctest::Approx(d[i].donor[0]).epsilon(1e-12));
  }
}
