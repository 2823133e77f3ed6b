#include "doctest.h"
#include "matchrep/error.hpp"
#include "matchrep/metrics/metrics.hpp"
#include "matchrep/numkit/rng.hpp"

using namespace matchrep;
using num::Matrix;

TEST_CASE("factual error") {
  Matrix pred = Matrix::from_rows({{10.0, 20.0}, {5.0, 7.0}, {1.0, 1.0}});
  // Hand computation: (20-18)^2 = 4, (5-2)^2 = 9, (1-1)^2 = 0 -> 13/3.
  CHECK(metrics::eps_factual(pred, {1, 0, 1}, {18.0, 2.0, 1.0}) == doctest::Approx(13.0 / 3.0));
  CHECK(metrics::eps_factual(pred, {0, 0, 0}, {10.0, 5.0, 1.0}) == 0.0);
  CHECK(metrics::eps_factual(pred, {0, 0, 0}, {8.0, 3.0, -1.0}) == doctest::Approx(4.0));
  CHECK_THROWS_AS(metrics::eps_factual(pred, {0, 0}, {1.0, 2.0, 3.0}), InvalidInputError);
}

TEST_CASE("potential error and offset") {
  Matrix truth = Matrix::from_rows({{1.0, 2.0, 3.0}, {0.0, 0.0, 0.0}, {4.0, 4.0, 4.0}});
  CHECK(metrics::eps_wmse(truth, truth) == 0.0);
  Matrix shifted = truth;
  for (auto& v : shifted.data()) v += 2.0;
  CHECK(metrics::eps_wmse(shifted, truth) == doctest::Approx(3.0 * 4.0));
  Matrix pred = Matrix::from_rows({{1.0, 2.0, 4.0}, {1.0, 1.0, 0.0}, {4.0, 1.0, 4.0}});
  // Row errors: 1, 2, 9 -> 12 / 3.
  CHECK(metrics::eps_wmse(pred, truth) == doctest::Approx(4.0));
  CHECK(metrics::eps_factual(truth, {0, 1, 2}, {1.0, 0.0, 4.0}) <= metrics::eps_wmse(truth, truth) + 1e-9);
}

TEST_CASE("best donor type accuracy") {
  Matrix truth = Matrix::from_rows({{3.0, 2.0, 1.0}, {9.0, 5.0, 0.0}});
  CHECK(metrics::aodt(truth, truth) == 1.0);
  Matrix reversed = Matrix::from_rows({{1.0, 2.0, 3.0}, {0.0, 5.0, 9.0}});
  CHECK(metrics::aodt(reversed, truth) == 0.0);
  CHECK(metrics::mean_best_prediction(truth) == doctest::Approx(6.0));

  num::RngStream rng(77);
  const std::size_t n = 60000;
  Matrix p(n, 3), t(n, 3);
  for (auto& v : p.data()) v = rng.uniform();
  for (auto& v : t.data()) v = rng.uniform();
  CHECK(metrics::aodt(p, t) == doctest::Approx(1.0 / 3.0).epsilon(0.03));
}

TEST_CASE("flipped ratio") {
  std::vector<int> orig{0, 0, 1, 0, -1}, rtype{0, 0, 0, 1, 0};
  CHECK(*metrics::flipped_ratio(orig, orig, rtype, 0, 0) == 0.0);
  std::vector<int> flipped{2, 1, 1, 0, 0};
  CHECK(*metrics::flipped_ratio(orig, flipped, rtype, 0, 0) == 1.0);
  std::vector<int> half{0, 2, 1, 0, 0};
  CHECK(*metrics::flipped_ratio(orig, half, rtype, 0, 0) == doctest::Approx(0.5));
  CHECK_FALSE(metrics::flipped_ratio(orig, orig, rtype, 2, 0).has_value());
}

TEST_CASE("adjusted rand index") {
  std::vector<std::size_t> a{0, 0, 1, 1, 2, 2};
  CHECK(metrics::adjusted_rand_index(a, a) == doctest::Approx(1.0));
  std::vector<std::size_t> relabeled{2, 2, 0, 0, 1, 1};
  CHECK(metrics::adjusted_rand_index(a, relabeled) == doctest::Approx(1.0));
  // Hand contingency for {0,0,0,1,1,1} vs {0,0,1,1,2,2}: sum C(n_ij,2) = 2,
  // rows 6, cols 3, total C(6,2) = 15 -> (2 - 1.2) / (4.5 - 1.2).
  std::vector<std::size_t> x{0, 0, 0, 1, 1, 1};
  CHECK(metrics::adjusted_rand_index(x, a) == doctest::Approx(0.8 / 3.3));
}

TEST_CASE("truth projection") {
  Matrix truth = Matrix::from_rows({{10.0, 20.0, 30.0}, {1.0, 2.0, 3.0}});
  std::vector<std::size_t> learned{0, 0, 1, 1}, true_types{0, 0, 1, 2};
  auto proj = metrics::project_truth(truth, learned, true_types, 3);
  CHECK(proj(0, 0) == doctest::Approx(10.0));
  CHECK(proj(0, 1) == doctest::Approx(25.0));
  CHECK(proj(0, 2) == doctest::Approx(0.5 * 10.0 + 0.25 * 20.0 + 0.25 * 30.0));
  auto aliased = metrics::project_truth(truth, learned, true_types, 3, {0, 1, 1});
  CHECK(aliased(0, 2) == doctest::Approx(25.0));
  CHECK(aliased(1, 2) == doctest::Approx(2.5));
}

TEST_CASE("report serialization") {
  metrics::EvalReport r;
  r.model = "kmeans-linear";
  r.eps_f = 1.5;
  r.n = 3;
  CHECK(r.csv_row() == "kmeans-linear,1.5,n.a.,n.a.,0,3");
  CHECK(r.to_json()["aodt"].is_null());
  r.aodt = 0.75;
  CHECK(r.to_json()["aodt"] == 0.75);
}
