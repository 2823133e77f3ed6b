#include <cmath>

#include "doctest.h"
#include "matchrep/baselines/cart.hpp"
#include "matchrep/baselines/cluster_predictor.hpp"
#include "matchrep/baselines/linear.hpp"
#include "matchrep/baselines/pair_regressor.hpp"
#include "matchrep/error.hpp"
#include "matchrep/metrics/metrics.hpp"
#include "matchrep/numkit/rng.hpp"

using namespace matchrep;
using namespace matchrep::baselines;
using num::Matrix;

namespace {

Matrix gaussian_matrix(std::size_t r, std::size_t c, num::RngStream& rng) {
  Matrix m(r, c);
  for (auto& v : m.data()) v = rng.normal();
  return m;
}

double mse(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

// Two well-separated donor groups; outcomes linear in the recipient with a
// group-specific slope and no noise.
data::Dataset per_cluster_linear(std::size_t n, std::uint64_t seed) {
  num::RngStream rng(seed);
  std::vector<data::MatchRecord> recs;
  for (std::size_t i = 0; i < n; ++i) {
    data::MatchRecord r;
    const int g = static_cast<int>(i % 2);
    r.recipient = {rng.normal(), rng.normal()};
    r.donor = {(g == 0 ? -6.0 : 6.0) + rng.normal(), rng.normal()};
    r.outcome = g == 0 ? 100.0 + 20.0 * r.recipient[0] : 300.0 - 10.0 * r.recipient[1];
    recs.push_back(std::move(r));
  }
  return data::Dataset({{"r1", "r2"}, {"o1", "o2"}}, std::move(recs));
}

}  // namespace

TEST_CASE("ridge without penalty is least squares") {
  num::RngStream rng(1);
  Matrix x = gaussian_matrix(50, 3, rng);
  std::vector<double> y(50);
  for (std::size_t i = 0; i < 50; ++i) y[i] = 2.0 + x(i, 0) - 3.0 * x(i, 2) + 0.1 * rng.normal();
  auto fit = fit_ridge(x, y, 0.0);
  // Oracle: residuals of the least-squares solution are orthogonal to every
  // column and to the constant.
  auto pred = fit.model.predict(x);
  for (std::size_t c = 0; c < 3; ++c) {
    double dot = 0.0;
    for (std::size_t i = 0; i < 50; ++i) dot += (y[i] - pred[i]) * x(i, c);
    CHECK(std::abs(dot) < 1e-9);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < 50; ++i) sum += y[i] - pred[i];
  CHECK(std::abs(sum) < 1e-9);
  CHECK(fit.warnings.empty());

  Matrix dup(10, 2);
  for (std::size_t i = 0; i < 10; ++i) dup(i, 0) = dup(i, 1) = static_cast<double>(i);
  auto singular = fit_ridge(dup, std::vector<double>(10, 1.0), 0.0);
  CHECK_FALSE(singular.warnings.empty());
  CHECK(singular.penalty_used > 0.0);
}

TEST_CASE("lasso and elastic net") {
  num::RngStream rng(2);
  Matrix x = gaussian_matrix(80, 4, rng);
  std::vector<double> y(80);
  for (std::size_t i = 0; i < 80; ++i) y[i] = 5.0 + 3.0 * x(i, 1) + rng.normal();

  ElasticNetOptions huge;
  huge.lambda = 1e6;
  auto zero = fit_elastic_net(x, y, huge);
  for (double c : zero.model.coef) CHECK(c == 0.0);
  double mean = 0.0;
  for (double v : y) mean += v / 80.0;
  CHECK(zero.model.intercept == doctest::Approx(mean));

  for (double ratio : {1.0, 0.5}) {
    ElasticNetOptions o;
    o.lambda = 0.1;
    o.l1_ratio = ratio;
    auto fit = fit_elastic_net(x, y, o);
    CHECK(fit.converged);
    for (std::size_t s = 1; s < fit.objective_trace.size(); ++s) {
      CHECK(fit.objective_trace[s] <= fit.objective_trace[s - 1] + 1e-12);
    }
    CHECK(fit.model.coef[1] == doctest::Approx(3.0).epsilon(0.1));
  }

  ElasticNetOptions tiny;
  tiny.lambda = 0.0;
  tiny.l1_ratio = 0.0;
  auto ols_cd = fit_elastic_net(x, y, tiny);
  auto ols = fit_ridge(x, y, 0.0);
  for (std::size_t c = 0; c < 4; ++c) CHECK(ols_cd.model.coef[c] == doctest::Approx(ols.model.coef[c]).epsilon(1e-4));
}

TEST_CASE("regression tree finds a step threshold") {
  num::RngStream rng(3);
  const std::size_t n = 400;
  Matrix x(n, 2);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = std::floor(rng.uniform() * 100.0) / 10.0;  // grid of width 0.1
    x(i, 1) = rng.normal();
    y[i] = x(i, 0) > 3.7 ? 10.0 : 0.0;
  }
  TreeOptions one{1, 1};
  auto stump = RegressionTree::fit(x, y, one);
  REQUIRE(stump.nodes()[0].feature == 0);
  // Oracle: exhaustive search over grid thresholds for the smallest SSE.
  double best_t = 0.0, best_sse = 1e300;
  for (int g = 0; g < 100; ++g) {
    const double t = g / 10.0 + 0.05;
    double sl = 0, nl = 0, sr = 0, nr = 0;
    for (std::size_t i = 0; i < n; ++i) (x(i, 0) <= t ? (sl += y[i], nl += 1) : (sr += y[i], nr += 1));
    if (nl == 0 || nr == 0) continue;
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = x(i, 0) <= t ? sl / nl : sr / nr;
      sse += (y[i] - m) * (y[i] - m);
    }
    if (sse < best_sse - 1e-9) best_sse = sse, best_t = t;
  }
  CHECK(std::abs(stump.nodes()[0].threshold - best_t) <= 0.1);
  CHECK(std::abs(stump.nodes()[0].threshold - 3.75) <= 0.1);

  std::vector<double> noisy = y;
  for (auto& v : noisy) v += rng.normal() * 3.0 + x(0, 1);
  double previous = 1e300;
  for (std::size_t depth = 0; depth <= 8; ++depth) {
    auto t = RegressionTree::fit(x, noisy, {depth, 4});
    const double err = mse(t.predict(x), noisy);
    CHECK(err <= previous + 1e-9);
    previous = err;
    CHECK(t.depth() <= depth);
  }
  auto t = RegressionTree::fit(x, noisy);
  CHECK(RegressionTree::from_json(t.to_json()) == t);
}

TEST_CASE("pair regressors") {
  auto ds = per_cluster_linear(400, 4);
  for (PairKind kind : all_pair_kinds()) {
    PairRegressorOptions o;
    o.nn_epochs = 20;
    auto r = fit_pair_regressor(ds, kind, o);
    auto again = fit_pair_regressor(ds, kind, o);
    CHECK(r == again);
    const auto preds = r.predict(ds.recipient_matrix(), ds.donor_matrix());
    CHECK(predict_pair(r, ds[0].recipient, ds[0].donor) == doctest::Approx(preds[0]));
    // Oracle: residual statistics recomputed record by record.
    double resid = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) resid += ds[i].outcome - predict_pair(r, ds[i].recipient, ds[i].donor);
    resid /= static_cast<double>(ds.size());
    if (kind == PairKind::ridge || kind == PairKind::lasso || kind == PairKind::elasticnet) {
      CHECK(std::abs(resid) < 1e-6);
    }
    auto round = PairRegressor::from_json(r.to_json());
    CHECK(round == r);
    CHECK(round.predict(ds[3].recipient, ds[3].donor) == r.predict(ds[3].recipient, ds[3].donor));
  }
  CHECK_THROWS_AS(pair_kind_from_string("svm"), ConfigError);
}

TEST_CASE("cluster predictor baselines") {
  auto ds = per_cluster_linear(400, 5);
  model::TrainConfig cfg;
  cfg.k = 2;
  cfg.joint_epochs = 30;
  cfg.pretrain_epochs = 10;
  cfg.seed = 3;

  auto lin = fit_cluster_predictor(ds, ClusterPredictorSpec::from_name("kmeans-linear", cfg));
  const auto xr = ds.recipient_matrix();
  const auto xo = ds.donor_matrix();
  const auto labels = lin.assign(xo);
  CHECK(metrics::eps_factual(lin.predict_potentials(xr), labels, ds.outcomes()) < 1e-6);

  for (const char* name : {"em-linear", "kmeans-nn", "em-nn-rep", "dec-nn"}) {
    auto b = fit_cluster_predictor(ds, ClusterPredictorSpec::from_name(name, cfg));
    CHECK(b.spec.name() == name);
    auto round = ClusterPredictorBaseline::from_json(b.to_json());
    CHECK(round.assign(xo) == b.assign(xo));
    CHECK(round.predict_potentials(xr) == b.predict_potentials(xr));
    CHECK(metrics::adjusted_rand_index(b.assign(xo), labels) == doctest::Approx(1.0));
  }

  // Decoupling: the clusterer's labels do not depend on predictor training.
  auto plain = fit_cluster_predictor(ds, ClusterPredictorSpec::from_name("kmeans-nn", cfg));
  auto rep = fit_cluster_predictor(ds, ClusterPredictorSpec::from_name("kmeans-nn-rep", cfg));
  CHECK(plain.kmeans_centers == rep.kmeans_centers);
  CHECK(plain.kmeans_centers == lin.kmeans_centers);
  CHECK_FALSE(plain.nn->predictor.trunk == rep.nn->predictor.trunk);

  CHECK_THROWS_AS(ClusterPredictorSpec::from_name("kmeans-linear-rep", cfg), ConfigError);
  CHECK_THROWS_AS(ClusterPredictorSpec::from_name("spectral-nn", cfg), ConfigError);
}
