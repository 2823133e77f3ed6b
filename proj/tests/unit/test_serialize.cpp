#include <filesystem>

#include "doctest.h"
#include "matchrep/error.hpp"
#include "matchrep/model/serialize.hpp"
#include "matchrep/model/train.hpp"
#include "matchrep/synth/synthgen.hpp"

using namespace matchrep;

TEST_CASE("model round trip through a file") {
  auto sc = synth::SyntheticConfig::paper_preset();
  sc.n = 300;
  auto ds = synth::sample_dataset(sc);
  model::TrainConfig cfg;
  cfg.pretrain_epochs = 2;
  cfg.joint_epochs = 2;
  auto trained = model::train_joint(ds, cfg).model;
  const auto path = std::filesystem::temp_directory_path() / "matchrep_model_roundtrip.json";
  model::save_model(path, trained);
  auto loaded = model::load_model(path);
  CHECK(loaded == trained);
  CHECK(loaded.predict_potentials(ds.recipient_matrix()) ==
        trained.predict_potentials(ds.recipient_matrix()));
  std::filesystem::remove(path);

  auto j = model::model_to_json(trained);
  CHECK(j["format"] == "matchrep-v1");
  CHECK(j["kind"] == "matchrep");
  j["format"] = "other";
  CHECK_THROWS_AS(model::model_from_json(j), ConfigError);
  j = model::model_to_json(trained);
  j["predictor"]["heads"].erase(0);
  CHECK_THROWS_AS(model::model_from_json(j), ConfigError);
  CHECK_THROWS_AS(model::load_model("/nonexistent/dir/model.json"), IoError);
}
