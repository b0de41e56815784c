#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mlens/harness.hpp"

using namespace mlens;

namespace {

json circle_tangent_config(int trials) {
  return {
      {"experiment", {{"kind", "tangent"}, {"trials", trials}, {"theta", 0.1}}},
      {"model", {{"kind", "sphere"}, {"d", 1}, {"D", 2}, {"R", 1.0}}},
      {"density", {{"kind", "uniform"}}},
      {"noise", {{"kind", "none"}}},
      {"m", 400},
      {"estimator", {{"r", 0.3}, {"k", 1}}},
      {"base_seed", 42},
  };
}

}  // namespace

TEST_CASE("config block parsing and errors") {
  CHECK(model_from_json({{"kind", "sphere"}, {"d", 1}, {"D", 2}})->name() == "sphere");
  CHECK(model_from_json({{"kind", "torus3d"}, {"R", 1.2}, {"r", 0.5}})->name() == "torus3d");
  CHECK_THROWS_AS(model_from_json({{"kind", "moebius"}}), ConfigError);
  CHECK_THROWS_AS(model_from_json({{"kind", "sphere"}}), ConfigError);

  CHECK(density_from_json({{"kind", "uniform"}}).kind == DensityModel::Kind::Uniform);
  CHECK(density_from_json({{"kind", "sinusoidal"}, {"a", 0.5}}).a == 0.5);
  CHECK_THROWS_AS(density_from_json({{"kind", "sinusoidal"}, {"a", 1.5}}), ConfigError);

  CHECK(noise_from_json({{"kind", "none"}}).kind == NoiseModel::Kind::None);
  CHECK(noise_from_json({{"kind", "dependent"}, {"s", 0.01}}).s == 0.01);
  CHECK_THROWS_AS(noise_from_json({{"kind", "iid_ball"}, {"s", -1.0}}), ConfigError);
  CHECK_THROWS_AS(noise_from_json({{"kind", "laplace"}, {"s", 0.1}}), ConfigError);
}

TEST_CASE("run_experiment validates config") {
  CHECK_THROWS_AS(run_experiment(json::object()), ConfigError);
  CHECK_THROWS_AS(run_experiment({{"experiment", {{"kind", "unknown"}}}}), ConfigError);

  json zero_trials = circle_tangent_config(0);
  CHECK_THROWS_AS(run_experiment(zero_trials), ConfigError);

  json bad_eta = circle_tangent_config(1);
  bad_eta["experiment"]["kind"] = "dimension";
  bad_eta["experiment"]["eta"] = 1.5;
  bad_eta["estimator"].erase("k");
  CHECK_THROWS_AS(run_experiment(bad_eta), ConfigError);
}

TEST_CASE("tangent experiment on exact planar data gives zero angle") {
  json config = {
      {"experiment", {{"kind", "tangent"}, {"trials", 1}, {"theta", 1e-7}}},
      {"model", {{"kind", "disk"}, {"d", 2}, {"D", 3}, {"R", 1.0}}},
      {"m", 50},
      {"estimator", {{"r", 10.0}, {"k", 2}}},
      {"base_seed", 3},
  };
  json report = run_experiment(config);
  CHECK(report["frequency"] == 1.0);
  CHECK(report["records"][0]["max_angle"].get<double>() <= 1e-7);
}

TEST_CASE("tangent report carries the envelope and honest regime flags") {
  json report = run_experiment(circle_tangent_config(2));
  CHECK(report["schema_version"] == kSchemaVersion);
  CHECK(report["artifact_version"] == kArtifactVersion);
  CHECK(report["config"] == circle_tangent_config(2));
  CHECK(report["records"].size() == 2);
  double freq = report["frequency"].get<double>();
  CHECK(freq >= 0.0);
  CHECK(freq <= 1.0);
  // Desk-scale m cannot satisfy the certified sample condition.
  CHECK_FALSE(report["bounds"]["certified_regime"].get<bool>());
  CHECK(report["bounds"]["note"] == "outside certified regime");
  CHECK(report["bounds"]["S1"].get<double>() ==
        doctest::Approx(std::sin(0.1) / 528.0).epsilon(1e-12));
}

TEST_CASE("dimension experiment on planar data always finds 2") {
  json config = {
      {"experiment", {{"kind", "dimension"}, {"trials", 3}, {"eta", 0.05}}},
      {"model", {{"kind", "disk"}, {"d", 2}, {"D", 3}, {"R", 1.0}}},
      {"m", 60},
      {"estimator", {{"r", 10.0}, {"eta", 0.05}}},
      {"base_seed", 4},
  };
  json report = run_experiment(config);
  CHECK(report["frequency"] == 1.0);
  for (const auto& rec : report["records"]) CHECK(rec["all_dims_correct"].get<bool>());
}

TEST_CASE("concentration experiment flags the vacuous eps = 0 case") {
  json config = {
      {"experiment", {{"kind", "concentration"}, {"trials", 50}, {"eps", 0.0}}},
      {"D", 2},
      {"m", 20},
      {"base_seed", 6},
  };
  json report = run_experiment(config);
  CHECK(report["frequency"] == 1.0);
  CHECK(report["bounds"]["bound"].get<double>() >= 1.0);
  CHECK(report["bounds"]["vacuous"].get<bool>());
  CHECK(report["violations"] == 0);
}

TEST_CASE("concentration bound ratio halves its exponent when m doubles") {
  double e1 = cov_concentration_bounds(0.5, 100, 1.0, 2).second;
  double e2 = cov_concentration_bounds(0.5, 200, 1.0, 2).second;
  double x = 100 * 0.25 / 1152.0;
  CHECK(e2 / e1 == doctest::Approx(std::exp(-x)).epsilon(1e-12));
}

TEST_CASE("lipschitz sweep records zero violations") {
  json config = {
      {"experiment", {{"kind", "lipschitz"}, {"trials", 500}, {"max_atoms", 10}}},
      {"D", 3},
      {"base_seed", 8},
  };
  json report = run_experiment(config);
  CHECK(report["violations"] == 0);
  CHECK(report["max_ratio"].get<double>() <= 1.0);
}

TEST_CASE("flattening regime validation") {
  json config = {
      {"experiment", {{"kind", "flattening"}, {"trials", 1}, {"n_loc", 40}}},
      {"model", {{"kind", "sphere"}, {"d", 1}, {"D", 2}, {"R", 1.0}}},
      {"noise", {{"kind", "none"}}},
      {"estimator", {{"r", 0.9}}},  // above (sqrt(2) - 1) tau
      {"base_seed", 1},
  };
  CHECK_THROWS_AS(run_experiment(config), ConfigError);

  config["estimator"]["r"] = 0.2;
  json report = run_experiment(config);
  CHECK(report["bounds"]["q"].get<double>() == doctest::Approx(11.0));
  CHECK(report["violations"] == 0);
}

TEST_CASE("flattening on the flat disk nets out to the Monte Carlo allowance") {
  json config = {
      {"experiment", {{"kind", "flattening"}, {"trials", 3}, {"n_loc", 60}}},
      {"model", {{"kind", "disk"}, {"d", 2}, {"D", 3}, {"R", 4.0}}},
      {"noise", {{"kind", "none"}}},
      {"estimator", {{"r", 0.5}}},
      {"base_seed", 12},
  };
  json report = run_experiment(config);
  CHECK(report["bounds"]["curvature_term"].get<double>() == 0.0);
  // nu restricted to the window and the flat disk law coincide here, so W1
  // stays within a few Monte Carlo allowances even on unlucky draws.
  for (const auto& rec : report["records"]) {
    CHECK(rec["w1"].get<double>() <= 4.0 * rec["eps_mc"].get<double>());
  }
}

TEST_CASE("bounds_report modes") {
  json config = {
      {"model", {{"kind", "sphere"}, {"d", 1}, {"D", 2}, {"R", 1.0}}},
      {"bounds",
       {{"s", 0.0}, {"r", 0.3}, {"m", 2000}, {"delta", 0.05}, {"theta", 0.1}}},
  };
  json report = bounds_report(config);
  CHECK(report["outputs"]["mode"] == "tangent");
  CHECK(report["outputs"]["q"].get<double>() == doctest::Approx(11.0));
  CHECK(report["outputs"]["S1"].get<double>() ==
        doctest::Approx(std::sin(0.1) / 528.0).epsilon(1e-12));

  json dim = config;
  dim["bounds"].erase("theta");
  dim["bounds"]["eta"] = 0.05;
  json dim_report = bounds_report(dim);
  CHECK(dim_report["outputs"]["mode"] == "dimension");
  CHECK(dim_report["outputs"]["tail_threshold_radius"].get<double>() > 0.0);

  json proj = config;
  proj["bounds"].erase("theta");
  proj["bounds"]["eps"] = 1.0;
  proj["bounds"]["u0"] = 0.1;
  json proj_report = bounds_report(proj);
  CHECK(proj_report["outputs"]["mode"] == "projector");
  CHECK(proj_report["bounds"].contains("m_min"));

  json invalid = config;
  invalid["bounds"]["eta"] = 0.05;  // two modes at once
  CHECK_THROWS_AS(bounds_report(invalid), ConfigError);
}

TEST_CASE("reports are byte-identical across reruns") {
  for (const json& config :
       {circle_tangent_config(3),
        json{{"experiment", {{"kind", "concentration"}, {"trials", 200}, {"eps", 0.3}}},
             {"D", 2},
             {"m", 50},
             {"base_seed", 17}},
        json{{"experiment", {{"kind", "lipschitz"}, {"trials", 100}}},
             {"D", 2},
             {"base_seed", 18}}}) {
    std::string first = dump_report(run_experiment(config));
    std::string second = dump_report(run_experiment(config));
    CHECK(first == second);
  }
}
