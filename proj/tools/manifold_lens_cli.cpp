#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mlens/estimators.hpp"
#include "mlens/harness.hpp"
#include "mlens/transport.hpp"

namespace {

using mlens::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAssertion = 3;

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mlens::ConfigError("cannot open config file: " + path);
  json config;
  try {
    in >> config;
  } catch (const json::exception& e) {
    throw mlens::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config;
}

void apply_overrides(json& config, const std::optional<std::uint64_t>& seed,
                     const std::optional<int>& trials) {
  if (seed) config["base_seed"] = *seed;
  if (trials) config["experiment"]["trials"] = *trials;
}

void emit(const json& report, const std::string& out_path) {
  std::string text = mlens::dump_report(report);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);
    out << text;
  }
}

mlens::DiscreteMeasure measure_from_json(const json& spec) {
  const json& atoms_json = spec.at("atoms");
  if (!atoms_json.is_array() || atoms_json.empty()) {
    throw mlens::ConfigError("measure atoms must be a non-empty array");
  }
  int n = static_cast<int>(atoms_json.size());
  int D = static_cast<int>(atoms_json[0].size());
  Eigen::MatrixXd atoms(D, n);
  for (int j = 0; j < n; ++j) {
    if (static_cast<int>(atoms_json[j].size()) != D) {
      throw mlens::ConfigError("measure atoms must share one dimension");
    }
    for (int c = 0; c < D; ++c) atoms(c, j) = atoms_json[j][c].get<double>();
  }
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, 1.0 / n);
  if (spec.contains("weights")) {
    auto w = spec["weights"].get<std::vector<double>>();
    if (static_cast<int>(w.size()) != n) {
      throw mlens::ConfigError("weights length must match atom count");
    }
    weights = Eigen::Map<Eigen::VectorXd>(w.data(), n);
  }
  return {atoms, weights};
}

int run_sample(const json& config, const std::string& out_path) {
  auto model = mlens::model_from_json(config.at("model"));
  auto density = mlens::density_from_json(config.value("density", json{{"kind", "uniform"}}));
  auto noise = mlens::noise_from_json(config.value("noise", json{{"kind", "none"}}));
  int m = config.at("m").get<int>();
  std::uint64_t seed = config.value("base_seed", 0ULL);
  mlens::PointCloud cloud = mlens::sample(*model, density, noise, m, seed);
  if (out_path.empty()) throw mlens::ConfigError("sample needs --out (or config \"out\")");
  mlens::write_cloud_csv(cloud, out_path);
  mlens::write_cloud_sidecar(cloud, config.dump(), out_path + ".json");
  json summary;
  summary["written"] = out_path;
  summary["m"] = cloud.size();
  summary["D"] = cloud.ambient_dim();
  std::cout << mlens::dump_report(summary);
  return kExitOk;
}

int run_estimate(const json& config, const std::string& out_path) {
  mlens::PointCloud cloud;
  if (config.contains("cloud_csv")) {
    cloud = mlens::read_cloud_csv(config["cloud_csv"].get<std::string>());
  } else {
    auto model = mlens::model_from_json(config.at("model"));
    auto density = mlens::density_from_json(config.value("density", json{{"kind", "uniform"}}));
    auto noise = mlens::noise_from_json(config.value("noise", json{{"kind", "none"}}));
    cloud = mlens::sample(*model, density, noise, config.at("m").get<int>(),
                          config.value("base_seed", 0ULL));
  }
  const json& est = config.at("estimator");
  mlens::EstimatorParams params;
  params.r = est.at("r").get<double>();
  if (est.contains("k")) params.k = est["k"].get<int>();
  if (est.contains("eta")) params.eta = est["eta"].get<double>();
  if (est.contains("rho_fraction")) params.rho_fraction = est["rho_fraction"].get<double>();
  params.validate(cloud.ambient_dim());
  mlens::BatchResult result = mlens::batch_estimate(cloud, params);
  if (!out_path.empty()) {
    mlens::write_estimates_csv(result, cloud.ambient_dim(), out_path);
  }
  json summary;
  summary["processed"] = result.summary.processed;
  summary["failures"] = result.summary.failures;
  summary["max_angle"] = result.summary.max_angle;
  summary["all_dims_correct"] = result.summary.all_dims_correct;
  std::cout << mlens::dump_report(summary);
  return kExitOk;
}

int run_wasserstein(const json& config, const std::string& out_path) {
  mlens::DiscreteMeasure mu = measure_from_json(config.at("mu"));
  mlens::DiscreteMeasure nu = measure_from_json(config.at("nu"));
  double p = config.value("p", 1.0);
  mlens::WassersteinResult result = mlens::wasserstein(mu, nu, p);
  json report;
  report["p"] = p;
  report["distance"] = result.distance;
  json flow = json::array();
  for (const auto& entry : result.plan.flow) {
    flow.push_back({{"from", entry.from}, {"to", entry.to}, {"mass", entry.mass}});
  }
  report["plan"] = flow;
  emit(report, out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"manifold-lens: local PCA estimators with transport-based diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;

  auto add_common = [&](CLI::App* cmd, bool with_trials) {
    cmd->add_option("--config", config_path, "JSON config file")->required();
    cmd->add_option("--out", out_path, "output path (default: stdout)");
    cmd->add_option("--seed", seed, "override base_seed");
    if (with_trials) cmd->add_option("--trials", trials, "override trial count");
  };

  CLI::App* cmd_sample = app.add_subcommand("sample", "draw a point cloud to CSV");
  CLI::App* cmd_estimate = app.add_subcommand("estimate", "run the local estimators");
  CLI::App* cmd_bounds = app.add_subcommand("bounds", "evaluate the bound formulas");
  CLI::App* cmd_experiment = app.add_subcommand("experiment", "run a Monte Carlo experiment");
  CLI::App* cmd_wasserstein = app.add_subcommand("wasserstein", "exact W_p between measures");
  add_common(cmd_sample, false);
  add_common(cmd_estimate, false);
  add_common(cmd_bounds, false);
  add_common(cmd_experiment, true);
  add_common(cmd_wasserstein, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    json config = load_config(config_path);
    apply_overrides(config, seed, trials);
    if (out_path.empty() && config.contains("out")) {
      out_path = config["out"].get<std::string>();
    }

    if (app.got_subcommand(cmd_sample)) return run_sample(config, out_path);
    if (app.got_subcommand(cmd_estimate)) return run_estimate(config, out_path);
    if (app.got_subcommand(cmd_wasserstein)) return run_wasserstein(config, out_path);
    if (app.got_subcommand(cmd_bounds)) {
      emit(mlens::bounds_report(config), out_path);
      return kExitOk;
    }
    // experiment
    auto start = std::chrono::steady_clock::now();
    json report = mlens::run_experiment(config);
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json with_clock = report;
    with_clock["wall_clock_seconds"] = elapsed;
    emit(with_clock, out_path);
    if (mlens::report_has_violations(report)) {
      std::cerr << "experiment assertion failure: see report violations\n";
      return kExitAssertion;
    }
    return kExitOk;
  } catch (const mlens::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAssertion;
  }
}
