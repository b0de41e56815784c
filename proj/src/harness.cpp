#include "mlens/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

#include "mlens/estimators.hpp"
#include "mlens/measures.hpp"
#include "mlens/rng.hpp"
#include "mlens/transport.hpp"

namespace mlens {

namespace {

const json& require(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) throw ConfigError(std::string("missing config field: ") + field);
  return *it;
}

double require_number(const json& obj, const char* field) {
  const json& v = require(obj, field);
  if (!v.is_number()) throw ConfigError(std::string("config field must be a number: ") + field);
  return v.get<double>();
}

int require_int(const json& obj, const char* field) {
  const json& v = require(obj, field);
  if (!v.is_number_integer()) {
    throw ConfigError(std::string("config field must be an integer: ") + field);
  }
  return v.get<int>();
}

/// Run body(t) for t in [0, n) on the worker pool; bodies write to disjoint
/// slots so aggregation is order independent.
void parallel_trials(int n, const std::function<void(int)>& body) {
  const int threads = std::min(worker_thread_count(), n);
  if (threads <= 1) {
    for (int t = 0; t < n; ++t) body(t);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < n; t = next.fetch_add(1)) body(t);
    });
  }
  for (auto& th : pool) th.join();
}

EstimatorParams estimator_from_json(const json& spec) {
  EstimatorParams params;
  params.r = require_number(spec, "r");
  if (spec.contains("k")) params.k = require_int(spec, "k");
  if (spec.contains("eta")) params.eta = require_number(spec, "eta");
  if (spec.contains("rho_fraction")) params.rho_fraction = require_number(spec, "rho_fraction");
  return params;
}

json report_envelope(const json& config, const std::string& kind) {
  json report;
  report["schema_version"] = kSchemaVersion;
  report["artifact_version"] = kArtifactVersion;
  report["formula_version"] = bounds_formula_version();
  report["kind"] = kind;
  report["config"] = config;
  return report;
}

/// Theorem condition flags shared by the tangent and dimension experiments:
/// sqrt(2 tau s) <= r <= S1 and m (r - 2s)^d / log m >= S2.
json regime_flags(const BoundInputs& in, double S1, double S2) {
  json flags;
  flags["S1"] = S1;
  flags["S2"] = S2;
  bool radius_ok = std::sqrt(2.0 * in.tau * in.s) <= in.r && in.r <= S1;
  double provided = 0.0;
  if (in.m >= 3 && in.r > 2.0 * in.s) {
    provided = in.m * std::pow(in.r - 2.0 * in.s, in.d) / std::log(in.m);
  }
  bool sample_ok = provided >= S2;
  flags["radius_ok"] = radius_ok;
  flags["sample_ok"] = sample_ok;
  flags["provided_ratio"] = provided;
  flags["certified_regime"] = radius_ok && sample_ok;
  if (!(radius_ok && sample_ok)) flags["note"] = "outside certified regime";
  return flags;
}

BoundInputs model_bound_inputs(const json& config, const ManifoldModel& model,
                               const DensityModel& density, const NoiseModel& noise,
                               const EstimatorParams& params) {
  BoundInputs in;
  in.tau = model.reach();
  in.d = model.intrinsic_dim();
  in.D = model.ambient_dim();
  DensityInfo info = model.density_info(density);
  in.phi_min = info.phi_min;
  in.phi_max = info.phi_max;
  in.alpha = info.alpha;
  in.s = noise.s;
  in.r = params.r;
  in.m = config.contains("m") ? require_number(config, "m") : 0.0;
  in.rho_fraction = params.rho_fraction;
  if (config.contains("experiment") && config["experiment"].contains("delta")) {
    in.delta = require_number(config["experiment"], "delta");
  }
  return in;
}

Eigen::VectorXd uniform_ball_point(int D, std::mt19937_64& engine) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd v(D);
  do {
    for (int c = 0; c < D; ++c) v[c] = gauss(engine);
  } while (v.norm() == 0.0);
  v.normalize();
  return std::pow(unif(engine), 1.0 / D) * v;
}

json run_tangent_or_dimension(const json& config, bool tangent_mode) {
  const json& ex = require(config, "experiment");
  int trials = require_int(ex, "trials");
  if (trials < 1) throw ConfigError("experiment.trials must be >= 1");
  auto model = model_from_json(require(config, "model"));
  DensityModel density = density_from_json(config.value("density", json{{"kind", "uniform"}}));
  NoiseModel noise = noise_from_json(config.value("noise", json{{"kind", "none"}}));
  int m = require_int(config, "m");
  EstimatorParams params = estimator_from_json(require(config, "estimator"));
  std::uint64_t base_seed = config.value("base_seed", 0ULL);

  double theta = 0.0;
  if (tangent_mode) {
    theta = require_number(ex, "theta");
    if (!params.k) params.k = model->intrinsic_dim();
  } else {
    if (!params.eta) params.eta = require_number(ex, "eta");
  }
  params.validate(model->ambient_dim());

  std::vector<json> records(trials);
  std::vector<int> successes(trials, 0);
  for (int t = 0; t < trials; ++t) {
    std::uint64_t seed_t = mix_seed(base_seed, static_cast<std::uint64_t>(t));
    PointCloud cloud = sample(*model, density, noise, m, seed_t);
    BatchResult batch = batch_estimate(cloud, params);
    json rec;
    rec["trial"] = t;
    rec["seed"] = seed_t;
    rec["failures"] = batch.summary.failures;
    rec["processed"] = batch.summary.processed;
    bool ok;
    if (tangent_mode) {
      rec["max_angle"] = batch.summary.max_angle;
      ok = batch.summary.failures == 0 && batch.summary.max_angle <= theta;
    } else {
      rec["all_dims_correct"] = batch.summary.all_dims_correct;
      ok = batch.summary.failures == 0 && batch.summary.all_dims_correct;
    }
    rec["success"] = ok;
    successes[t] = ok ? 1 : 0;
    records[t] = std::move(rec);
  }

  int won = 0;
  for (int v : successes) won += v;
  json report = report_envelope(config, tangent_mode ? "tangent" : "dimension");
  report["trials"] = trials;
  report["records"] = records;
  report["frequency"] = static_cast<double>(won) / trials;

  BoundInputs in = model_bound_inputs(config, *model, density, noise, params);
  if (tangent_mode) {
    in.theta = theta;
    report["bounds"] = regime_flags(in, thmA_S1(in), thmA_S2(in));
  } else {
    in.eta = *params.eta;
    json flags;
    if (*params.eta < 1.0 / (2.0 * in.D)) {
      flags = regime_flags(in, thmB_S1(in), thmB_S2(in));
    } else {
      flags["note"] = "eta >= 1/(2D): dimension guarantee hypotheses not met";
      flags["certified_regime"] = false;
    }
    report["bounds"] = flags;
  }
  report["violations"] = 0;
  return report;
}

json run_concentration(const json& config) {
  const json& ex = require(config, "experiment");
  int trials = require_int(ex, "trials");
  if (trials < 1) throw ConfigError("experiment.trials must be >= 1");
  double eps = require_number(ex, "eps");
  if (!(eps >= 0)) throw ConfigError("experiment.eps must be >= 0");
  int D = config.value("D", 2);
  if (D < 1) throw ConfigError("D must be >= 1");
  int m = require_int(config, "m");
  if (m < 2) throw ConfigError("m must be >= 2");
  std::uint64_t base_seed = config.value("base_seed", 0ULL);

  // Generator: uniform on the unit D-ball, so Sigma = I / (D + 2) exactly.
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(D, D) / (D + 2.0);
  std::vector<int> exceed(trials, 0);
  std::vector<double> deviation(trials, 0.0);
  parallel_trials(trials, [&](int t) {
    std::mt19937_64 engine = make_engine(base_seed, static_cast<std::uint64_t>(t));
    Eigen::MatrixXd atoms(D, m);
    for (int j = 0; j < m; ++j) atoms.col(j) = uniform_ball_point(D, engine);
    SymMatrix cov = covariance(DiscreteMeasure::empirical(atoms));
    double dev = operator_norm(SymMatrix(cov.mat() - sigma));
    deviation[t] = dev;
    exceed[t] = dev >= eps ? 1 : 0;
  });

  int hits = 0;
  double max_dev = 0.0;
  for (int t = 0; t < trials; ++t) {
    hits += exceed[t];
    max_dev = std::max(max_dev, deviation[t]);
  }
  double frequency = static_cast<double>(hits) / trials;
  auto [b0, bound] = cov_concentration_bounds(eps, m, 1.0, D);

  json report = report_envelope(config, "concentration");
  report["trials"] = trials;
  report["frequency"] = frequency;
  report["max_deviation"] = max_dev;
  json bounds;
  bounds["known_mean_bound"] = b0;
  bounds["bound"] = bound;
  bounds["vacuous"] = bound > 1.0;
  int violations = 0;
  if (bound <= 1.0) {
    double se = std::sqrt(bound * (1.0 - bound) / trials);
    bounds["three_se_margin"] = 3.0 * se;
    if (frequency > bound + 3.0 * se) violations = 1;
  }
  report["bounds"] = bounds;
  report["violations"] = violations;
  return report;
}

json run_lipschitz(const json& config) {
  const json& ex = require(config, "experiment");
  int trials = require_int(ex, "trials");
  if (trials < 1) throw ConfigError("experiment.trials must be >= 1");
  std::vector<double> r_grid = ex.value("r_grid", std::vector<double>{0.1, 1.0, 10.0});
  if (r_grid.empty()) throw ConfigError("experiment.r_grid must be non-empty");
  for (double r : r_grid) {
    if (!(r > 0)) throw ConfigError("experiment.r_grid entries must be > 0");
  }
  int max_atoms = ex.value("max_atoms", 12);
  if (max_atoms < 1) throw ConfigError("experiment.max_atoms must be >= 1");
  int D = config.value("D", 3);
  std::uint64_t base_seed = config.value("base_seed", 0ULL);

  std::vector<int> violated(trials, 0);
  std::vector<double> ratios(trials, -1.0);  // -1 marks a skipped 0/0 case
  parallel_trials(trials, [&](int t) {
    std::mt19937_64 engine = make_engine(base_seed, static_cast<std::uint64_t>(t));
    double r = r_grid[t % r_grid.size()];
    std::uniform_int_distribution<int> count(1, max_atoms);
    std::uniform_real_distribution<double> weight(0.1, 1.0);
    auto draw = [&](int n) {
      Eigen::MatrixXd atoms(D, n);
      Eigen::VectorXd weights(n);
      for (int j = 0; j < n; ++j) {
        atoms.col(j) = r * uniform_ball_point(D, engine);
        weights[j] = weight(engine);
      }
      return DiscreteMeasure(atoms, weights);
    };
    DiscreteMeasure mu = draw(count(engine));
    DiscreteMeasure nu = draw(count(engine));
    auto [lhs, rhs] = covariance_lipschitz_witness(mu, nu, r);
    if (lhs > rhs + 1e-9) violated[t] = 1;
    if (rhs > 0) ratios[t] = lhs / rhs;
  });

  int violations = 0, skipped = 0;
  double max_ratio = 0.0;
  for (int t = 0; t < trials; ++t) {
    violations += violated[t];
    if (ratios[t] < 0) {
      ++skipped;
    } else {
      max_ratio = std::max(max_ratio, ratios[t]);
    }
  }
  json report = report_envelope(config, "lipschitz");
  report["trials"] = trials;
  report["frequency"] = 1.0 - static_cast<double>(violations) / trials;
  report["max_ratio"] = max_ratio;
  report["skipped"] = skipped;
  report["violations"] = violations;
  return report;
}

json run_flattening(const json& config) {
  const json& ex = require(config, "experiment");
  int trials = require_int(ex, "trials");
  if (trials < 1) throw ConfigError("experiment.trials must be >= 1");
  int n_loc = ex.value("n_loc", 500);
  if (n_loc < 2) throw ConfigError("experiment.n_loc must be >= 2");
  auto model = model_from_json(require(config, "model"));
  DensityModel density = density_from_json(config.value("density", json{{"kind", "uniform"}}));
  NoiseModel noise = noise_from_json(config.value("noise", json{{"kind", "none"}}));
  double r = require_number(require(config, "estimator"), "r");
  if (!(r > 0)) throw ConfigError("estimator.r must be > 0");
  std::uint64_t base_seed = config.value("base_seed", 0ULL);

  const double tau = model->reach();
  const double s = noise.s;
  const int d = model->intrinsic_dim();
  double upper = (std::sqrt(2.0) - 1.0) * tau - 2.0 * s;
  if (!(2.0 * s <= r && r <= upper)) {
    throw ConfigError("flattening regime violated: need 2s <= r <= (sqrt(2)-1) tau - 2s");
  }

  DensityInfo info = model->density_info(density);
  double q = 3.0 + (8.0 * d * info.phi_max + 5.0 * info.alpha * tau) / info.phi_min;
  double curvature_term = std::isinf(tau) ? 0.0 : q * r * r / tau;

  std::vector<json> records(trials);
  std::vector<int> successes(trials, 0);
  int violations = 0;
  for (int t = 0; t < trials; ++t) {
    std::uint64_t seed_t = mix_seed(base_seed, static_cast<std::uint64_t>(t));

    // Center of the local window: one draw of mu.
    PointCloud center = sample(*model, density, noise, 1, mix_seed(seed_t, 0));
    Eigen::VectorXd x = center.points.col(0);
    Eigen::VectorXd foot = center.foot.col(0);
    Subspace tangent = model->tangent_at(foot);

    // nu-hat: mu conditioned on the window, by rejection.
    Eigen::MatrixXd local(model->ambient_dim(), n_loc);
    int found = 0;
    const long cap = 4000L * n_loc;
    for (long j = 1; j <= cap && found < n_loc; ++j) {
      std::mt19937_64 engine = make_engine(seed_t, static_cast<std::uint64_t>(j));
      Eigen::VectorXd p = model->sample_point(density, engine);
      // Noise applied exactly as in sample(); rejection keys on the noisy point.
      if (noise.kind != NoiseModel::Kind::None) {
        PointCloud one = sample(*model, density, noise, 1, mix_seed(seed_t, j));
        p = one.points.col(0);
      }
      if ((p - x).norm() < r) local.col(found++) = p;
    }
    if (found < n_loc) throw std::runtime_error("flattening: rejection sampling cap reached");
    DiscreteMeasure nu_hat = DiscreteMeasure::empirical(local);

    // Three independent discretizations of the flat tangential disk law.
    auto disk_draw = [&](std::uint64_t stream) {
      Eigen::MatrixXd atoms(model->ambient_dim(), n_loc);
      std::mt19937_64 engine = make_engine(mix_seed(seed_t, stream), 0);
      for (int j = 0; j < n_loc; ++j) {
        atoms.col(j) = foot + r * (tangent.basis() * uniform_ball_point(d, engine));
      }
      return DiscreteMeasure::empirical(atoms);
    };
    DiscreteMeasure flat1 = disk_draw(1000001);
    DiscreteMeasure flat2 = disk_draw(1000002);
    DiscreteMeasure flat3 = disk_draw(1000003);

    double w1 = wasserstein(nu_hat, flat1, 1.0).distance;
    double eps_mc = wasserstein(flat2, flat3, 1.0).distance;
    double bound = curvature_term + eps_mc;
    bool ok = w1 <= bound;
    if (!ok) ++violations;
    successes[t] = ok ? 1 : 0;

    json rec;
    rec["trial"] = t;
    rec["seed"] = seed_t;
    rec["w1"] = w1;
    rec["eps_mc"] = eps_mc;
    rec["bound"] = bound;
    rec["success"] = ok;
    records[t] = std::move(rec);
  }

  int won = 0;
  for (int v : successes) won += v;
  json report = report_envelope(config, "flattening");
  report["trials"] = trials;
  report["records"] = records;
  report["frequency"] = static_cast<double>(won) / trials;
  json bounds;
  bounds["q"] = q;
  bounds["curvature_term"] = curvature_term;
  report["bounds"] = bounds;
  report["violations"] = violations;
  return report;
}

}  // namespace

std::unique_ptr<ManifoldModel> model_from_json(const json& spec) {
  if (!spec.is_object()) throw ConfigError("model spec must be an object");
  std::string kind = require(spec, "kind").get<std::string>();
  if (kind == "sphere") {
    return sphere_model(require_int(spec, "d"), require_int(spec, "D"),
                        spec.value("R", 1.0));
  }
  if (kind == "clifford_torus") {
    return clifford_torus_model(require_number(spec, "r1"), require_number(spec, "r2"));
  }
  if (kind == "torus3d") {
    return torus3d_model(require_number(spec, "R"), require_number(spec, "r"));
  }
  if (kind == "disk") {
    return disk_model(require_int(spec, "d"), require_int(spec, "D"), spec.value("R", 1.0));
  }
  throw ConfigError("unknown model kind: " + kind);
}

DensityModel density_from_json(const json& spec) {
  if (!spec.is_object()) throw ConfigError("density spec must be an object");
  std::string kind = require(spec, "kind").get<std::string>();
  if (kind == "uniform") return DensityModel::uniform();
  if (kind == "sinusoidal") {
    double a = require_number(spec, "a");
    if (!(std::abs(a) < 1)) throw ConfigError("density.a must satisfy |a| < 1");
    return DensityModel::sinusoidal(a);
  }
  throw ConfigError("unknown density kind: " + kind);
}

NoiseModel noise_from_json(const json& spec) {
  if (!spec.is_object()) throw ConfigError("noise spec must be an object");
  std::string kind = require(spec, "kind").get<std::string>();
  if (kind == "none") return NoiseModel::none();
  double s = require_number(spec, "s");
  if (!(s >= 0)) throw ConfigError("noise.s must be >= 0");
  if (kind == "iid_ball") return NoiseModel::iid_ball(s);
  if (kind == "dependent") return NoiseModel::dependent(s);
  throw ConfigError("unknown noise kind: " + kind);
}

BoundInputs bound_inputs_from_config(const json& config) {
  const json& b = require(config, "bounds");
  BoundInputs in;
  if (config.contains("model")) {
    auto model = model_from_json(config["model"]);
    DensityModel density = density_from_json(config.value("density", json{{"kind", "uniform"}}));
    in.tau = model->reach();
    in.d = model->intrinsic_dim();
    in.D = model->ambient_dim();
    DensityInfo info = model->density_info(density);
    in.phi_min = info.phi_min;
    in.phi_max = info.phi_max;
    in.alpha = info.alpha;
  }
  if (b.contains("tau")) in.tau = require_number(b, "tau");
  if (b.contains("d")) in.d = require_int(b, "d");
  if (b.contains("D")) in.D = require_int(b, "D");
  if (b.contains("phi_min")) in.phi_min = require_number(b, "phi_min");
  if (b.contains("phi_max")) in.phi_max = require_number(b, "phi_max");
  if (b.contains("alpha")) in.alpha = require_number(b, "alpha");
  if (b.contains("s")) in.s = require_number(b, "s");
  if (b.contains("r")) in.r = require_number(b, "r");
  if (b.contains("m")) in.m = require_number(b, "m");
  if (b.contains("rho_fraction")) in.rho_fraction = require_number(b, "rho_fraction");
  if (b.contains("delta")) in.delta = require_number(b, "delta");
  if (b.contains("theta")) in.theta = require_number(b, "theta");
  if (b.contains("eta")) in.eta = require_number(b, "eta");
  if (b.contains("eps")) in.eps = require_number(b, "eps");
  try {
    in.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return in;
}

json bounds_report(const json& config) {
  BoundInputs in = bound_inputs_from_config(config);
  json report = report_envelope(config, "bounds-report");
  json inputs;
  inputs["tau"] = in.tau;
  inputs["d"] = in.d;
  inputs["D"] = in.D;
  inputs["phi_min"] = in.phi_min;
  inputs["phi_max"] = in.phi_max;
  inputs["alpha"] = in.alpha;
  inputs["s"] = in.s;
  inputs["r"] = in.r;
  inputs["m"] = in.m;
  inputs["rho_fraction"] = in.rho_fraction;
  inputs["delta"] = in.delta;
  if (in.theta) inputs["theta"] = *in.theta;
  if (in.eta) inputs["eta"] = *in.eta;
  if (in.eps) inputs["eps"] = *in.eps;
  report["inputs"] = inputs;

  json out;
  out["q"] = q_surrogate(in);
  out["unit_ball_volume_d"] = unit_ball_volume(in.d);
  try {
    if (in.theta) {
      out["mode"] = "tangent";
      out["S1"] = thmA_S1(in);
      out["S2"] = thmA_S2(in);
      report["bounds"] = regime_flags(in, thmA_S1(in), thmA_S2(in));
    } else if (in.eta) {
      out["mode"] = "dimension";
      out["S1"] = thmB_S1(in);
      out["S2"] = thmB_S2(in);
      out["tail_threshold_radius"] = tail_threshold_radius(in.d, in.D, *in.eta);
      report["bounds"] = regime_flags(in, thmB_S1(in), thmB_S2(in));
    } else {
      out["mode"] = "projector";
      const json& b = require(config, "bounds");
      double u0;
      if (b.contains("u0")) {
        u0 = require_number(b, "u0");
      } else if (config.contains("model")) {
        auto model = model_from_json(config["model"]);
        DensityModel density =
            density_from_json(config.value("density", json{{"kind", "uniform"}}));
        NoiseModel noise = noise_from_json(config.value("noise", json{{"kind", "none"}}));
        U0Estimate est = estimate_u0(*model, density, noise, in.r, b.value("u0_n_mc", 200),
                                     config.value("base_seed", 0ULL));
        u0 = est.value;
        out["u0_note"] = est.note;
      } else {
        throw ConfigError("projector mode needs bounds.u0 or a model block");
      }
      out["u0"] = u0;
      BoundReport main = thm_main_conditions(in, u0);
      json flags;
      flags["q"] = main.q;
      flags["required_ratio"] = main.required_ratio;
      flags["provided_ratio"] = main.provided_ratio;
      flags["radius_ok"] = main.radius_ok;
      flags["sample_ok"] = main.sample_ok;
      flags["certified_regime"] = main.radius_ok && main.sample_ok;
      flags["m_min"] = main.m_min;
      flags["notes"] = main.notes;
      report["bounds"] = flags;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  report["outputs"] = out;
  report["violations"] = 0;
  return report;
}

json run_experiment(const json& config) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  const json& ex = require(config, "experiment");
  std::string kind = require(ex, "kind").get<std::string>();
  try {
    if (kind == "tangent") return run_tangent_or_dimension(config, true);
    if (kind == "dimension") return run_tangent_or_dimension(config, false);
    if (kind == "concentration") return run_concentration(config);
    if (kind == "lipschitz") return run_lipschitz(config);
    if (kind == "flattening") return run_flattening(config);
    if (kind == "bounds-report") return bounds_report(config);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown experiment kind: " + kind);
}

bool report_has_violations(const json& report) {
  return report.value("violations", 0) > 0;
}

std::string dump_report(const json& report) {
  return report.dump(2) + "\n";
}

}  // namespace mlens
