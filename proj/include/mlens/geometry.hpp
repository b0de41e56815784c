#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mlens/linalg.hpp"

namespace mlens {

struct DensityModel {
  enum class Kind { Uniform, Sinusoidal };
  Kind kind = Kind::Uniform;
  double a = 0.0;  // sinusoidal amplitude, |a| < 1

  static DensityModel uniform() { return {Kind::Uniform, 0.0}; }
  static DensityModel sinusoidal(double a) { return {Kind::Sinusoidal, a}; }
};

struct NoiseModel {
  enum class Kind { None, IidBall, Dependent };
  Kind kind = Kind::None;
  double s = 0.0;  // noise radius, ambient units

  static NoiseModel none() { return {Kind::None, 0.0}; }
  static NoiseModel iid_ball(double s) { return {Kind::IidBall, s}; }
  static NoiseModel dependent(double s) { return {Kind::Dependent, s}; }
};

/// Density extrema and geodesic Lipschitz constant for a density on a model.
struct DensityInfo {
  double phi_min;
  double phi_max;
  double alpha;
};

/// Synthetic manifold with analytic oracles. All concrete models expose the
/// true tangent space, foot-point projection, and (when available) geodesic
/// distance and exponential map.
class ManifoldModel {
 public:
  virtual ~ManifoldModel() = default;

  virtual std::string name() const = 0;
  virtual int intrinsic_dim() const = 0;
  virtual int ambient_dim() const = 0;
  virtual double reach() const = 0;

  virtual bool has_geodesic() const = 0;
  virtual bool has_exp() const = 0;
  virtual bool has_analytic_phi() const = 0;

  /// One clean draw from mu_0 with the given density.
  virtual Eigen::VectorXd sample_point(const DensityModel& density,
                                       std::mt19937_64& engine) const = 0;

  virtual Subspace tangent_at(const Eigen::VectorXd& foot) const = 0;

  /// A unit normal direction at a surface point (used by dependent noise).
  virtual Eigen::VectorXd normal_at(const Eigen::VectorXd& foot) const = 0;

  virtual Eigen::VectorXd foot_point(const Eigen::VectorXd& ambient) const = 0;

  /// First angular coordinate; keys the sinusoidal density and the dependent
  /// noise schedule.
  virtual double first_angle(const Eigen::VectorXd& foot) const = 0;

  virtual double geodesic_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  virtual Eigen::VectorXd exp_map(const Eigen::VectorXd& foot,
                                  const Eigen::VectorXd& tangent_vec) const;

  /// Extrema / Lipschitz data of the density on this model.
  virtual DensityInfo density_info(const DensityModel& density) const = 0;

  /// Whether the density kind is supported on this model.
  virtual bool supports_density(const DensityModel& density) const = 0;
};

std::unique_ptr<ManifoldModel> sphere_model(int d, int D, double R);
std::unique_ptr<ManifoldModel> clifford_torus_model(double r1, double r2);
std::unique_ptr<ManifoldModel> torus3d_model(double R, double r);
std::unique_ptr<ManifoldModel> disk_model(int d, int D, double R);

/// Sampled dataset with ground truth.
struct PointCloud {
  Eigen::MatrixXd points;   // D x m, noisy samples X + Y
  Eigen::MatrixXd clean;    // D x m, clean samples X
  Eigen::MatrixXd foot;     // D x m, foot points of the noisy samples
  std::vector<Subspace> tangents;  // true tangent spaces at the foot points
  std::uint64_t seed = 0;
  std::string model_name;
  int intrinsic_dim = 0;
  double noise_radius = 0.0;

  int size() const { return static_cast<int>(points.cols()); }
  int ambient_dim() const { return static_cast<int>(points.rows()); }
};

/// Draw m points of mu = Law(X + Y); deterministic for a fixed seed, with a
/// per-point RNG stream so results are independent of evaluation order.
PointCloud sample(const ManifoldModel& model, const DensityModel& density,
                  const NoiseModel& noise, int m, std::uint64_t seed);

struct PhiEstimate {
  double value;
  double std_error;
};

/// Monte Carlo estimate of mu_0(geodesic ball of radius rho) / (omega_d rho^d).
PhiEstimate estimate_phi(const ManifoldModel& model, const DensityModel& density,
                         const Eigen::VectorXd& x_foot, double rho, int n_mc,
                         std::uint64_t seed);

struct GeodesicChordWitness {
  double geodesic;  // r~
  double chord;     // r
  double bound;     // r + r^2 / tau
};

GeodesicChordWitness geodesic_chord_witness(const ManifoldModel& model,
                                            const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& y);

/// CSV + JSON-sidecar serialization of a sampled cloud.
void write_cloud_csv(const PointCloud& cloud, const std::string& path);
void write_cloud_sidecar(const PointCloud& cloud, const std::string& model_json,
                         const std::string& path);
PointCloud read_cloud_csv(const std::string& path);

}  // namespace mlens
