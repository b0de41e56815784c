#include "mlens/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mlens/bounds.hpp"
#include "mlens/rng.hpp"

namespace mlens {

namespace {

constexpr double kPi = std::numbers::pi;

// Surface area of the unit d-sphere S^d in R^{d+1}.
double unit_sphere_area(int d) { return (d + 1) * unit_ball_volume(d + 1); }

// int_0^pi sin^d(t) dt = sqrt(pi) Gamma((d+1)/2) / Gamma(d/2 + 1).
double sin_power_integral(int d) {
  return std::sqrt(kPi) * std::tgamma((d + 1) / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

double wrap_angle(double t) {
  t = std::fmod(t, 2 * kPi);
  if (t < 0) t += 2 * kPi;
  return t;
}

double wrapped_diff(double a, double b) {
  double d = std::fmod(a - b, 2 * kPi);
  if (d > kPi) d -= 2 * kPi;
  if (d < -kPi) d += 2 * kPi;
  return d;
}

// Inverse CDF of theta ~ (1 + a sin(theta)) / (2 pi) on [0, 2 pi), by
// bisection; the CDF is strictly increasing for |a| < 1.
double sample_sinusoidal_angle(double a, double u) {
  auto cdf = [a](double t) { return (t + a * (1.0 - std::cos(t))) / (2 * kPi); };
  double lo = 0.0, hi = 2 * kPi;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void require_sinusoidal_amplitude(const DensityModel& density) {
  if (density.kind == DensityModel::Kind::Sinusoidal &&
      !(density.a >= 0.0 && density.a < 1.0)) {
    throw std::invalid_argument("sinusoidal density: need 0 <= a < 1");
  }
}

// Orthonormal basis of the complement of unit vector u inside the first
// n coordinates of R^D, embedded with zeros elsewhere.
Eigen::MatrixXd complement_in_subspace(const Eigen::VectorXd& u, int n, int D) {
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(u.head(n)).householderQ();
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(D, n - 1);
  basis.topRows(n) = q.rightCols(n - 1);
  return basis;
}

class SphereModel final : public ManifoldModel {
 public:
  SphereModel(int d, int D, double R) : d_(d), D_(D), R_(R) {
    if (!(1 <= d && d < D)) throw std::invalid_argument("sphere_model: need 1 <= d < D");
    if (!(R > 0)) throw std::invalid_argument("sphere_model: need R > 0");
    if (d + 1 > D) throw std::invalid_argument("sphere_model: need D >= d + 1");
  }

  std::string name() const override { return "sphere"; }
  int intrinsic_dim() const override { return d_; }
  int ambient_dim() const override { return D_; }
  double reach() const override { return R_; }
  bool has_geodesic() const override { return true; }
  bool has_exp() const override { return true; }
  bool has_analytic_phi() const override { return true; }

  bool supports_density(const DensityModel&) const override { return true; }

  Eigen::VectorXd sample_point(const DensityModel& density,
                               std::mt19937_64& engine) const override {
    require_sinusoidal_amplitude(density);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(D_);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (d_ == 1) {
      double theta;
      if (density.kind == DensityModel::Kind::Sinusoidal) {
        theta = sample_sinusoidal_angle(density.a, unif(engine));
      } else {
        theta = 2 * kPi * unif(engine);
      }
      x[0] = R_ * std::cos(theta);
      x[1] = R_ * std::sin(theta);
      return x;
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (;;) {
      Eigen::VectorXd g(d_ + 1);
      for (int i = 0; i <= d_; ++i) g[i] = gauss(engine);
      double norm = g.norm();
      if (norm < 1e-12) continue;
      g *= R_ / norm;
      if (density.kind == DensityModel::Kind::Sinusoidal) {
        // Polar angle from the first axis keys the density.
        double sin_polar = g.tail(d_).norm() / R_;
        double accept = (1.0 + density.a * sin_polar) / (1.0 + density.a);
        if (unif(engine) >= accept) continue;
      }
      x.head(d_ + 1) = g;
      return x;
    }
  }

  Subspace tangent_at(const Eigen::VectorXd& foot) const override {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(D_);
    u.head(d_ + 1) = foot.head(d_ + 1).normalized();
    return Subspace(D_, complement_in_subspace(u, d_ + 1, D_));
  }

  Eigen::VectorXd normal_at(const Eigen::VectorXd& foot) const override {
    Eigen::VectorXd n = Eigen::VectorXd::Zero(D_);
    n.head(d_ + 1) = foot.head(d_ + 1).normalized();
    return n;
  }

  Eigen::VectorXd foot_point(const Eigen::VectorXd& ambient) const override {
    Eigen::VectorXd p = ambient.head(d_ + 1);
    double norm = p.norm();
    if (norm < 1e-300) throw std::invalid_argument("sphere foot point: center is singular");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(D_);
    out.head(d_ + 1) = p * (R_ / norm);
    return out;
  }

  double first_angle(const Eigen::VectorXd& foot) const override {
    return wrap_angle(std::atan2(foot[1], foot[0]));
  }

  double geodesic_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    double c = x.head(d_ + 1).dot(y.head(d_ + 1)) / (R_ * R_);
    return R_ * std::acos(std::clamp(c, -1.0, 1.0));
  }

  Eigen::VectorXd exp_map(const Eigen::VectorXd& foot,
                          const Eigen::VectorXd& tangent_vec) const override {
    double t = tangent_vec.norm();
    if (t == 0.0) return foot;
    return std::cos(t / R_) * foot + std::sin(t / R_) * (R_ / t) * tangent_vec;
  }

  DensityInfo density_info(const DensityModel& density) const override {
    require_sinusoidal_amplitude(density);
    const double area = unit_sphere_area(d_) * std::pow(R_, d_);
    if (density.kind == DensityModel::Kind::Uniform) {
      return {1.0 / area, 1.0 / area, 0.0};
    }
    const double a = density.a;
    if (d_ == 1) {
      return {(1.0 - a) / (2 * kPi * R_), (1.0 + a) / (2 * kPi * R_),
              a / (2 * kPi * R_ * R_)};
    }
    // phi = (1 + a sin(polar)) / N with N the analytic normalizer.
    double norm = std::pow(R_, d_) *
                  (unit_sphere_area(d_) + a * unit_sphere_area(d_ - 1) * sin_power_integral(d_));
    return {1.0 / norm, (1.0 + a) / norm, a / (norm * R_)};
  }

 private:
  int d_, D_;
  double R_;
};

class CliffordTorusModel final : public ManifoldModel {
 public:
  CliffordTorusModel(double r1, double r2) : r1_(r1), r2_(r2) {
    if (!(r1 > 0 && r2 > 0)) throw std::invalid_argument("clifford_torus_model: radii > 0");
  }

  std::string name() const override { return "clifford_torus"; }
  int intrinsic_dim() const override { return 2; }
  int ambient_dim() const override { return 4; }
  double reach() const override { return std::min(r1_, r2_); }
  bool has_geodesic() const override { return true; }
  bool has_exp() const override { return true; }
  bool has_analytic_phi() const override { return true; }

  bool supports_density(const DensityModel&) const override { return true; }

  Eigen::VectorXd embed(double t1, double t2) const {
    Eigen::VectorXd x(4);
    x << r1_ * std::cos(t1), r1_ * std::sin(t1), r2_ * std::cos(t2), r2_ * std::sin(t2);
    return x;
  }

  Eigen::VectorXd sample_point(const DensityModel& density,
                               std::mt19937_64& engine) const override {
    require_sinusoidal_amplitude(density);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double t1;
    if (density.kind == DensityModel::Kind::Sinusoidal) {
      t1 = sample_sinusoidal_angle(density.a, unif(engine));
    } else {
      t1 = 2 * kPi * unif(engine);
    }
    double t2 = 2 * kPi * unif(engine);
    return embed(t1, t2);
  }

  Subspace tangent_at(const Eigen::VectorXd& foot) const override {
    double t1 = std::atan2(foot[1], foot[0]);
    double t2 = std::atan2(foot[3], foot[2]);
    Eigen::MatrixXd basis(4, 2);
    basis << -std::sin(t1), 0, std::cos(t1), 0, 0, -std::sin(t2), 0, std::cos(t2);
    return Subspace(4, basis);
  }

  Eigen::VectorXd normal_at(const Eigen::VectorXd& foot) const override {
    Eigen::VectorXd n = Eigen::VectorXd::Zero(4);
    n.head(2) = foot.head(2).normalized();
    return n;
  }

  Eigen::VectorXd foot_point(const Eigen::VectorXd& ambient) const override {
    double n1 = ambient.head(2).norm();
    double n2 = ambient.tail(2).norm();
    if (n1 < 1e-300 || n2 < 1e-300) {
      throw std::invalid_argument("clifford torus foot point: axis is singular");
    }
    Eigen::VectorXd out(4);
    out.head(2) = ambient.head(2) * (r1_ / n1);
    out.tail(2) = ambient.tail(2) * (r2_ / n2);
    return out;
  }

  double first_angle(const Eigen::VectorXd& foot) const override {
    return wrap_angle(std::atan2(foot[1], foot[0]));
  }

  double geodesic_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    double d1 = wrapped_diff(std::atan2(x[1], x[0]), std::atan2(y[1], y[0]));
    double d2 = wrapped_diff(std::atan2(x[3], x[2]), std::atan2(y[3], y[2]));
    return std::hypot(r1_ * d1, r2_ * d2);
  }

  Eigen::VectorXd exp_map(const Eigen::VectorXd& foot,
                          const Eigen::VectorXd& tangent_vec) const override {
    double t1 = std::atan2(foot[1], foot[0]);
    double t2 = std::atan2(foot[3], foot[2]);
    Subspace tan = tangent_at(foot);
    double dt1 = tangent_vec.dot(tan.basis().col(0)) / r1_;
    double dt2 = tangent_vec.dot(tan.basis().col(1)) / r2_;
    return embed(t1 + dt1, t2 + dt2);
  }

  DensityInfo density_info(const DensityModel& density) const override {
    require_sinusoidal_amplitude(density);
    const double area = 4 * kPi * kPi * r1_ * r2_;
    if (density.kind == DensityModel::Kind::Uniform) {
      return {1.0 / area, 1.0 / area, 0.0};
    }
    const double a = density.a;
    return {(1.0 - a) / area, (1.0 + a) / area, a / (area * r1_)};
  }

 private:
  double r1_, r2_;
};

class Torus3dModel final : public ManifoldModel {
 public:
  Torus3dModel(double R, double r) : R_(R), r_(r) {
    if (!(r > 0 && R > 2 * r)) {
      throw std::invalid_argument("reach formula out of validated range: need R > 2r > 0");
    }
  }

  std::string name() const override { return "torus3d"; }
  int intrinsic_dim() const override { return 2; }
  int ambient_dim() const override { return 3; }
  double reach() const override { return r_; }
  bool has_geodesic() const override { return false; }
  bool has_exp() const override { return false; }
  bool has_analytic_phi() const override { return true; }

  bool supports_density(const DensityModel& density) const override {
    // Non-uniform density needs geodesic distance for its Lipschitz data.
    return density.kind == DensityModel::Kind::Uniform;
  }

  Eigen::VectorXd embed(double u, double v) const {
    Eigen::VectorXd x(3);
    double ring = R_ + r_ * std::cos(v);
    x << ring * std::cos(u), ring * std::sin(u), r_ * std::sin(v);
    return x;
  }

  Eigen::VectorXd sample_point(const DensityModel& density,
                               std::mt19937_64& engine) const override {
    if (!supports_density(density)) {
      throw std::invalid_argument("torus3d supports only the uniform density");
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = 2 * kPi * unif(engine);
    // Tube angle v has area element proportional to R + r cos v.
    double v;
    for (;;) {
      v = 2 * kPi * unif(engine);
      double accept = (R_ + r_ * std::cos(v)) / (R_ + r_);
      if (unif(engine) < accept) break;
    }
    return embed(u, v);
  }

  Subspace tangent_at(const Eigen::VectorXd& foot) const override {
    auto [u, v] = params(foot);
    Eigen::MatrixXd basis(3, 2);
    basis.col(0) << -std::sin(u), std::cos(u), 0.0;
    basis.col(1) << -std::cos(u) * std::sin(v), -std::sin(u) * std::sin(v), std::cos(v);
    return Subspace(3, basis);
  }

  Eigen::VectorXd normal_at(const Eigen::VectorXd& foot) const override {
    auto [u, v] = params(foot);
    Eigen::VectorXd n(3);
    n << std::cos(u) * std::cos(v), std::sin(u) * std::cos(v), std::sin(v);
    return n;
  }

  Eigen::VectorXd foot_point(const Eigen::VectorXd& ambient) const override {
    double u = std::atan2(ambient[1], ambient[0]);
    Eigen::VectorXd center(3);
    center << R_ * std::cos(u), R_ * std::sin(u), 0.0;
    Eigen::VectorXd radial = ambient - center;
    double norm = radial.norm();
    if (norm < 1e-300) throw std::invalid_argument("torus3d foot point: tube center singular");
    return center + radial * (r_ / norm);
  }

  double first_angle(const Eigen::VectorXd& foot) const override {
    return wrap_angle(std::atan2(foot[1], foot[0]));
  }

  DensityInfo density_info(const DensityModel& density) const override {
    if (!supports_density(density)) {
      throw std::invalid_argument("torus3d supports only the uniform density");
    }
    double area = 4 * kPi * kPi * R_ * r_;
    return {1.0 / area, 1.0 / area, 0.0};
  }

 private:
  std::pair<double, double> params(const Eigen::VectorXd& foot) const {
    double u = std::atan2(foot[1], foot[0]);
    double ring = foot.head(2).norm();
    double v = std::atan2(foot[2], ring - R_);
    return {u, v};
  }

  double R_, r_;
};

class DiskModel final : public ManifoldModel {
 public:
  DiskModel(int d, int D, double R) : d_(d), D_(D), R_(R) {
    if (!(1 <= d && d < D)) throw std::invalid_argument("disk_model: need 1 <= d < D");
    if (!(R > 0)) throw std::invalid_argument("disk_model: need R > 0");
  }

  std::string name() const override { return "disk"; }
  int intrinsic_dim() const override { return d_; }
  int ambient_dim() const override { return D_; }
  double reach() const override { return std::numeric_limits<double>::infinity(); }
  bool has_geodesic() const override { return true; }
  bool has_exp() const override { return true; }
  bool has_analytic_phi() const override { return true; }

  bool supports_density(const DensityModel& density) const override {
    return density.kind == DensityModel::Kind::Uniform;
  }

  Eigen::VectorXd sample_point(const DensityModel& density,
                               std::mt19937_64& engine) const override {
    if (!supports_density(density)) {
      throw std::invalid_argument("disk supports only the uniform density");
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd dir(d_);
    double norm;
    do {
      for (int i = 0; i < d_; ++i) dir[i] = gauss(engine);
      norm = dir.norm();
    } while (norm < 1e-12);
    double radius = R_ * std::pow(unif(engine), 1.0 / d_);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(D_);
    x.head(d_) = dir * (radius / norm);
    return x;
  }

  Subspace tangent_at(const Eigen::VectorXd&) const override {
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(D_, d_);
    basis.topLeftCorner(d_, d_).setIdentity();
    return Subspace(D_, basis);
  }

  Eigen::VectorXd normal_at(const Eigen::VectorXd&) const override {
    Eigen::VectorXd n = Eigen::VectorXd::Zero(D_);
    n[d_] = 1.0;
    return n;
  }

  Eigen::VectorXd foot_point(const Eigen::VectorXd& ambient) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(D_);
    out.head(d_) = ambient.head(d_);
    double norm = out.head(d_).norm();
    if (norm > R_) out.head(d_) *= R_ / norm;
    return out;
  }

  double first_angle(const Eigen::VectorXd& foot) const override {
    if (d_ >= 2) return wrap_angle(std::atan2(foot[1], foot[0]));
    return foot[0] / R_;
  }

  double geodesic_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    return (x - y).norm();
  }

  Eigen::VectorXd exp_map(const Eigen::VectorXd& foot,
                          const Eigen::VectorXd& tangent_vec) const override {
    return foot + tangent_vec;
  }

  DensityInfo density_info(const DensityModel& density) const override {
    if (!supports_density(density)) {
      throw std::invalid_argument("disk supports only the uniform density");
    }
    double phi = 1.0 / (unit_ball_volume(d_) * std::pow(R_, d_));
    return {phi, phi, 0.0};
  }

 private:
  int d_, D_;
  double R_;
};

}  // namespace

double ManifoldModel::geodesic_distance(const Eigen::VectorXd&, const Eigen::VectorXd&) const {
  throw std::logic_error("model has no geodesic distance");
}

Eigen::VectorXd ManifoldModel::exp_map(const Eigen::VectorXd&, const Eigen::VectorXd&) const {
  throw std::logic_error("model has no exponential map");
}

std::unique_ptr<ManifoldModel> sphere_model(int d, int D, double R) {
  return std::make_unique<SphereModel>(d, D, R);
}
std::unique_ptr<ManifoldModel> clifford_torus_model(double r1, double r2) {
  return std::make_unique<CliffordTorusModel>(r1, r2);
}
std::unique_ptr<ManifoldModel> torus3d_model(double R, double r) {
  return std::make_unique<Torus3dModel>(R, r);
}
std::unique_ptr<ManifoldModel> disk_model(int d, int D, double R) {
  return std::make_unique<DiskModel>(d, D, R);
}

PointCloud sample(const ManifoldModel& model, const DensityModel& density,
                  const NoiseModel& noise, int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("sample: need m >= 1");
  if (!model.supports_density(density)) {
    throw std::invalid_argument("density kind not supported by model");
  }
  if (noise.kind != NoiseModel::Kind::None && !(noise.s < model.reach())) {
    throw std::invalid_argument("noise exceeds reach");
  }
  const int D = model.ambient_dim();
  PointCloud cloud;
  cloud.points.resize(D, m);
  cloud.clean.resize(D, m);
  cloud.foot.resize(D, m);
  cloud.tangents.reserve(m);
  cloud.seed = seed;
  cloud.model_name = model.name();
  cloud.intrinsic_dim = model.intrinsic_dim();
  cloud.noise_radius = noise.s;

  for (int i = 0; i < m; ++i) {
    std::mt19937_64 engine = make_engine(seed, static_cast<std::uint64_t>(i));
    Eigen::VectorXd x = model.sample_point(density, engine);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(D);
    switch (noise.kind) {
      case NoiseModel::Kind::None:
        break;
      case NoiseModel::Kind::IidBall: {
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Eigen::VectorXd dir(D);
        double norm;
        do {
          for (int c = 0; c < D; ++c) dir[c] = gauss(engine);
          norm = dir.norm();
        } while (norm < 1e-12);
        y = dir * (noise.s * std::pow(unif(engine), 1.0 / D) / norm);
        break;
      }
      case NoiseModel::Kind::Dependent: {
        // Fixed schedule keyed on the first angular coordinate; no extra
        // randomness, so Y is a deterministic function of X.
        double psi = 4.0 * model.first_angle(x) + 1.0;
        Eigen::VectorXd n = model.normal_at(x);
        Eigen::VectorXd t1 = model.tangent_at(x).basis().col(0);
        y = noise.s * (std::cos(psi) * n + std::sin(psi) * t1);
        break;
      }
    }
    cloud.clean.col(i) = x;
    cloud.points.col(i) = x + y;
    cloud.foot.col(i) = model.foot_point(x + y);
    cloud.tangents.push_back(model.tangent_at(cloud.foot.col(i)));
    if (y.norm() > noise.s * (1 + 1e-12)) {
      throw std::logic_error("sample: noise bound violated");
    }
  }
  return cloud;
}

PhiEstimate estimate_phi(const ManifoldModel& model, const DensityModel& density,
                         const Eigen::VectorXd& x_foot, double rho, int n_mc,
                         std::uint64_t seed) {
  if (!model.has_geodesic()) throw std::invalid_argument("estimate_phi: model lacks geodesics");
  if (!(rho > 0)) throw std::invalid_argument("estimate_phi: need rho > 0");
  if (n_mc < 1) throw std::invalid_argument("estimate_phi: need n_mc >= 1");
  long hits = 0;
  for (int i = 0; i < n_mc; ++i) {
    std::mt19937_64 engine = make_engine(seed, static_cast<std::uint64_t>(i));
    Eigen::VectorXd x = model.sample_point(density, engine);
    if (model.geodesic_distance(x, x_foot) < rho) ++hits;
  }
  const double denom = unit_ball_volume(model.intrinsic_dim()) *
                       std::pow(rho, model.intrinsic_dim());
  double p = static_cast<double>(hits) / n_mc;
  return {p / denom, std::sqrt(p * (1.0 - p) / n_mc) / denom};
}

GeodesicChordWitness geodesic_chord_witness(const ManifoldModel& model,
                                            const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& y) {
  if (!model.has_geodesic()) {
    throw std::invalid_argument("geodesic_chord_witness: model lacks geodesics");
  }
  double chord = (x - y).norm();
  double tau = model.reach();
  if (chord > (std::sqrt(2.0) - 1.0) * tau) {
    throw std::invalid_argument("geodesic_chord_witness: chord too large");
  }
  double geo = model.geodesic_distance(x, y);
  return {geo, chord, chord + chord * chord / tau};
}

void write_cloud_csv(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_cloud_csv: cannot open " + path);
  out.precision(17);
  const int D = cloud.ambient_dim();
  const int d = cloud.intrinsic_dim;
  out << "idx";
  for (int c = 0; c < D; ++c) out << ",noisy_" << c;
  for (int c = 0; c < D; ++c) out << ",clean_" << c;
  for (int c = 0; c < D; ++c) out << ",foot_" << c;
  for (int k = 0; k < d; ++k)
    for (int c = 0; c < D; ++c) out << ",tan_" << k << "_" << c;
  out << "\n";
  for (int i = 0; i < cloud.size(); ++i) {
    out << i;
    for (int c = 0; c < D; ++c) out << "," << cloud.points(c, i);
    for (int c = 0; c < D; ++c) out << "," << cloud.clean(c, i);
    for (int c = 0; c < D; ++c) out << "," << cloud.foot(c, i);
    const Eigen::MatrixXd& basis = cloud.tangents[i].basis();
    for (int k = 0; k < d; ++k)
      for (int c = 0; c < D; ++c) out << "," << basis(c, k);
    out << "\n";
  }
}

void write_cloud_sidecar(const PointCloud& cloud, const std::string& model_json,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_cloud_sidecar: cannot open " + path);
  out << model_json;
}

PointCloud read_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_cloud_csv: cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("read_cloud_csv: empty file");
  int D = 0;
  {
    std::stringstream ss(header);
    std::string field;
    while (std::getline(ss, field, ',')) {
      if (field.rfind("noisy_", 0) == 0) ++D;
    }
  }
  if (D == 0) throw std::runtime_error("read_cloud_csv: no noisy_* columns");
  int total_fields = 1 + static_cast<int>(std::count(header.begin(), header.end(), ',')) ;
  int d = (total_fields - 1 - 3 * D) / D;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> row;
    while (std::getline(ss, field, ',')) row.push_back(std::stod(field));
    if (static_cast<int>(row.size()) != total_fields) {
      throw std::runtime_error("read_cloud_csv: ragged row");
    }
    rows.push_back(std::move(row));
  }
  const int m = static_cast<int>(rows.size());
  PointCloud cloud;
  cloud.intrinsic_dim = d;
  cloud.points.resize(D, m);
  cloud.clean.resize(D, m);
  cloud.foot.resize(D, m);
  for (int i = 0; i < m; ++i) {
    int at = 1;
    for (int c = 0; c < D; ++c) cloud.points(c, i) = rows[i][at++];
    for (int c = 0; c < D; ++c) cloud.clean(c, i) = rows[i][at++];
    for (int c = 0; c < D; ++c) cloud.foot(c, i) = rows[i][at++];
    Eigen::MatrixXd basis(D, d);
    for (int k = 0; k < d; ++k)
      for (int c = 0; c < D; ++c) basis(c, k) = rows[i][at++];
    cloud.tangents.emplace_back(D, basis);
  }
  return cloud;
}

}  // namespace mlens
