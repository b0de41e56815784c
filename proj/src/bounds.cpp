#include "mlens/bounds.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mlens/rng.hpp"

namespace mlens {

namespace {

// Gamma at integer or half-integer argument via the recurrence
// Gamma(1/2) = sqrt(pi), Gamma(1) = 1, Gamma(x+1) = x Gamma(x).
double gamma_half_integer(int twice_x) {
  if (twice_x <= 0) throw std::invalid_argument("gamma_half_integer: need x > 0");
  double value = (twice_x % 2 == 0) ? 1.0 : std::sqrt(std::numbers::pi);
  int twice_base = (twice_x % 2 == 0) ? 2 : 1;
  for (int t = twice_base; t < twice_x; t += 2) value *= t / 2.0;
  return value;
}

double density_ratio_term(const BoundInputs& in) {
  return in.phi_min / (3 * in.phi_min + 8 * in.d * in.phi_max + 5 * in.alpha * in.tau);
}

double log_term(const BoundInputs& in) {
  double arg = 14.0 * in.D * in.rho_fraction / in.delta;
  if (!(arg > 0)) throw std::invalid_argument("bounds: log argument must be positive");
  return std::log(arg);
}

}  // namespace

double unit_ball_volume(int d) {
  if (d < 0) throw std::invalid_argument("unit_ball_volume: need d >= 0");
  return std::pow(std::numbers::pi, d / 2.0) / gamma_half_integer(d + 2);
}

void BoundInputs::validate() const {
  if (!(tau > 0)) throw std::invalid_argument("bounds: need tau > 0");
  if (!(phi_min > 0)) throw std::invalid_argument("bounds: need phi_min > 0");
  if (!(phi_min <= phi_max)) throw std::invalid_argument("bounds: need phi_min <= phi_max");
  if (!(alpha >= 0)) throw std::invalid_argument("bounds: need alpha >= 0");
  if (!(0 < delta && delta < 1)) throw std::invalid_argument("bounds: need 0 < delta < 1");
  if (!(0 < rho_fraction && rho_fraction <= 1)) {
    throw std::invalid_argument("bounds: need 0 < rho_fraction <= 1");
  }
  if (!(1 <= d && d < D)) throw std::invalid_argument("bounds: need 1 <= d < D");
  if (!(s >= 0)) throw std::invalid_argument("bounds: need s >= 0");
  int modes = (theta ? 1 : 0) + (eta ? 1 : 0) + (eps ? 1 : 0);
  if (modes != 1) throw std::invalid_argument("bounds: exactly one of theta/eta/eps required");
}

double q_surrogate(const BoundInputs& in) {
  return 3.0 + (8.0 * in.d * in.phi_max + 5.0 * in.alpha * in.tau) / in.phi_min;
}

double thmA_S1(const BoundInputs& in) {
  in.validate();
  if (!in.theta) throw std::invalid_argument("thmA_S1: theta mode required");
  return in.tau * std::sin(*in.theta) / (16.0 * (in.d + 2)) * density_ratio_term(in);
}

double thmA_S2(const BoundInputs& in) {
  in.validate();
  if (!in.theta) throw std::invalid_argument("thmA_S2: theta mode required");
  double sin2 = std::sin(*in.theta) * std::sin(*in.theta);
  return 4642.0 * (in.d + 2) * (in.d + 2) /
         (unit_ball_volume(in.d) * in.phi_min * sin2) * log_term(in);
}

double thmB_S1(const BoundInputs& in) {
  in.validate();
  if (!in.eta) throw std::invalid_argument("thmB_S1: eta mode required");
  if (!(*in.eta < 1.0 / (2.0 * in.D))) throw std::invalid_argument("eta out of range");
  return in.tau / (48.0 * (in.d + 2) * in.D * (1.0 + 1.0 / *in.eta)) * density_ratio_term(in);
}

double thmB_S2(const BoundInputs& in) {
  in.validate();
  if (!in.eta) throw std::invalid_argument("thmB_S2: eta mode required");
  if (!(*in.eta < 1.0 / (2.0 * in.D))) throw std::invalid_argument("eta out of range");
  double factor = (in.d + 2.0) * (in.d + 2.0) * in.D * in.D;
  double inv = 1.0 + 1.0 / *in.eta;
  return 41778.0 * factor * inv * inv / (unit_ball_volume(in.d) * in.phi_min) * log_term(in);
}

BoundReport thm_main_conditions(const BoundInputs& in, double u0) {
  in.validate();
  if (!in.eps) throw std::invalid_argument("thm_main_conditions: eps mode required");
  double eps = *in.eps;
  if (!(0 < eps && eps < 2)) throw std::invalid_argument("thm_main_conditions: need eps in (0,2)");
  if (!(0 < u0 && u0 <= 1)) throw std::invalid_argument("thm_main_conditions: need u0 in (0,1]");
  BoundReport report;
  report.q = q_surrogate(in);
  double rho = in.r / in.tau;
  double lower = std::sqrt(2.0 * in.s / in.tau);
  double upper = eps / (16.0 * (in.d + 2) * report.q);
  report.radius_ok = (lower < rho) && (rho < upper);
  report.required_ratio =
      4642.0 * (in.d + 2) * (in.d + 2) / (u0 * eps * eps) * log_term(in);
  report.provided_ratio = (in.m >= 3) ? in.m / std::log(in.m) : 0.0;
  report.sample_ok = report.provided_ratio >= report.required_ratio;
  report.m_min = solve_m(report.required_ratio);
  report.notes =
      "radius upper limit uses the surrogate q in place of Q2; valid for r/tau <= 1/48";
  return report;
}

double hoeffding_matrix_bound(double eps, double sigma2_sum, int D) {
  if (!(eps >= 0)) throw std::invalid_argument("hoeffding_matrix_bound: need eps >= 0");
  if (!(sigma2_sum > 0)) throw std::invalid_argument("hoeffding_matrix_bound: need sigma2 > 0");
  return 2.0 * D * std::exp(-eps * eps / (8.0 * sigma2_sum));
}

std::pair<double, double> cov_concentration_bounds(double eps, int m, double r, int D) {
  if (!(eps >= 0) || m < 1 || !(r > 0)) {
    throw std::invalid_argument("cov_concentration_bounds: invalid inputs");
  }
  double r4 = r * r * r * r;
  double b0 = 2.0 * D * std::exp(-m * eps * eps / (512.0 * r4));
  double b = (4.0 * D + 2.0) * std::exp(-m * eps * eps / (1152.0 * r4));
  return {b0, b};
}

double fixed_window_delta(double eps, int m, double r, int D, double u) {
  if (!(0 < u && u <= 1)) throw std::invalid_argument("fixed_window_delta: need u in (0,1]");
  if (!(eps >= 0) || m < 1 || !(r > 0)) {
    throw std::invalid_argument("fixed_window_delta: invalid inputs");
  }
  double xi = std::exp(-eps * eps / (1152.0 * r * r * r * r));
  return (4.0 * D + 2.0) * std::pow(1.0 - u * (1.0 - xi), m);
}

double multipoint_required_ratio(double eps, double r, int D, double u0, double rho_fraction,
                                 double delta) {
  if (eps > 2.0 * r * r) {
    throw std::invalid_argument("multipoint_required_ratio: need eps <= 2 r^2");
  }
  if (!(0 < u0 && u0 <= 1)) {
    throw std::invalid_argument("multipoint_required_ratio: need u0 in (0,1]");
  }
  double arg = 14.0 * D * rho_fraction / delta;
  if (!(arg > 0)) throw std::invalid_argument("multipoint_required_ratio: bad log argument");
  double r4 = r * r * r * r;
  return 1156.0 * r4 / (u0 * eps * eps) * std::log(arg);
}

U0Estimate estimate_u0(const ManifoldModel& model, const DensityModel& density,
                       const NoiseModel& noise, double r, int n_mc, std::uint64_t seed) {
  if (!(r > 0)) throw std::invalid_argument("estimate_u0: need r > 0");
  if (n_mc < 1) throw std::invalid_argument("estimate_u0: need n_mc >= 1");
  PointCloud centers = sample(model, density, noise, n_mc, mix_seed(seed, 1));
  PointCloud mass = sample(model, density, noise, 10 * n_mc, mix_seed(seed, 2));
  double min_mass = 1.0;
  for (int i = 0; i < centers.size(); ++i) {
    long hits = 0;
    for (int j = 0; j < mass.size(); ++j) {
      if ((mass.points.col(j) - centers.points.col(i)).norm() < r) ++hits;
    }
    min_mass = std::min(min_mass, static_cast<double>(hits) / mass.size());
  }
  return {min_mass, "plug-in Monte Carlo estimate; not a certified infimum"};
}

double tail_threshold_radius(int d, int D, double eta) {
  if (!(1 <= d && d <= D)) throw std::invalid_argument("tail_threshold_radius: need 1 <= d <= D");
  if (!(0 < eta && eta < 1.0 / (2.0 * d))) {
    throw std::invalid_argument("eta out of range: need 0 < eta < 1/(2d)");
  }
  return 1.0 / (3.0 * std::sqrt(static_cast<double>(D)) * (1.0 + 1.0 / eta));
}

long long solve_m(double A) {
  auto ratio = [](long long m) { return m / std::log(static_cast<double>(m)); };
  if (!(A >= std::numbers::e)) return 3;
  long long lo = 3, hi = 8;
  while (ratio(hi) < A) hi *= 2;
  // m / log m is increasing for m >= 3.
  while (lo < hi) {
    long long mid = lo + (hi - lo) / 2;
    if (ratio(mid) >= A) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

double phi_min_substitute(double phi) {
  if (!(phi > 0)) throw std::invalid_argument("phi_min_substitute: need Phi > 0");
  return 1.04 * phi;
}

std::string bounds_formula_version() {
  return "bounds-v1 thmA{c1=1/16,c2=4642,c3=14} thmB{c1=1/48,c2=41778,c3=14} "
         "multipoint{1156} conc{512,1152} q=3+(8 d phi_max + 5 alpha tau)/phi_min";
}

}  // namespace mlens
