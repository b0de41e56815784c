#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mlens/geometry.hpp"

namespace mlens {

/// Volume of the unit d-ball, pi^{d/2} / Gamma(d/2 + 1), via the exact
/// half-integer Gamma recurrence.
double unit_ball_volume(int d);

/// Scalar inputs of the sample-complexity formulas. Exactly one of
/// {theta, eta, eps} selects the mode.
struct BoundInputs {
  double tau = 1.0;
  int d = 1;
  int D = 2;
  double phi_min = 0.0;
  double phi_max = 0.0;
  double alpha = 0.0;
  double s = 0.0;
  double r = 0.0;
  double m = 0.0;
  double rho_fraction = 1.0;  // fraction of points processed
  double delta = 0.05;
  std::optional<double> theta;  // tangent mode
  std::optional<double> eta;    // dimension mode
  std::optional<double> eps;    // projector mode

  void validate() const;
};

struct BoundReport {
  double S1 = 0.0;
  double S2 = 0.0;
  double q = 0.0;
  double required_ratio = 0.0;
  double provided_ratio = 0.0;
  bool radius_ok = false;
  bool sample_ok = false;
  long long m_min = 0;
  bool vacuous = false;
  std::string notes;
};

/// Surrogate curvature constant 3 + (8 d phi_max + 5 alpha tau) / phi_min,
/// valid in the small-radius regime r/tau <= 1/48.
double q_surrogate(const BoundInputs& in);

double thmA_S1(const BoundInputs& in);
double thmA_S2(const BoundInputs& in);
double thmB_S1(const BoundInputs& in);
double thmB_S2(const BoundInputs& in);

/// Radius and sample-size condition check for the projector-error guarantee.
BoundReport thm_main_conditions(const BoundInputs& in, double u0);

/// 2 D exp(-eps^2 / 8 sigma2_sum). May exceed 1; returned raw.
double hoeffding_matrix_bound(double eps, double sigma2_sum, int D);

/// (2D exp(-m eps^2 / 512 r^4), (4D+2) exp(-m eps^2 / 1152 r^4)).
std::pair<double, double> cov_concentration_bounds(double eps, int m, double r, int D);

/// (4D+2) (1 - u (1 - xi))^m with xi = exp(-eps^2 / 1152 r^4).
double fixed_window_delta(double eps, int m, double r, int D, double u);

/// 1156 r^4 / (u0 eps^2) * log(14 D rho / delta); requires eps <= 2 r^2.
double multipoint_required_ratio(double eps, double r, int D, double u0, double rho_fraction,
                                 double delta);

struct U0Estimate {
  double value;
  std::string note;  // plug-in estimate, not a certified infimum
};

/// Monte Carlo plug-in for inf_x mu(B_r(x)): minimum over n_mc sampled
/// centers of the empirical ball mass from an independent 10 n_mc sample.
U0Estimate estimate_u0(const ManifoldModel& model, const DensityModel& density,
                       const NoiseModel& noise, double r, int n_mc, std::uint64_t seed);

/// 1 / (3 sqrt(D) (1 + 1/eta)); requires 0 < eta < 1/(2d).
double tail_threshold_radius(int d, int D, double eta);

/// Smallest integer m >= 3 with m / log m >= A.
long long solve_m(double A);

/// 1.04 * Phi, the stand-in for phi_min when the density vanishes locally.
double phi_min_substitute(double phi);

/// Constants provenance string embedded in bounds reports.
std::string bounds_formula_version();

}  // namespace mlens
