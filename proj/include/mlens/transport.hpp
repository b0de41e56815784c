#pragma once

#include <Eigen/Dense>
#include <tuple>
#include <vector>

#include "mlens/measures.hpp"

namespace mlens {

/// Optimal coupling between two discrete measures. `flow` lists the nonzero
/// (and basic degenerate) entries; `cost` is the transported cost before the
/// final 1/p root.
struct TransportPlan {
  struct Entry {
    int from;
    int to;
    double mass;
  };
  std::vector<Entry> flow;
  double cost = 0.0;

  /// Max deviation of the row/column sums from the prescribed marginals.
  double marginal_error(const Eigen::VectorXd& source_w, const Eigen::VectorXd& target_w) const;
};

/// Exact min-cost solve of the dense transportation problem with the given
/// cost matrix (rows: source atoms, cols: target atoms).
TransportPlan solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& source_w,
                              const Eigen::VectorXd& target_w, bool verify_optimality = false);

struct WassersteinResult {
  double distance;
  TransportPlan plan;
};

/// Exact p-Wasserstein distance with Euclidean ground cost ||a - b||^p.
WassersteinResult wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);

/// (W_p, W_q) for p <= q; W_p <= W_q by the power mean inequality.
std::pair<double, double> monotonicity_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                             double p, double q);

/// lhs = ||Sigma[mu] - Sigma[nu]|| (operator norm), rhs = 8 r W_1(mu, nu).
/// Each support must fit in some ball of radius r (validated via Welzl for
/// D <= 10, Ritter 2-approximation beyond).
std::pair<double, double> covariance_lipschitz_witness(const DiscreteMeasure& mu,
                                                       const DiscreteMeasure& nu, double r);

struct CenteringWitness {
  double mean_gap;      // ||E X - E Y||
  double wp;            // W_p(mu, nu)
  double wp_centered;   // W_p(centered mu, centered nu)
};

CenteringWitness centering_witness(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);

/// Reweight base by density values f (one per atom, normalized against base)
/// and compare W_1(mu_f, base) with (max f - min f) * diam(support).
std::pair<double, double> density_flattening_witness(const DiscreteMeasure& base,
                                                     const Eigen::VectorXd& f);

struct EnclosingBall {
  Eigen::VectorXd center;
  double radius;
};

/// Smallest enclosing ball of a point set (columns). Exact Welzl for D <= 10,
/// Ritter 2-approximation otherwise.
EnclosingBall min_enclosing_ball(const Eigen::MatrixXd& points);

}  // namespace mlens
