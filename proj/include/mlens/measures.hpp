#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "mlens/linalg.hpp"

namespace mlens {

struct EmptyRestriction : std::runtime_error {
  EmptyRestriction() : std::runtime_error("empty restriction") {}
};

/// Finitely supported probability measure on R^D: columns of `atoms` carry
/// the weights in `weights`. Weights are normalized at construction.
class DiscreteMeasure {
 public:
  DiscreteMeasure(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights);

  /// Empirical measure: equal weights over the columns of `atoms`.
  static DiscreteMeasure empirical(const Eigen::MatrixXd& atoms);

  int ambient_dim() const { return static_cast<int>(atoms_.rows()); }
  int size() const { return static_cast<int>(atoms_.cols()); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::VectorXd atom(int i) const { return atoms_.col(i); }

  Eigen::VectorXd mean() const { return atoms_ * weights_; }

 private:
  Eigen::MatrixXd atoms_;
  Eigen::VectorXd weights_;
};

SymMatrix covariance(const DiscreteMeasure& mu);

/// Second moment about a fixed center instead of the mean.
SymMatrix covariance_about(const DiscreteMeasure& mu, const Eigen::VectorXd& center);

/// Normalized restriction to the open ball B_r(center); strict membership.
/// Throws EmptyRestriction when no atom lies inside.
DiscreteMeasure restrict(const DiscreteMeasure& mu, const Eigen::VectorXd& center, double r);

/// Covariance of the uniform measure on the unit disk of the subspace:
/// Proj / (k + 2).
SymMatrix reference_covariance(const Subspace& s);

/// Spectrum (1,...,1,0,...,0)/(d+2) of the reference disk covariance.
Eigen::VectorXd reference_spectrum(int d, int D);

/// || lambda(d,D) - lambda(d',D) ||_2 in closed form.
double reference_eig_gap(int d, int d_prime, int D);

}  // namespace mlens
