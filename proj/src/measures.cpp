#include "mlens/measures.hpp"

#include <cmath>
#include <vector>

namespace mlens {

DiscreteMeasure::DiscreteMeasure(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights)
    : atoms_(atoms), weights_(weights) {
  if (atoms.cols() < 1 || atoms.cols() != weights.size()) {
    throw std::invalid_argument("DiscreteMeasure: atoms/weights length mismatch or empty");
  }
  if (!atoms.allFinite() || !weights.allFinite()) {
    throw std::invalid_argument("DiscreteMeasure: non-finite data");
  }
  if ((weights.array() < 0).any()) {
    throw std::invalid_argument("DiscreteMeasure: negative weight");
  }
  double total = weights_.sum();
  if (total <= 0) {
    throw std::invalid_argument("DiscreteMeasure: zero total mass");
  }
  weights_ /= total;
}

DiscreteMeasure DiscreteMeasure::empirical(const Eigen::MatrixXd& atoms) {
  return DiscreteMeasure(atoms,
                         Eigen::VectorXd::Constant(atoms.cols(), 1.0 / atoms.cols()));
}

SymMatrix covariance(const DiscreteMeasure& mu) {
  return covariance_about(mu, mu.mean());
}

SymMatrix covariance_about(const DiscreteMeasure& mu, const Eigen::VectorXd& center) {
  if (center.size() != mu.ambient_dim()) {
    throw std::invalid_argument("covariance_about: center dimension mismatch");
  }
  Eigen::MatrixXd centered = mu.atoms().colwise() - center;
  Eigen::MatrixXd cov =
      centered * mu.weights().asDiagonal() * centered.transpose();
  return SymMatrix(cov);
}

DiscreteMeasure restrict(const DiscreteMeasure& mu, const Eigen::VectorXd& center, double r) {
  if (r <= 0) throw std::invalid_argument("restrict: r must be positive");
  std::vector<int> keep;
  for (int i = 0; i < mu.size(); ++i) {
    if ((mu.atom(i) - center).norm() < r) keep.push_back(i);
  }
  if (keep.empty()) throw EmptyRestriction();
  Eigen::MatrixXd atoms(mu.ambient_dim(), keep.size());
  Eigen::VectorXd weights(keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    atoms.col(j) = mu.atom(keep[j]);
    weights[j] = mu.weights()[keep[j]];
  }
  if (weights.sum() <= 0) throw EmptyRestriction();
  return DiscreteMeasure(atoms, weights);
}

SymMatrix reference_covariance(const Subspace& s) {
  return SymMatrix(projection_matrix(s).mat() / (s.dim() + 2.0));
}

Eigen::VectorXd reference_spectrum(int d, int D) {
  if (d < 0 || d > D) throw std::invalid_argument("reference_spectrum: need 0 <= d <= D");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(D);
  v.head(d).setConstant(1.0 / (d + 2.0));
  return v;
}

double reference_eig_gap(int d, int d_prime, int D) {
  if (!(1 <= d && d <= d_prime && d_prime <= D)) {
    throw std::invalid_argument("reference_eig_gap: need 1 <= d <= d' <= D");
  }
  double num = (d_prime - d) * (static_cast<double>(d) * d_prime + 4.0 * d + 4.0);
  return std::sqrt(num) / ((d + 2.0) * (d_prime + 2.0));
}

}  // namespace mlens
