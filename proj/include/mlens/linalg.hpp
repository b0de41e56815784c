#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>

namespace mlens {

/// Dense real symmetric matrix. Symmetry is made exact at construction by
/// mirroring the lower triangle; non-finite entries are rejected.
class SymMatrix {
 public:
  explicit SymMatrix(const Eigen::MatrixXd& a);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Eigen::MatrixXd& mat() const { return mat_; }
  double operator()(int i, int j) const { return mat_(i, j); }

  static SymMatrix Zero(int d) { return SymMatrix(Eigen::MatrixXd::Zero(d, d)); }
  static SymMatrix Identity(int d) { return SymMatrix(Eigen::MatrixXd::Identity(d, d)); }

 private:
  Eigen::MatrixXd mat_;
};

/// Eigendecomposition with eigenvalues sorted non-increasing and each
/// eigenvector's largest-magnitude component made positive.
struct Spectrum {
  Eigen::VectorXd eigvals;  // non-increasing
  Eigen::MatrixXd eigvecs;  // orthogonal, column k pairs with eigvals[k]
};

/// A k-dimensional subspace of R^D held as an orthonormal basis.
class Subspace {
 public:
  Subspace(int ambient_dim, const Eigen::MatrixXd& basis);

  int ambient_dim() const { return ambient_dim_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const { return basis_; }

 private:
  int ambient_dim_;
  Eigen::MatrixXd basis_;
};

Spectrum sym_eig(const SymMatrix& a);

double operator_norm(const SymMatrix& a);
double frobenius_norm(const SymMatrix& a);

SymMatrix projection_matrix(const Subspace& s);

/// Largest canonical angle between equal-dimension subspaces, in [0, pi/2].
double principal_angle(const Subspace& s1, const Subspace& s2);

/// lhs = sin of the angle between the top-k eigenspaces of A and B,
/// rhs = ||A - B|| / (lambda_k(A) - lambda_{k+1}(A)); k is 1-based.
std::pair<double, double> davis_kahan_sides(const SymMatrix& a, const SymMatrix& b, int k);

/// lhs = l2 distance of sorted spectra, rhs = ||A - B||_F.
std::pair<double, double> hoffman_wielandt_sides(const SymMatrix& a, const SymMatrix& b);

/// l2 distance after sorting both vectors; the permutation-optimal matching
/// distance on multisets of reals.
double sorted_vector_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace mlens
