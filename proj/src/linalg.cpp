#include "mlens/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace mlens {

SymMatrix::SymMatrix(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw std::invalid_argument("SymMatrix: matrix must be square, dim >= 1");
  }
  if (!a.allFinite()) {
    throw std::invalid_argument("invalid matrix: non-finite entries");
  }
  mat_ = 0.5 * (a + a.transpose());
  // Mirror the lower triangle so entries match bit-for-bit.
  for (int i = 0; i < mat_.rows(); ++i)
    for (int j = 0; j < i; ++j) mat_(j, i) = mat_(i, j);
}

Subspace::Subspace(int ambient_dim, const Eigen::MatrixXd& basis)
    : ambient_dim_(ambient_dim), basis_(basis) {
  if (basis.rows() != ambient_dim) {
    throw std::invalid_argument("Subspace: basis row count != ambient dim");
  }
  const int k = static_cast<int>(basis.cols());
  if (k < 1 || k > ambient_dim) {
    throw std::invalid_argument("Subspace: need 1 <= k <= D");
  }
  Eigen::MatrixXd gram = basis.transpose() * basis;
  double err = (gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
  if (err > 1e-10) {
    throw std::invalid_argument("Subspace: basis not orthonormal");
  }
}

Spectrum sym_eig(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.mat());
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("sym_eig: eigensolver failed");
  }
  const int d = a.dim();
  Spectrum out;
  out.eigvals.resize(d);
  out.eigvecs.resize(d, d);
  // Eigen sorts ascending; reverse to non-increasing.
  for (int k = 0; k < d; ++k) {
    out.eigvals[k] = solver.eigenvalues()[d - 1 - k];
    out.eigvecs.col(k) = solver.eigenvectors().col(d - 1 - k);
  }
  // Fix each eigenvector's sign: largest-magnitude component positive.
  for (int k = 0; k < d; ++k) {
    int imax = 0;
    out.eigvecs.col(k).cwiseAbs().maxCoeff(&imax);
    if (out.eigvecs(imax, k) < 0) out.eigvecs.col(k) = -out.eigvecs.col(k);
  }
  return out;
}

double operator_norm(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.mat(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double frobenius_norm(const SymMatrix& a) { return a.mat().norm(); }

SymMatrix projection_matrix(const Subspace& s) {
  return SymMatrix(s.basis() * s.basis().transpose());
}

double principal_angle(const Subspace& s1, const Subspace& s2) {
  if (s1.ambient_dim() != s2.ambient_dim() || s1.dim() != s2.dim()) {
    throw std::invalid_argument("principal_angle: dimension mismatch");
  }
  Eigen::MatrixXd cross = s1.basis().transpose() * s2.basis();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross);
  double smin = svd.singularValues().minCoeff();
  smin = std::clamp(smin, 0.0, 1.0);
  return std::acos(smin);
}

std::pair<double, double> davis_kahan_sides(const SymMatrix& a, const SymMatrix& b, int k) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("davis_kahan_sides: dimension mismatch");
  }
  const int d = a.dim();
  if (k < 1 || k >= d) {
    throw std::invalid_argument("davis_kahan_sides: need 1 <= k < D");
  }
  Spectrum sa = sym_eig(a);
  Spectrum sb = sym_eig(b);
  double gap = sa.eigvals[k - 1] - sa.eigvals[k];
  if (gap <= 1e-12) {
    throw std::invalid_argument("degenerate gap");
  }
  Subspace top_a(d, sa.eigvecs.leftCols(k));
  Subspace top_b(d, sb.eigvecs.leftCols(k));
  double lhs = std::sin(principal_angle(top_a, top_b));
  double rhs = operator_norm(SymMatrix(a.mat() - b.mat())) / gap;
  return {lhs, rhs};
}

std::pair<double, double> hoffman_wielandt_sides(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("hoffman_wielandt_sides: dimension mismatch");
  }
  Spectrum sa = sym_eig(a);
  Spectrum sb = sym_eig(b);
  double lhs = (sa.eigvals - sb.eigvals).norm();
  double rhs = frobenius_norm(SymMatrix(a.mat() - b.mat()));
  return {lhs, rhs};
}

double sorted_vector_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("sorted_vector_distance: length mismatch");
  }
  std::vector<double> xs(x.data(), x.data() + x.size());
  std::vector<double> ys(y.data(), y.data() + y.size());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double t = xs[i] - ys[i];
    acc += t * t;
  }
  return std::sqrt(acc);
}

}  // namespace mlens
