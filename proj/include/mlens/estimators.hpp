#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlens/geometry.hpp"
#include "mlens/linalg.hpp"

namespace mlens {

struct EstimatorParams {
  double r = 0.0;                  // neighborhood radius; no default
  std::optional<int> k;            // target dimension for tangent estimation
  std::optional<double> eta;       // tail threshold for dimension estimation
  double rho_fraction = 1.0;       // fraction of points processed

  void validate(int ambient_dim) const;
};

/// Neighbor indices of point i within the open ball of radius r; self is
/// excluded by index, coincident duplicates at other indices are kept.
/// Ascending index order.
std::vector<int> neighbors(const PointCloud& cloud, int i, double r);

/// Same query via a uniform grid index; must agree with the brute-force scan
/// exactly (strict inequality keeps the sets identical).
std::vector<int> neighbors_grid(const PointCloud& cloud, int i, double r);

/// Smallest k with tail sum lambda_{k+1} + ... + lambda_D <= eta * total.
/// Input must be sorted non-increasing with non-negative entries.
int thr(const Eigen::VectorXd& lambda, double eta);

struct InsufficientNeighborhood : std::runtime_error {
  InsufficientNeighborhood() : std::runtime_error("insufficient neighborhood") {}
};

struct TangentEstimate {
  Subspace subspace;
  bool tie_warning;  // lambda_k == lambda_{k+1} within 1e-12
};

TangentEstimate tangent_estimate(const PointCloud& cloud, int i, double r, int k);

int dimension_estimate(const PointCloud& cloud, int i, double r, double eta);

/// (d+2)/r^2 times the local empirical covariance.
SymMatrix projector_estimate(const PointCloud& cloud, int i, double r, int d);

struct LocalEstimate {
  int index = -1;
  int neighbor_count = 0;
  Eigen::VectorXd eigvals;                 // full local spectrum
  std::optional<Subspace> tangent;         // when k given
  std::optional<int> d_hat;                // when eta given
  double angle = std::numeric_limits<double>::quiet_NaN();  // vs ground truth
  bool tie_warning = false;
  bool failed = false;
  std::string error;
};

struct BatchSummary {
  double max_angle = 0.0;
  bool all_dims_correct = true;
  int failures = 0;
  int processed = 0;
};

struct BatchResult {
  std::vector<LocalEstimate> estimates;
  BatchSummary summary;
};

/// Processes i = 0 .. floor(rho_fraction * m) - 1, parallel over indices with
/// output ordered by index. Per-point errors become failure records.
BatchResult batch_estimate(const PointCloud& cloud, const EstimatorParams& params);

/// Per-point results CSV: i,neighbor_count,d_hat,angle,lambda_0..,warn_tie.
void write_estimates_csv(const BatchResult& result, int ambient_dim, const std::string& path);

/// Thread cap from MANIFOLD_LENS_THREADS (0 or unset = auto).
int worker_thread_count();

}  // namespace mlens
