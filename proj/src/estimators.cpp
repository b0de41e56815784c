#include "mlens/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>
#include <unordered_map>

#include "mlens/measures.hpp"

namespace mlens {

void EstimatorParams::validate(int ambient_dim) const {
  if (!(r > 0)) throw std::invalid_argument("estimator params: need r > 0");
  if (eta && !(0 < *eta && *eta < 1)) {
    throw std::invalid_argument("estimator params: need eta in (0,1)");
  }
  if (k && !(1 <= *k && *k <= ambient_dim)) {
    throw std::invalid_argument("estimator params: need 1 <= k <= D");
  }
  if (!(0 < rho_fraction && rho_fraction <= 1)) {
    throw std::invalid_argument("estimator params: need rho_fraction in (0,1]");
  }
}

std::vector<int> neighbors(const PointCloud& cloud, int i, double r) {
  if (i < 0 || i >= cloud.size()) throw std::invalid_argument("neighbors: index out of range");
  if (!(r > 0)) throw std::invalid_argument("neighbors: need r > 0");
  std::vector<int> out;
  const Eigen::VectorXd center = cloud.points.col(i);
  for (int j = 0; j < cloud.size(); ++j) {
    if (j == i) continue;
    if ((cloud.points.col(j) - center).norm() < r) out.push_back(j);
  }
  return out;
}

namespace {

struct CellKey {
  long long x[8];
  int n;
  bool operator==(const CellKey& o) const {
    if (n != o.n) return false;
    for (int c = 0; c < n; ++c)
      if (x[c] != o.x[c]) return false;
    return true;
  }
};

struct CellHash {
  std::size_t operator()(const CellKey& key) const {
    std::size_t h = 1469598103934665603ULL;
    for (int c = 0; c < key.n; ++c) {
      h ^= static_cast<std::size_t>(key.x[c]);
      h *= 1099511628211ULL;
    }
    return h;
  }
};

}  // namespace

std::vector<int> neighbors_grid(const PointCloud& cloud, int i, double r) {
  if (i < 0 || i >= cloud.size()) throw std::invalid_argument("neighbors: index out of range");
  if (!(r > 0)) throw std::invalid_argument("neighbors: need r > 0");
  const int D = cloud.ambient_dim();
  const int gd = std::min(D, 8);  // grid over the leading coordinates only
  auto key_of = [&](const Eigen::VectorXd& p) {
    CellKey key;
    key.n = gd;
    for (int c = 0; c < gd; ++c) key.x[c] = static_cast<long long>(std::floor(p[c] / r));
    return key;
  };
  std::unordered_map<CellKey, std::vector<int>, CellHash> grid;
  for (int j = 0; j < cloud.size(); ++j) grid[key_of(cloud.points.col(j))].push_back(j);
  const Eigen::VectorXd center = cloud.points.col(i);
  CellKey base = key_of(center);
  std::vector<int> out;
  // Visit the 3^gd neighboring cells.
  std::vector<int> offset(gd, -1);
  for (;;) {
    CellKey key = base;
    for (int c = 0; c < gd; ++c) key.x[c] += offset[c];
    auto it = grid.find(key);
    if (it != grid.end()) {
      for (int j : it->second) {
        if (j == i) continue;
        if ((cloud.points.col(j) - center).norm() < r) out.push_back(j);
      }
    }
    int c = 0;
    while (c < gd && offset[c] == 1) offset[c++] = -1;
    if (c == gd) break;
    ++offset[c];
  }
  std::sort(out.begin(), out.end());
  return out;
}

int thr(const Eigen::VectorXd& lambda, double eta) {
  if (!(0 < eta && eta < 1)) throw std::invalid_argument("thr: need eta in (0,1)");
  const int D = static_cast<int>(lambda.size());
  for (int t = 0; t + 1 < D; ++t) {
    if (lambda[t] + 1e-12 < lambda[t + 1]) throw std::invalid_argument("thr: unsorted input");
  }
  if ((lambda.array() < -1e-12).any()) {
    throw std::invalid_argument("thr: negative eigenvalue");
  }
  double total = std::max(lambda.sum(), 0.0);
  if (total <= 0) return 0;
  double tail = total;
  for (int k = 0; k <= D; ++k) {
    if (tail <= eta * total) return k;
    tail -= std::max(lambda[k], 0.0);
  }
  return D;
}

namespace {

struct LocalSpectrum {
  int neighbor_count;
  Spectrum spectrum;
};

LocalSpectrum local_spectrum(const PointCloud& cloud, int i, double r, int min_neighbors) {
  std::vector<int> idx = neighbors(cloud, i, r);
  if (static_cast<int>(idx.size()) < min_neighbors) throw InsufficientNeighborhood();
  Eigen::MatrixXd atoms(cloud.ambient_dim(), idx.size());
  for (std::size_t t = 0; t < idx.size(); ++t) atoms.col(t) = cloud.points.col(idx[t]);
  SymMatrix cov = covariance(DiscreteMeasure::empirical(atoms));
  return {static_cast<int>(idx.size()), sym_eig(cov)};
}

}  // namespace

TangentEstimate tangent_estimate(const PointCloud& cloud, int i, double r, int k) {
  if (!(1 <= k && k <= cloud.ambient_dim())) {
    throw std::invalid_argument("tangent_estimate: need 1 <= k <= D");
  }
  LocalSpectrum local = local_spectrum(cloud, i, r, std::max(2, k + 1));
  bool tie = false;
  if (k < cloud.ambient_dim()) {
    tie = local.spectrum.eigvals[k - 1] - local.spectrum.eigvals[k] <= 1e-12;
  }
  return {Subspace(cloud.ambient_dim(), local.spectrum.eigvecs.leftCols(k)), tie};
}

int dimension_estimate(const PointCloud& cloud, int i, double r, double eta) {
  LocalSpectrum local = local_spectrum(cloud, i, r, 2);
  Eigen::VectorXd lambda = local.spectrum.eigvals.cwiseMax(0.0);
  return thr(lambda, eta);
}

SymMatrix projector_estimate(const PointCloud& cloud, int i, double r, int d) {
  std::vector<int> idx = neighbors(cloud, i, r);
  if (idx.size() < 2) throw InsufficientNeighborhood();
  Eigen::MatrixXd atoms(cloud.ambient_dim(), idx.size());
  for (std::size_t t = 0; t < idx.size(); ++t) atoms.col(t) = cloud.points.col(idx[t]);
  SymMatrix cov = covariance(DiscreteMeasure::empirical(atoms));
  return SymMatrix((d + 2.0) / (r * r) * cov.mat());
}

int worker_thread_count() {
  if (const char* env = std::getenv("MANIFOLD_LENS_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

BatchResult batch_estimate(const PointCloud& cloud, const EstimatorParams& params) {
  params.validate(cloud.ambient_dim());
  const int m = cloud.size();
  const int count = std::max(1, static_cast<int>(std::floor(params.rho_fraction * m)));
  const bool have_truth = static_cast<int>(cloud.tangents.size()) == m;

  BatchResult result;
  result.estimates.resize(count);

  auto process = [&](int i) {
    LocalEstimate& est = result.estimates[i];
    est.index = i;
    try {
      LocalSpectrum local = local_spectrum(cloud, i, params.r, 2);
      est.neighbor_count = local.neighbor_count;
      est.eigvals = local.spectrum.eigvals;
      if (params.k) {
        TangentEstimate tan = tangent_estimate(cloud, i, params.r, *params.k);
        est.tie_warning = tan.tie_warning;
        if (have_truth) {
          est.angle = principal_angle(tan.subspace, cloud.tangents[i]);
        }
        est.tangent = std::move(tan.subspace);
      }
      if (params.eta) {
        est.d_hat = thr(local.spectrum.eigvals.cwiseMax(0.0), *params.eta);
      }
    } catch (const std::exception& e) {
      est.failed = true;
      est.error = e.what();
    }
  };

  const int threads = std::min(worker_thread_count(), count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) process(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) process(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  BatchSummary& summary = result.summary;
  summary.processed = count;
  for (const LocalEstimate& est : result.estimates) {
    if (est.failed) {
      ++summary.failures;
      continue;
    }
    if (!std::isnan(est.angle)) summary.max_angle = std::max(summary.max_angle, est.angle);
    if (est.d_hat && *est.d_hat != cloud.intrinsic_dim) summary.all_dims_correct = false;
  }
  if (summary.failures > 0 && summary.failures == count) summary.all_dims_correct = false;
  return result;
}

void write_estimates_csv(const BatchResult& result, int ambient_dim, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_estimates_csv: cannot open " + path);
  out.precision(17);
  out << "i,neighbor_count,d_hat,angle";
  for (int c = 0; c < ambient_dim; ++c) out << ",lambda_" << c;
  out << ",warn_tie\n";
  for (const LocalEstimate& est : result.estimates) {
    out << est.index << "," << est.neighbor_count << ","
        << (est.d_hat ? std::to_string(*est.d_hat) : "") << ",";
    if (!std::isnan(est.angle)) out << est.angle;
    for (int c = 0; c < ambient_dim; ++c) {
      out << ",";
      if (est.eigvals.size() == ambient_dim) out << est.eigvals[c];
    }
    out << "," << (est.tie_warning ? 1 : 0) << "\n";
  }
}

}  // namespace mlens
