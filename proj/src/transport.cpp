#include "mlens/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mlens {

double TransportPlan::marginal_error(const Eigen::VectorXd& source_w,
                                     const Eigen::VectorXd& target_w) const {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(source_w.size());
  Eigen::VectorXd col = Eigen::VectorXd::Zero(target_w.size());
  for (const auto& e : flow) {
    row[e.from] += e.mass;
    col[e.to] += e.mass;
  }
  double err = (row - source_w).cwiseAbs().maxCoeff();
  return std::max(err, (col - target_w).cwiseAbs().maxCoeff());
}

namespace {

// Transportation simplex on the complete bipartite graph. Node ids:
// sources 0..n-1, sinks n..n+k-1. Basis is a spanning tree of n+k-1 arcs.
struct Simplex {
  int n, k;
  const Eigen::MatrixXd& cost;
  std::vector<int> arc_i, arc_j;       // basic arcs
  std::vector<double> arc_flow;
  std::vector<std::vector<int>> adj;   // node -> basic arc ids
  std::vector<double> u, v;            // duals

  Simplex(const Eigen::MatrixXd& c, const Eigen::VectorXd& a, const Eigen::VectorXd& b)
      : n(static_cast<int>(a.size())), k(static_cast<int>(b.size())), cost(c) {
    adj.assign(n + k, {});
    u.assign(n, 0.0);
    v.assign(k, 0.0);
    // Northwest corner initial basis: exactly n + k - 1 arcs including
    // degenerate zero-flow arcs when a row and a column close simultaneously.
    std::vector<double> ra(a.data(), a.data() + n), rb(b.data(), b.data() + k);
    int i = 0, j = 0;
    while (i < n && j < k) {
      double f = std::min(ra[i], rb[j]);
      add_arc(i, j, f);
      ra[i] -= f;
      rb[j] -= f;
      if (i == n - 1 && j == k - 1) break;
      if (ra[i] <= rb[j] && i < n - 1) {
        ++i;
      } else if (j < k - 1) {
        ++j;
      } else {
        ++i;
      }
    }
  }

  void add_arc(int i, int j, double f) {
    int id = static_cast<int>(arc_i.size());
    arc_i.push_back(i);
    arc_j.push_back(j);
    arc_flow.push_back(f);
    adj[i].push_back(id);
    adj[n + j].push_back(id);
  }

  void compute_duals() {
    std::vector<char> seen(n + k, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    u[0] = 0.0;
    while (!queue.empty()) {
      int node = queue.front();
      queue.pop_front();
      for (int id : adj[node]) {
        int other = (node < n) ? n + arc_j[id] : arc_i[id];
        if (seen[other]) continue;
        seen[other] = 1;
        if (other >= n) {
          v[other - n] = cost(arc_i[id], arc_j[id]) - u[arc_i[id]];
        } else {
          u[other] = cost(arc_i[id], arc_j[id]) - v[arc_j[id]];
        }
        queue.push_back(other);
      }
    }
  }

  // Tree path between two nodes; returns the arc id sequence.
  std::vector<int> tree_path(int from, int to) const {
    std::vector<int> parent_arc(n + k, -1), parent_node(n + k, -1);
    std::vector<char> seen(n + k, 0);
    std::deque<int> queue{from};
    seen[from] = 1;
    while (!queue.empty()) {
      int node = queue.front();
      queue.pop_front();
      if (node == to) break;
      for (int id : adj[node]) {
        int other = (node < n) ? n + arc_j[id] : arc_i[id];
        if (seen[other]) continue;
        seen[other] = 1;
        parent_arc[other] = id;
        parent_node[other] = node;
        queue.push_back(other);
      }
    }
    std::vector<int> path;
    for (int node = to; node != from; node = parent_node[node]) {
      path.push_back(parent_arc[node]);
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  // One pivot with entering arc (ei, ej). Leaving arc ties are broken by
  // smallest arc id (Bland-style, resolves degeneracy).
  void pivot(int ei, int ej) {
    std::vector<int> path = tree_path(n + ej, ei);
    std::vector<int> signs(path.size());
    int sign = -1;  // entering arc is +; signs alternate along the cycle
    for (std::size_t t = 0; t < path.size(); ++t) {
      signs[t] = sign;
      sign = -sign;
    }
    // Leaving arc: minimal flow among minus arcs, ties by smallest arc id.
    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    for (std::size_t t = 0; t < path.size(); ++t) {
      if (signs[t] >= 0) continue;
      int id = path[t];
      if (arc_flow[id] < theta || (arc_flow[id] == theta && id < leaving)) {
        theta = arc_flow[id];
        leaving = id;
      }
    }
    for (std::size_t t = 0; t < path.size(); ++t) {
      arc_flow[path[t]] += signs[t] * theta;
      if (arc_flow[path[t]] < 0) arc_flow[path[t]] = 0.0;
    }
    // Replace the leaving arc in place.
    detach(leaving);
    arc_i[leaving] = ei;
    arc_j[leaving] = ej;
    arc_flow[leaving] = theta;
    adj[ei].push_back(leaving);
    adj[n + ej].push_back(leaving);
  }

  void detach(int id) {
    auto rm = [&](std::vector<int>& lst) {
      lst.erase(std::find(lst.begin(), lst.end(), id));
    };
    rm(adj[arc_i[id]]);
    rm(adj[n + arc_j[id]]);
  }
};

}  // namespace

TransportPlan solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& source_w,
                              const Eigen::VectorXd& target_w, bool verify_optimality) {
  const int n = static_cast<int>(source_w.size());
  const int k = static_cast<int>(target_w.size());
  if (cost.rows() != n || cost.cols() != k) {
    throw std::invalid_argument("solve_transport: cost shape mismatch");
  }
  if (std::abs(source_w.sum() - target_w.sum()) > 1e-9) {
    throw std::invalid_argument("solve_transport: unbalanced marginals");
  }
  Simplex s(cost, source_w, target_w);
  const double scale = 1.0 + cost.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * scale;
  const long max_pivots = 200L * (n + k) * (n + k) + 10000;
  for (long iter = 0; iter < max_pivots; ++iter) {
    s.compute_duals();
    double best = -tol;
    int bi = -1, bj = -1;
    for (int i = 0; i < n; ++i) {
      const double ui = s.u[i];
      for (int j = 0; j < k; ++j) {
        double red = cost(i, j) - ui - s.v[j];
        if (red < best) {
          best = red;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0) break;
    s.pivot(bi, bj);
  }
  TransportPlan plan;
  plan.cost = 0.0;
  for (std::size_t id = 0; id < s.arc_i.size(); ++id) {
    if (s.arc_flow[id] > 0) {
      plan.flow.push_back({s.arc_i[id], s.arc_j[id], s.arc_flow[id]});
      plan.cost += s.arc_flow[id] * cost(s.arc_i[id], s.arc_j[id]);
    }
  }
  if (verify_optimality) {
    s.compute_duals();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j)
        if (cost(i, j) - s.u[i] - s.v[j] < -10 * tol) {
          throw std::runtime_error("solve_transport: optimality check failed");
        }
    if (plan.marginal_error(source_w, target_w) > 1e-10) {
      throw std::runtime_error("solve_transport: marginal check failed");
    }
  }
  return plan;
}

WassersteinResult wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  if (mu.ambient_dim() != nu.ambient_dim()) {
    throw std::invalid_argument("wasserstein: ambient dimension mismatch");
  }
  if (p < 1.0) throw std::invalid_argument("wasserstein: need p >= 1");
  Eigen::MatrixXd cost(mu.size(), nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j)
      cost(i, j) = std::pow((mu.atom(i) - nu.atom(j)).norm(), p);
  TransportPlan plan = solve_transport(cost, mu.weights(), nu.weights());
  double dist = std::pow(std::max(plan.cost, 0.0), 1.0 / p);
  return {dist, std::move(plan)};
}

std::pair<double, double> monotonicity_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                             double p, double q) {
  if (!(1.0 <= p && p <= q)) throw std::invalid_argument("monotonicity_check: need 1 <= p <= q");
  return {wasserstein(mu, nu, p).distance, wasserstein(mu, nu, q).distance};
}

namespace {

// Ball through all points of the support set (each on the boundary).
EnclosingBall circumball(const std::vector<Eigen::VectorXd>& support, int dim) {
  EnclosingBall ball{Eigen::VectorXd::Zero(dim), 0.0};
  if (support.empty()) return ball;
  if (support.size() == 1) {
    ball.center = support[0];
    return ball;
  }
  const Eigen::VectorXd& p0 = support[0];
  const int s = static_cast<int>(support.size()) - 1;
  Eigen::MatrixXd a(s, dim);
  Eigen::VectorXd rhs(s);
  for (int t = 0; t < s; ++t) {
    Eigen::VectorXd q = support[t + 1] - p0;
    a.row(t) = 2.0 * q.transpose();
    rhs[t] = q.squaredNorm();
  }
  Eigen::VectorXd x =
      a.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
  ball.center = p0 + x;
  ball.radius = x.norm();
  return ball;
}

EnclosingBall welzl(std::vector<Eigen::VectorXd>& pts, std::size_t count,
                    std::vector<Eigen::VectorXd>& support, int dim) {
  if (count == 0 || static_cast<int>(support.size()) == dim + 1) {
    return circumball(support, dim);
  }
  EnclosingBall ball = welzl(pts, count - 1, support, dim);
  const Eigen::VectorXd& p = pts[count - 1];
  if ((p - ball.center).norm() <= ball.radius * (1 + 1e-12) + 1e-14) return ball;
  support.push_back(p);
  EnclosingBall out = welzl(pts, count - 1, support, dim);
  support.pop_back();
  return out;
}

EnclosingBall ritter(const Eigen::MatrixXd& points) {
  const int n = static_cast<int>(points.cols());
  int a = 0, b = 0;
  double best = -1.0;
  for (int i = 1; i < n; ++i) {
    double d = (points.col(i) - points.col(0)).norm();
    if (d > best) {
      best = d;
      a = i;
    }
  }
  best = -1.0;
  for (int i = 0; i < n; ++i) {
    double d = (points.col(i) - points.col(a)).norm();
    if (d > best) {
      best = d;
      b = i;
    }
  }
  EnclosingBall ball{0.5 * (points.col(a) + points.col(b)), 0.5 * best};
  for (int i = 0; i < n; ++i) {
    double d = (points.col(i) - ball.center).norm();
    if (d > ball.radius) {
      double shift = 0.5 * (d - ball.radius);
      ball.center += shift / d * (points.col(i) - ball.center);
      ball.radius = 0.5 * (d + ball.radius);
    }
  }
  return ball;
}

}  // namespace

EnclosingBall min_enclosing_ball(const Eigen::MatrixXd& points) {
  const int dim = static_cast<int>(points.rows());
  const int n = static_cast<int>(points.cols());
  if (n == 0) throw std::invalid_argument("min_enclosing_ball: empty point set");
  if (dim > 10) return ritter(points);
  std::vector<Eigen::VectorXd> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = points.col(i);
  // Fixed shuffle keeps the expected-linear behaviour deterministic.
  std::mt19937_64 engine(0x9e3779b97f4a7c15ULL);
  std::shuffle(pts.begin(), pts.end(), engine);
  std::vector<Eigen::VectorXd> support;
  return welzl(pts, pts.size(), support, dim);
}

std::pair<double, double> covariance_lipschitz_witness(const DiscreteMeasure& mu,
                                                       const DiscreteMeasure& nu, double r) {
  if (r <= 0) throw std::invalid_argument("covariance_lipschitz_witness: r must be positive");
  for (const DiscreteMeasure* m : {&mu, &nu}) {
    EnclosingBall ball = min_enclosing_ball(m->atoms());
    if (ball.radius > r * (1 + 1e-9)) {
      throw std::invalid_argument("covariance_lipschitz_witness: support exceeds radius r");
    }
  }
  double lhs = operator_norm(SymMatrix(covariance(mu).mat() - covariance(nu).mat()));
  double rhs = 8.0 * r * wasserstein(mu, nu, 1.0).distance;
  return {lhs, rhs};
}

CenteringWitness centering_witness(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   double p) {
  Eigen::VectorXd mean_mu = mu.mean();
  Eigen::VectorXd mean_nu = nu.mean();
  DiscreteMeasure mu_c(mu.atoms().colwise() - mean_mu, mu.weights());
  DiscreteMeasure nu_c(nu.atoms().colwise() - mean_nu, nu.weights());
  CenteringWitness out;
  out.mean_gap = (mean_mu - mean_nu).norm();
  out.wp = wasserstein(mu, nu, p).distance;
  out.wp_centered = wasserstein(mu_c, nu_c, p).distance;
  return out;
}

std::pair<double, double> density_flattening_witness(const DiscreteMeasure& base,
                                                     const Eigen::VectorXd& f) {
  if (f.size() != base.size()) {
    throw std::invalid_argument("density_flattening_witness: f length mismatch");
  }
  if ((f.array() < 0).any()) {
    throw std::invalid_argument("density_flattening_witness: f must be non-negative");
  }
  Eigen::VectorXd reweighted = f.cwiseProduct(base.weights());
  if (std::abs(reweighted.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("density_flattening_witness: density not normalized");
  }
  DiscreteMeasure mu_f(base.atoms(), reweighted);
  double wp = wasserstein(mu_f, base, 1.0).distance;
  double diam = 0.0;
  for (int i = 0; i < base.size(); ++i)
    for (int j = i + 1; j < base.size(); ++j)
      diam = std::max(diam, (base.atom(i) - base.atom(j)).norm());
  double bound = (f.maxCoeff() - f.minCoeff()) * diam;
  return {wp, bound};
}

}  // namespace mlens
