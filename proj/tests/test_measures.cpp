#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mlens/measures.hpp"
#include "mlens/rng.hpp"

using namespace mlens;

namespace {

DiscreteMeasure three_points() {
  Eigen::MatrixXd atoms(2, 3);
  atoms << 0, 1, 0, 0, 0, 1;
  return DiscreteMeasure::empirical(atoms);
}

}  // namespace

TEST_CASE("DiscreteMeasure construction and normalization") {
  Eigen::MatrixXd atoms(1, 2);
  atoms << -1, 1;
  Eigen::VectorXd w(2);
  w << 2, 2;
  DiscreteMeasure mu(atoms, w);
  CHECK(mu.weights().sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mu.weights()[0] == doctest::Approx(0.5));

  Eigen::VectorXd bad(2);
  bad << 1, -1;
  CHECK_THROWS(DiscreteMeasure(atoms, bad));
  Eigen::VectorXd mismatched(3);
  mismatched << 1, 1, 1;
  CHECK_THROWS(DiscreteMeasure(atoms, mismatched));
}

TEST_CASE("covariance examples") {
  Eigen::MatrixXd single(3, 1);
  single << 1, 2, 3;
  CHECK(covariance(DiscreteMeasure::empirical(single)).mat().norm() == 0.0);

  Eigen::MatrixXd pm(1, 2);
  pm << -1, 1;
  CHECK(covariance(DiscreteMeasure::empirical(pm))(0, 0) == doctest::Approx(1.0));

  SymMatrix c = covariance(three_points());
  CHECK(c(0, 0) == doctest::Approx(2.0 / 9));
  CHECK(c(0, 1) == doctest::Approx(-1.0 / 9));
  CHECK(c(1, 1) == doctest::Approx(2.0 / 9));
}

TEST_CASE("covariance_about examples and shift identity") {
  DiscreteMeasure mu = three_points();
  Eigen::Vector2d mean = mu.mean();
  CHECK((covariance_about(mu, mean).mat() - covariance(mu).mat()).norm() <= 1e-12);

  Eigen::MatrixXd single(2, 1);
  single << 2, 0;
  Eigen::Vector2d c(1, 1);
  SymMatrix m = covariance_about(DiscreteMeasure::empirical(single), c);
  CHECK(m(0, 0) == doctest::Approx(1.0));
  CHECK(m(0, 1) == doctest::Approx(-1.0));
  CHECK(m(1, 1) == doctest::Approx(1.0));

  SymMatrix about0 = covariance_about(mu, Eigen::Vector2d::Zero());
  CHECK(about0(0, 0) == doctest::Approx(1.0 / 3));
  CHECK(about0(0, 1) == doctest::Approx(0.0));
  CHECK(about0(1, 1) == doctest::Approx(1.0 / 3));

  // Sigma_0 = Sigma + (mean - center)(mean - center)^T.
  std::mt19937_64 engine = make_engine(3, 3);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    Eigen::MatrixXd atoms(3, 5);
    for (int i = 0; i < atoms.size(); ++i) atoms.data()[i] = unif(engine);
    Eigen::Vector3d center(unif(engine), unif(engine), unif(engine));
    DiscreteMeasure nu = DiscreteMeasure::empirical(atoms);
    Eigen::Vector3d gap = nu.mean() - center;
    Eigen::MatrixXd expected = covariance(nu).mat() + gap * gap.transpose();
    CHECK((covariance_about(nu, center).mat() - expected).norm() <= 1e-12);
  }
}

TEST_CASE("covariance translation and scaling invariance") {
  std::mt19937_64 engine = make_engine(17, 0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    Eigen::MatrixXd atoms(2, 4);
    for (int i = 0; i < atoms.size(); ++i) atoms.data()[i] = unif(engine);
    Eigen::VectorXd w(4);
    for (int i = 0; i < 4; ++i) w[i] = 0.1 + std::abs(unif(engine));
    DiscreteMeasure mu(atoms, w);
    Eigen::Vector2d shift(unif(engine), unif(engine));
    DiscreteMeasure shifted(atoms.colwise() + shift, w);
    CHECK((covariance(mu).mat() - covariance(shifted).mat()).norm() <= 1e-12);
    double c = 1.0 + std::abs(unif(engine));
    DiscreteMeasure scaled(c * atoms, w);
    CHECK((covariance(scaled).mat() - c * c * covariance(mu).mat()).norm() <= 1e-12);
  }
}

TEST_CASE("restrict") {
  Eigen::MatrixXd atoms(1, 3);
  atoms << 0, 1, 3;
  DiscreteMeasure mu = DiscreteMeasure::empirical(atoms);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);

  DiscreteMeasure all = restrict(mu, zero, 10.0);
  CHECK(all.size() == 3);

  CHECK_THROWS_AS(restrict(mu, Eigen::VectorXd::Constant(1, 100.0), 1.0), EmptyRestriction);

  DiscreteMeasure near = restrict(mu, zero, 2.0);
  CHECK(near.size() == 2);
  CHECK(near.weights()[0] == doctest::Approx(0.5));
  CHECK(near.weights()[1] == doctest::Approx(0.5));

  // Membership is strict: an atom exactly at distance r is excluded.
  DiscreteMeasure strict = restrict(mu, zero, 1.0);
  CHECK(strict.size() == 1);
}

TEST_CASE("reference_covariance") {
  Eigen::MatrixXd plane = Eigen::MatrixXd::Identity(3, 2);
  SymMatrix ref = reference_covariance(Subspace(3, plane));
  Eigen::Matrix3d expected = Eigen::Vector3d(0.25, 0.25, 0.0).asDiagonal();
  CHECK((ref.mat() - expected).norm() <= 1e-12);

  Eigen::MatrixXd line = Eigen::MatrixXd::Identity(2, 1);
  SymMatrix ref1 = reference_covariance(Subspace(2, line));
  CHECK(ref1(0, 0) == doctest::Approx(1.0 / 3));
  CHECK(ref1(1, 1) == doctest::Approx(0.0));

  SymMatrix full = reference_covariance(Subspace(2, Eigen::MatrixXd::Identity(2, 2)));
  CHECK((full.mat() - 0.25 * Eigen::Matrix2d::Identity()).norm() <= 1e-12);
}

TEST_CASE("reference_spectrum and reference_eig_gap") {
  Eigen::VectorXd spec = reference_spectrum(2, 5);
  CHECK(spec.size() == 5);
  CHECK(spec[0] == doctest::Approx(0.25));
  CHECK(spec[1] == doctest::Approx(0.25));
  CHECK(spec[2] == 0.0);

  CHECK(reference_eig_gap(2, 2, 5) == 0.0);
  CHECK(reference_eig_gap(1, 2, 4) == doctest::Approx(std::sqrt(10.0) / 12));
  CHECK(reference_eig_gap(2, 4, 6) == doctest::Approx(std::sqrt(40.0) / 24));
  CHECK_THROWS(reference_eig_gap(3, 2, 5));

  for (int D = 1; D <= 10; ++D) {
    for (int d = 1; d <= D; ++d) {
      for (int dp = d; dp <= D; ++dp) {
        double direct = (reference_spectrum(d, D) - reference_spectrum(dp, D)).norm();
        CHECK(reference_eig_gap(d, dp, D) == doctest::Approx(direct).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("Monte Carlo disk covariance matches reference (d = 1, 2, 3)") {
  for (int d = 1; d <= 3; ++d) {
    const int D = d + 2;
    Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(D, d);
    Subspace s(D, basis);
    std::mt19937_64 engine = make_engine(400 + d, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n = 100000;
    Eigen::MatrixXd atoms(D, n);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd v(d);
      do {
        for (int c = 0; c < d; ++c) v[c] = gauss(engine);
      } while (v.norm() == 0.0);
      v *= std::pow(unif(engine), 1.0 / d) / v.norm();
      atoms.col(i) = basis * v;
    }
    SymMatrix mc = covariance(DiscreteMeasure::empirical(atoms));
    SymMatrix ref = reference_covariance(s);
    CHECK(operator_norm(SymMatrix(mc.mat() - ref.mat())) <= 0.01);
  }
}
