#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>

#include "anchorda/random.hpp"

namespace test_support {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, anchorda::Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, anchorda::Rng& rng) { return random_matrix(n, 1, rng).col(0); }

// Explicit n x n projection onto span([1, A]) via an SVD pseudo-inverse:
// M (M^T M)^+ M^T. Independent of the QR path in the library.
inline Eigen::MatrixXd explicit_projection(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd m(a.rows(), a.cols() + 1);
  m.col(0).setOnes();
  m.rightCols(a.cols()) = a;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double tol = 1e-10 * svd.singularValues()(0);
  Eigen::Index r = 0;
  while (r < svd.singularValues().size() && svd.singularValues()(r) > tol) ++r;
  const Eigen::MatrixXd u = svd.matrixU().leftCols(r);
  return u * u.transpose();
}

// ||(I - P)(Y - X b)||^2 + gamma ||P (Y - X b)||^2 + lambda ||b||^2 with P explicit.
inline double explicit_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& p,
                                 double gamma, double lambda, const Eigen::VectorXd& b) {
  const Eigen::VectorXd r = y - x * b;
  const Eigen::VectorXd pr = p * r;
  return (r - pr).squaredNorm() + gamma * pr.squaredNorm() + lambda * b.squaredNorm();
}

// Plain gradient descent with step 1/L on the explicit objective; L from
// power iteration on the Hessian.
inline Eigen::VectorXd gradient_descent_anchor(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                               const Eigen::MatrixXd& p, double gamma, double lambda,
                                               int max_iter = 500000) {
  const Eigen::Index n = x.rows();
  const Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n, n) + (gamma - 1.0) * p;
  const Eigen::MatrixXd h = 2.0 * (x.transpose() * w * x + lambda * Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  Eigen::VectorXd v = Eigen::VectorXd::Ones(x.cols());
  double big = 0.0;
  for (int i = 0; i < 500; ++i) {
    Eigen::VectorXd hv = h * v;
    big = hv.norm();
    v = hv / big;
  }
  const double step = 1.0 / (1.05 * big);
  const Eigen::VectorXd xtwy = 2.0 * x.transpose() * (w * y);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(x.cols());
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd g = h * b - xtwy;
    b -= step * g;
    if (g.norm() < 1e-11 * (1.0 + xtwy.norm())) break;
  }
  return b;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("anchorda_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace test_support
