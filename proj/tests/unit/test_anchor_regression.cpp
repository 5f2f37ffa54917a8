#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "anchorda/anchor_regression.hpp"
#include "anchorda/error.hpp"
#include "support.hpp"

using namespace anchorda;
using test_support::random_matrix;
using test_support::random_vector;

namespace {

double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

Eigen::MatrixXd dense(const ProjectionOperator& p) {
  return p.apply(Eigen::MatrixXd::Identity(p.rows(), p.rows()));
}

// Ridge through an explicit SVD, independent of the Cholesky paths.
Eigen::VectorXd svd_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::VectorXd coef = svd.matrixU().transpose() * y;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double d = s(i) * s(i) + lambda;
    coef(i) = d > 1e-14 * s(0) * s(0) ? coef(i) * s(i) / d : 0.0;
  }
  return svd.matrixV() * coef;
}

}  // namespace

TEST_CASE("projection: two rows with anchor [1, -1] spans everything") {
  Eigen::MatrixXd a(2, 1);
  a << 1, -1;
  const auto p = anchor_projection(a);
  CHECK(p.rank() == 2);
  CHECK(dense(p).isApprox(Eigen::Matrix2d::Identity(), 1e-14));
  CHECK(p.apply_complement(Eigen::Matrix2d::Random()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("projection: a constant anchor collapses to the intercept") {
  const auto p = anchor_projection(Eigen::MatrixXd::Constant(5, 1, 3.0));
  CHECK(p.rank() == 1);
  CHECK((dense(p) - Eigen::MatrixXd::Constant(5, 5, 0.2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("projection: random anchors match the explicit pseudo-inverse form") {
  Rng rng(17);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::MatrixXd a = random_matrix(50, 3, rng);
    const auto p = anchor_projection(a);
    CHECK(p.rank() == 4);
    CHECK((p.basis().transpose() * p.basis() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::MatrixXd pd = dense(p);
    CHECK((pd - test_support::explicit_projection(a)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((pd * pd - pd).norm() < 1e-10);
    CHECK((pd - pd.transpose()).norm() < 1e-10);
    const Eigen::VectorXd v = random_vector(50, rng), w = random_vector(50, rng);
    const Eigen::VectorXd pv = p.apply(v);
    CHECK(std::abs(w.dot(pv) - v.dot(p.apply(w).col(0))) < 1e-10);
    CHECK((p.apply(pv) - pv).norm() < 1e-10);
    // Pi v lies in span(1, A): regressing it on [1, A] leaves nothing.
    Eigen::MatrixXd m(50, 4);
    m << Eigen::VectorXd::Ones(50), a;
    const Eigen::VectorXd coef = m.colPivHouseholderQr().solve(pv);
    CHECK((m * coef - pv).norm() < 1e-10);
  }
}

TEST_CASE("projection: duplicated anchor columns are rank deficient") {
  Rng rng(2);
  Eigen::MatrixXd a(30, 3);
  a.col(0) = random_vector(30, rng);
  a.col(1) = 2.0 * a.col(0);
  a.col(2) = random_vector(30, rng);
  CHECK(anchor_projection(a).rank() == 3);
  CHECK((dense(anchor_projection(a)) - test_support::explicit_projection(a)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("anchor_transform special cases") {
  Rng rng(4);
  const Eigen::MatrixXd x = random_matrix(20, 4, rng);
  const Eigen::VectorXd y = random_vector(20, rng);
  const Eigen::MatrixXd a = random_matrix(20, 2, rng);
  const auto p = anchor_projection(a);

  const auto one = anchor_transform(x, y, p, 1.0);
  CHECK(same_values(one.x, x));
  CHECK(same_values(one.y, y));

  const auto zero = anchor_transform(x, y, p, 0.0);
  const Eigen::MatrixXd pe = test_support::explicit_projection(a);
  const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(20, 20);
  CHECK((zero.x - (i - pe) * x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((zero.y - (i - pe) * y).cwiseAbs().maxCoeff() < 1e-12);

  const auto nine = anchor_transform(x, y, p, 9.0);
  CHECK((nine.x - ((i - pe) * x + 3.0 * pe * x)).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(anchor_transform(x, y, p, -1.0), Error);
  try {
    anchor_transform(x, y, p, -1.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
}

TEST_CASE("anchor_transform: 3 x 1 hand computation") {
  // [2, 1, 0] = 1 + A, so it lies in span(1, A) and gamma = 4 doubles it.
  Eigen::MatrixXd a(3, 1), x(3, 1);
  a << 1, 0, -1;
  x << 2, 1, 0;
  const auto t = anchor_transform(x, Eigen::Vector3d(0, 0, 0), anchor_projection(a), 4.0);
  CHECK(std::abs(t.x(0, 0) - 4.0) < 1e-12);
  CHECK(std::abs(t.x(1, 0) - 2.0) < 1e-12);
  CHECK(std::abs(t.x(2, 0) - 0.0) < 1e-12);

  // A vector orthogonal to span(1, A) is untouched.
  Eigen::MatrixXd o(3, 1);
  o << 1, -2, 1;
  const auto u = anchor_transform(o, Eigen::Vector3d(0, 0, 0), anchor_projection(a), 4.0);
  CHECK((u.x - o).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ridge closed forms") {
  const auto id = solve_ridge(Eigen::Matrix3d::Identity(), Eigen::Vector3d(1, 2, 3), 0.0);
  CHECK((id.beta - Eigen::Vector3d(1, 2, 3)).norm() < 1e-14);
  CHECK_FALSE(id.min_norm);

  Eigen::MatrixXd x(2, 1);
  x << 1, 2;
  const auto scalar = solve_ridge(x, Eigen::Vector2d(1, 2), 5.0);
  CHECK(scalar.beta(0) == doctest::Approx(0.5).epsilon(1e-15));

  Rng rng(9);
  const Eigen::MatrixXd xr = random_matrix(30, 8, rng);
  const Eigen::VectorXd yr = random_vector(30, rng);
  const auto shrunk = solve_ridge(xr, yr, 1e12);
  CHECK(shrunk.beta.norm() < 1e-6 * (xr.transpose() * yr).norm());
}

TEST_CASE("primal and dual paths agree and match an SVD oracle") {
  Rng rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const auto n = static_cast<Eigen::Index>(5 + rng.below(196));
    const auto p = static_cast<Eigen::Index>(1 + rng.below(200));
    const double lambda = std::pow(10.0, rng.uniform(-3.0, 2.0));
    const Eigen::MatrixXd x = random_matrix(n, p, rng);
    const Eigen::VectorXd y = random_vector(n, rng);
    const auto primal = solve_ridge(x, y, lambda, SolverPath::primal);
    const auto dual = solve_ridge(x, y, lambda, SolverPath::dual);
    const auto autom = solve_ridge(x, y, lambda);
    CHECK(primal.path == SolverPath::primal);
    CHECK(dual.path == SolverPath::dual);
    CHECK(autom.path == (p > n ? SolverPath::dual : SolverPath::primal));
    CHECK(rel_diff(primal.beta, dual.beta) < 1e-8);
    CHECK(rel_diff(autom.beta, svd_ridge(x, y, lambda)) < 1e-8);
  }
}

TEST_CASE("lambda = 0 on a singular design falls back to the minimum-norm solution") {
  Rng rng(5);
  Eigen::MatrixXd x = random_matrix(20, 5, rng);
  x.col(4) = x.col(0) + x.col(1);
  const Eigen::VectorXd y = random_vector(20, rng);
  for (auto path : {SolverPath::primal, SolverPath::dual}) {
    const auto sol = solve_ridge(x, y, 0.0, path);
    CHECK(sol.min_norm);
    CHECK(rel_diff(sol.beta, svd_ridge(x, y, 0.0)) < 1e-8);
  }
  // Interpolation regime: p >= n, full row rank, residuals vanish.
  const Eigen::MatrixXd wide = random_matrix(10, 25, rng);
  const Eigen::VectorXd yw = random_vector(10, rng);
  const auto fit = fit_ridge(wide, yw, 0.0);
  CHECK((predict(fit, wide) - yw).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_FALSE(fit.min_norm);
}

TEST_CASE("negative or non-finite penalties are domain errors") {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(3, 3);
  for (double bad : {-1.0, std::nan(""), std::numeric_limits<double>::infinity()}) {
    try {
      solve_ridge(x, Eigen::Vector3d(1, 2, 3), bad);
      FAIL("expected domain error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::domain);
    }
  }
}

TEST_CASE("gamma = 1 anchor fit equals the ridge fit") {
  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const auto n = static_cast<Eigen::Index>(10 + rng.below(100));
    const auto p = static_cast<Eigen::Index>(1 + rng.below(60));
    const Eigen::MatrixXd x = random_matrix(n, p, rng);
    const Eigen::VectorXd y = random_vector(n, rng);
    const Eigen::MatrixXd a = random_matrix(n, 2, rng);
    const auto ridge = fit_ridge(x, y, 0.5);
    const auto anchor = fit_anchor(x, y, a, 1.0, 0.5);
    CHECK(rel_diff(anchor.beta, ridge.beta) < 1e-10);
  }
}

TEST_CASE("fit_anchor equals ridge on the explicitly transformed data") {
  Rng rng(8);
  const Eigen::MatrixXd x = random_matrix(60, 12, rng);
  const Eigen::VectorXd y = random_vector(60, rng);
  const Eigen::MatrixXd a = random_matrix(60, 2, rng);
  const Eigen::MatrixXd pe = test_support::explicit_projection(a);
  const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(60, 60);
  for (double gamma : {0.0, 0.5, 4.0, 100.0}) {
    const Eigen::MatrixXd xt = (i - pe) * x + std::sqrt(gamma) * pe * x;
    const Eigen::VectorXd yt = (i - pe) * y + std::sqrt(gamma) * pe * y;
    const auto m = fit_anchor(x, y, a, gamma, 0.3);
    CHECK(m.gamma == gamma);
    CHECK(m.lambda == 0.3);
    CHECK(rel_diff(m.beta, svd_ridge(xt, yt, 0.3)) < 1e-9);
  }
}

TEST_CASE("closed form matches gradient descent on the anchor objective") {
  Rng rng(123);
  for (int rep = 0; rep < 3; ++rep) {
    const Eigen::MatrixXd x = random_matrix(50, 20, rng);
    const Eigen::VectorXd y = random_vector(50, rng);
    const Eigen::MatrixXd a = random_matrix(50, 2, rng);
    const double gamma = rng.uniform(0.0, 10.0), lambda = rng.uniform(0.05, 2.0);
    const Eigen::MatrixXd pe = test_support::explicit_projection(a);
    const auto m = fit_anchor(x, y, a, gamma, lambda);
    const Eigen::VectorXd gd = test_support::gradient_descent_anchor(x, y, pe, gamma, lambda);
    const double f_cf = test_support::explicit_objective(x, y, pe, gamma, lambda, m.beta);
    const double f_gd = test_support::explicit_objective(x, y, pe, gamma, lambda, gd);
    CHECK(std::abs(f_cf - f_gd) < 1e-6);
    CHECK(f_cf <= f_gd + 1e-9);
    CHECK(std::abs(anchor_objective(x, y, anchor_projection(a), gamma, lambda, m.beta) - f_cf) < 1e-9 * f_cf);
  }
}

TEST_CASE("perturbing the solution never lowers the objective") {
  Rng rng(77);
  const Eigen::MatrixXd x = random_matrix(40, 10, rng);
  const Eigen::VectorXd y = random_vector(40, rng);
  const Eigen::MatrixXd a = random_matrix(40, 1, rng);
  const auto proj = anchor_projection(a);
  const auto m = fit_anchor(x, y, a, 6.0, 0.2);
  const double f0 = anchor_objective(x, y, proj, 6.0, 0.2, m.beta);
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd d = random_vector(10, rng);
    d.normalize();
    CHECK(anchor_objective(x, y, proj, 6.0, 0.2, m.beta + 1e-3 * d) >= f0);
    CHECK(anchor_objective(x, y, proj, 6.0, 0.2, m.beta - 1e-3 * d) >= f0);
  }
}

TEST_CASE("huge gamma approaches the instrumental-variable ratio") {
  // A -> X, hidden H -> X and Y, Y = 1.5 X + H + noise.
  Rng rng(2019);
  const int n = 200;
  Eigen::VectorXd av(n), xv(n), yv(n);
  for (int i = 0; i < n; ++i) {
    const double a = rng.normal(), h = rng.normal();
    xv(i) = a + h + 0.3 * rng.normal();
    yv(i) = 1.5 * xv(i) + 2.0 * h + 0.3 * rng.normal();
    av(i) = a;
  }
  av.array() -= av.mean();
  xv.array() -= xv.mean();
  yv.array() -= yv.mean();
  const double iv = av.dot(yv) / av.dot(xv);
  const auto m = fit_anchor(xv, yv, av, 1e6, 0.0);
  CHECK(std::abs(m.beta(0) - iv) < 0.01 * std::abs(iv));
  // OLS is pulled away from the causal coefficient by H.
  const auto ols = fit_ridge(xv, yv, 0.0);
  CHECK(std::abs(ols.beta(0) - 1.5) > std::abs(m.beta(0) - 1.5));
}

TEST_CASE("projected residual norm is non-increasing in gamma") {
  Rng rng(64);
  const Eigen::MatrixXd a = random_matrix(120, 2, rng);
  Eigen::MatrixXd x = random_matrix(120, 15, rng);
  x.col(0) += 2.0 * a.col(0);
  x.col(1) += a.col(1);
  Eigen::VectorXd y = x.col(2) + 0.5 * x.col(0) + 0.8 * a.col(0) + 0.2 * random_vector(120, rng);
  double prev = INFINITY;
  for (int e = 0; e <= 14; ++e) {
    const auto m = fit_anchor(x, y, a, std::ldexp(1.0, e), 1.0);
    const auto d = residual_anchor_diagnostics(m, x, y, a);
    CHECK(d.projected_norm <= prev * (1.0 + 1e-12));
    prev = d.projected_norm;
    if (e == 14) CHECK(d.correlation.cwiseAbs().maxCoeff() < 1e-2);
  }
}

TEST_CASE("predict applies frozen statistics and maps back to target units") {
  LinearModel hand;
  hand.beta = Eigen::Vector2d(1, -1);
  hand.stats = FeatureStats::identity(2);
  Eigen::MatrixXd row(1, 2);
  row << 3, 1;
  CHECK(predict(hand, row)(0) == 2.0);
  CHECK_THROWS_AS(predict(hand, Eigen::MatrixXd::Zero(1, 3)), Error);

  LinearModel zero;
  zero.beta = Eigen::VectorXd::Zero(2);
  zero.stats = FeatureStats::identity(2);
  zero.stats.target_mean = 4.25;
  zero.stats.target_scale = 3.0;
  CHECK((predict(zero, Eigen::MatrixXd::Random(5, 2)).array() == 4.25).all());
}

TEST_CASE("predictions are invariant to a joint row permutation") {
  Rng rng(12);
  const Eigen::MatrixXd x = random_matrix(50, 6, rng);
  const Eigen::VectorXd y = random_vector(50, rng);
  const Eigen::MatrixXd a = random_matrix(50, 1, rng);
  std::vector<int> perm(50);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  Eigen::MatrixXd xp(50, 6), ap(50, 1);
  Eigen::VectorXd yp(50);
  for (int i = 0; i < 50; ++i) {
    xp.row(i) = x.row(perm[i]);
    yp(i) = y(perm[i]);
    ap.row(i) = a.row(perm[i]);
  }
  const auto m = fit_anchor(x, y, a, 5.0, 0.1);
  const auto mp = fit_anchor(xp, yp, ap, 5.0, 0.1);
  CHECK((predict(m, x) - predict(mp, x)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("residual diagnostics flag degenerate residuals") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(4, 4);
  const Eigen::Vector4d y(1, 2, 3, 4);
  Eigen::MatrixXd a(4, 1);
  a << 1, 0, 1, 0;
  const auto m = fit_ridge(x, y, 0.0);
  const auto d = residual_anchor_diagnostics(m, x, y, a);
  CHECK(d.degenerate);
  CHECK(d.correlation.isZero(0.0));
}

TEST_CASE("fit_dataset refuses gamma without anchors") {
  Eigen::MatrixXd v = Eigen::MatrixXd::Random(6, 2);
  GriddedDataset g(v, {"A", "A", "A", "B", "B", "B"}, std::vector<std::string>(6, "s"), {1, 2, 3, 1, 2, 3}, {2, 1});
  Dataset ds(g, ForcingSeries(Eigen::VectorXd::LinSpaced(6, 0, 1), "y"));
  FitOptions fo;
  fo.gamma = 2.0;
  try {
    fit_dataset(ds, fo);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
  }
  fo.gamma = 1.0;
  const auto m = fit_dataset(ds, fo);
  CHECK(m.grid == GridShape{2, 1});
  CHECK(m.target_name == "y");
}
