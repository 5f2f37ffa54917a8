#include "anchorda/anchor_regression.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>

#include "anchorda/error.hpp"

namespace anchorda {

namespace {

void check_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorKind::domain, "gamma must be a finite value >= 0");
  }
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::domain, "lambda must be a finite value >= 0");
  }
}

// A Gram factor this ill-conditioned is treated as singular when lambda = 0.
constexpr double kSingularRcond = 64 * std::numeric_limits<double>::epsilon();

Eigen::VectorXd min_norm_solution(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  return cod.solve(y);
}

}  // namespace

const char* to_string(SolverPath path) {
  switch (path) {
    case SolverPath::automatic: return "automatic";
    case SolverPath::primal: return "primal";
    case SolverPath::dual: return "dual";
  }
  return "automatic";
}

SolverPath solver_path_from_string(const std::string& s) {
  if (s == "automatic" || s == "auto") return SolverPath::automatic;
  if (s == "primal") return SolverPath::primal;
  if (s == "dual") return SolverPath::dual;
  throw Error(ErrorKind::config, "unknown solver path '" + s + "'");
}

// ---------------------------------------------------------------------------
// Projection

ProjectionOperator::ProjectionOperator(Eigen::MatrixXd basis) : basis_(std::move(basis)) {}

Eigen::MatrixXd ProjectionOperator::apply(const Eigen::MatrixXd& v) const {
  if (v.rows() != rows()) throw Error(ErrorKind::shape, "projection applied to wrong row count");
  Eigen::MatrixXd coef = basis_.transpose() * v;
  return basis_ * coef;
}

Eigen::MatrixXd ProjectionOperator::apply_complement(const Eigen::MatrixXd& v) const {
  Eigen::MatrixXd out = v;
  if (v.rows() != rows()) throw Error(ErrorKind::shape, "projection applied to wrong row count");
  Eigen::MatrixXd coef = basis_.transpose() * v;
  out.noalias() -= basis_ * coef;
  return out;
}

ProjectionOperator anchor_projection(const Eigen::MatrixXd& anchors) {
  const Eigen::Index n = anchors.rows();
  if (n == 0) return ProjectionOperator(Eigen::MatrixXd(0, 0));
  Eigen::MatrixXd augmented(n, anchors.cols() + 1);
  augmented.col(0).setOnes();
  augmented.rightCols(anchors.cols()) = anchors;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(augmented);
  qr.setThreshold(kProjectionRankTolerance);
  const Eigen::Index r = qr.rank();
  Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
  return ProjectionOperator(std::move(basis));
}

ProjectionOperator anchor_projection(const AnchorMatrix& anchors) {
  return anchor_projection(anchors.values());
}

TransformedData anchor_transform(Eigen::MatrixXd x, Eigen::VectorXd y,
                                 const ProjectionOperator& projection, double gamma) {
  check_gamma(gamma);
  if (x.rows() != y.size() || x.rows() != projection.rows()) {
    throw Error(ErrorKind::shape, "anchor_transform: X, Y and the projection disagree on n");
  }
  // X + (sqrt(gamma) - 1) Q Q^T X, so gamma = 1 leaves the data untouched.
  const double factor = std::sqrt(gamma) - 1.0;
  const auto& q = projection.basis();
  Eigen::MatrixXd qx = q.transpose() * x;
  x.noalias() += (factor * q) * qx;
  Eigen::VectorXd qy = q.transpose() * y;
  y.noalias() += (factor * q) * qy;
  return {std::move(x), std::move(y)};
}

// ---------------------------------------------------------------------------
// Ridge

RidgeSolution solve_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                          SolverPath path) {
  check_lambda(lambda);
  if (x.rows() != y.size()) throw Error(ErrorKind::shape, "solve_ridge: X and Y row counts differ");
  if (x.rows() == 0 || x.cols() == 0) throw Error(ErrorKind::shape, "solve_ridge: empty design");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();

  RidgeSolution out;
  out.path = path == SolverPath::automatic ? (p > n ? SolverPath::dual : SolverPath::primal) : path;

  if (out.path == SolverPath::primal) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    gram.diagonal().array() += lambda;
    const Eigen::VectorXd rhs = x.transpose() * y;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(gram);
    if (llt.info() == Eigen::Success && (lambda > 0.0 || llt.rcond() > kSingularRcond)) {
      out.beta = llt.solve(rhs);
      if (out.beta.allFinite()) return out;
    }
  } else {
    Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(n, n);
    kernel.selfadjointView<Eigen::Lower>().rankUpdate(x);
    kernel.diagonal().array() += lambda;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(kernel);
    if (llt.info() == Eigen::Success && (lambda > 0.0 || llt.rcond() > kSingularRcond)) {
      const Eigen::VectorXd alpha = llt.solve(y);
      out.beta = x.transpose() * alpha;
      if (out.beta.allFinite()) return out;
    }
  }

  out.beta = min_norm_solution(x, y);
  out.min_norm = true;
  if (!out.beta.allFinite()) throw Error(ErrorKind::numerical, "ridge solve produced non-finite coefficients");
  return out;
}

bool LinearModel::operator==(const LinearModel& other) const {
  return same_values(beta, other.beta) && intercept == other.intercept && gamma == other.gamma &&
         lambda == other.lambda && stats == other.stats && grid == other.grid &&
         target_name == other.target_name && solver == other.solver && min_norm == other.min_norm;
}

LinearModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                      SolverPath path) {
  auto sol = solve_ridge(x, y, lambda, path);
  LinearModel m;
  m.beta = std::move(sol.beta);
  m.lambda = lambda;
  m.gamma = 1.0;
  m.stats = FeatureStats::identity(static_cast<std::size_t>(x.cols()));
  m.grid = {static_cast<std::size_t>(x.cols()), 1};
  m.solver = sol.path;
  m.min_norm = sol.min_norm;
  return m;
}

LinearModel fit_anchor(Eigen::MatrixXd x, Eigen::VectorXd y, const Eigen::MatrixXd& anchors,
                       double gamma, double lambda, SolverPath path) {
  check_gamma(gamma);
  check_lambda(lambda);
  if (anchors.rows() != x.rows()) throw Error(ErrorKind::shape, "fit_anchor: anchors and X row counts differ");
  const auto p = x.cols();
  auto transformed = anchor_transform(std::move(x), std::move(y), anchor_projection(anchors), gamma);
  auto m = fit_ridge(transformed.x, transformed.y, lambda, path);
  m.gamma = gamma;
  m.grid = {static_cast<std::size_t>(p), 1};
  return m;
}

Eigen::VectorXd predict(const LinearModel& model, const Eigen::MatrixXd& x_new) {
  if (static_cast<std::size_t>(x_new.cols()) != model.features()) {
    throw Error(ErrorKind::shape, "predict: model has " + std::to_string(model.features()) +
                                      " features, data has " + std::to_string(x_new.cols()));
  }
  Eigen::VectorXd z = model.stats.apply(x_new) * model.beta;
  z.array() += model.intercept;
  return model.stats.invert_target(z);
}

ResidualDiagnostics residual_anchor_diagnostics(const LinearModel& model, const Eigen::MatrixXd& x,
                                                const Eigen::VectorXd& y,
                                                const Eigen::MatrixXd& anchors) {
  if (x.rows() != y.size() || anchors.rows() != y.size()) {
    throw Error(ErrorKind::shape, "residual diagnostics: inconsistent row counts");
  }
  const Eigen::VectorXd r = y - predict(model, x);
  ResidualDiagnostics d;
  d.projected_norm = anchor_projection(anchors).apply(r).norm();
  d.correlation = Eigen::VectorXd::Zero(anchors.cols());

  const Eigen::ArrayXd rc = r.array() - r.mean();
  const double r_ss = rc.square().sum();
  const double r_scale = std::max(r.cwiseAbs().maxCoeff(), std::abs(y.mean()));
  if (!(r_ss > 0.0) || std::sqrt(r_ss / static_cast<double>(r.size())) <= 1e-14 * r_scale) {
    d.degenerate = true;
    return d;
  }
  for (Eigen::Index j = 0; j < anchors.cols(); ++j) {
    const Eigen::ArrayXd ac = anchors.col(j).array() - anchors.col(j).mean();
    const double a_ss = ac.square().sum();
    if (!(a_ss > 0.0)) {
      d.degenerate = true;
      continue;
    }
    d.correlation(j) = (rc * ac).sum() / std::sqrt(r_ss * a_ss);
  }
  return d;
}

double anchor_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const ProjectionOperator& projection, double gamma, double lambda,
                        const Eigen::VectorXd& beta) {
  const Eigen::VectorXd r = y - x * beta;
  const Eigen::VectorXd pr = projection.apply(r);
  return (r - pr).squaredNorm() + gamma * pr.squaredNorm() + lambda * beta.squaredNorm();
}

LinearModel fit_dataset(const Dataset& train, const FitOptions& options) {
  auto s = standardize(train.x, train.y);
  LinearModel m;
  if (options.ridge_only || !train.anchors) {
    if (!options.ridge_only && options.gamma != 1.0) {
      throw Error(ErrorKind::config, "gamma != 1 requires anchor columns in the dataset");
    }
    m = fit_ridge(s.x.values(), s.y.values(), options.lambda, options.path);
  } else {
    m = fit_anchor(s.x.values(), s.y.values(), train.anchors->values(), options.gamma,
                   options.lambda, options.path);
  }
  m.stats = std::move(s.stats);
  m.grid = train.x.grid();
  m.target_name = train.y.name();
  return m;
}

}  // namespace anchorda
