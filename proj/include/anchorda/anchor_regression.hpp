#pragma once

#include <Eigen/Dense>

#include <string>

#include "anchorda/data_model.hpp"

namespace anchorda {

// Projection onto the column space of the anchor matrix augmented with a
// constant column. Held as a thin orthonormal basis Q (n x r) so that
// Pi v = Q (Q^T v); the n x n matrix is never formed.
class ProjectionOperator {
 public:
  explicit ProjectionOperator(Eigen::MatrixXd basis);

  const Eigen::MatrixXd& basis() const { return basis_; }
  Eigen::Index rank() const { return basis_.cols(); }
  Eigen::Index rows() const { return basis_.rows(); }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& v) const;
  Eigen::MatrixXd apply_complement(const Eigen::MatrixXd& v) const;

 private:
  Eigen::MatrixXd basis_;
};

// Relative pivot tolerance of the rank-revealing QR behind anchor_projection.
inline constexpr double kProjectionRankTolerance = 1e-10;

ProjectionOperator anchor_projection(const Eigen::MatrixXd& anchors);
ProjectionOperator anchor_projection(const AnchorMatrix& anchors);

struct TransformedData {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

// X~ = (I - Pi) X + sqrt(gamma) Pi X, and likewise for Y. Takes its inputs by
// value and transforms them in place, so callers can move large matrices in.
TransformedData anchor_transform(Eigen::MatrixXd x, Eigen::VectorXd y,
                                 const ProjectionOperator& projection, double gamma);

enum class SolverPath {
  automatic,  // dual when p > n, primal otherwise
  primal,     // (X^T X + lambda I) beta = X^T Y
  dual,       // beta = X^T (X X^T + lambda I)^-1 Y
};

const char* to_string(SolverPath path);
SolverPath solver_path_from_string(const std::string& s);

struct RidgeSolution {
  Eigen::VectorXd beta;
  SolverPath path = SolverPath::automatic;  // the path actually taken
  bool min_norm = false;  // singular system, minimum-norm least squares used
};

// argmin ||Y - X beta||^2 + lambda ||beta||^2 in closed form. Only the Gram
// matrix of the chosen path is formed.
RidgeSolution solve_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                          SolverPath path = SolverPath::automatic);

// Fitted linear predictor. beta and intercept act on standardized features
// and target; `stats` maps raw inputs into that space and back.
struct LinearModel {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  double gamma = 1.0;
  double lambda = 0.0;
  FeatureStats stats;
  GridShape grid;
  std::string target_name;
  SolverPath solver = SolverPath::automatic;  // the path actually taken
  bool min_norm = false;

  std::size_t features() const { return static_cast<std::size_t>(beta.size()); }
  bool operator==(const LinearModel& other) const;
};

LinearModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                      SolverPath path = SolverPath::automatic);

// Ridge regression on the anchor-transformed data.
LinearModel fit_anchor(Eigen::MatrixXd x, Eigen::VectorXd y, const Eigen::MatrixXd& anchors,
                       double gamma, double lambda, SolverPath path = SolverPath::automatic);

// Standardize with the model's frozen statistics, apply beta, map back to
// target units.
Eigen::VectorXd predict(const LinearModel& model, const Eigen::MatrixXd& x_new);

struct ResidualDiagnostics {
  Eigen::VectorXd correlation;  // Pearson corr(Y - Yhat, A_j) per anchor
  double projected_norm = 0.0;  // ||Pi_A (Y - Yhat)||
  bool degenerate = false;      // residuals (or an anchor) have zero variance
};

ResidualDiagnostics residual_anchor_diagnostics(const LinearModel& model, const Eigen::MatrixXd& x,
                                                const Eigen::VectorXd& y,
                                                const Eigen::MatrixXd& anchors);

// ||(I - Pi)(Y - X beta)||^2 + gamma ||Pi (Y - X beta)||^2 + lambda ||beta||^2
double anchor_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const ProjectionOperator& projection, double gamma, double lambda,
                        const Eigen::VectorXd& beta);

struct FitOptions {
  double gamma = 1.0;
  double lambda = 1.0;
  SolverPath path = SolverPath::automatic;
  bool ridge_only = false;  // ignore anchors and call fit_ridge directly
};

// Standardizes `train` (statistics from train only) and fits. `train` is
// expected to already hold anomalies.
LinearModel fit_dataset(const Dataset& train, const FitOptions& options);

}  // namespace anchorda
