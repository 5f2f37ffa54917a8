#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "anchorda/anchor_regression.hpp"
#include "anchorda/data_model.hpp"

namespace anchorda {

// Every model id maps to one of k folds; all rows of a model share it.
struct FoldAssignment {
  std::map<std::string, std::size_t> fold_of;
  std::size_t k = 0;

  std::size_t fold(const std::string& model_id) const;
  std::vector<std::size_t> fold_sizes() const;
  std::vector<std::size_t> rows_in_fold(std::span<const std::string> model_ids, std::size_t fold) const;
};

// Distinct models are sorted, shuffled with the seeded stream, then dealt
// round-robin into k folds.
FoldAssignment grouped_kfold(std::span<const std::string> model_ids, std::size_t k, std::uint64_t seed);

struct ModelSplit {
  std::vector<std::string> train_models;
  std::vector<std::string> test_models;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

// round(fraction * m) models go to training, clamped so each side keeps at
// least one model. fraction must lie strictly inside (0, 1).
ModelSplit split_models(std::span<const std::string> model_ids, double fraction, std::uint64_t seed);
std::pair<Dataset, Dataset> split_by_model(const Dataset& ds, double fraction, std::uint64_t seed);

struct Metrics {
  double rmse = 0.0;
  double r2 = 0.0;
  bool r2_defined = true;  // false when y_true is constant; r2 is NaN then
};

Metrics metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

struct GridCell {
  double lambda = 1.0;
  double gamma = 1.0;
};

std::vector<GridCell> make_grid(std::span<const double> lambdas, std::span<const double> gammas);

// 13 log-spaced values 1e-4 ... 1e4.
std::vector<double> default_lambda_grid();

struct CellScores {
  GridCell cell;
  std::vector<double> fold_rmse;
  std::vector<double> fold_r2;
  double mean_rmse = 0.0;
  double mean_r2 = 0.0;
  std::optional<std::string> error;
};

struct CVReport {
  std::vector<CellScores> cells;
  std::size_t selected = 0;
  std::size_t k = 0;

  const GridCell& selected_cell() const { return cells.at(selected).cell; }
};

// Reported once per (cell, fold) fit with the rows handed to each stage.
struct CVFitEvent {
  std::size_t fold = 0;
  GridCell cell;
  std::span<const std::size_t> fit_rows;         // standardization and fitting
  std::span<const std::size_t> validation_rows;  // scoring only
};

struct CVOptions {
  SolverPath path = SolverPath::automatic;
  std::size_t threads = 1;
  std::function<void(const CVFitEvent&)> on_fit;  // called under a lock
};

// For each cell and fold: fit on the out-of-fold rows (statistics recomputed
// there) and score the fold. The selected cell has the lowest mean RMSE; ties
// go to the larger lambda, then the smaller gamma.
CVReport cross_validate(const Dataset& ds, std::span<const GridCell> grid, const FoldAssignment& folds,
                        const CVOptions& options = {});

// Columns lambda,gamma,fold,rmse,r2 followed by a '#'-prefixed summary block.
std::string format_cv_report(const CVReport& report);

}  // namespace anchorda
