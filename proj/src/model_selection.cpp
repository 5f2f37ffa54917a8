#include "anchorda/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "anchorda/error.hpp"
#include "anchorda/key_values.hpp"
#include "anchorda/random.hpp"

namespace anchorda {

namespace {

std::vector<std::string> sorted_distinct(std::span<const std::string> ids) {
  std::set<std::string> s(ids.begin(), ids.end());
  return {s.begin(), s.end()};
}

void seeded_shuffle(std::vector<std::string>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

bool better(const CellScores& a, const CellScores& b) {
  const double tol = 1e-12 * std::max(std::abs(a.mean_rmse), std::abs(b.mean_rmse));
  if (std::abs(a.mean_rmse - b.mean_rmse) > tol) return a.mean_rmse < b.mean_rmse;
  if (a.cell.lambda != b.cell.lambda) return a.cell.lambda > b.cell.lambda;
  return a.cell.gamma < b.cell.gamma;
}

}  // namespace

std::size_t FoldAssignment::fold(const std::string& model_id) const {
  auto it = fold_of.find(model_id);
  if (it == fold_of.end()) throw Error(ErrorKind::consistency, "model '" + model_id + "' has no fold");
  return it->second;
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (const auto& [m, f] : fold_of) ++sizes.at(f);
  return sizes;
}

std::vector<std::size_t> FoldAssignment::rows_in_fold(std::span<const std::string> model_ids,
                                                      std::size_t f) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < model_ids.size(); ++i) {
    if (fold(model_ids[i]) == f) rows.push_back(i);
  }
  return rows;
}

FoldAssignment grouped_kfold(std::span<const std::string> model_ids, std::size_t k, std::uint64_t seed) {
  auto models = sorted_distinct(model_ids);
  if (k < 1 || k > models.size()) {
    throw Error(ErrorKind::config, "k = " + std::to_string(k) + " folds needs between 1 and " +
                                       std::to_string(models.size()) + " (the model count)");
  }
  auto rng = Rng::stream(seed, "grouped_kfold");
  seeded_shuffle(models, rng);
  FoldAssignment out;
  out.k = k;
  for (std::size_t i = 0; i < models.size(); ++i) out.fold_of[models[i]] = i % k;
  return out;
}

ModelSplit split_models(std::span<const std::string> model_ids, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorKind::config, "train fraction must lie strictly between 0 and 1 (both sides need a model)");
  }
  auto models = sorted_distinct(model_ids);
  const std::size_t m = models.size();
  if (m < 2) throw Error(ErrorKind::config, "a model-wise split needs at least 2 models");
  auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m)));
  n_train = std::clamp<std::size_t>(n_train, 1, m - 1);

  auto rng = Rng::stream(seed, "split_by_model");
  seeded_shuffle(models, rng);
  ModelSplit out;
  out.train_models.assign(models.begin(), models.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test_models.assign(models.begin() + static_cast<std::ptrdiff_t>(n_train), models.end());
  std::sort(out.train_models.begin(), out.train_models.end());
  std::sort(out.test_models.begin(), out.test_models.end());
  const std::set<std::string> train(out.train_models.begin(), out.train_models.end());
  for (std::size_t i = 0; i < model_ids.size(); ++i) {
    (train.count(model_ids[i]) ? out.train_rows : out.test_rows).push_back(i);
  }
  return out;
}

std::pair<Dataset, Dataset> split_by_model(const Dataset& ds, double fraction, std::uint64_t seed) {
  const auto split = split_models(ds.x.model_ids(), fraction, seed);
  return {ds.take_rows(split.train_rows), ds.take_rows(split.test_rows)};
}

Metrics metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.size() < 2) {
    throw Error(ErrorKind::shape, "metrics need two equal-length vectors with at least 2 entries");
  }
  const double sse = (y_true - y_pred).squaredNorm();
  const double sst = (y_true.array() - y_true.mean()).square().sum();
  Metrics out;
  out.rmse = std::sqrt(sse / static_cast<double>(y_true.size()));
  if (sst > 0.0) {
    out.r2 = 1.0 - sse / sst;
  } else {
    out.r2 = std::numeric_limits<double>::quiet_NaN();
    out.r2_defined = false;
  }
  return out;
}

std::vector<GridCell> make_grid(std::span<const double> lambdas, std::span<const double> gammas) {
  std::vector<GridCell> grid;
  for (double g : gammas) {
    for (double l : lambdas) grid.push_back({l, g});
  }
  return grid;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 13; ++i) grid.push_back(std::pow(10.0, -4.0 + 2.0 * i / 3.0));
  grid.front() = 1e-4;
  grid.back() = 1e4;
  return grid;
}

CVReport cross_validate(const Dataset& ds, std::span<const GridCell> grid, const FoldAssignment& folds,
                        const CVOptions& options) {
  if (grid.empty()) throw Error(ErrorKind::config, "cross-validation grid is empty");
  if (folds.k < 2) throw Error(ErrorKind::config, "cross-validation needs k >= 2");
  const auto& ids = ds.x.model_ids();

  std::vector<std::vector<std::size_t>> validation(folds.k), training(folds.k);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto f = folds.fold(ids[i]);
    for (std::size_t g = 0; g < folds.k; ++g) (g == f ? validation[g] : training[g]).push_back(i);
  }
  std::vector<Dataset> train_sets, valid_sets;
  for (std::size_t f = 0; f < folds.k; ++f) {
    if (validation[f].empty() || training[f].empty()) {
      throw Error(ErrorKind::config, "fold " + std::to_string(f) + " is empty for this dataset");
    }
    train_sets.push_back(ds.take_rows(training[f]));
    valid_sets.push_back(ds.take_rows(validation[f]));
  }

  CVReport report;
  report.k = folds.k;
  report.cells.resize(grid.size());
  std::mutex hook_mutex;

  auto evaluate = [&](std::size_t c) {
    CellScores& s = report.cells[c];
    s.cell = grid[c];
    try {
      for (std::size_t f = 0; f < folds.k; ++f) {
        if (options.on_fit) {
          std::lock_guard lock(hook_mutex);
          options.on_fit(CVFitEvent{f, grid[c], training[f], validation[f]});
        }
        FitOptions fo;
        fo.lambda = grid[c].lambda;
        fo.gamma = grid[c].gamma;
        fo.path = options.path;
        const auto model = fit_dataset(train_sets[f], fo);
        const auto m = metrics(valid_sets[f].y.values(), predict(model, valid_sets[f].x.values()));
        s.fold_rmse.push_back(m.rmse);
        s.fold_r2.push_back(m.r2);
      }
      double rmse = 0.0, r2 = 0.0;
      for (std::size_t f = 0; f < folds.k; ++f) {
        rmse += s.fold_rmse[f];
        r2 += s.fold_r2[f];
      }
      s.mean_rmse = rmse / static_cast<double>(folds.k);
      s.mean_r2 = r2 / static_cast<double>(folds.k);
      if (!std::isfinite(s.mean_rmse)) s.error = "non-finite validation error";
    } catch (const std::exception& e) {
      s.error = e.what();
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, grid.size()));
  if (threads == 1) {
    for (std::size_t c = 0; c < grid.size(); ++c) evaluate(c);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t c = t; c < grid.size(); c += threads) evaluate(c);
      });
    }
  }

  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < report.cells.size(); ++c) {
    if (report.cells[c].error) continue;
    if (!best || better(report.cells[c], report.cells[*best])) best = c;
  }
  if (!best) throw Error(ErrorKind::numerical, "every cross-validation cell failed");
  report.selected = *best;
  return report;
}

std::string format_cv_report(const CVReport& report) {
  std::string out = "lambda,gamma,fold,rmse,r2\n";
  for (const auto& c : report.cells) {
    for (std::size_t f = 0; f < c.fold_rmse.size(); ++f) {
      out += format_double(c.cell.lambda) + "," + format_double(c.cell.gamma) + "," +
             std::to_string(f) + "," + format_double(c.fold_rmse[f]) + "," +
             format_double(c.fold_r2[f]) + "\n";
    }
  }
  out += "# summary: lambda,gamma,mean_rmse,mean_r2,status\n";
  for (const auto& c : report.cells) {
    out += "# " + format_double(c.cell.lambda) + "," + format_double(c.cell.gamma) + ",";
    if (c.error) {
      out += "nan,nan,failed: " + *c.error + "\n";
    } else {
      out += format_double(c.mean_rmse) + "," + format_double(c.mean_r2) + ",ok\n";
    }
  }
  out += "# selected_lambda = " + format_double(report.selected_cell().lambda) + "\n";
  out += "# selected_gamma = " + format_double(report.selected_cell().gamma) + "\n";
  out += "# folds = " + std::to_string(report.k) + "\n";
  return out;
}

}  // namespace anchorda
