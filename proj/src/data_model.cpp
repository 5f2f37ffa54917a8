#include "anchorda/data_model.hpp"

#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "anchorda/error.hpp"

namespace anchorda {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "configuration error";
    case ErrorKind::schema: return "schema error";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::data: return "data error";
    case ErrorKind::consistency: return "consistency error";
    case ErrorKind::coverage: return "coverage error";
    case ErrorKind::numerical: return "numerical error";
  }
  return "error";
}

namespace {

void require_finite_rows(const Eigen::MatrixXd& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!m.row(i).allFinite()) {
      throw Error(ErrorKind::data,
                  std::string("non-finite entry in ") + what + " at row " + std::to_string(i));
    }
  }
}

template <class T>
std::vector<T> take(const std::vector<T>& v, std::span<const std::size_t> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(v.at(r));
  return out;
}

Eigen::MatrixXd take_matrix_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= static_cast<std::size_t>(m.rows())) {
      throw Error(ErrorKind::shape, "row index " + std::to_string(rows[i]) + " out of range");
    }
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

bool zero_variance(double mean, double sd) { return sd == 0.0 || sd <= 1e-12 * std::abs(mean); }

}  // namespace

// ---------------------------------------------------------------------------
// GriddedDataset

GriddedDataset::GriddedDataset(Eigen::MatrixXd values, std::vector<std::string> model_ids,
                               std::vector<std::string> scenarios, std::vector<int> years,
                               GridShape grid)
    : values_(std::move(values)),
      model_ids_(std::move(model_ids)),
      scenarios_(std::move(scenarios)),
      years_(std::move(years)),
      grid_(grid) {
  const auto n = rows();
  if (model_ids_.size() != n || scenarios_.size() != n || years_.size() != n) {
    throw Error(ErrorKind::shape, "annotation vectors must have one entry per row");
  }
  if (grid_.cells() != cols()) {
    throw Error(ErrorKind::shape, "grid shape " + std::to_string(grid_.n_lon) + "x" +
                                      std::to_string(grid_.n_lat) + " does not match " +
                                      std::to_string(cols()) + " columns");
  }
  require_finite_rows(values_, "values");

  std::unordered_set<std::string> seen;
  seen.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string key = model_ids_[i];
    key += '\x1f';
    key += scenarios_[i];
    key += '\x1f';
    key += std::to_string(years_[i]);
    if (!seen.insert(std::move(key)).second) {
      throw Error(ErrorKind::consistency, "duplicate (model, scenario, year) = (" + model_ids_[i] +
                                              ", " + scenarios_[i] + ", " +
                                              std::to_string(years_[i]) + ") at row " +
                                              std::to_string(i));
    }
  }
}

std::vector<std::string> GriddedDataset::distinct_models() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& m : model_ids_) {
    if (seen.insert(m).second) out.push_back(m);
  }
  return out;
}

GriddedDataset GriddedDataset::with_values(Eigen::MatrixXd values) const {
  if (values.rows() != values_.rows() || values.cols() != values_.cols()) {
    throw Error(ErrorKind::shape, "replacement values must keep the dataset shape");
  }
  return GriddedDataset(std::move(values), model_ids_, scenarios_, years_, grid_);
}

GriddedDataset GriddedDataset::take_rows(std::span<const std::size_t> rows) const {
  return GriddedDataset(take_matrix_rows(values_, rows), take(model_ids_, rows),
                        take(scenarios_, rows), take(years_, rows), grid_);
}

bool GriddedDataset::operator==(const GriddedDataset& other) const {
  return grid_ == other.grid_ && model_ids_ == other.model_ids_ &&
         scenarios_ == other.scenarios_ && years_ == other.years_ &&
         same_values(values_, other.values_);
}

// ---------------------------------------------------------------------------
// ForcingSeries / AnchorMatrix / Dataset

ForcingSeries::ForcingSeries(Eigen::VectorXd values, std::string name)
    : values_(std::move(values)), name_(std::move(name)) {
  require_finite_rows(values_, "target");
}

ForcingSeries ForcingSeries::take_rows(std::span<const std::size_t> rows) const {
  return ForcingSeries(take_matrix_rows(values_, rows), name_);
}

bool ForcingSeries::operator==(const ForcingSeries& other) const {
  return name_ == other.name_ && same_values(values_, other.values_);
}

AnchorMatrix::AnchorMatrix(Eigen::MatrixXd values, std::vector<std::string> names)
    : values_(std::move(values)), names_(std::move(names)) {
  if (values_.cols() < 1) throw Error(ErrorKind::shape, "anchor matrix needs at least one column");
  if (names_.size() != cols()) {
    throw Error(ErrorKind::shape, "anchor names must match the anchor column count");
  }
  require_finite_rows(values_, "anchors");
}

std::vector<std::size_t> AnchorMatrix::degenerate_columns() const {
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    const double mean = values_.col(j).mean();
    const double sd = std::sqrt((values_.col(j).array() - mean).square().mean());
    if (values_.rows() == 0 || zero_variance(mean, sd)) out.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

AnchorMatrix AnchorMatrix::take_rows(std::span<const std::size_t> rows) const {
  return AnchorMatrix(take_matrix_rows(values_, rows), names_);
}

bool AnchorMatrix::operator==(const AnchorMatrix& other) const {
  return names_ == other.names_ && same_values(values_, other.values_);
}

Dataset::Dataset(GriddedDataset x_, ForcingSeries y_, std::optional<AnchorMatrix> anchors_)
    : x(std::move(x_)), y(std::move(y_)), anchors(std::move(anchors_)) {
  if (y.size() != x.rows()) throw Error(ErrorKind::shape, "target length does not match dataset rows");
  if (anchors && anchors->rows() != x.rows()) {
    throw Error(ErrorKind::shape, "anchor rows do not match dataset rows");
  }
}

Dataset Dataset::take_rows(std::span<const std::size_t> rows) const {
  std::optional<AnchorMatrix> a;
  if (anchors) a = anchors->take_rows(rows);
  return Dataset(x.take_rows(rows), y.take_rows(rows), std::move(a));
}

bool Dataset::operator==(const Dataset& other) const {
  return x == other.x && y == other.y && anchors == other.anchors;
}

// ---------------------------------------------------------------------------
// FeatureStats

FeatureStats FeatureStats::identity(std::size_t p) {
  FeatureStats s;
  s.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  s.scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p));
  return s;
}

Eigen::MatrixXd FeatureStats::apply(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != size()) {
    throw Error(ErrorKind::shape, "feature statistics cover " + std::to_string(size()) +
                                      " columns, data has " + std::to_string(x.cols()));
  }
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::MatrixXd FeatureStats::invert(const Eigen::MatrixXd& z) const {
  if (static_cast<std::size_t>(z.cols()) != size()) {
    throw Error(ErrorKind::shape, "feature statistics do not match data width");
  }
  Eigen::MatrixXd x = z.array().rowwise() * scale.transpose().array();
  x.rowwise() += mean.transpose();
  return x;
}

Eigen::VectorXd FeatureStats::apply_target(const Eigen::VectorXd& y) const {
  return (y.array() - target_mean) / target_scale;
}

Eigen::VectorXd FeatureStats::invert_target(const Eigen::VectorXd& z) const {
  return (z.array() * target_scale + target_mean).matrix();
}

bool FeatureStats::operator==(const FeatureStats& other) const {
  return same_values(mean, other.mean) && same_values(scale, other.scale) &&
         target_mean == other.target_mean && target_scale == other.target_scale &&
         target_zero_variance == other.target_zero_variance && baseline == other.baseline &&
         zero_variance_columns == other.zero_variance_columns;
}

FeatureStats compute_stats(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() < 1) throw Error(ErrorKind::shape, "cannot compute statistics of an empty dataset");
  if (y.size() != x.rows()) throw Error(ErrorKind::shape, "target length does not match rows");
  FeatureStats s;
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double sd = std::sqrt((x.col(j).array() - s.mean(j)).square().mean());
    if (zero_variance(s.mean(j), sd)) {
      s.scale(j) = 1.0;
      s.zero_variance_columns.push_back(static_cast<std::size_t>(j));
    } else {
      s.scale(j) = sd;
    }
  }
  s.target_mean = y.mean();
  const double ysd = std::sqrt((y.array() - s.target_mean).square().mean());
  if (zero_variance(s.target_mean, ysd)) {
    s.target_scale = 1.0;
    s.target_zero_variance = true;
  } else {
    s.target_scale = ysd;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Operations

GriddedDataset concat_runs(std::span<const GriddedDataset> runs) {
  if (runs.empty()) throw Error(ErrorKind::shape, "concat_runs needs at least one run");
  const GridShape grid = runs.front().grid();
  std::size_t n = 0;
  for (const auto& r : runs) {
    if (r.grid() != grid || r.cols() != runs.front().cols()) {
      throw Error(ErrorKind::shape, "runs differ in grid shape or column count");
    }
    n += r.rows();
  }
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.cells()));
  std::vector<std::string> models, scenarios;
  std::vector<int> years;
  models.reserve(n);
  scenarios.reserve(n);
  years.reserve(n);
  Eigen::Index offset = 0;
  for (const auto& r : runs) {
    values.middleRows(offset, static_cast<Eigen::Index>(r.rows())) = r.values();
    offset += static_cast<Eigen::Index>(r.rows());
    models.insert(models.end(), r.model_ids().begin(), r.model_ids().end());
    scenarios.insert(scenarios.end(), r.scenarios().begin(), r.scenarios().end());
    years.insert(years.end(), r.years().begin(), r.years().end());
  }
  return GriddedDataset(std::move(values), std::move(models), std::move(scenarios),
                        std::move(years), grid);
}

GriddedDataset compute_anomalies(const GriddedDataset& ds, YearRange baseline) {
  if (baseline.first > baseline.last) {
    throw Error(ErrorKind::config, "baseline window is empty");
  }
  std::map<std::string, std::vector<std::size_t>> rows_of, baseline_rows_of;
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    rows_of[ds.model_ids()[i]].push_back(i);
    if (baseline.contains(ds.years()[i])) baseline_rows_of[ds.model_ids()[i]].push_back(i);
  }
  Eigen::MatrixXd out = ds.values();
  for (const auto& [model, rows] : rows_of) {
    auto it = baseline_rows_of.find(model);
    if (it == baseline_rows_of.end()) {
      throw Error(ErrorKind::coverage, "model '" + model + "' has no rows in baseline window " +
                                           std::to_string(baseline.first) + "-" +
                                           std::to_string(baseline.last));
    }
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(out.cols());
    for (auto r : it->second) mean += ds.values().row(static_cast<Eigen::Index>(r));
    mean /= static_cast<double>(it->second.size());
    for (auto r : rows) out.row(static_cast<Eigen::Index>(r)) -= mean;
  }
  return ds.with_values(std::move(out));
}

Dataset compute_anomalies(const Dataset& ds, YearRange baseline) {
  return Dataset(compute_anomalies(ds.x, baseline), ds.y, ds.anchors);
}

Standardized standardize(const GriddedDataset& ds, const ForcingSeries& y,
                         const std::optional<FeatureStats>& stats) {
  if (y.size() != ds.rows()) throw Error(ErrorKind::shape, "target length does not match rows");
  FeatureStats s;
  if (stats) {
    if (stats->size() != ds.cols()) {
      throw Error(ErrorKind::shape, "feature statistics were computed for " +
                                        std::to_string(stats->size()) + " columns, dataset has " +
                                        std::to_string(ds.cols()));
    }
    s = *stats;
  } else {
    s = compute_stats(ds.values(), y.values());
  }
  return Standardized{ds.with_values(s.apply(ds.values())),
                      ForcingSeries(s.apply_target(y.values()), y.name()), std::move(s)};
}

}  // namespace anchorda
