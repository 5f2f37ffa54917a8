#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace anchorda {

// Exact element-wise equality; false on shape mismatch.
template <class A, class B>
bool same_values(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.derived().array() == b.derived().array()).all();
}

struct GridShape {
  std::size_t n_lon = 0;
  std::size_t n_lat = 0;

  std::size_t cells() const { return n_lon * n_lat; }
  bool operator==(const GridShape&) const = default;
};

// Closed interval of calendar years.
struct YearRange {
  int first = 1870;
  int last = 1920;

  bool contains(int year) const { return year >= first && year <= last; }
  bool operator==(const YearRange&) const = default;
};

// Sample matrix X (n samples x p grid cells) with per-row model id, scenario
// and year. Immutable; the constructor enforces every invariant.
class GriddedDataset {
 public:
  GriddedDataset(Eigen::MatrixXd values, std::vector<std::string> model_ids,
                 std::vector<std::string> scenarios, std::vector<int> years, GridShape grid);

  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<std::string>& model_ids() const { return model_ids_; }
  const std::vector<std::string>& scenarios() const { return scenarios_; }
  const std::vector<int>& years() const { return years_; }
  GridShape grid() const { return grid_; }

  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }

  // Distinct model ids in order of first appearance.
  std::vector<std::string> distinct_models() const;

  // Same annotations, new values (must have the same shape).
  GriddedDataset with_values(Eigen::MatrixXd values) const;

  GriddedDataset take_rows(std::span<const std::size_t> rows) const;

  bool operator==(const GriddedDataset& other) const;

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> model_ids_;
  std::vector<std::string> scenarios_;
  std::vector<int> years_;
  GridShape grid_;
};

// Target vector Y of radiative forcing values.
class ForcingSeries {
 public:
  ForcingSeries(Eigen::VectorXd values, std::string name);

  const Eigen::VectorXd& values() const { return values_; }
  const std::string& name() const { return name_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  ForcingSeries take_rows(std::span<const std::size_t> rows) const;
  bool operator==(const ForcingSeries& other) const;

 private:
  Eigen::VectorXd values_;
  std::string name_;
};

// Anchor variables A (n x q), q >= 1.
class AnchorMatrix {
 public:
  AnchorMatrix(Eigen::MatrixXd values, std::vector<std::string> names);

  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }

  // Columns that are constant, so nothing is left after centering.
  std::vector<std::size_t> degenerate_columns() const;

  AnchorMatrix take_rows(std::span<const std::size_t> rows) const;
  bool operator==(const AnchorMatrix& other) const;

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> names_;
};

// Samples, target and (optional) anchors with matching row counts.
struct Dataset {
  GriddedDataset x;
  ForcingSeries y;
  std::optional<AnchorMatrix> anchors;

  Dataset(GriddedDataset x, ForcingSeries y, std::optional<AnchorMatrix> anchors = std::nullopt);

  std::size_t rows() const { return x.rows(); }
  Dataset take_rows(std::span<const std::size_t> rows) const;
  bool operator==(const Dataset& other) const;
};

// Column and target statistics captured at fit time. Columns whose standard
// deviation vanishes keep scale 1 and are listed in zero_variance_columns.
struct FeatureStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  double target_mean = 0.0;
  double target_scale = 1.0;
  bool target_zero_variance = false;
  YearRange baseline;
  std::vector<std::size_t> zero_variance_columns;

  static FeatureStats identity(std::size_t p);

  std::size_t size() const { return static_cast<std::size_t>(mean.size()); }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& z) const;
  Eigen::VectorXd apply_target(const Eigen::VectorXd& y) const;
  Eigen::VectorXd invert_target(const Eigen::VectorXd& z) const;

  bool operator==(const FeatureStats& other) const;
};

GriddedDataset concat_runs(std::span<const GriddedDataset> runs);

// Subtracts, per model and per column, the mean over that model's rows whose
// year lies in the baseline window. Models are processed independently.
GriddedDataset compute_anomalies(const GriddedDataset& ds, YearRange baseline);
Dataset compute_anomalies(const Dataset& ds, YearRange baseline);

struct Standardized {
  GriddedDataset x;
  ForcingSeries y;
  FeatureStats stats;
};

// Population-std standardization. With `stats` given, the frozen statistics
// are applied as-is (test-time path); otherwise they are computed from ds.
Standardized standardize(const GriddedDataset& ds, const ForcingSeries& y,
                         const std::optional<FeatureStats>& stats = std::nullopt);

FeatureStats compute_stats(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace anchorda
