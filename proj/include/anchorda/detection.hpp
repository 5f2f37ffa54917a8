#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "anchorda/anchor_regression.hpp"
#include "anchorda/data_model.hpp"

namespace anchorda {

// Residual standard deviations (population convention) per scenario, pooled
// over models, and per (model, scenario) where that group has >= 2 rows.
// A vanishing deviation is replaced by 1e-12 * target scale and recorded.
struct ScenarioScales {
  std::map<std::string, double> pooled;
  std::map<std::pair<std::string, std::string>, double> per_model;
  std::string reference;
  std::set<std::string> degenerate;
  std::vector<std::string> warnings;

  // Per-model value when available, otherwise the pooled scenario value.
  double sigma(const std::string& scenario, const std::string& model_id = {}) const;
};

inline constexpr double kSigmaFloorFactor = 1e-12;

ScenarioScales scenario_residual_scale(const Eigen::VectorXd& residuals,
                                       std::span<const std::string> scenarios,
                                       std::span<const std::string> model_ids, double target_scale);

// Residuals Y - Yhat of `model` on `ds` (anomalies, raw units).
ScenarioScales scenario_residual_scale(const LinearModel& model, const Dataset& ds);

struct DetectionOptions {
  double z = 2.0;
  bool persistent = true;  // first detection year must be followed by detections only
  double attribution_threshold = 0.95;
};

struct YearDetection {
  int year = 0;
  std::string scenario;
  std::optional<double> y_true;
  double y_pred = 0.0;
  double half_width = 0.0;  // z * sigma
  bool detected = false;

  double ci_lo() const { return y_pred - half_width; }
  double ci_hi() const { return y_pred + half_width; }
};

// Residual-based intervals y_pred +/- z sigma. These bound where the true
// forcing may lie given the prediction error, not the mean prediction.
struct DetectionResult {
  std::vector<YearDetection> years;  // sorted by year
  std::optional<int> first_detection_year;
  std::optional<double> attribution_fraction;
  bool attribution_ok = false;
  double z = 2.0;
};

// A year is detected when the interval strictly excludes zero. Attribution is
// judged on the years from first detection onward (all years when nothing is
// detected): the truth must fall inside the interval in at least
// `attribution_threshold` of them.
DetectionResult detect_and_attribute(std::span<const int> years, const Eigen::VectorXd& y_pred,
                                     const std::optional<Eigen::VectorXd>& y_true,
                                     std::span<const double> sigma,
                                     std::span<const std::string> scenario_per_year,
                                     const DetectionOptions& options = {});

DetectionResult detect_and_attribute(std::span<const int> years, const Eigen::VectorXd& y_pred,
                                     const std::optional<Eigen::VectorXd>& y_true,
                                     const ScenarioScales& scales,
                                     std::span<const std::string> scenario_per_year,
                                     const DetectionOptions& options = {},
                                     const std::string& model_id = {});

struct SeriesDetection {
  std::string model_id;
  std::string scenario;
  DetectionResult result;
};

// One detection series per (model, scenario) run of `ds`. Scales come from the
// residuals against the dataset target; attribution is tested against the
// target multiplied by `truth_scale`.
std::vector<SeriesDetection> detect_dataset(const LinearModel& model, const Dataset& ds,
                                            const DetectionOptions& options = {},
                                            double truth_scale = 1.0);

// Columns model_id,year,scenario,y_true,y_pred,ci_lo,ci_hi,detected.
std::string format_detection_table(std::span<const SeriesDetection> series);
std::string format_detection_summary(std::span<const SeriesDetection> series);

}  // namespace anchorda
