#include "anchorda/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "anchorda/error.hpp"
#include "anchorda/key_values.hpp"

namespace anchorda {

namespace {

double population_sd(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

double ScenarioScales::sigma(const std::string& scenario, const std::string& model_id) const {
  if (!model_id.empty()) {
    auto it = per_model.find({model_id, scenario});
    if (it != per_model.end()) return it->second;
  }
  auto it = pooled.find(scenario);
  if (it == pooled.end()) throw Error(ErrorKind::consistency, "no residual scale for scenario '" + scenario + "'");
  return it->second;
}

ScenarioScales scenario_residual_scale(const Eigen::VectorXd& residuals,
                                       std::span<const std::string> scenarios,
                                       std::span<const std::string> model_ids, double target_scale) {
  const auto n = static_cast<std::size_t>(residuals.size());
  if (scenarios.size() != n || model_ids.size() != n) {
    throw Error(ErrorKind::shape, "residuals, scenarios and model ids must align");
  }
  std::map<std::string, std::vector<double>> by_scenario;
  std::map<std::pair<std::string, std::string>, std::vector<double>> by_model;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = residuals(static_cast<Eigen::Index>(i));
    by_scenario[scenarios[i]].push_back(r);
    by_model[{model_ids[i], scenarios[i]}].push_back(r);
  }
  const double floor = kSigmaFloorFactor * std::abs(target_scale > 0.0 ? target_scale : 1.0);

  ScenarioScales out;
  auto scale_of = [&](const std::vector<double>& v, const std::string& key) {
    double sd = population_sd(v);
    if (!(sd > floor)) {
      out.degenerate.insert(key);
      sd = floor;
    }
    return sd;
  };
  for (const auto& [scenario, v] : by_scenario) {
    if (v.size() < 2) {
      out.warnings.push_back("scenario '" + scenario + "' has fewer than 2 rows; excluded");
      continue;
    }
    out.pooled[scenario] = scale_of(v, scenario);
  }
  if (out.pooled.empty()) throw Error(ErrorKind::data, "no scenario has enough rows for a residual scale");
  std::set<std::string> models(model_ids.begin(), model_ids.end());
  if (models.size() > 1) {
    for (const auto& [key, v] : by_model) {
      if (v.size() >= 2 && out.pooled.count(key.second)) {
        out.per_model[key] = scale_of(v, key.first + "/" + key.second);
      }
    }
  }
  out.reference = out.pooled.count("control") ? "control" : out.pooled.begin()->first;
  return out;
}

ScenarioScales scenario_residual_scale(const LinearModel& model, const Dataset& ds) {
  const Eigen::VectorXd r = ds.y.values() - predict(model, ds.x.values());
  return scenario_residual_scale(r, ds.x.scenarios(), ds.x.model_ids(), model.stats.target_scale);
}

DetectionResult detect_and_attribute(std::span<const int> years, const Eigen::VectorXd& y_pred,
                                     const std::optional<Eigen::VectorXd>& y_true,
                                     std::span<const double> sigma,
                                     std::span<const std::string> scenario_per_year,
                                     const DetectionOptions& options) {
  if (!(options.z > 0.0) || !std::isfinite(options.z)) {
    throw Error(ErrorKind::domain, "z must be a finite value > 0");
  }
  if (!(options.attribution_threshold > 0.0 && options.attribution_threshold <= 1.0)) {
    throw Error(ErrorKind::domain, "attribution threshold must lie in (0, 1]");
  }
  const std::size_t n = years.size();
  if (static_cast<std::size_t>(y_pred.size()) != n || sigma.size() != n || scenario_per_year.size() != n ||
      (y_true && static_cast<std::size_t>(y_true->size()) != n)) {
    throw Error(ErrorKind::shape, "detection inputs must be aligned per year");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return years[a] < years[b]; });

  DetectionResult out;
  out.z = options.z;
  out.years.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    if (k > 0 && years[i] == years[order[k - 1]]) {
      throw Error(ErrorKind::consistency, "year " + std::to_string(years[i]) + " appears twice in one series");
    }
    if (!(sigma[i] > 0.0)) throw Error(ErrorKind::domain, "residual scale must be > 0");
    YearDetection d;
    d.year = years[i];
    d.scenario = scenario_per_year[i];
    d.y_pred = y_pred(static_cast<Eigen::Index>(i));
    if (y_true) d.y_true = (*y_true)(static_cast<Eigen::Index>(i));
    d.half_width = options.z * sigma[i];
    d.detected = d.y_pred - d.half_width > 0.0 || d.y_pred + d.half_width < 0.0;
    out.years.push_back(std::move(d));
  }

  if (options.persistent) {
    std::optional<std::size_t> start;
    for (std::size_t k = n; k-- > 0;) {
      if (!out.years[k].detected) break;
      start = k;
    }
    if (start) out.first_detection_year = out.years[*start].year;
  } else {
    for (const auto& d : out.years) {
      if (d.detected) {
        out.first_detection_year = d.year;
        break;
      }
    }
  }

  if (y_true && n > 0) {
    std::size_t considered = 0, inside = 0;
    for (const auto& d : out.years) {
      if (out.first_detection_year && d.year < *out.first_detection_year) continue;
      ++considered;
      if (*d.y_true >= d.ci_lo() && *d.y_true <= d.ci_hi()) ++inside;
    }
    if (considered > 0) {
      out.attribution_fraction = static_cast<double>(inside) / static_cast<double>(considered);
      out.attribution_ok = *out.attribution_fraction >= options.attribution_threshold;
    }
  }
  return out;
}

DetectionResult detect_and_attribute(std::span<const int> years, const Eigen::VectorXd& y_pred,
                                     const std::optional<Eigen::VectorXd>& y_true,
                                     const ScenarioScales& scales,
                                     std::span<const std::string> scenario_per_year,
                                     const DetectionOptions& options, const std::string& model_id) {
  std::vector<double> sigma;
  sigma.reserve(scenario_per_year.size());
  for (const auto& s : scenario_per_year) sigma.push_back(scales.sigma(s, model_id));
  return detect_and_attribute(years, y_pred, y_true, sigma, scenario_per_year, options);
}

std::vector<SeriesDetection> detect_dataset(const LinearModel& model, const Dataset& ds,
                                            const DetectionOptions& options, double truth_scale) {
  const Eigen::VectorXd y_pred = predict(model, ds.x.values());
  const Eigen::VectorXd residuals = ds.y.values() - y_pred;
  const auto scales = scenario_residual_scale(residuals, ds.x.scenarios(), ds.x.model_ids(),
                                              model.stats.target_scale);

  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ds.rows(); ++i) groups[{ds.x.model_ids()[i], ds.x.scenarios()[i]}].push_back(i);

  std::vector<SeriesDetection> out;
  for (const auto& [key, rows] : groups) {
    if (!scales.pooled.count(key.second)) continue;
    std::vector<int> years;
    std::vector<std::string> scenarios;
    Eigen::VectorXd pred(static_cast<Eigen::Index>(rows.size()));
    Eigen::VectorXd truth(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(rows[k]);
      years.push_back(ds.x.years()[rows[k]]);
      scenarios.push_back(key.second);
      pred(static_cast<Eigen::Index>(k)) = y_pred(r);
      truth(static_cast<Eigen::Index>(k)) = truth_scale * ds.y.values()(r);
    }
    out.push_back({key.first, key.second,
                   detect_and_attribute(years, pred, truth, scales, scenarios, options, key.first)});
  }
  return out;
}

std::string format_detection_table(std::span<const SeriesDetection> series) {
  std::string out = "model_id,year,scenario,y_true,y_pred,ci_lo,ci_hi,detected\n";
  for (const auto& s : series) {
    for (const auto& d : s.result.years) {
      out += s.model_id + "," + std::to_string(d.year) + "," + d.scenario + "," +
             (d.y_true ? format_double(*d.y_true) : std::string("nan")) + "," + format_double(d.y_pred) +
             "," + format_double(d.ci_lo()) + "," + format_double(d.ci_hi()) + "," +
             (d.detected ? "1" : "0") + "\n";
    }
  }
  return out;
}

std::string format_detection_summary(std::span<const SeriesDetection> series) {
  std::string out = "model_id,scenario,first_detection_year,attribution_fraction,attribution_ok,z\n";
  for (const auto& s : series) {
    const auto& r = s.result;
    out += s.model_id + "," + s.scenario + "," +
           (r.first_detection_year ? std::to_string(*r.first_detection_year) : std::string("none")) + "," +
           (r.attribution_fraction ? format_double(*r.attribution_fraction) : std::string("nan")) + "," +
           (r.attribution_ok ? "1" : "0") + "," + format_double(r.z) + "\n";
  }
  return out;
}

}  // namespace anchorda
