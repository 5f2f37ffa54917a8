#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "anchorda/anchor_regression.hpp"
#include "anchorda/data_model.hpp"
#include "anchorda/key_values.hpp"

namespace anchorda {

// Forcing indices follow the causal diagram: F1 solar, F2 volcanic,
// F3 anthropogenic (the regression target).
enum class Forcing : int { solar = 1, volcanic = 2, anthropogenic = 3 };

const char* forcing_name(Forcing f);
Forcing forcing_from_string(const std::string& s);

// Structural causal model F1, F2, F3 -> x on a lon x lat grid:
//
//   x_t = F1_t w1 + F2_t w2 + F3_t w3 + bias(model) + noise_t
//
// F1: sinusoid with per-run phase plus white noise.
// F2: minus an aerosol load that decays geometrically and is refilled by
//     sparse eruptions (Bernoulli arrivals, exponential sizes).
// F3: zero before the ramp, then ramp_max * s^ramp_exponent with s rising
//     linearly from 0 to 1 over the remaining years; zero in control runs.
// Loadings are smooth random fields around a positive mean; noise is spatially
// smoothed Gaussian noise scaled to sigma_int per cell. With confounding c > 0
// a latent h_t ~ N(0,1) adds c h_t to F2 and c h_t w_h to x.
//
// Shift interventions add delta to a forcing in every year >= shift_onset_year.
struct SCMConfig {
  GridShape grid{16, 8};
  int years = 231;
  int start_year = 1870;
  std::size_t n_models = 3;
  std::vector<std::string> scenarios{"control", "rcp85"};  // one run per model and scenario
  std::string control_scenario = "control";

  double solar_amplitude = 0.5;
  double solar_period = 11.0;
  double solar_noise = 0.1;

  double volcanic_rate = 0.06;
  double volcanic_mean = 2.0;
  double volcanic_decay = 0.4;

  int ramp_start_index = 120;
  double ramp_max = 4.0;
  double ramp_exponent = 1.0;

  std::array<double, 3> loading_mean{0.4, 0.5, 0.5};
  double loading_variability = 0.4;
  double loading_length = 2.0;  // in grid cells
  double polar_amplification = 0.5;

  double sigma_int = 0.3;
  double corr_length = 0.75;  // in grid cells; 0 gives white noise
  std::map<std::string, double> noise_scale;  // per scenario, default 1
  double bias_range = 2.0;
  double confounding = 0.0;

  std::vector<Forcing> anchors{Forcing::volcanic};
  std::array<double, 3> shift{0.0, 0.0, 0.0};
  int shift_onset_year = 1921;
  YearRange baseline{1870, 1920};

  std::size_t runs() const { return n_models * scenarios.size(); }
  std::size_t rows() const { return runs() * static_cast<std::size_t>(years); }
  double noise_scale_for(const std::string& scenario) const;

  // Throws a configuration error on the first violated constraint.
  void validate() const;

  KeyValues to_key_values() const;
  static SCMConfig from_key_values(const KeyValues& kv);
  static const std::set<std::string>& keys();
};

struct SimOutput {
  Dataset data;             // x, y = F3, anchors = configured forcings
  Eigen::MatrixXd forcings;  // n x 3, columns F1 F2 F3
  Eigen::MatrixXd loadings;  // p x 3, columns w1 w2 w3
  Eigen::VectorXd confounder_loading;  // w_h (p)
  std::vector<double> model_bias;      // scalar offset per model
  std::uint64_t seed = 0;
};

// Deterministic in (config, seed); independent of `threads`.
SimOutput simulate(const SCMConfig& config, std::uint64_t seed, std::size_t threads = 1);

// Adds delta to the named forcing. Shifting the target (F3) changes the law of
// Y and is rejected unless allow_target is set.
SCMConfig shift_intervention(const SCMConfig& config, Forcing forcing, double delta,
                             bool allow_target = false);

struct RiskOptions {
  Forcing forcing = Forcing::volcanic;
  std::set<std::string> eval_models;  // empty: every simulated model
  std::size_t n_eval_models = 0;      // > 0 overrides config.n_models
  std::size_t threads = 1;
};

struct RiskCurve {
  std::vector<double> deltas;
  std::vector<double> mse;
  double supremum = 0.0;
  double argmax_delta = 0.0;
};

// Mean squared prediction error of `model` on data simulated under each shift
// (same seed for every delta), after per-model anomaly removal. The supremum
// is the empirical worst case over the tested shifts.
RiskCurve worst_case_risk(const LinearModel& model, const SCMConfig& base_config,
                          std::span<const double> deltas, std::uint64_t seed,
                          const RiskOptions& options = {});

// JSON sidecar with seed, config echo and ground-truth loadings.
std::string format_truth(const SimOutput& sim, const SCMConfig& config);

}  // namespace anchorda
