#include "anchorda/scm_sim.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <thread>

#include "anchorda/error.hpp"
#include "anchorda/random.hpp"

namespace anchorda {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Separable Gaussian smoothing on the grid (periodic in longitude, truncated
// at the poles), rescaled so white-noise input yields unit variance per cell.
class GridSmoother {
 public:
  GridSmoother(GridShape grid, double length) : grid_(grid) {
    if (length <= 0.0) return;
    const int reach = std::max(1, static_cast<int>(std::ceil(3.0 * length)));
    for (int k = -reach; k <= reach; ++k) taps_.push_back(std::exp(-0.5 * k * k / (length * length)));
    reach_ = reach;

    // Longitude taps folded onto the circle so wrap-around is counted once.
    lon_.assign(grid_.n_lon, 0.0);
    for (int k = -reach; k <= reach; ++k) {
      const auto n = static_cast<int>(grid_.n_lon);
      lon_[static_cast<std::size_t>(((k % n) + n) % n)] += taps_[static_cast<std::size_t>(k + reach)];
    }
    double lon_var = 0.0;
    for (double w : lon_) lon_var += w * w;

    lat_norm_.resize(grid_.n_lat);
    for (std::size_t lat = 0; lat < grid_.n_lat; ++lat) {
      double v = 0.0;
      for (int k = -reach; k <= reach; ++k) {
        const long l = static_cast<long>(lat) + k;
        if (l >= 0 && l < static_cast<long>(grid_.n_lat)) v += taps_[static_cast<std::size_t>(k + reach)] *
                                                            taps_[static_cast<std::size_t>(k + reach)];
      }
      lat_norm_[lat] = 1.0 / std::sqrt(lon_var * v);
    }
  }

  // Cell index = lon + n_lon * lat.
  void apply(const double* white, double* out, std::vector<double>& scratch) const {
    const std::size_t nlon = grid_.n_lon, nlat = grid_.n_lat;
    if (taps_.empty()) {
      std::copy(white, white + nlon * nlat, out);
      return;
    }
    scratch.assign(nlon * nlat, 0.0);
    for (std::size_t lat = 0; lat < nlat; ++lat) {
      for (std::size_t lon = 0; lon < nlon; ++lon) {
        double acc = 0.0;
        for (std::size_t d = 0; d < nlon; ++d) {
          if (lon_[d] != 0.0) acc += lon_[d] * white[(lon + d) % nlon + nlon * lat];
        }
        scratch[lon + nlon * lat] = acc;
      }
    }
    for (std::size_t lat = 0; lat < nlat; ++lat) {
      for (std::size_t lon = 0; lon < nlon; ++lon) {
        double acc = 0.0;
        for (int k = -reach_; k <= reach_; ++k) {
          const long l = static_cast<long>(lat) + k;
          if (l < 0 || l >= static_cast<long>(nlat)) continue;
          acc += taps_[static_cast<std::size_t>(k + reach_)] * scratch[lon + nlon * static_cast<std::size_t>(l)];
        }
        out[lon + nlon * lat] = acc * lat_norm_[lat];
      }
    }
  }

  Eigen::VectorXd field(Rng& rng) const {
    const auto p = static_cast<Eigen::Index>(grid_.cells());
    Eigen::VectorXd white(p), out(p);
    for (Eigen::Index j = 0; j < p; ++j) white(j) = rng.normal();
    std::vector<double> scratch;
    apply(white.data(), out.data(), scratch);
    return out;
  }

 private:
  GridShape grid_;
  std::vector<double> taps_;
  std::vector<double> lon_;
  std::vector<double> lat_norm_;
  int reach_ = 0;
};

std::string model_label(std::size_t m, std::size_t count) {
  std::string digits = std::to_string(m + 1);
  const std::size_t width = std::max<std::size_t>(2, std::to_string(count).size());
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "M" + digits;
}

std::array<double, 3> loading_means_from(const KeyValues& kv, const std::array<double, 3>& d) {
  return {kv.get_double("loading_solar", d[0]), kv.get_double("loading_volcanic", d[1]),
          kv.get_double("loading_anthropogenic", d[2])};
}

}  // namespace

const char* forcing_name(Forcing f) {
  switch (f) {
    case Forcing::solar: return "solar";
    case Forcing::volcanic: return "volcanic";
    case Forcing::anthropogenic: return "anthropogenic";
  }
  return "unknown";
}

Forcing forcing_from_string(const std::string& s) {
  if (s == "solar" || s == "1" || s == "F1") return Forcing::solar;
  if (s == "volcanic" || s == "2" || s == "F2") return Forcing::volcanic;
  if (s == "anthropogenic" || s == "3" || s == "F3") return Forcing::anthropogenic;
  throw Error(ErrorKind::config, "unknown forcing '" + s + "'");
}

double SCMConfig::noise_scale_for(const std::string& scenario) const {
  auto it = noise_scale.find(scenario);
  return it == noise_scale.end() ? 1.0 : it->second;
}

void SCMConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, "simulator config: " + msg); };
  if (grid.n_lon == 0 || grid.n_lat == 0) fail("grid_shape must be positive in both dimensions");
  if (years < 2) fail("years must be >= 2");
  if (n_models < 1) fail("n_models must be >= 1");
  if (scenarios.empty()) fail("at least one scenario is required");
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (scenarios[i].empty()) fail("empty scenario label");
    for (std::size_t j = 0; j < i; ++j) {
      if (scenarios[i] == scenarios[j]) fail("duplicate scenario '" + scenarios[i] + "'");
    }
  }
  if (!(sigma_int >= 0.0)) fail("sigma_int must be >= 0");
  if (!(corr_length >= 0.0) || !(loading_length >= 0.0)) fail("correlation lengths must be >= 0");
  if (!(solar_period > 0.0)) fail("solar_period must be > 0");
  if (!(solar_noise >= 0.0)) fail("solar_noise must be >= 0");
  if (!(volcanic_rate >= 0.0 && volcanic_rate <= 1.0)) fail("volcanic_rate must lie in [0, 1]");
  if (!(volcanic_mean >= 0.0)) fail("volcanic_mean must be >= 0");
  if (!(volcanic_decay >= 0.0 && volcanic_decay < 1.0)) fail("volcanic_decay must lie in [0, 1)");
  if (ramp_start_index < 0 || ramp_start_index >= years) fail("ramp_start_index must lie in [0, years)");
  if (!(ramp_exponent > 0.0)) fail("ramp_exponent must be > 0");
  if (!(bias_range >= 0.0)) fail("bias_range must be >= 0");
  if (!(confounding >= 0.0)) fail("confounding must be >= 0");
  for (const auto& [s, v] : noise_scale) {
    if (!(v >= 0.0)) fail("noise scale for '" + s + "' must be >= 0");
  }
  for (double s : shift) {
    if (!std::isfinite(s)) fail("shift must be finite");
  }
  if (anchors.empty()) fail("at least one anchor forcing is required");
  for (auto a : anchors) {
    if (a == Forcing::anthropogenic) fail("the target forcing cannot be an anchor");
  }
  if (baseline.first > baseline.last) fail("baseline window is empty");
  const int last_year = start_year + years - 1;
  if (baseline.last < start_year || baseline.first > last_year) {
    fail("baseline window lies outside the simulated years");
  }
}

const std::set<std::string>& SCMConfig::keys() {
  static const std::set<std::string> k{
      "grid_shape",       "years",           "start_year",          "n_models",
      "scenarios",        "control_scenario", "solar_amplitude",    "solar_period",
      "solar_noise",      "volcanic_rate",   "volcanic_mean",       "volcanic_decay",
      "ramp_start_index", "ramp_max",        "ramp_exponent",       "loading_solar",
      "loading_volcanic", "loading_anthropogenic", "loading_variability", "loading_length",
      "polar_amplification", "sigma_int",    "corr_length",         "noise_scales",
      "bias_range",       "confounding",     "anchors",             "shift_solar",
      "shift_volcanic",   "shift_onset_year", "baseline"};
  return k;
}

KeyValues SCMConfig::to_key_values() const {
  KeyValues kv;
  kv.set("grid_shape", std::to_string(grid.n_lon) + "," + std::to_string(grid.n_lat));
  kv.set("years", std::to_string(years));
  kv.set("start_year", std::to_string(start_year));
  kv.set("n_models", std::to_string(n_models));
  std::string sc;
  for (const auto& s : scenarios) sc += (sc.empty() ? "" : ",") + s;
  kv.set("scenarios", sc);
  kv.set("control_scenario", control_scenario);
  kv.set("solar_amplitude", format_double(solar_amplitude));
  kv.set("solar_period", format_double(solar_period));
  kv.set("solar_noise", format_double(solar_noise));
  kv.set("volcanic_rate", format_double(volcanic_rate));
  kv.set("volcanic_mean", format_double(volcanic_mean));
  kv.set("volcanic_decay", format_double(volcanic_decay));
  kv.set("ramp_start_index", std::to_string(ramp_start_index));
  kv.set("ramp_max", format_double(ramp_max));
  kv.set("ramp_exponent", format_double(ramp_exponent));
  kv.set("loading_solar", format_double(loading_mean[0]));
  kv.set("loading_volcanic", format_double(loading_mean[1]));
  kv.set("loading_anthropogenic", format_double(loading_mean[2]));
  kv.set("loading_variability", format_double(loading_variability));
  kv.set("loading_length", format_double(loading_length));
  kv.set("polar_amplification", format_double(polar_amplification));
  kv.set("sigma_int", format_double(sigma_int));
  kv.set("corr_length", format_double(corr_length));
  std::string ns;
  for (const auto& [s, v] : noise_scale) ns += (ns.empty() ? "" : ",") + s + ":" + format_double(v);
  kv.set("noise_scales", ns);
  kv.set("bias_range", format_double(bias_range));
  kv.set("confounding", format_double(confounding));
  std::string an;
  for (auto a : anchors) an += std::string(an.empty() ? "" : ",") + forcing_name(a);
  kv.set("anchors", an);
  kv.set("shift_solar", format_double(shift[0]));
  kv.set("shift_volcanic", format_double(shift[1]));
  kv.set("shift_onset_year", std::to_string(shift_onset_year));
  kv.set("baseline", std::to_string(baseline.first) + "," + std::to_string(baseline.last));
  return kv;
}

SCMConfig SCMConfig::from_key_values(const KeyValues& kv) {
  kv.reject_unknown(keys());
  SCMConfig c;
  if (kv.has("grid_shape")) {
    const auto g = split_list(kv.get("grid_shape"));
    if (g.size() != 2) throw Error(ErrorKind::config, "grid_shape must be 'n_lon,n_lat'");
    const auto a = parse_int(g[0], "grid_shape"), b = parse_int(g[1], "grid_shape");
    if (a <= 0 || b <= 0) throw Error(ErrorKind::config, "grid_shape must be positive in both dimensions");
    c.grid = {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
  }
  c.years = static_cast<int>(kv.get_int("years", c.years));
  c.start_year = static_cast<int>(kv.get_int("start_year", c.start_year));
  const auto n_models = kv.get_int("n_models", static_cast<long long>(c.n_models));
  if (n_models < 1) throw Error(ErrorKind::config, "n_models must be >= 1");
  c.n_models = static_cast<std::size_t>(n_models);
  if (kv.has("scenarios")) c.scenarios = split_list(kv.get("scenarios"));
  c.control_scenario = kv.get_or("control_scenario", c.control_scenario);
  c.solar_amplitude = kv.get_double("solar_amplitude", c.solar_amplitude);
  c.solar_period = kv.get_double("solar_period", c.solar_period);
  c.solar_noise = kv.get_double("solar_noise", c.solar_noise);
  c.volcanic_rate = kv.get_double("volcanic_rate", c.volcanic_rate);
  c.volcanic_mean = kv.get_double("volcanic_mean", c.volcanic_mean);
  c.volcanic_decay = kv.get_double("volcanic_decay", c.volcanic_decay);
  c.ramp_start_index = static_cast<int>(kv.get_int("ramp_start_index", c.ramp_start_index));
  c.ramp_max = kv.get_double("ramp_max", c.ramp_max);
  c.ramp_exponent = kv.get_double("ramp_exponent", c.ramp_exponent);
  c.loading_mean = loading_means_from(kv, c.loading_mean);
  c.loading_variability = kv.get_double("loading_variability", c.loading_variability);
  c.loading_length = kv.get_double("loading_length", c.loading_length);
  c.polar_amplification = kv.get_double("polar_amplification", c.polar_amplification);
  c.sigma_int = kv.get_double("sigma_int", c.sigma_int);
  c.corr_length = kv.get_double("corr_length", c.corr_length);
  if (kv.has("noise_scales")) {
    for (const auto& item : split_list(kv.get("noise_scales"))) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw Error(ErrorKind::config, "noise_scales entries must be scenario:value");
      c.noise_scale[trim(item.substr(0, colon))] = parse_double(item.substr(colon + 1), "noise_scales");
    }
  }
  c.bias_range = kv.get_double("bias_range", c.bias_range);
  c.confounding = kv.get_double("confounding", c.confounding);
  if (kv.has("anchors")) {
    c.anchors.clear();
    for (const auto& a : split_list(kv.get("anchors"))) c.anchors.push_back(forcing_from_string(a));
  }
  c.shift[0] = kv.get_double("shift_solar", 0.0);
  c.shift[1] = kv.get_double("shift_volcanic", 0.0);
  c.shift_onset_year = static_cast<int>(kv.get_int("shift_onset_year", c.shift_onset_year));
  if (kv.has("baseline")) {
    const auto b = split_list(kv.get("baseline"));
    if (b.size() != 2) throw Error(ErrorKind::config, "baseline must be 'first,last'");
    c.baseline = {static_cast<int>(parse_int(b[0], "baseline")), static_cast<int>(parse_int(b[1], "baseline"))};
  }
  c.validate();
  return c;
}

SimOutput simulate(const SCMConfig& config, std::uint64_t seed, std::size_t threads) {
  config.validate();
  const std::size_t p = config.grid.cells();
  const auto P = static_cast<Eigen::Index>(p);
  const std::size_t T = static_cast<std::size_t>(config.years);
  const std::size_t n_runs = config.runs();
  const auto n = static_cast<Eigen::Index>(config.rows());

  const GridSmoother loading_smoother(config.grid, config.loading_length);
  const GridSmoother noise_smoother(config.grid, config.corr_length);

  SimOutput out{Dataset(GriddedDataset(Eigen::MatrixXd(0, P), {}, {}, {}, config.grid),
                        ForcingSeries(Eigen::VectorXd(0), forcing_name(Forcing::anthropogenic))),
                {}, {}, {}, {}, 0};
  out.seed = seed;

  // Loadings w1..w3 and the confounder pattern w_h.
  {
    auto rng = Rng::stream(seed, "loadings");
    out.loadings.resize(P, 3);
    for (int k = 0; k < 3; ++k) {
      const Eigen::VectorXd f = loading_smoother.field(rng);
      out.loadings.col(k) = config.loading_mean[static_cast<std::size_t>(k)] *
                            (1.0 + config.loading_variability * f.array()).matrix();
    }
    if (config.grid.n_lat > 1) {
      const double half = 0.5 * static_cast<double>(config.grid.n_lat - 1);
      for (Eigen::Index j = 0; j < P; ++j) {
        const double lat = static_cast<double>(static_cast<std::size_t>(j) / config.grid.n_lon);
        out.loadings(j, 2) *= 1.0 + config.polar_amplification * std::abs(lat - half) / half;
      }
    }
    out.confounder_loading = loading_smoother.field(rng);
  }

  Eigen::MatrixXd bias(P, static_cast<Eigen::Index>(config.n_models));
  for (std::size_t m = 0; m < config.n_models; ++m) {
    auto rng = Rng::stream(seed, "model-bias", m);
    const double offset = rng.uniform(-config.bias_range, config.bias_range);
    out.model_bias.push_back(offset);
    bias.col(static_cast<Eigen::Index>(m)) =
        (offset + 0.3 * config.bias_range * loading_smoother.field(rng).array()).matrix();
  }

  Eigen::MatrixXd x(n, P);
  out.forcings.resize(n, 3);
  std::vector<std::string> model_ids(static_cast<std::size_t>(n)), scenarios(static_cast<std::size_t>(n));
  std::vector<int> years(static_cast<std::size_t>(n));

  const Eigen::VectorXd w1 = out.loadings.col(0), w2 = out.loadings.col(1), w3 = out.loadings.col(2);
  const Eigen::VectorXd& wh = out.confounder_loading;
  const double ramp_span = std::max(1.0, static_cast<double>(config.years - 1 - config.ramp_start_index));

  auto generate_run = [&](std::size_t run) {
    const std::size_t m = run / config.scenarios.size();
    const std::string& scenario = config.scenarios[run % config.scenarios.size()];
    const bool forced = scenario != config.control_scenario;
    const double noise_sd = config.sigma_int * config.noise_scale_for(scenario);
    auto rng = Rng::stream(seed, "run", run);
    const double phase = rng.uniform(0.0, kTwoPi);
    const std::string label = model_label(m, config.n_models);
    double aerosol = 0.0;
    Eigen::VectorXd white(P), noise(P);
    std::vector<double> scratch;
    for (std::size_t t = 0; t < T; ++t) {
      const auto row = static_cast<Eigen::Index>(run * T + t);
      const int year = config.start_year + static_cast<int>(t);

      double f1 = config.solar_amplitude * std::sin(kTwoPi * static_cast<double>(t) / config.solar_period + phase) +
                  config.solar_noise * rng.normal();
      const double arrival = rng.uniform();
      const double size = rng.exponential(config.volcanic_mean);
      aerosol = config.volcanic_decay * aerosol + (arrival < config.volcanic_rate ? size : 0.0);
      const double h = rng.normal();
      double f2 = -aerosol + config.confounding * h;
      double f3 = 0.0;
      if (forced && static_cast<int>(t) >= config.ramp_start_index) {
        const double s = static_cast<double>(static_cast<int>(t) - config.ramp_start_index) / ramp_span;
        f3 = config.ramp_max * std::pow(s, config.ramp_exponent);
      }
      if (year >= config.shift_onset_year) {
        if (config.shift[0] != 0.0) f1 += config.shift[0];
        if (config.shift[1] != 0.0) f2 += config.shift[1];
        if (config.shift[2] != 0.0) f3 += config.shift[2];
      }

      for (Eigen::Index j = 0; j < P; ++j) white(j) = rng.normal();
      noise_smoother.apply(white.data(), noise.data(), scratch);

      auto xr = x.row(row);
      xr = (f1 * w1 + f2 * w2 + f3 * w3).transpose();
      xr += bias.col(static_cast<Eigen::Index>(m)).transpose();
      xr += (noise_sd * noise + (config.confounding * h) * wh).transpose();

      out.forcings(row, 0) = f1;
      out.forcings(row, 1) = f2;
      out.forcings(row, 2) = f3;
      model_ids[static_cast<std::size_t>(row)] = label;
      scenarios[static_cast<std::size_t>(row)] = scenario;
      years[static_cast<std::size_t>(row)] = year;
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n_runs));
  if (workers == 1) {
    for (std::size_t r = 0; r < n_runs; ++r) generate_run(r);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < n_runs; r += workers) generate_run(r);
      });
    }
  }

  Eigen::MatrixXd anchor_values(n, static_cast<Eigen::Index>(config.anchors.size()));
  std::vector<std::string> anchor_names;
  for (std::size_t a = 0; a < config.anchors.size(); ++a) {
    anchor_values.col(static_cast<Eigen::Index>(a)) = out.forcings.col(static_cast<int>(config.anchors[a]) - 1);
    anchor_names.emplace_back(forcing_name(config.anchors[a]));
  }
  Eigen::VectorXd target = out.forcings.col(2);
  out.data = Dataset(GriddedDataset(std::move(x), std::move(model_ids), std::move(scenarios), std::move(years),
                                    config.grid),
                     ForcingSeries(std::move(target), forcing_name(Forcing::anthropogenic)),
                     AnchorMatrix(std::move(anchor_values), std::move(anchor_names)));
  return out;
}

SCMConfig shift_intervention(const SCMConfig& config, Forcing forcing, double delta, bool allow_target) {
  if (forcing == Forcing::anthropogenic && !allow_target) {
    throw Error(ErrorKind::domain, "shifting the target forcing changes the law of Y; pass allow_target to force it");
  }
  if (!std::isfinite(delta)) throw Error(ErrorKind::domain, "shift delta must be finite");
  SCMConfig out = config;
  out.shift[static_cast<std::size_t>(static_cast<int>(forcing) - 1)] += delta;
  return out;
}

RiskCurve worst_case_risk(const LinearModel& model, const SCMConfig& base_config,
                          std::span<const double> deltas, std::uint64_t seed, const RiskOptions& options) {
  if (deltas.empty()) throw Error(ErrorKind::config, "worst_case_risk needs at least one shift");
  SCMConfig base = base_config;
  if (options.n_eval_models > 0) base.n_models = options.n_eval_models;
  RiskCurve curve;
  for (double delta : deltas) {
    const auto cfg = shift_intervention(base, options.forcing, delta);
    auto sim = simulate(cfg, seed, options.threads);
    Dataset eval = compute_anomalies(sim.data, cfg.baseline);
    if (!options.eval_models.empty()) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < eval.rows(); ++i) {
        if (options.eval_models.count(eval.x.model_ids()[i])) rows.push_back(i);
      }
      if (rows.empty()) throw Error(ErrorKind::config, "none of the evaluation models were simulated");
      eval = eval.take_rows(rows);
    }
    const Eigen::VectorXd err = eval.y.values() - predict(model, eval.x.values());
    const double mse = err.squaredNorm() / static_cast<double>(err.size());
    curve.deltas.push_back(delta);
    curve.mse.push_back(mse);
    if (curve.mse.size() == 1 || mse > curve.supremum) {
      curve.supremum = mse;
      curve.argmax_delta = delta;
    }
  }
  return curve;
}

std::string format_truth(const SimOutput& sim, const SCMConfig& config) {
  using nlohmann::json;
  json j;
  j["format"] = "anchorda-sim-truth";
  j["format_version"] = 1;
  j["seed"] = sim.seed;
  json cfg = json::object();
  const auto kv = config.to_key_values();
  for (const auto& [k, v] : kv.entries()) cfg[k] = v;
  j["config"] = cfg;
  auto col = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  j["loadings"] = {{"solar", col(sim.loadings.col(0))},
                   {"volcanic", col(sim.loadings.col(1))},
                   {"anthropogenic", col(sim.loadings.col(2))},
                   {"confounder", col(sim.confounder_loading)}};
  j["model_bias"] = sim.model_bias;
  return j.dump(1) + "\n";
}

}  // namespace anchorda
