#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "anchorda/anchor_regression.hpp"
#include "anchorda/dataset_io.hpp"
#include "anchorda/detection.hpp"
#include "anchorda/key_values.hpp"
#include "anchorda/model_io.hpp"
#include "anchorda/model_selection.hpp"
#include "anchorda/scm_sim.hpp"

namespace anchorda::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "0.1.0";

const std::set<std::string> kFitKeys{"data",  "baseline", "train_fraction", "gamma",   "lambda",
                                     "solver", "method",   "cv",             "k",       "lambdas",
                                     "gammas"};
const std::set<std::string> kCvKeys{"data", "baseline", "k", "lambdas", "gammas", "solver"};
const std::set<std::string> kDetectKeys{"model",  "data",        "baseline",  "z",
                                        "persistent", "attribution_threshold", "truth_scale", "models",
                                        "scenarios", "first_crossing"};
const std::set<std::string> kRobustnessOnlyKeys{"train_fraction", "gammas", "lambda", "solver", "deltas",
                                                "forcing",        "model",  "eval_models"};

std::set<std::string> robustness_keys() {
  auto k = SCMConfig::keys();
  k.insert(kRobustnessOnlyKeys.begin(), kRobustnessOnlyKeys.end());
  return k;
}

const std::set<std::string>& keys_for(const std::string& command) {
  static const std::map<std::string, std::set<std::string>> table{
      {"simulate", SCMConfig::keys()}, {"fit", kFitKeys},          {"cv", kCvKeys},
      {"detect", kDetectKeys},         {"robustness", robustness_keys()}};
  return table.at(command);
}

struct Invocation {
  std::string command;
  KeyValues kv;
  std::optional<std::uint64_t> seed;
  fs::path out;
  std::size_t threads = 1;
  std::optional<fs::path> config_path;
};

// Collects written files so the run manifest can list their checksums.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& text) {
    write_text_file(dir_ / name, text);
    files_[name] = sha256_hex(text);
  }
  void record(const std::string& name) { files_[name] = sha256_hex(read_text_file(dir_ / name)); }
  const std::map<std::string, std::string>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::map<std::string, std::string> files_;
};

void write_run_manifest(const Invocation& inv, Outputs& outputs, const KeyValues& effective,
                        const std::vector<fs::path>& inputs) {
  using nlohmann::json;
  json j;
  j["format"] = "anchorda-run-manifest";
  j["format_version"] = 1;
  j["tool_version"] = kToolVersion;
  j["command"] = inv.command;
  j["seed"] = inv.seed ? json(*inv.seed) : json(nullptr);
  j["threads"] = inv.threads;
  json cfg = json::object();
  for (const auto& [k, v] : effective.entries()) cfg[k] = v;
  j["config"] = cfg;
  json in = json::array();
  for (const auto& p : inputs) in.push_back({{"path", p.generic_string()}, {"sha256", sha256_hex(read_text_file(p))}});
  j["inputs"] = in;
  json out = json::object();
  for (const auto& [name, sum] : outputs.files()) out[name] = sum;
  j["outputs"] = out;
  write_text_file(outputs.dir() / "run_manifest.json", j.dump(1) + "\n");
}

std::uint64_t require_seed(const Invocation& inv) {
  if (!inv.seed) {
    throw Error(ErrorKind::config, inv.command + " needs an explicit --seed; runs never draw implicit entropy");
  }
  return *inv.seed;
}

YearRange parse_baseline(const std::string& s) {
  const auto parts = split_list(s);
  if (parts.size() != 2) throw Error(ErrorKind::config, "baseline must be 'first,last'");
  return {static_cast<int>(parse_int(parts[0], "baseline")), static_cast<int>(parse_int(parts[1], "baseline"))};
}

std::string join(const std::vector<std::string>& v, const char* sep = ",") {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : sep) + s;
  return out;
}

std::string fmt_or_nan(double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); }

std::vector<double> list_or(const KeyValues& kv, const std::string& key, std::vector<double> fallback) {
  if (!kv.has(key)) return fallback;
  auto v = parse_double_list(kv.get(key), key);
  if (v.empty()) throw Error(ErrorKind::config, key + " must not be empty");
  return v;
}

struct LoadedData {
  Dataset anomalies;
  YearRange baseline;
  std::vector<fs::path> inputs;
};

LoadedData load_anomalies(const KeyValues& kv) {
  if (!kv.has("data")) throw Error(ErrorKind::config, "missing required key 'data' (dataset table path)");
  const fs::path path = kv.get("data");
  const fs::path manifest_path = manifest_path_for(path);
  const auto manifest = in_stage("load", [&] { return read_manifest(manifest_path); });
  const auto ds = in_stage("load", [&] { return load_dataset(path, manifest); });
  const YearRange baseline = kv.has("baseline") ? parse_baseline(kv.get("baseline")) : manifest.baseline;
  auto anomalies = in_stage("anomalies", [&] { return compute_anomalies(ds, baseline); });
  return {std::move(anomalies), baseline, {path, manifest_path}};
}

Dataset filter_rows(const Dataset& ds, const std::set<std::string>& models, const std::set<std::string>& scenarios) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    if (!models.empty() && !models.count(ds.x.model_ids()[i])) continue;
    if (!scenarios.empty() && !scenarios.count(ds.x.scenarios()[i])) continue;
    rows.push_back(i);
  }
  if (rows.empty()) throw Error(ErrorKind::config, "the model/scenario filter selects no rows");
  return ds.take_rows(rows);
}

std::set<std::string> list_set(const KeyValues& kv, const std::string& key) {
  if (!kv.has(key)) return {};
  const auto v = split_list(kv.get(key));
  return {v.begin(), v.end()};
}

std::string coefficient_table(const LinearModel& model) {
  std::string out = "cell,lon,lat,beta,beta_raw\n";
  const auto n_lon = model.grid.n_lon;
  for (std::size_t j = 0; j < model.features(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double raw = model.beta(jj) * model.stats.target_scale / model.stats.scale(jj);
    out += std::to_string(j) + "," + std::to_string(j % n_lon) + "," + std::to_string(j / n_lon) + "," +
           format_double(model.beta(jj)) + "," + format_double(raw) + "\n";
  }
  return out;
}

void append_predictions(std::string& out, const Dataset& ds, const Eigen::VectorXd& pred, const char* split) {
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out += ds.x.model_ids()[i] + "," + ds.x.scenarios()[i] + "," + std::to_string(ds.x.years()[i]) + "," + split +
           "," + format_double(ds.y.values()(ii)) + "," + format_double(pred(ii)) + "\n";
  }
}

// ---------------------------------------------------------------- commands

int cmd_simulate(const Invocation& inv, std::ostream& log) {
  const auto seed = require_seed(inv);
  const auto config = in_stage("config", [&] { return SCMConfig::from_key_values(inv.kv); });
  const auto sim = in_stage("simulate", [&] { return simulate(config, seed, inv.threads); });

  DatasetManifest manifest;
  manifest.grid = config.grid;
  manifest.baseline = config.baseline;
  manifest.target_name = forcing_name(Forcing::anthropogenic);
  for (auto a : config.anchors) manifest.anchor_columns.emplace_back(forcing_name(a));

  Outputs outputs(inv.out);
  save_dataset(inv.out / "data.csv", sim.data, manifest);
  outputs.record("data.csv");
  outputs.record("data.manifest");
  outputs.write("truth.json", format_truth(sim, config));
  write_run_manifest(inv, outputs, config.to_key_values(), {});

  log << "simulated " << sim.data.rows() << " rows x " << sim.data.x.cols() << " cells ("
      << config.n_models << " models, " << config.scenarios.size() << " scenarios) -> " << inv.out.generic_string()
      << "\n";
  return 0;
}

std::vector<GridCell> cv_grid(const KeyValues& kv) {
  const auto lambdas = list_or(kv, "lambdas", default_lambda_grid());
  const auto gammas = list_or(kv, "gammas", {1.0});
  return make_grid(lambdas, gammas);
}

int cmd_fit(const Invocation& inv, std::ostream& log) {
  const auto seed = require_seed(inv);
  const auto& kv = inv.kv;
  const double fraction = kv.get_double("train_fraction", 0.75);
  const std::string method = kv.get_or("method", "anchor");
  if (method != "anchor" && method != "ridge") throw Error(ErrorKind::config, "method must be 'anchor' or 'ridge'");
  FitOptions fo;
  fo.gamma = kv.get_double("gamma", 1.0);
  fo.lambda = kv.get_double("lambda", 1.0);
  fo.path = solver_path_from_string(kv.get_or("solver", "auto"));
  fo.ridge_only = method == "ridge";
  if (fo.ridge_only && fo.gamma != 1.0) throw Error(ErrorKind::config, "method 'ridge' implies gamma = 1");
  const bool run_cv = kv.get_bool("cv", false);
  const auto k = kv.get_int("k", 3);
  if (k < 2) throw Error(ErrorKind::config, "k must be >= 2");

  auto data = load_anomalies(kv);
  const auto& ds = data.anomalies;
  const auto split = in_stage("split", [&] { return split_models(ds.x.model_ids(), fraction, seed); });
  const Dataset train = ds.take_rows(split.train_rows);
  const Dataset test = ds.take_rows(split.test_rows);

  Outputs outputs(inv.out);
  KeyValues effective = kv;
  if (run_cv) {
    if (fo.ridge_only && kv.has("gammas")) throw Error(ErrorKind::config, "method 'ridge' cannot search gammas");
    const auto grid = cv_grid(kv);
    const auto folds = in_stage("cv", [&] {
      return grouped_kfold(train.x.model_ids(), static_cast<std::size_t>(k), seed);
    });
    CVOptions co;
    co.path = fo.path;
    co.threads = inv.threads;
    const auto report = in_stage("cv", [&] { return cross_validate(train, grid, folds, co); });
    fo.lambda = report.selected_cell().lambda;
    fo.gamma = report.selected_cell().gamma;
    outputs.write("cv_report.csv", format_cv_report(report));
  }
  effective.set("gamma", format_double(fo.gamma));
  effective.set("lambda", format_double(fo.lambda));

  const auto model = in_stage("fit", [&] { return fit_dataset(train, fo); });
  const Eigen::VectorXd pred_train = predict(model, train.x.values());
  const Eigen::VectorXd pred_test = predict(model, test.x.values());
  const auto m_train = in_stage("evaluate", [&] { return metrics(train.y.values(), pred_train); });
  const auto m_test = in_stage("evaluate", [&] { return metrics(test.y.values(), pred_test); });

  std::ostringstream rep;
  rep << "# fit report\n";
  rep << "train_models = " << join(split.train_models) << "\n";
  rep << "test_models = " << join(split.test_models) << "\n";
  rep << "train_rows = " << train.rows() << "\n";
  rep << "test_rows = " << test.rows() << "\n";
  rep << "features = " << model.features() << "\n";
  rep << "method = " << method << "\n";
  rep << "gamma = " << format_double(model.gamma) << "\n";
  rep << "lambda = " << format_double(model.lambda) << "\n";
  rep << "solver = " << to_string(model.solver) << "\n";
  rep << "min_norm = " << (model.min_norm ? 1 : 0) << "\n";
  rep << "zero_variance_columns = " << model.stats.zero_variance_columns.size() << "\n";
  rep << "train_rmse = " << format_double(m_train.rmse) << "\n";
  rep << "train_r2 = " << fmt_or_nan(m_train.r2) << "\n";
  rep << "test_rmse = " << format_double(m_test.rmse) << "\n";
  rep << "test_r2 = " << fmt_or_nan(m_test.r2) << "\n";
  rep << "test_mse = " << format_double(m_test.rmse * m_test.rmse) << "\n";
  if (test.anchors) {
    const auto diag = in_stage("evaluate", [&] {
      return residual_anchor_diagnostics(model, test.x.values(), test.y.values(), test.anchors->values());
    });
    for (std::size_t j = 0; j < test.anchors->names().size(); ++j) {
      rep << "test_residual_corr_" << test.anchors->names()[j] << " = "
          << format_double(diag.correlation(static_cast<Eigen::Index>(j))) << "\n";
    }
    rep << "test_residual_projected_norm = " << format_double(diag.projected_norm) << "\n";
    rep << "residual_degenerate = " << (diag.degenerate ? 1 : 0) << "\n";
  }

  std::string predictions = "model_id,scenario,year,split,y_true,y_pred\n";
  append_predictions(predictions, train, pred_train, "train");
  append_predictions(predictions, test, pred_test, "test");

  outputs.write("model.json", format_model(model));
  outputs.write("fit_report.txt", rep.str());
  outputs.write("coefficients.csv", coefficient_table(model));
  outputs.write("predictions.csv", predictions);
  write_run_manifest(inv, outputs, effective, data.inputs);

  log << "fit gamma=" << format_double(model.gamma) << " lambda=" << format_double(model.lambda)
      << " test_rmse=" << format_double(m_test.rmse) << " test_r2=" << fmt_or_nan(m_test.r2) << "\n";
  return 0;
}

int cmd_cv(const Invocation& inv, std::ostream& log) {
  const auto seed = require_seed(inv);
  const auto& kv = inv.kv;
  const auto k = kv.get_int("k", 3);
  if (k < 2) throw Error(ErrorKind::config, "k must be >= 2");
  const auto grid = cv_grid(kv);
  auto data = load_anomalies(kv);
  const auto folds = in_stage("cv", [&] {
    return grouped_kfold(data.anomalies.x.model_ids(), static_cast<std::size_t>(k), seed);
  });
  CVOptions co;
  co.path = solver_path_from_string(kv.get_or("solver", "auto"));
  co.threads = inv.threads;
  const auto report = in_stage("cv", [&] { return cross_validate(data.anomalies, grid, folds, co); });

  Outputs outputs(inv.out);
  outputs.write("cv_report.csv", format_cv_report(report));
  write_run_manifest(inv, outputs, kv, data.inputs);
  log << "selected lambda=" << format_double(report.selected_cell().lambda)
      << " gamma=" << format_double(report.selected_cell().gamma) << " over " << grid.size() << " cells, k=" << k
      << "\n";
  return 0;
}

int cmd_detect(const Invocation& inv, std::ostream& log) {
  const auto& kv = inv.kv;
  DetectionOptions opt;
  opt.z = kv.get_double("z", 2.0);
  if (!(opt.z > 0.0) || !std::isfinite(opt.z)) throw Error(ErrorKind::domain, "z must be a finite value > 0");
  opt.persistent = !kv.get_bool("first_crossing", false) && kv.get_bool("persistent", true);
  opt.attribution_threshold = kv.get_double("attribution_threshold", 0.95);
  if (!(opt.attribution_threshold > 0.0 && opt.attribution_threshold <= 1.0)) {
    throw Error(ErrorKind::domain, "attribution_threshold must lie in (0, 1]");
  }
  const double truth_scale = kv.get_double("truth_scale", 1.0);
  if (!kv.has("model")) throw Error(ErrorKind::config, "missing required key 'model' (model file path)");
  const fs::path model_path = kv.get("model");
  const auto model = in_stage("load", [&] { return load_model(model_path); });
  auto data = load_anomalies(kv);
  const Dataset eval = in_stage("select", [&] {
    return filter_rows(data.anomalies, list_set(kv, "models"), list_set(kv, "scenarios"));
  });
  const auto series = in_stage("detect", [&] { return detect_dataset(model, eval, opt, truth_scale); });

  Outputs outputs(inv.out);
  outputs.write("detection.csv", format_detection_table(series));
  outputs.write("detection_summary.csv", format_detection_summary(series));
  auto inputs = data.inputs;
  inputs.insert(inputs.begin(), model_path);
  write_run_manifest(inv, outputs, kv, inputs);

  for (const auto& s : series) {
    log << s.model_id << " " << s.scenario << ": first detection "
        << (s.result.first_detection_year ? std::to_string(*s.result.first_detection_year) : std::string("none"))
        << ", attribution " << (s.result.attribution_ok ? "consistent" : "not consistent") << "\n";
  }
  return 0;
}

int cmd_robustness(const Invocation& inv, std::ostream& log) {
  const auto seed = require_seed(inv);
  const auto& kv = inv.kv;
  KeyValues sim_kv;
  for (const auto& [k, v] : kv.entries()) {
    if (SCMConfig::keys().count(k)) sim_kv.set(k, v);
  }
  const auto config = in_stage("config", [&] { return SCMConfig::from_key_values(sim_kv); });
  const auto deltas = list_or(kv, "deltas", {0.0, 2.0, -2.0, 5.0, -5.0, 10.0, -10.0});
  RiskOptions ro;
  ro.forcing = forcing_from_string(kv.get_or("forcing", "volcanic"));
  if (ro.forcing == Forcing::anthropogenic) throw Error(ErrorKind::domain, "only anchor forcings can be shifted");
  ro.threads = inv.threads;

  struct Candidate {
    std::string label;
    LinearModel model;
    std::optional<double> test_mse;
  };
  std::vector<Candidate> candidates;
  std::vector<fs::path> inputs;
  KeyValues effective = config.to_key_values();
  for (const auto& [k, v] : kv.entries()) {
    if (!SCMConfig::keys().count(k)) effective.set(k, v);
  }

  if (kv.has("model")) {
    const fs::path model_path = kv.get("model");
    inputs.push_back(model_path);
    candidates.push_back({"model", in_stage("load", [&] { return load_model(model_path); }), std::nullopt});
    ro.eval_models = list_set(kv, "eval_models");
  } else {
    const double fraction = kv.get_double("train_fraction", 0.75);
    const auto gammas = list_or(kv, "gammas", {1.0, 16.0});
    FitOptions fo;
    fo.lambda = kv.get_double("lambda", 1.0);
    fo.path = solver_path_from_string(kv.get_or("solver", "auto"));
    const auto sim = in_stage("simulate", [&] { return simulate(config, seed, inv.threads); });
    const auto ds = in_stage("anomalies", [&] { return compute_anomalies(sim.data, config.baseline); });
    const auto split = in_stage("split", [&] { return split_models(ds.x.model_ids(), fraction, seed); });
    const Dataset train = ds.take_rows(split.train_rows);
    const Dataset test = ds.take_rows(split.test_rows);
    ro.eval_models = {split.test_models.begin(), split.test_models.end()};
    if (kv.has("eval_models")) throw Error(ErrorKind::config, "eval_models only applies with a given model file");
    for (double g : gammas) {
      fo.gamma = g;
      auto model = in_stage("fit", [&] { return fit_dataset(train, fo); });
      const Eigen::VectorXd err = test.y.values() - predict(model, test.x.values());
      const double mse = err.squaredNorm() / static_cast<double>(err.size());
      candidates.push_back({"gamma=" + format_double(g), std::move(model), mse});
    }
  }

  std::string curve_csv = "gamma,lambda,delta,mse\n";
  std::string summary = "gamma,lambda,test_mse,supremum_mse,argmax_delta\n";
  for (const auto& c : candidates) {
    const auto curve = in_stage("risk", [&] { return worst_case_risk(c.model, config, deltas, seed, ro); });
    for (std::size_t i = 0; i < curve.deltas.size(); ++i) {
      curve_csv += format_double(c.model.gamma) + "," + format_double(c.model.lambda) + "," +
                   format_double(curve.deltas[i]) + "," + format_double(curve.mse[i]) + "\n";
    }
    summary += format_double(c.model.gamma) + "," + format_double(c.model.lambda) + "," +
               (c.test_mse ? format_double(*c.test_mse) : std::string("nan")) + "," +
               format_double(curve.supremum) + "," + format_double(curve.argmax_delta) + "\n";
    log << c.label << ": supremum mse " << format_double(curve.supremum) << " at delta "
        << format_double(curve.argmax_delta) << "\n";
  }

  Outputs outputs(inv.out);
  outputs.write("risk_curve.csv", curve_csv);
  outputs.write("risk_summary.csv", summary);
  write_run_manifest(inv, outputs, effective, inputs);
  return 0;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::numerical, "sha256 digest failed");
  }
  std::ostringstream s;
  for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return s.str();
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::schema:
    case ErrorKind::shape:
    case ErrorKind::domain:
      return 1;
    case ErrorKind::data:
    case ErrorKind::consistency:
    case ErrorKind::coverage:
      return 2;
    case ErrorKind::numerical:
      return 3;
  }
  return 3;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anchor regression for robust detection and attribution"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  struct Parsed {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    std::size_t threads = 1;
    std::map<std::string, std::string> overrides;
  };
  std::map<std::string, Parsed> parsed;
  std::map<std::string, CLI::App*> subs;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "Simulate a gridded ensemble from the structural causal model"},
      {"fit", "Anomalies, model-wise split, optional CV and anchor regression fit"},
      {"cv", "Grouped k-fold cross-validation over a lambda/gamma grid"},
      {"detect", "Per-year detection and attribution with a fitted model"},
      {"robustness", "Worst-case risk under shift interventions on an anchor forcing"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    auto& p = parsed[name];
    sub->add_option("--config", p.config, "Key-value configuration file");
    sub->add_option("--seed", p.seed, "Top-level random seed");
    sub->add_option("--out", p.out, "Output directory")->required();
    sub->add_option("--threads", p.threads, "Worker threads")->check(CLI::PositiveNumber);
    for (const auto& key : keys_for(name)) {
      sub->add_option("--" + key, p.overrides[key], "Overrides '" + key + "' from the config file");
    }
    subs[name] = sub;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  Invocation inv;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) inv.command = name;
  }
  auto* sub = subs.at(inv.command);
  const auto& p = parsed.at(inv.command);
  try {
    if (sub->count("--config")) {
      inv.config_path = p.config;
      inv.kv = KeyValues::read(p.config);
    }
    for (const auto& [key, value] : p.overrides) {
      if (sub->count("--" + key)) inv.kv.set(key, value);
    }
    inv.kv.reject_unknown(keys_for(inv.command));
    if (sub->count("--seed")) inv.seed = p.seed;
    inv.out = p.out;
    inv.threads = p.threads;

    if (inv.command == "simulate") return cmd_simulate(inv, out);
    if (inv.command == "fit") return cmd_fit(inv, out);
    if (inv.command == "cv") return cmd_cv(inv, out);
    if (inv.command == "detect") return cmd_detect(inv, out);
    return cmd_robustness(inv, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::bad_alloc&) {
    err << "error (numerical): out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace anchorda::cli
