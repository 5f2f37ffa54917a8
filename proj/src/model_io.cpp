#include "anchorda/model_io.hpp"

#include <json.hpp>

#include "anchorda/dataset_io.hpp"
#include "anchorda/error.hpp"

namespace anchorda {

namespace {

using nlohmann::json;

json to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string format_model(const LinearModel& m) {
  json j;
  j["format"] = "anchorda-linear-model";
  j["format_version"] = kModelFormatVersion;
  j["p"] = m.features();
  j["grid_shape"] = {m.grid.n_lon, m.grid.n_lat};
  j["target_name"] = m.target_name;
  j["gamma"] = m.gamma;
  j["lambda"] = m.lambda;
  j["intercept"] = m.intercept;
  j["solver"] = to_string(m.solver);
  j["min_norm"] = m.min_norm;
  j["beta"] = to_json(m.beta);
  json s;
  s["mean"] = to_json(m.stats.mean);
  s["scale"] = to_json(m.stats.scale);
  s["target_mean"] = m.stats.target_mean;
  s["target_scale"] = m.stats.target_scale;
  s["target_zero_variance"] = m.stats.target_zero_variance;
  s["baseline"] = {m.stats.baseline.first, m.stats.baseline.last};
  s["zero_variance_columns"] = m.stats.zero_variance_columns;
  j["feature_stats"] = s;
  return j.dump(1) + "\n";
}

LinearModel parse_model(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "anchorda-linear-model") throw Error(ErrorKind::schema, "not a model file");
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorKind::schema, "unsupported model format_version");
    }
    LinearModel m;
    m.beta = vector_from(j.at("beta"));
    const auto p = j.at("p").get<std::size_t>();
    const auto grid = j.at("grid_shape").get<std::vector<std::size_t>>();
    if (grid.size() != 2 || grid[0] * grid[1] != p || m.features() != p) {
      throw Error(ErrorKind::schema, "model dimensions are inconsistent");
    }
    m.grid = {grid[0], grid[1]};
    m.target_name = j.at("target_name").get<std::string>();
    m.gamma = j.at("gamma").get<double>();
    m.lambda = j.at("lambda").get<double>();
    m.intercept = j.at("intercept").get<double>();
    m.solver = solver_path_from_string(j.at("solver").get<std::string>());
    m.min_norm = j.at("min_norm").get<bool>();
    const auto& s = j.at("feature_stats");
    m.stats.mean = vector_from(s.at("mean"));
    m.stats.scale = vector_from(s.at("scale"));
    m.stats.target_mean = s.at("target_mean").get<double>();
    m.stats.target_scale = s.at("target_scale").get<double>();
    m.stats.target_zero_variance = s.at("target_zero_variance").get<bool>();
    const auto b = s.at("baseline").get<std::vector<int>>();
    if (b.size() != 2) throw Error(ErrorKind::schema, "bad baseline in model file");
    m.stats.baseline = {b[0], b[1]};
    m.stats.zero_variance_columns = s.at("zero_variance_columns").get<std::vector<std::size_t>>();
    if (m.stats.size() != p || static_cast<std::size_t>(m.stats.scale.size()) != p) {
      throw Error(ErrorKind::schema, "feature statistics do not match p");
    }
    if (!m.beta.allFinite()) throw Error(ErrorKind::data, "non-finite coefficients in model file");
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema, std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const LinearModel& model) {
  write_text_file(path, format_model(model));
}

LinearModel load_model(const std::filesystem::path& path) {
  return parse_model(read_text_file(path));
}

}  // namespace anchorda
