#include "anchorda/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "anchorda/error.hpp"

namespace anchorda {

namespace {

constexpr const char* kAnchorPrefix = "anchor:";
constexpr int kManifestVersion = 1;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

double parse_cell(const std::string& s, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::data, "row " + std::to_string(row) + ", column '" + column +
                                     "': cannot parse '" + s + "' as a number");
  }
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::data, "non-finite value in row " + std::to_string(row) + ", column '" +
                                     column + "'");
  }
  return v;
}

void check_label(const std::string& s, const char* what) {
  if (s.find_first_of(",\n\r") != std::string::npos) {
    throw Error(ErrorKind::data, std::string(what) + " '" + s + "' contains a separator");
  }
}

}  // namespace

KeyValues DatasetManifest::to_key_values() const {
  KeyValues kv;
  kv.set("format_version", std::to_string(kManifestVersion));
  kv.set("grid_shape", std::to_string(grid.n_lon) + "," + std::to_string(grid.n_lat));
  kv.set("units", units);
  kv.set("baseline", std::to_string(baseline.first) + "," + std::to_string(baseline.last));
  kv.set("target_column", target_column);
  kv.set("target_name", target_name);
  std::string anchors;
  for (std::size_t i = 0; i < anchor_columns.size(); ++i) {
    if (i) anchors += ",";
    anchors += anchor_columns[i];
  }
  kv.set("anchor_columns", anchors);
  kv.set("cell_prefix", cell_prefix);
  return kv;
}

DatasetManifest DatasetManifest::from_key_values(const KeyValues& kv) {
  kv.reject_unknown({"format_version", "grid_shape", "units", "baseline", "target_column",
                     "target_name", "anchor_columns", "cell_prefix"});
  const auto version = kv.get_int("format_version", kManifestVersion);
  if (version != kManifestVersion) {
    throw Error(ErrorKind::schema, "unsupported manifest format_version " + std::to_string(version));
  }
  DatasetManifest m;
  const auto grid = split_list(kv.get("grid_shape"));
  if (grid.size() != 2) throw Error(ErrorKind::schema, "grid_shape must be 'n_lon,n_lat'");
  const auto n_lon = parse_int(grid[0], "grid_shape");
  const auto n_lat = parse_int(grid[1], "grid_shape");
  if (n_lon <= 0 || n_lat <= 0) throw Error(ErrorKind::config, "grid_shape must be positive");
  m.grid = {static_cast<std::size_t>(n_lon), static_cast<std::size_t>(n_lat)};
  m.units = kv.get_or("units", m.units);
  if (kv.has("baseline")) {
    const auto b = split_list(kv.get("baseline"));
    if (b.size() != 2) throw Error(ErrorKind::schema, "baseline must be 'first,last'");
    m.baseline = {static_cast<int>(parse_int(b[0], "baseline")),
                  static_cast<int>(parse_int(b[1], "baseline"))};
  }
  m.target_column = kv.get_or("target_column", m.target_column);
  m.target_name = kv.get_or("target_name", m.target_name);
  m.anchor_columns = split_list(kv.get_or("anchor_columns", ""));
  m.cell_prefix = kv.get_or("cell_prefix", m.cell_prefix);
  return m;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::data, "cannot open " + path.string());
  try {
    return DatasetManifest::from_key_values(KeyValues::read(path));
  } catch (const Error& e) {
    throw Error(e.kind() == ErrorKind::config ? ErrorKind::schema : e.kind(),
                path.string() + ": " + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  write_text_file(path, manifest.to_key_values().to_string());
}

std::filesystem::path manifest_path_for(const std::filesystem::path& data_path) {
  auto p = data_path;
  p.replace_extension(".manifest");
  return p;
}

std::string cell_column_name(const std::string& prefix, std::size_t index, std::size_t p) {
  std::size_t width = 4;
  for (std::size_t top = p > 0 ? p - 1 : 0; top >= 10000; top /= 10) ++width;
  std::string digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

std::string format_dataset(const Dataset& ds, const DatasetManifest& manifest) {
  const auto& x = ds.x;
  if (manifest.grid != x.grid()) throw Error(ErrorKind::shape, "manifest grid does not match dataset");
  const std::size_t p = x.cols();
  std::string out;
  out.reserve(x.rows() * p * 12 + 256);
  out += "model_id,scenario,year,";
  out += manifest.target_column;
  if (ds.anchors) {
    for (const auto& name : ds.anchors->names()) {
      check_label(name, "anchor name");
      out += ',';
      out += kAnchorPrefix;
      out += name;
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    out += ',';
    out += cell_column_name(manifest.cell_prefix, j, p);
  }
  out += '\n';
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    check_label(x.model_ids()[i], "model_id");
    check_label(x.scenarios()[i], "scenario");
    out += x.model_ids()[i];
    out += ',';
    out += x.scenarios()[i];
    out += ',';
    out += std::to_string(x.years()[i]);
    out += ',';
    out += format_double(ds.y.values()(r));
    if (ds.anchors) {
      for (Eigen::Index j = 0; j < ds.anchors->values().cols(); ++j) {
        out += ',';
        out += format_double(ds.anchors->values()(r, j));
      }
    }
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
      out += ',';
      out += format_double(x.values()(r, j));
    }
    out += '\n';
  }
  return out;
}

Dataset parse_dataset(const std::string& text, const DatasetManifest& manifest,
                      const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::schema, origin + ": empty file");
  const auto header = split_csv_line(line);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (!col.emplace(header[j], j).second) {
      throw Error(ErrorKind::schema, origin + ": duplicate column '" + header[j] + "'");
    }
  }
  auto require = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw Error(ErrorKind::schema, origin + ": missing column '" + name + "'");
    return it->second;
  };
  const std::size_t c_model = require("model_id");
  const std::size_t c_scenario = require("scenario");
  const std::size_t c_year = require("year");
  const std::size_t c_target = require(manifest.target_column);

  std::vector<std::string> anchor_names = manifest.anchor_columns;
  if (anchor_names.empty()) {
    for (const auto& h : header) {
      if (h.rfind(kAnchorPrefix, 0) == 0) anchor_names.push_back(h.substr(7));
    }
  }
  std::vector<std::size_t> c_anchor;
  for (const auto& a : anchor_names) c_anchor.push_back(require(kAnchorPrefix + a));

  const std::size_t p = manifest.grid.cells();
  if (p == 0) throw Error(ErrorKind::config, origin + ": grid shape must be positive");
  std::vector<std::size_t> c_cell(p);
  std::size_t n_cell_columns = 0;
  for (const auto& h : header) {
    if (h.rfind(manifest.cell_prefix, 0) == 0) ++n_cell_columns;
  }
  for (std::size_t j = 0; j < p; ++j) c_cell[j] = require(cell_column_name(manifest.cell_prefix, j, p));
  if (n_cell_columns != p) {
    throw Error(ErrorKind::schema, origin + ": found " + std::to_string(n_cell_columns) +
                                       " cell columns, grid shape needs " + std::to_string(p));
  }

  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_csv_line(line));
    if (rows.back().size() != header.size()) {
      throw Error(ErrorKind::schema, origin + ": row " + std::to_string(rows.size() - 1) + " has " +
                                         std::to_string(rows.back().size()) + " fields, header has " +
                                         std::to_string(header.size()));
    }
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd values(n, static_cast<Eigen::Index>(p));
  Eigen::VectorXd target(n);
  Eigen::MatrixXd anchors(n, static_cast<Eigen::Index>(c_anchor.size()));
  std::vector<std::string> models, scenarios;
  std::vector<int> years;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& f = rows[i];
    const auto r = static_cast<Eigen::Index>(i);
    models.push_back(f[c_model]);
    scenarios.push_back(f[c_scenario]);
    try {
      years.push_back(static_cast<int>(parse_int(f[c_year], "year")));
    } catch (const Error&) {
      throw Error(ErrorKind::data, origin + ": row " + std::to_string(i) + ": bad year '" + f[c_year] + "'");
    }
    target(r) = parse_cell(f[c_target], i, manifest.target_column);
    for (std::size_t a = 0; a < c_anchor.size(); ++a) {
      anchors(r, static_cast<Eigen::Index>(a)) = parse_cell(f[c_anchor[a]], i, header[c_anchor[a]]);
    }
    for (std::size_t j = 0; j < p; ++j) {
      values(r, static_cast<Eigen::Index>(j)) = parse_cell(f[c_cell[j]], i, header[c_cell[j]]);
    }
  }
  std::optional<AnchorMatrix> a;
  if (!c_anchor.empty()) a = AnchorMatrix(std::move(anchors), anchor_names);
  return Dataset(GriddedDataset(std::move(values), std::move(models), std::move(scenarios),
                                std::move(years), manifest.grid),
                 ForcingSeries(std::move(target), manifest.target_name), std::move(a));
}

Dataset load_dataset(const std::filesystem::path& path, const DatasetManifest& manifest) {
  return parse_dataset(read_text_file(path), manifest, path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, read_manifest(manifest_path_for(path)));
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds, DatasetManifest manifest) {
  manifest.grid = ds.x.grid();
  manifest.target_name = ds.y.name();
  manifest.anchor_columns = ds.anchors ? ds.anchors->names() : std::vector<std::string>{};
  write_text_file(path, format_dataset(ds, manifest));
  write_manifest(manifest_path_for(path), manifest);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::data, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::data, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::data, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace anchorda
