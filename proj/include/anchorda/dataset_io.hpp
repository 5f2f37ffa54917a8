#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "anchorda/data_model.hpp"
#include "anchorda/key_values.hpp"

namespace anchorda {

// Sidecar describing a dataset table. Anchor columns are listed by name
// (the table column is `anchor:<name>`); an empty list selects every anchor
// column present in the file.
struct DatasetManifest {
  GridShape grid;
  std::string units = "K";
  YearRange baseline{1870, 1920};
  std::string target_column = "target";
  std::string target_name = "anthropogenic";
  std::vector<std::string> anchor_columns;
  std::string cell_prefix = "cell_";

  KeyValues to_key_values() const;
  static DatasetManifest from_key_values(const KeyValues& kv);
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

// `data.csv` -> `data.manifest`
std::filesystem::path manifest_path_for(const std::filesystem::path& data_path);

// Grid cell column name: prefix + zero-padded index (at least four digits).
std::string cell_column_name(const std::string& prefix, std::size_t index, std::size_t p);

// Comma-separated table: model_id, scenario, year, <target>, anchor:<name>...,
// cell_0000 ... cell_{p-1}. Cells are ordered with longitude varying fastest:
// column = lon + n_lon * lat. Row order is preserved.
Dataset load_dataset(const std::filesystem::path& path, const DatasetManifest& manifest);
Dataset load_dataset(const std::filesystem::path& path);

std::string format_dataset(const Dataset& ds, const DatasetManifest& manifest);
Dataset parse_dataset(const std::string& text, const DatasetManifest& manifest,
                      const std::string& origin = "<text>");

// Writes the table and its sidecar manifest next to it.
void save_dataset(const std::filesystem::path& path, const Dataset& ds, DatasetManifest manifest);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace anchorda
