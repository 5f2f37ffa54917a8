#pragma once

#include <filesystem>
#include <string>

#include "anchorda/anchor_regression.hpp"

namespace anchorda {

inline constexpr int kModelFormatVersion = 1;

// Self-describing JSON record. Doubles are written in shortest round-trip
// form, so parse_model(format_model(m)) == m bit for bit.
std::string format_model(const LinearModel& model);
LinearModel parse_model(const std::string& text);

void save_model(const std::filesystem::path& path, const LinearModel& model);
LinearModel load_model(const std::filesystem::path& path);

}  // namespace anchorda
