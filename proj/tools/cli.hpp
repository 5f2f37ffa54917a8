#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "anchorda/error.hpp"

namespace anchorda::cli {

// 0 success, 1 validation, 2 data, 3 numerical.
int exit_code_for(ErrorKind kind);

// Runs `anchorda <args...>` in-process. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_hex(const std::string& bytes);

}  // namespace anchorda::cli
