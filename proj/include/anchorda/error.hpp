#pragma once

#include <stdexcept>
#include <string>

namespace anchorda {

enum class ErrorKind {
  config,       // invalid parameters or configuration
  schema,       // missing or malformed columns
  shape,        // dimension mismatch
  domain,       // argument outside its mathematical domain
  data,         // non-finite or unreadable values
  consistency,  // duplicate or contradictory annotations
  coverage,     // a model lacks rows in a required window
  numerical,    // solver failure
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Prefixes the message with a pipeline stage name, keeping the kind.
template <class F>
decltype(auto) in_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(stage) + ": " + e.what());
  }
}

}  // namespace anchorda
