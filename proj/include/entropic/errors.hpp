#pragma once

#include <stdexcept>
#include <string>

namespace entropic {

// Machine-parsable failure categories. The CLI prints code_name(code) on the
// first line of every error report.
enum class ErrorCode {
    invalid_input,
    invalid_loading,
    configuration,
    convergence,
    infeasible,
    no_solution,
    undefined_spread,
    infinite_divergence,
    io,
};

const char* code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition)
        throw Error(code, message);
}

} // namespace entropic
