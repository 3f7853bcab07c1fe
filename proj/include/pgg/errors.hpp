#pragma once

#include <stdexcept>
#include <string>

namespace pgg {

enum class ErrorCode {
    unsupported_dimension,
    exhaustion,
    invalid_action,
    mechanism_disabled,
    insufficient_balance,
    invalid_target,
    undefined_measure,
    se_undefined,
    infinite_weight,
    undefined_test,
    singular_design,
    not_converged,
    unsupported_model,
    ingestion,
    usage,
    io,
};

const char* error_code_name(ErrorCode code);

// Library-wide exception. `code()` gives the machine-readable category used
// by the CLI when emitting structured errors.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace pgg
