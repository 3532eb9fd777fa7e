#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace bicscat {

using cd = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

// Failure categories used across the toolkit.  The CLI maps these onto
// process exit codes; library callers can switch on code().
enum class ErrorCode {
  invalid_parameter,    // bad argument / structure parameter out of range
  config_invalid,       // malformed or unknown run-configuration content
  cutoff_degenerate,    // a diffraction order sits on (or numerically at) its cutoff
  near_singular_system, // linear system conditioning beyond the safe threshold
  no_convergence,       // iteration budget exhausted
  branch_crossing,      // eigenvalue branch could not be followed unambiguously
  under_resolved,       // ring residual or sampling density check failed
  zero_crossing,        // a ring sample landed (numerically) on a bound state
  realization_failure,  // eigenvector could not be rotated to a real vector
  not_a_bic,            // singular-value test rejected the bound-state hypothesis
  inadmissible_m,       // reference unitary M too close to the spectrum of S0
  io_error,             // filesystem problems
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::config_invalid: return "config-invalid";
    case ErrorCode::cutoff_degenerate: return "cutoff-degenerate";
    case ErrorCode::near_singular_system: return "near-singular-system";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::branch_crossing: return "branch-crossing";
    case ErrorCode::under_resolved: return "under-resolved";
    case ErrorCode::zero_crossing: return "zero-crossing";
    case ErrorCode::realization_failure: return "realization-failure";
    case ErrorCode::not_a_bic: return "not-a-bic";
    case ErrorCode::inadmissible_m: return "inadmissible-M";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace bicscat
