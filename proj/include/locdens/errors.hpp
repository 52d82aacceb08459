#pragma once

#include <stdexcept>
#include <string>

namespace locdens {

// Failure taxonomy shared by all modules. The CLI maps any Error to exit
// code 2 and prints the code name so callers can dispatch on it.
enum class Errc {
  empty_window,
  max_iter_exceeded,
  not_positive_definite,
  non_finite_integrand,
  singular_update,
  derivative_unavailable,
  oscillation_too_large,
  epsilon_too_large,
  window_mass_one,
  z_exceeds_g2_over_4,
  phi1_too_large,
  infeasible_bandwidth,
  no_feasible_bandwidth,
  insufficient_cells,
  cell_skipped,
  bad_input,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code) {}
  Errc code() const { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace locdens
