#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace whitlab {

enum class errc {
  invalid_input,   // malformed arguments or config values
  geometry,        // contour touches a singularity, kernel pole on path, ...
  convergence,     // quadrature or series failed to reach the requested tolerance
  degenerate,      // rank probe or linear solve hit a degenerate configuration
  extraction,      // coefficient extraction failed its own residual gate
  config,          // config file cannot be parsed or validated
};

class error : public std::runtime_error {
 public:
  error(errc c, std::string msg) : std::runtime_error(std::move(msg)), code_(c) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

// Carries the best available estimate so a caller can still inspect it.
class convergence_error : public error {
 public:
  convergence_error(std::string msg, std::complex<double> best, double err)
      : error(errc::convergence, std::move(msg)), best_(best), err_(err) {}
  std::complex<double> best_estimate() const noexcept { return best_; }
  double error_estimate() const noexcept { return err_; }

 private:
  std::complex<double> best_;
  double err_;
};

[[noreturn]] inline void fail(errc c, const std::string& msg) { throw error(c, msg); }

}  // namespace whitlab
