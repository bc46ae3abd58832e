#pragma once

#include <stdexcept>
#include <string>

namespace fieldcorr {

/// Invalid input: malformed parameters, dimension mismatches, values out of
/// range. The CLI reports these with exit code 2.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix tuple that fails a structural hypothesis (symmetry, definiteness,
/// pairwise commutation). Also exit code 2.
class HypothesisError : public ConfigError {
public:
  HypothesisError(const std::string& what, double defect)
      : ConfigError(what), defect_(defect) {}
  double defect() const noexcept { return defect_; }

private:
  double defect_;
};

/// Lattice access outside a field window, or an input window too small for
/// the requested output. Exit code 3.
class WindowError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// Numerical failure (indefinite covariance, overflow of e^{t*Theta}, grid
/// too large to factor). Exit code 3.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace fieldcorr
