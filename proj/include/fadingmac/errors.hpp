// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fadingmac {

/// API misuse: mismatched dimensions, invalid arguments, unsupported sizes.
class contract_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested allocation cannot exist (e.g. power on an all-zero gain law).
class infeasible_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver hit its cap; carries the per-user budget residuals.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// Scenario text could not be parsed; names the key and line.
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& message, std::string key, int line)
      : std::runtime_error(message + " (key '" + key + "', line " +
                           std::to_string(line) + ")"),
        key_(std::move(key)),
        line_(line) {}
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace fadingmac
