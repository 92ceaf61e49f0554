#pragma once

#include "spinn/adaptivity.hpp"
#include "spinn/collocation.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinn {

/// Validation failure naming the offending field (dotted path).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Everything a CLI run needs. Unset basis fields fall back to the problem's
/// defaults.
struct RunConfig {
  std::string problem;

  // basis
  std::vector<double> beta0;  // per dimension; empty = problem default
  std::optional<double> x_left0;
  std::optional<int> order0;
  std::optional<double> gamma_cross;

  // stepping
  int stages = 4;
  double dt = 0.1;
  double t_end = 1.0;

  AdaptiveConfig adapt;
  NetConfig net;

  // inverse settings
  double sigma = 0.0;
  double lambda = 0.0;
  double theta_init = 1.0;
  int windows = 1;
  std::vector<double> lambda_grid, sigma_grid;  // recover sweeps; empty = scalars

  // schrodinger parameters
  double zeta = 1.0;
  double wave_k = 1.0;

  // fit settings
  int fit_n = 200;
  std::string fit_mode = "spectral";

  // table2 settings
  int dim = 3;
  int cap = 9;

  std::string out_dir = ".";
};

/// Parses and validates a JSON config document after applying --set
/// overrides ("dotted.path=value"; the value is parsed as JSON when
/// possible, else taken as a string). Throws ConfigError.
RunConfig load_config(const std::string& json_text,
                      const std::vector<std::string>& overrides = {});

}  // namespace spinn
