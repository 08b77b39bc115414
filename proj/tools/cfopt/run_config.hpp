#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfopt/grid.hpp"
#include "cfopt/kernels.hpp"
#include "cfopt/optimizer.hpp"
#include "cfopt/problem.hpp"

namespace cfopt::cli {

/// Schema violation; `field` is the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Flat run configuration. Defaults reproduce the reference test case:
/// 800 cells on [0, 25], T = 1, dt = 0.005, K = (1/20)(1+x)^(1/4)(1+y)^(1/4)
/// cut at x + y = 25, alpha = sqrt(x)/5, binary fragmentation, Gaussian
/// initial datum 2 exp(-(x - 7.5)^2 / 50), window [0, 5].
struct RunConfig {
  // grid
  std::size_t n_cells = 800;
  double domain_max = 25.0;
  // time
  double t_final = 1.0;
  double dt = 0.005;
  // kernels
  double k0 = 0.05;
  double mu = 0.25;
  std::optional<double> sum_cutoff = 25.0;
  double alpha0 = 0.2;
  double lambda = 0.5;
  double nu = 0.0;
  std::optional<double> trunc_level;
  std::string pairing = "split";
  // initial condition
  std::string ic_type = "gaussian";
  double ic_amplitude = 2.0;
  double ic_center = 7.5;
  double ic_width = 50.0;
  double ic_support = 25.0;
  std::optional<std::string> ic_csv;
  // cost
  double w = 1.0;
  double sign = 1.0;
  double x_lo = 0.0;
  double x_hi = 5.0;
  // control box
  double u_min = 0.1;
  double u_max = 3.0;
  // optimizer
  double eta0 = 0.1;
  double beta = 0.5;
  double sigma = 1e-4;
  double eps = 0.075;
  int max_iter = 200;
  int max_backtracks = 40;
  // diagnostics and studies
  double negativity_floor = -1e-6;
  std::uint64_t seed = 42;
  double fd_h = 1e-5;
  std::vector<double> taylor_epsilons = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
  std::vector<double> sweep_weights = {0.2, 1.0, 5.0};
  std::vector<double> truncation_levels = {10.0, 15.0, 20.0, 25.0};
  int lipschitz_pairs = 20;
  // output
  std::optional<std::string> output_dir;

  /// Re-validates every parameter range of the owning modules.
  void validate() const;

  [[nodiscard]] Grid grid() const;
  [[nodiscard]] TimeGrid time_grid() const;
  [[nodiscard]] KernelSet kernel_set() const;
  [[nodiscard]] GainPairing gain_pairing() const;
  [[nodiscard]] CostConfig cost() const;
  [[nodiscard]] ControlBounds bounds() const;
  [[nodiscard]] OptimizerConfig optimizer() const;
  [[nodiscard]] Vector initial_condition(const Grid& grid) const;
  [[nodiscard]] Problem problem() const;
};

nlohmann::ordered_json to_json(const RunConfig& cfg);

/// Strict: unknown keys and type mismatches raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Applies one `key=value` override; value is parsed as JSON when possible,
/// otherwise taken as a string.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Applies several key=value overrides at once and validates the result.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& assignments);

/// Reads one column of numbers (optionally with a header) from a CSV file.
Vector read_csv_column(const std::string& path, std::size_t column = 0);

}  // namespace cfopt::cli
