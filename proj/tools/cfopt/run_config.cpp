#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

namespace cfopt::cli {

namespace {

using nlohmann::json;

// Visits every (name, field) pair in schema order. Keep in sync with the
// struct; the round-trip test catches omissions.
template <typename Config, typename Visitor>
void visit_fields(Config& c, Visitor&& v) {
  v("n_cells", c.n_cells);
  v("domain_max", c.domain_max);
  v("t_final", c.t_final);
  v("dt", c.dt);
  v("k0", c.k0);
  v("mu", c.mu);
  v("sum_cutoff", c.sum_cutoff);
  v("alpha0", c.alpha0);
  v("lambda", c.lambda);
  v("nu", c.nu);
  v("trunc_level", c.trunc_level);
  v("pairing", c.pairing);
  v("ic_type", c.ic_type);
  v("ic_amplitude", c.ic_amplitude);
  v("ic_center", c.ic_center);
  v("ic_width", c.ic_width);
  v("ic_support", c.ic_support);
  v("ic_csv", c.ic_csv);
  v("w", c.w);
  v("sign", c.sign);
  v("x_lo", c.x_lo);
  v("x_hi", c.x_hi);
  v("u_min", c.u_min);
  v("u_max", c.u_max);
  v("eta0", c.eta0);
  v("beta", c.beta);
  v("sigma", c.sigma);
  v("eps", c.eps);
  v("max_iter", c.max_iter);
  v("max_backtracks", c.max_backtracks);
  v("negativity_floor", c.negativity_floor);
  v("seed", c.seed);
  v("fd_h", c.fd_h);
  v("taylor_epsilons", c.taylor_epsilons);
  v("sweep_weights", c.sweep_weights);
  v("truncation_levels", c.truncation_levels);
  v("lipschitz_pairs", c.lipschitz_pairs);
  v("output_dir", c.output_dir);
}

void read(const std::string& name, const json& j, double& out) {
  if (!j.is_number()) throw ConfigError(name, "expected a number");
  out = j.get<double>();
}

void read(const std::string& name, const json& j, int& out) {
  if (!j.is_number_integer()) throw ConfigError(name, "expected an integer");
  out = j.get<int>();
}

template <typename T>
  requires std::is_unsigned_v<T>
void read(const std::string& name, const json& j, T& out) {
  if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<long long>() < 0)) {
    throw ConfigError(name, "expected a non-negative integer");
  }
  out = j.get<T>();
}

void read(const std::string& name, const json& j, std::string& out) {
  if (!j.is_string()) throw ConfigError(name, "expected a string");
  out = j.get<std::string>();
}

template <typename T>
void read(const std::string& name, const json& j, std::optional<T>& out) {
  if (j.is_null()) {
    out.reset();
    return;
  }
  T value{};
  read(name, j, value);
  out = value;
}

void read(const std::string& name, const json& j, std::vector<double>& out) {
  if (!j.is_array()) throw ConfigError(name, "expected an array of numbers");
  out.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    double v = 0.0;
    read(name + "[" + std::to_string(i) + "]", j[i], v);
    out.push_back(v);
  }
}

template <typename T>
json write(const T& v) {
  return json(v);
}

template <typename T>
json write(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

void check(bool ok, const char* field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

template <typename Fn>
void rethrow_as_config(const char* field, Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json out;
  visit_fields(cfg, [&](const char* name, const auto& field) { out[name] = write(field); });
  return out;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) {
    throw ConfigError("$", "configuration must be a JSON object");
  }
  RunConfig cfg;
  std::set<std::string> known;
  visit_fields(cfg, [&](const char* name, auto& field) {
    known.insert(name);
    if (auto it = j.find(name); it != j.end()) {
      read(name, *it, field);
    }
  });
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) {
      throw ConfigError(item.key(), "unknown configuration key");
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("$", "cannot open config file '" + path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& assignments) {
  json merged = json::parse(to_json(cfg).dump());
  for (const auto& assignment : assignments) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError(assignment, "override must have the form key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded()) {
      value = raw;
    }
    if (!merged.contains(key)) {
      throw ConfigError(key, "unknown configuration key");
    }
    merged[key] = value;
  }
  cfg = config_from_json(merged);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  apply_overrides(cfg, {assignment});
}

void RunConfig::validate() const {
  rethrow_as_config("n_cells", [&] { (void)make_grid(n_cells, domain_max); });
  rethrow_as_config("dt", [&] { (void)make_time_grid(t_final, dt); });
  rethrow_as_config("kernels", [&] { cfopt::validate(kernel_set()); });
  check(pairing == "split" || pairing == "round_up" || pairing == "round_down", "pairing",
        "expected one of split, round_up, round_down");
  check(ic_type == "gaussian" || ic_type == "csv", "ic_type", "expected gaussian or csv");
  if (ic_type == "gaussian") {
    check(ic_width > 0.0, "ic_width", "must be > 0");
    check(std::isfinite(ic_amplitude) && std::isfinite(ic_center), "ic_amplitude",
          "must be finite");
  } else {
    check(ic_csv.has_value(), "ic_csv", "required when ic_type is csv");
  }
  rethrow_as_config("cost", [&] { cost().validate(grid()); });
  rethrow_as_config("u_min", [&] { bounds().validate(); });
  rethrow_as_config("optimizer", [&] { optimizer().validate(); });
  check(fd_h > 0.0, "fd_h", "must be > 0");
  check(lipschitz_pairs >= 1, "lipschitz_pairs", "must be >= 1");
  for (std::size_t i = 0; i < taylor_epsilons.size(); ++i) {
    check(taylor_epsilons[i] > 0.0 && (i == 0 || taylor_epsilons[i] < taylor_epsilons[i - 1]),
          "taylor_epsilons", "must be positive and strictly decreasing");
  }
  check(!taylor_epsilons.empty(), "taylor_epsilons", "must not be empty");
  for (double w_i : sweep_weights) {
    check(w_i >= 0.0, "sweep_weights", "weights must be >= 0");
  }
  for (std::size_t i = 0; i < truncation_levels.size(); ++i) {
    check(truncation_levels[i] > 0.0 &&
              (i == 0 || truncation_levels[i] > truncation_levels[i - 1]),
          "truncation_levels", "must be positive and increasing");
  }
}

Grid RunConfig::grid() const { return make_grid(n_cells, domain_max); }

TimeGrid RunConfig::time_grid() const { return make_time_grid(t_final, dt); }

KernelSet RunConfig::kernel_set() const {
  KernelSet k;
  k.coagulation = {k0, mu, sum_cutoff};
  k.fragmentation = {alpha0, lambda, nu, std::nullopt};
  return trunc_level ? truncate(k, *trunc_level) : k;
}

GainPairing RunConfig::gain_pairing() const {
  if (pairing == "round_up") return GainPairing::RoundUp;
  if (pairing == "round_down") return GainPairing::RoundDown;
  return GainPairing::Split;
}

CostConfig RunConfig::cost() const { return {w, {sign, x_lo, x_hi}}; }

ControlBounds RunConfig::bounds() const { return {u_min, u_max}; }

OptimizerConfig RunConfig::optimizer() const {
  return {eta0, beta, sigma, eps, max_iter, max_backtracks};
}

Vector RunConfig::initial_condition(const Grid& g) const {
  if (ic_type == "csv") {
    Vector f = read_csv_column(*ic_csv);
    if (f.size() != g.n_cells) {
      throw ConfigError("ic_csv", "expected " + std::to_string(g.n_cells) + " values, found " +
                                      std::to_string(f.size()));
    }
    return f;
  }
  return GaussianInitial{ic_amplitude, ic_center, ic_width, ic_support}.sample(g);
}

Problem RunConfig::problem() const {
  validate();
  Problem p;
  p.grid = grid();
  p.time = time_grid();
  p.kernels = precompute(kernel_set(), p.grid, gain_pairing());
  p.initial = initial_condition(p.grid);
  p.cost = cost();
  p.bounds = bounds();
  return p;
}

Vector read_csv_column(const std::string& path, std::size_t column) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("ic_csv", "cannot open '" + path + "'");
  }
  Vector out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t c = 0; c <= column; ++c) {
      if (!std::getline(ss, cell, ',')) {
        throw ConfigError("ic_csv", "line " + std::to_string(line_no) + " has too few columns");
      }
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      out.push_back(v);
    } catch (const std::exception&) {
      if (out.empty()) continue;  // header
      throw ConfigError("ic_csv", "line " + std::to_string(line_no) + " is not numeric");
    }
  }
  return out;
}

}  // namespace cfopt::cli
