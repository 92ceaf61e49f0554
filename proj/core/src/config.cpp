#include "spinn/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <set>

namespace spinn {
namespace {

using nlohmann::json;

void apply_override(json& doc, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set", "expected key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // bare strings are allowed unquoted
  }
  json* node = &doc;
  size_t start = 0;
  while (true) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("--set", "empty path segment in '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

class Reader {
 public:
  Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j.is_object()) throw ConfigError(path(""), "expected an object");
  }

  ~Reader() = default;

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError(path(it.key()), "unknown field");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& section(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(path(key), "wrong type");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ConfigError(path(key), "wrong type");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(path(key), "wrong type");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(path(key), "wrong type");
    }
    try {
      out = v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path(key), "wrong type");
    }
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(out)) throw ConfigError(path(key), "must be finite");
    }
  }

  std::string path(const std::string& key) const {
    if (prefix_.empty()) return key;
    return key.empty() ? prefix_ : prefix_ + "." + key;
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

}  // namespace

RunConfig load_config(const std::string& json_text,
                      const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("(document)", e.what());
  }
  for (const std::string& o : overrides) apply_override(doc, o);

  RunConfig c;
  Reader top(doc, "");
  top.get("problem", c.problem);
  top.get("out_dir", c.out_dir);

  static const std::set<std::string> known_problems = {
      "bounded-advection", "halfline-advection", "heat2d",     "heat3d",
      "schrodinger",       "heat-source",        "diffusivity-inference"};
  if (!c.problem.empty())
    require(known_problems.count(c.problem) > 0, "problem",
            "unknown problem id '" + c.problem + "'");

  if (top.has("basis")) {
    Reader r(top.section("basis"), "basis");
    r.get("beta0", c.beta0);
    double x_left = 0.0;
    if (r.has("x_left0")) {
      r.get("x_left0", x_left);
      c.x_left0 = x_left;
    }
    int order = 0;
    if (r.has("order0")) {
      r.get("order0", order);
      require(order >= 0, "basis.order0", "must be >= 0");
      c.order0 = order;
    }
    double g = 0.0;
    if (r.has("gamma_cross")) {
      r.get("gamma_cross", g);
      require(g < 1.0, "basis.gamma_cross", "must be < 1");
      c.gamma_cross = g;
    }
    r.finish();
    for (double b : c.beta0)
      require(b > 0.0, "basis.beta0", "entries must be positive");
  }

  if (top.has("stepping")) {
    Reader r(top.section("stepping"), "stepping");
    r.get("stages", c.stages);
    r.get("dt", c.dt);
    r.get("t_end", c.t_end);
    r.finish();
  }
  require(c.stages >= 1, "stepping.stages", "must be >= 1");
  require(c.dt > 0.0, "stepping.dt", "must be positive");
  require(c.t_end > 0.0, "stepping.t_end", "must be positive");
  const double steps = c.t_end / c.dt;
  require(std::abs(steps - std::round(steps)) < 1e-6, "stepping.t_end",
          "must be an integer multiple of dt");

  if (top.has("adaptivity")) {
    Reader r(top.section("adaptivity"), "adaptivity");
    r.get("q", c.adapt.q);
    r.get("nu", c.adapt.nu);
    r.get("rho", c.adapt.rho);
    r.get("rho0", c.adapt.rho0);
    r.get("gamma_ratio", c.adapt.gamma_ratio);
    r.get("d_min", c.adapt.d_min);
    r.get("d_max", c.adapt.d_max);
    r.get("move_threshold", c.adapt.move_threshold);
    r.get("enable_scaling", c.adapt.enable_scaling);
    r.get("enable_p_refine", c.adapt.enable_p_refine);
    r.get("enable_p_decrease", c.adapt.enable_p_decrease);
    r.get("enable_moving", c.adapt.enable_moving);
    r.finish();
    require(c.adapt.q > 0.0 && c.adapt.q < 1.0, "adaptivity.q", "must be in (0,1)");
    require(c.adapt.nu > 1.0, "adaptivity.nu", "must be > 1");
    require(c.adapt.rho > 1.0, "adaptivity.rho", "must be > 1");
    require(c.adapt.rho0 > 1.0, "adaptivity.rho0", "must be > 1");
    require(c.adapt.gamma_ratio >= 1.0, "adaptivity.gamma_ratio", "must be >= 1");
    require(c.adapt.d_min > 0.0, "adaptivity.d_min", "must be positive");
    require(c.adapt.d_max >= c.adapt.d_min, "adaptivity.d_max", "must be >= d_min");
    require(c.adapt.move_threshold >= 1.0, "adaptivity.move_threshold",
            "must be >= 1");
  }

  if (top.has("network")) {
    Reader r(top.section("network"), "network");
    r.get("hidden_layers", c.net.hidden_layers);
    r.get("width", c.net.width);
    r.get("eta", c.net.eta);
    r.get("max_epochs", c.net.max_epochs);
    r.get("tol", c.net.tol);
    r.get("seed", c.net.seed);
    r.get("warm_start", c.net.warm_start);
    r.finish();
    require(c.net.hidden_layers >= 1, "network.hidden_layers", "must be >= 1");
    require(c.net.width >= 1, "network.width", "must be >= 1");
    require(c.net.eta > 0.0, "network.eta", "must be positive");
    require(c.net.max_epochs >= 1, "network.max_epochs", "must be >= 1");
    require(c.net.tol >= 0.0, "network.tol", "must be >= 0");
  }

  if (top.has("inverse")) {
    Reader r(top.section("inverse"), "inverse");
    r.get("sigma", c.sigma);
    r.get("lambda", c.lambda);
    r.get("theta_init", c.theta_init);
    r.get("windows", c.windows);
    r.get("lambda_grid", c.lambda_grid);
    r.get("sigma_grid", c.sigma_grid);
    r.finish();
    require(c.sigma >= 0.0, "inverse.sigma", "must be >= 0");
    require(c.lambda >= 0.0, "inverse.lambda", "must be >= 0");
    require(c.windows >= 1, "inverse.windows", "must be >= 1");
    for (double l : c.lambda_grid)
      require(l >= 0.0, "inverse.lambda_grid", "entries must be >= 0");
    for (double s : c.sigma_grid)
      require(s >= 0.0, "inverse.sigma_grid", "entries must be >= 0");
  }

  if (top.has("schrodinger")) {
    Reader r(top.section("schrodinger"), "schrodinger");
    r.get("zeta", c.zeta);
    r.get("k", c.wave_k);
    r.finish();
    require(c.zeta > 0.0, "schrodinger.zeta", "must be positive");
  }

  if (top.has("fit")) {
    Reader r(top.section("fit"), "fit");
    r.get("n", c.fit_n);
    r.get("mode", c.fit_mode);
    r.finish();
    require(c.fit_n >= 2, "fit.n", "must be >= 2");
    require(c.fit_mode == "spectral" || c.fit_mode == "direct", "fit.mode",
            "must be 'spectral' or 'direct'");
  }

  if (top.has("table2")) {
    Reader r(top.section("table2"), "table2");
    r.get("dim", c.dim);
    r.get("cap", c.cap);
    r.finish();
    require(c.dim >= 1 && c.dim <= 3, "table2.dim", "must be in [1,3]");
    require(c.cap >= 0, "table2.cap", "must be >= 0");
  }

  top.finish();
  return c;
}

}  // namespace spinn
