#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "homodens/error.hpp"

namespace homodens::cli {

namespace {

using nlohmann::json;

const json* find(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& j, const char* key) {
  const json* v = find(j, key);
  if (!v) throw ConfigError(key, std::string("missing required field '") + key + "'");
  if (!v->is_number()) throw ConfigError(key, std::string("field '") + key + "' must be a number");
  const double x = v->get<double>();
  if (!std::isfinite(x)) throw ConfigError(key, std::string("field '") + key + "' must be finite");
  return x;
}

double number_or(const json& j, const char* key, double fallback) { return find(j, key) ? number(j, key) : fallback; }

double positive(const json& j, const char* key, std::optional<double> fallback = std::nullopt) {
  const double x = (fallback && !find(j, key)) ? *fallback : number(j, key);
  if (!(x > 0.0)) throw ConfigError(key, std::string("field '") + key + "' must be positive");
  return x;
}

std::string text_or(const json& j, const char* key, const std::string& fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_string()) throw ConfigError(key, std::string("field '") + key + "' must be a string");
  return v->get<std::string>();
}

// "potential" and "fast" may be a bare name or {"name": ..., extra params}.
std::string named(const json& j, const char* key, const std::string& fallback, const json** params) {
  *params = nullptr;
  const json* v = find(j, key);
  if (!v) return fallback;
  if (v->is_string()) return v->get<std::string>();
  if (v->is_object()) {
    *params = v;
    const json* n = find(*v, "name");
    if (!n || !n->is_string()) throw ConfigError(std::string(key) + ".name", std::string("field '") + key + ".name' must be a string");
    return n->get<std::string>();
  }
  throw ConfigError(key, std::string("field '") + key + "' must be a name or an object with a name");
}

}  // namespace

bool RunConfig::is_2d() const { return model::builtin_potentials().is_2d(potential); }

double RunConfig::step() const { return h ? *h : eps * eps * eps; }

model::ProblemSpec RunConfig::problem() const {
  const auto& cat = model::builtin_potentials();
  return {cat.slow(potential, mu), cat.fast(fast, L), sigma2, eps, x0[0]};
}

model::ProblemSpec2D RunConfig::problem_2d() const {
  const auto& cat = model::builtin_potentials();
  return {cat.slow_2d(potential), cat.fast_2d(potential), sigma2, eps, {x0[0], x0[1]}};
}

sim::SimConfig RunConfig::sim_config() const {
  sim::SimConfig c;
  c.T = T;
  c.h = step();
  c.seed = seed;
  c.burn_in = burn_in;
  return c;
}

numerics::Grid1D RunConfig::grid_1d() const { return {grid.lo, grid.hi, grid.count}; }

numerics::Box2D RunConfig::grid_2d() const { return {grid_1d(), grid_1d()}; }

RunConfig parse_config(const json& j, bool require_T) {
  if (!j.is_object()) throw ConfigError("config", "config must be a JSON object");
  RunConfig c;
  const auto& cat = model::builtin_potentials();

  const json* pot = nullptr;
  c.potential = named(j, "potential", c.potential, &pot);
  if (!cat.is_2d(c.potential)) (void)cat.slow(c.potential);  // CatalogError on unknown names
  c.mu = number_or(pot ? *pot : j, "mu", number_or(j, "mu", 0.0));

  const json* fast = nullptr;
  c.fast = named(j, "fast", c.fast, &fast);
  c.L = positive(fast && find(*fast, "L") ? *fast : j, "L", c.L);
  if (!cat.is_2d(c.potential)) (void)cat.fast(c.fast, c.L);

  c.eps = positive(j, "eps");
  c.sigma2 = positive(j, "sigma2", 1.0);
  if (require_T || find(j, "T")) c.T = positive(j, "T");

  if (const json* h = find(j, "h")) {
    if (h->is_string()) {
      if (h->get<std::string>() != "auto") throw ConfigError("h", "field 'h' must be a positive number or \"auto\"");
    } else {
      c.h = positive(j, "h");
    }
  }

  if (const json* s = find(j, "seed")) {
    if (!s->is_number_integer() || (!s->is_number_unsigned() && s->get<std::int64_t>() < 0))
      throw ConfigError("seed", "field 'seed' must be a nonnegative integer");
    c.seed = s->get<std::uint64_t>();
  }

  if (const json* n = find(j, "N")) {
    if (!n->is_number_integer() || n->get<std::int64_t>() < 1 || n->get<std::int64_t>() > 4096)
      throw ConfigError("N", "field 'N' must be an integer in [1, 4096]");
    c.N = n->get<int>();
  }

  c.mode = sim::parse_mode(text_or(j, "mode", "multiscale"));
  if (cat.is_2d(c.potential) && c.mode != sim::Mode::Multiscale)
    throw ConfigError("mode", "2D runs support multiscale mode only");

  if (cat.is_2d(c.potential)) c.grid = {-2.0, 2.0, 201};
  if (const json* g = find(j, "grid")) {
    if (!g->is_object()) throw ConfigError("grid", "field 'grid' must be an object {lo, hi, count}");
    c.grid.lo = number_or(*g, "lo", c.grid.lo);
    c.grid.hi = number_or(*g, "hi", c.grid.hi);
    if (const json* cnt = find(*g, "count")) {
      if (!cnt->is_number_integer() || cnt->get<std::int64_t>() < 2)
        throw ConfigError("grid.count", "field 'grid.count' must be an integer >= 2");
      c.grid.count = cnt->get<std::size_t>();
    }
    if (!(c.grid.hi > c.grid.lo)) throw ConfigError("grid", "grid needs hi > lo");
  }

  if (const json* x = find(j, "x0")) {
    if (x->is_number()) {
      c.x0 = {x->get<double>(), 0.0};
    } else if (x->is_array() && x->size() == 2 && (*x)[0].is_number() && (*x)[1].is_number()) {
      c.x0 = {(*x)[0].get<double>(), (*x)[1].get<double>()};
    } else {
      throw ConfigError("x0", "field 'x0' must be a number or a pair of numbers");
    }
  }

  c.burn_in = number_or(j, "burn_in", 0.0);
  if (c.burn_in < 0.0) throw ConfigError("burn_in", "field 'burn_in' must be nonnegative");
  if (require_T && c.burn_in >= c.T) throw ConfigError("burn_in", "burn_in must be shorter than T");
  if (c.h && require_T && *c.h > c.T) throw ConfigError("h", "step h exceeds the horizon T");
  return c;
}

RunConfig load_config(const std::filesystem::path& path, bool require_T) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", "config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("config") && j["config"].is_object()) return parse_config(j["config"], require_T);
  return parse_config(j, require_T);
}

json to_json(const RunConfig& c) {
  json j;
  j["potential"] = c.potential;
  if (!c.is_2d()) {
    j["fast"] = c.fast;
    j["mu"] = c.mu;
  }
  j["L"] = c.L;
  j["eps"] = c.eps;
  j["sigma2"] = c.sigma2;
  j["T"] = c.T;
  j["h"] = c.h ? json(*c.h) : json("auto");
  j["seed"] = c.seed;
  j["N"] = c.N;
  j["grid"] = {{"lo", c.grid.lo}, {"hi", c.grid.hi}, {"count", c.grid.count}};
  j["mode"] = std::string(sim::to_string(c.mode));
  if (c.is_2d())
    j["x0"] = {c.x0[0], c.x0[1]};
  else
    j["x0"] = c.x0[0];
  j["burn_in"] = c.burn_in;
  return j;
}

}  // namespace homodens::cli
