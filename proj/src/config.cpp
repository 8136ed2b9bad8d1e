#include "kinetic/config.hpp"

#include "kinetic/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace kinetic {

using nlohmann::json;

std::string to_string(ExperimentTag tag) {
  switch (tag) {
    case ExperimentTag::SemigroupSpecular: return "semigroup_specular";
    case ExperimentTag::SemigroupDiffusive: return "semigroup_diffusive";
    case ExperimentTag::Chains: return "chains";
    case ExperimentTag::SplittingConstants: return "splitting_constants";
    case ExperimentTag::SolveLinear: return "solve_linear";
    case ExperimentTag::SolveNonlinear: return "solve_nonlinear";
    case ExperimentTag::Positivity: return "positivity";
    case ExperimentTag::Conservation: return "conservation";
  }
  return "unknown";
}

ExperimentTag parse_experiment_tag(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(ExperimentTag::Conservation); ++i) {
    const auto tag = static_cast<ExperimentTag>(i);
    if (to_string(tag) == s) return tag;
  }
  throw ConfigError("experiment", "unknown experiment tag '" + s + "'");
}

Domain DomainSpec::build() const {
  switch (kind) {
    case DomainKind::Ball: return Domain::ball(center, semi_axes[0]);
    case DomainKind::Ellipsoid: return Domain::ellipsoid(center, semi_axes);
    case DomainKind::Slab: return Domain::slab();
  }
  return Domain::slab();
}

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig s = solver;
  s.bc = bc;
  s.weight = weight;
  return s;
}

namespace {

// Object reader that remembers which keys were consumed.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_, "must be an object");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string& k) const { return obj_.contains(k); }

  const json& at(const std::string& k) {
    used_.insert(k);
    return obj_.at(k);
  }

  double number(const std::string& k, double fallback) {
    if (!has(k)) return fallback;
    const json& v = at(k);
    if (!v.is_number()) throw ConfigError(key(k), "must be a number");
    return v.get<double>();
  }

  int integer(const std::string& k, int fallback) {
    if (!has(k)) return fallback;
    const json& v = at(k);
    if (!v.is_number_integer()) throw ConfigError(key(k), "must be an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& k, bool fallback) {
    if (!has(k)) return fallback;
    const json& v = at(k);
    if (!v.is_boolean()) throw ConfigError(key(k), "must be a boolean");
    return v.get<bool>();
  }

  std::string string(const std::string& k, const std::string& fallback) {
    if (!has(k)) return fallback;
    const json& v = at(k);
    if (!v.is_string()) throw ConfigError(key(k), "must be a string");
    return v.get<std::string>();
  }

  Vec3 vec3(const std::string& k, const Vec3& fallback) {
    if (!has(k)) return fallback;
    const json& v = at(k);
    if (!v.is_array() || v.size() != 3) throw ConfigError(key(k), "must be an array of 3 numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) throw ConfigError(key(k), "must be an array of 3 numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

  std::vector<double> numbers(const std::string& k, std::vector<double> fallback) {
    if (!has(k)) return fallback;
    const json& v = at(k);
    if (!v.is_array() || v.empty()) throw ConfigError(key(k), "must be a non-empty array");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(key(k), "entries must be numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& k, std::vector<int> fallback) {
    if (!has(k)) return fallback;
    const json& v = at(k);
    if (!v.is_array() || v.empty()) throw ConfigError(key(k), "must be a non-empty array");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) throw ConfigError(key(k), "entries must be integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  Reader child(const std::string& k) { return Reader(at(k), key(k)); }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

void parse_domain(Reader r, DomainSpec& d) {
  const std::string kind = r.string("kind", "slab");
  if (kind == "slab") {
    d.kind = DomainKind::Slab;
  } else if (kind == "ball") {
    d.kind = DomainKind::Ball;
    const double radius = r.number("radius", 1.0);
    require(radius > 0.0, r.key("radius"), "must be positive");
    d.semi_axes = Vec3::Constant(radius);
    d.center = r.vec3("center", Vec3::Zero());
  } else if (kind == "ellipsoid") {
    d.kind = DomainKind::Ellipsoid;
    d.semi_axes = r.vec3("semi_axes", Vec3::Ones());
    require(d.semi_axes.minCoeff() > 0.0, r.key("semi_axes"), "must be positive");
    d.center = r.vec3("center", Vec3::Zero());
  } else {
    throw ConfigError(r.key("kind"), "must be slab, ball or ellipsoid");
  }
  r.finish();
}

void parse_collision(Reader r, CollisionParams& c) {
  c.gamma = r.number("gamma", c.gamma);
  require(c.gamma >= 0.0 && c.gamma <= 1.0, r.key("gamma"), "must lie in [0, 1]");
  c.c_phi = r.number("c_phi", c.c_phi);
  require(c.c_phi > 0.0, r.key("c_phi"), "must be positive");
  c.b_coefficients = r.numbers("b", c.b_coefficients);
  c.sphere_polar = r.integer("sphere_polar", c.sphere_polar);
  require(c.sphere_polar >= 2, r.key("sphere_polar"), "must be at least 2");
  c.sphere_azimuth = r.integer("sphere_azimuth", c.sphere_azimuth);
  require(c.sphere_azimuth >= 2, r.key("sphere_azimuth"), "must be at least 2");
  r.finish();
  try {
    CollisionModel probe(c);
  } catch (const Error& e) {
    throw ConfigError(r.key("b"), e.what());
  }
}

Weight parse_weight(Reader r) {
  const std::string kind = r.string("kind", "polynomial");
  Weight w = Weight::polynomial(10.0);
  try {
    if (kind == "polynomial") {
      w = Weight::polynomial(r.number("k", 10.0));
    } else if (kind == "stretch_exp") {
      const double kappa = r.number("kappa", 0.1);
      w = Weight::stretch_exp(kappa, r.number("alpha", 1.0));
    } else if (kind == "guo") {
      w = Weight::guo(r.number("beta", 4.0));
    } else {
      throw ConfigError(r.key("kind"), "must be polynomial, stretch_exp or guo");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(r.key("kind"), e.what());
  }
  r.finish();
  return w;
}

void parse_grid(Reader r, GridSpec& g) {
  g.velocity_n = r.integer("velocity_n", g.velocity_n);
  require(g.velocity_n >= 2 && g.velocity_n <= 64, r.key("velocity_n"), "must lie in [2, 64]");
  g.v_max = r.number("v_max", g.v_max);
  require(g.v_max > 0.0, r.key("v_max"), "must be positive");
  g.spatial_n = r.integer("spatial_n", g.spatial_n);
  require(g.spatial_n >= 1 && g.spatial_n <= 512, r.key("spatial_n"), "must lie in [1, 512]");
  r.finish();
}

void parse_solver(Reader r, SolverConfig& s) {
  s.delta = r.number("delta", s.delta);
  s.dt = r.number("dt", s.dt);
  s.T = r.number("T", s.T);
  s.tol_fixed_point = r.number("tol_fixed_point", s.tol_fixed_point);
  s.max_inner_iters = r.integer("max_inner_iters", s.max_inner_iters);
  s.max_outer_iters = r.integer("max_outer_iters", s.max_outer_iters);
  s.eta0 = r.number("eta0", s.eta0);
  s.eta1 = r.number("eta1", s.eta1);
  s.eta2 = r.number("eta2", s.eta2);
  s.burn_in = r.number("burn_in", s.burn_in);
  s.tol_moment = r.number("tol_moment", s.tol_moment);
  s.tol_pos = r.number("tol_pos", s.tol_pos);
  s.strang = r.boolean("strang", s.strang);
  s.disable_B2 = r.boolean("disable_B2", s.disable_B2);
  s.disable_Q = r.boolean("disable_Q", s.disable_Q);
  r.finish();
  s.validate();
}

void parse_initial(Reader r, InitialSpec& in) {
  in.kind = r.string("kind", in.kind);
  require(in.kind == "anisotropic" || in.kind == "bump" || in.kind == "zero", r.key("kind"),
          "must be anisotropic, bump or zero");
  in.amplitude = r.number("amplitude", in.amplitude);
  require(in.amplitude >= 0.0, r.key("amplitude"), "must be non-negative");
  in.width = r.number("width", in.width);
  require(in.width > 0.0, r.key("width"), "must be positive");
  r.finish();
}

void parse_params(Reader r, ExperimentParams& p) {
  p.times = r.numbers("times", p.times);
  for (double t : p.times) require(t > 0.0, r.key("times"), "must be positive");
  p.n_probes = r.integer("n_probes", p.n_probes);
  require(p.n_probes >= 1, r.key("n_probes"), "must be at least 1");
  p.n_chains = r.integer("n_chains", p.n_chains);
  require(p.n_chains >= 1, r.key("n_chains"), "must be at least 1");
  p.p_max = r.integer("p_max", p.p_max);
  require(p.p_max >= 1, r.key("p_max"), "must be at least 1");
  p.t_compare = r.number("t_compare", p.t_compare);
  require(p.t_compare > 0.0, r.key("t_compare"), "must be positive");
  p.decay_times = r.numbers("decay_times", p.decay_times);
  require(p.decay_times.size() >= 2, r.key("decay_times"), "needs at least two times");
  p.velocity_refine = r.integer("velocity_refine", p.velocity_refine);
  require(p.velocity_refine >= 1 && p.velocity_refine % 2 == 1, r.key("velocity_refine"),
          "must be an odd positive integer");
  p.escape_t = r.number("escape_t", p.escape_t);
  require(p.escape_t > 0.0, r.key("escape_t"), "must be positive");
  p.escape_chains = r.integer("escape_chains", p.escape_chains);
  require(p.escape_chains >= 1, r.key("escape_chains"), "must be at least 1");
  p.p_values = r.integers("p_values", p.p_values);
  for (std::size_t i = 0; i < p.p_values.size(); ++i) {
    require(p.p_values[i] >= 1, r.key("p_values"), "must be positive");
    if (i > 0) require(p.p_values[i] > p.p_values[i - 1], r.key("p_values"), "must increase");
  }
  p.x = r.vec3("x", p.x);
  p.v = r.vec3("v", p.v);
  require(p.v.norm() > 0.0, r.key("v"), "must be nonzero");
  p.deltas = r.numbers("deltas", p.deltas);
  for (double d : p.deltas) require(d > 0.0 && d < 1.0, r.key("deltas"), "must lie in (0,1)");
  if (r.has("q")) {
    const json& q = r.at("q");
    if (q.is_string() && q.get<std::string>() == "inf") {
      p.q = std::numeric_limits<double>::infinity();
    } else if (q.is_number() && q.get<double>() >= 1.0) {
      p.q = q.get<double>();
    } else {
      throw ConfigError(r.key("q"), "must be a number >= 1 or \"inf\"");
    }
  }
  p.k_tilde = r.number("k_tilde", p.k_tilde);
  p.stretch_kappa = r.number("stretch_kappa", p.stretch_kappa);
  p.stretch_alpha = r.number("stretch_alpha", p.stretch_alpha);
  p.ratio_bound = r.number("ratio_bound", p.ratio_bound);
  p.phi_margin = r.number("phi_margin", p.phi_margin);
  p.lambda_fraction = r.number("lambda_fraction", p.lambda_fraction);
  p.decay_fraction = r.number("decay_fraction", p.decay_fraction);
  p.norm_factor = r.number("norm_factor", p.norm_factor);
  p.uniqueness_scale = r.number("uniqueness_scale", p.uniqueness_scale);
  p.check_equivalence = r.boolean("check_equivalence", p.check_equivalence);
  p.check_uniqueness = r.boolean("check_uniqueness", p.check_uniqueness);
  p.tau = r.number("tau", p.tau);
  require(p.tau >= 0.0, r.key("tau"), "must be non-negative");
  p.mass_rate = r.number("mass_rate", p.mass_rate);
  p.energy_drift = r.number("energy_drift", p.energy_drift);
  p.fixed_point_tol = r.number("fixed_point_tol", p.fixed_point_tol);
  p.check_fixed_point = r.boolean("check_fixed_point", p.check_fixed_point);
  r.finish();
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig cfg;
  Reader r(doc, "");
  if (!r.has("schema_version")) throw ConfigError("schema_version", "missing");
  cfg.schema_version = r.integer("schema_version", 0);
  require(cfg.schema_version == kSchemaVersion, "schema_version",
          "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  if (!r.has("experiment")) throw ConfigError("experiment", "missing");
  cfg.experiment = parse_experiment_tag(r.string("experiment", ""));

  if (r.has("domain")) parse_domain(r.child("domain"), cfg.domain);
  if (r.has("collision")) parse_collision(r.child("collision"), cfg.collision);
  if (r.has("weight")) cfg.weight = parse_weight(r.child("weight"));
  if (r.has("bc")) {
    try {
      cfg.bc = parse_boundary_condition(r.string("bc", "specular"));
    } catch (const Error& e) {
      throw ConfigError("bc", "must be specular or diffuse");
    }
  }
  if (r.has("grid")) parse_grid(r.child("grid"), cfg.grid);
  if (r.has("solver")) parse_solver(r.child("solver"), cfg.solver);
  if (r.has("initial")) parse_initial(r.child("initial"), cfg.initial);
  if (r.has("params")) parse_params(r.child("params"), cfg.params);
  if (r.has("seed")) {
    const json& s = r.at("seed");
    if (!s.is_number_unsigned()) throw ConfigError("seed", "must be a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.output_dir = r.string("output_dir", "");
  r.finish();
  cfg.source = doc;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

void set_dotted(json& doc, const std::string& key, const json& value) {
  json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ConfigError(key, "empty parameter key");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError(key, "path does not name an object");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError(key, "path does not name an object");
  (*node)[parts.back()] = value;
}

}  // namespace kinetic
