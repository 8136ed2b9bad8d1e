#pragma once

#include "kinetic/boundary.hpp"
#include "kinetic/collision.hpp"
#include "kinetic/geometry.hpp"
#include "kinetic/solver.hpp"
#include "kinetic/weights.hpp"

#include "json.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace kinetic {

inline constexpr int kSchemaVersion = 1;

enum class ExperimentTag {
  SemigroupSpecular,
  SemigroupDiffusive,
  Chains,
  SplittingConstants,
  SolveLinear,
  SolveNonlinear,
  Positivity,
  Conservation,
};

std::string to_string(ExperimentTag tag);
ExperimentTag parse_experiment_tag(const std::string& s);

struct DomainSpec {
  DomainKind kind = DomainKind::Slab;
  Vec3 center = Vec3::Zero();
  Vec3 semi_axes = Vec3::Ones();

  Domain build() const;
};

struct GridSpec {
  int velocity_n = 12;
  double v_max = 6.0;
  int spatial_n = 32;
};

/// Initial perturbation f0 (F0 = mu + f0 for full-form runs).
struct InitialSpec {
  // anisotropic: (v1^2 - v2^2) mu; bump: mu (1 + cos-bump in x); zero
  std::string kind = "anisotropic";
  double amplitude = 1e-2;  // weighted sup norm (anisotropic) or bump height
  double width = 0.25;      // bump radius
};

/// Tag-specific parameters; unused fields keep their defaults.
struct ExperimentParams {
  std::vector<double> times{0.5, 1.0, 2.0, 4.0};
  int n_probes = 1000;
  int n_chains = 2000;
  int p_max = 64;
  double t_compare = 0.3;
  std::vector<double> decay_times{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  int velocity_refine = 3;
  double escape_t = 10.0;
  int escape_chains = 1000000;
  std::vector<int> p_values{4, 8, 16, 32};
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3(1.0, 0.0, 0.0);
  std::vector<double> deltas{0.4, 0.2, 0.1, 0.05};
  double q = std::numeric_limits<double>::infinity();
  double k_tilde = 8.0;
  double stretch_kappa = 0.1;
  double stretch_alpha = 1.0;
  double ratio_bound = 0.5;
  double phi_margin = 0.1;
  double lambda_fraction = 0.3;
  double decay_fraction = 0.8;
  double norm_factor = 3.0;
  double uniqueness_scale = 10.0;
  bool check_equivalence = true;
  bool check_uniqueness = true;
  double tau = 1.0;
  double mass_rate = 1e-5;
  double energy_drift = 1e-4;
  double fixed_point_tol = 1e-10;
  bool check_fixed_point = true;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  ExperimentTag experiment = ExperimentTag::SolveNonlinear;
  DomainSpec domain;
  CollisionParams collision;
  Weight weight = Weight::polynomial(10.0);
  BoundaryCondition bc = BoundaryCondition::Specular;
  GridSpec grid;
  SolverConfig solver;
  InitialSpec initial;
  ExperimentParams params;
  std::uint64_t seed = 1;
  std::string output_dir;
  nlohmann::json source;  // the document as read, echoed into the report

  /// Solver settings with bc and weight copied in.
  SolverConfig solver_config() const;
};

/// Strict parse: unknown keys and out-of-range values raise ConfigError
/// naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Sets a dotted key ("solver.delta") in a JSON document.
void set_dotted(nlohmann::json& doc, const std::string& key, const nlohmann::json& value);

}  // namespace kinetic
