#pragma once

#include "kinetic/config.hpp"
#include "kinetic/report.hpp"
#include "kinetic/solver.hpp"

#include <memory>
#include <string>

namespace kinetic {

inline constexpr const char* kVersion = "0.1.0";

struct Grids {
  std::shared_ptr<const SpatialGrid> space;
  std::shared_ptr<const VelocityGrid> velocity;
};

Grids make_grids(const ExperimentConfig& cfg);

/// Initial perturbation f0 on the system grid per cfg.initial:
///   anisotropic: c (v1^2 - v2^2) mu, scaled to |f0|_{L^inf(m)} = amplitude;
///   bump: amplitude mu(v) cos^2(pi r / 2 width) for r = |x - c| < width,
///         r = |x1 - 1/2| in the slab;
///   zero.
Field initial_perturbation(const ExperimentConfig& cfg, const KineticSystem& sys);

/// mu sampled on the grid in every cell.
Field maxwellian_field(const Grids& g);

/// Dispatches on cfg.experiment. Solver failures become failed records, so
/// only configuration errors escape as exceptions.
Report run_experiment(const ExperimentConfig& cfg);

Report run_semigroup_specular(const ExperimentConfig& cfg);
Report run_semigroup_diffusive(const ExperimentConfig& cfg);
Report run_chains(const ExperimentConfig& cfg);
Report run_splitting_constants(const ExperimentConfig& cfg);
Report run_solve_linear(const ExperimentConfig& cfg);
Report run_solve_nonlinear(const ExperimentConfig& cfg);
Report run_positivity(const ExperimentConfig& cfg);
Report run_conservation(const ExperimentConfig& cfg);

}  // namespace kinetic
