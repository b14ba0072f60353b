#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "fsi/femcore/assembly.hpp"
#include "fsi/femcore/dirichlet.hpp"
#include "fsi/femcore/space.hpp"
#include "fsi/fsisystem/system.hpp"
#include "fsi/meshkit/motion.hpp"

namespace fsi::fsisystem {

using meshkit::Mesh;
using meshkit::Vec2;

/// Parabolic x-velocity 4U (y - y0)(y1 - y) / (y1 - y0)^2 on the fluid
/// Dirichlet points of the leftmost boundary, scaled by min(1, n / ramp_steps)
/// at step n (ramp_steps = 0 means no ramp).
struct InflowProfile {
  double peak = 0.0;
  int ramp_steps = 0;
};

struct StepConfig {
  krylov::PreconditionerKind preconditioner = krylov::PreconditionerKind::M3;
  /// Defaults to the preconditioner's natural variant.
  std::optional<Variant> variant;
  krylov::ApplicationMode mode = krylov::ApplicationMode::triangular;
  krylov::GmresOptions gmres;
  meshkit::ExtensionOperator ale;
  Vec2 g_f{};
  Vec2 g_s{};
  InflowProfile inflow;
  femcore::OutflowMode outflow = femcore::OutflowMode::natural;
  /// After the solve, correction solves on the current residual are added
  /// while the divergence residual exceeds this value times min(1, max|v|)
  /// (0 disables).
  double divergence_tolerance = 1e-9;
  int max_refinements = 3;

  Variant effective_variant() const { return variant.value_or(natural_variant(preconditioner)); }
};

/// Snapshot after step `step`. Vectors use the full velocity/pressure
/// numbering of the coupled space; displacement is nonzero only on
/// structure points.
struct TimeState {
  int step = 0;
  double time = 0.0;
  std::shared_ptr<const Mesh> mesh;
  meshkit::MeshMotion motion;
  std::vector<double> velocity;
  std::vector<double> pressure;
  std::vector<double> displacement;
  /// Report of the main solve.
  std::optional<krylov::SolveReport> report;
  int refinements = 0;
  ResidualNorms residual;
};

/// Raised when a step cannot be completed; carries the step index.
class StepError : public Error {
 public:
  StepError(int step, const std::string& what) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Everything assembled for one step before the linear solve.
struct StepProblem {
  int step = 0;
  meshkit::MeshMotion motion;
  std::shared_ptr<const Mesh> mesh;
  femcore::CoupledSpace space;
  femcore::ReducedBlocks reduced;
  BlockSystem system;
};

/// Velocity-form geometry-convective explicit time stepping.
///
/// One step: extend the interface position u_s + k v into the fluid, move
/// the fluid mesh, assemble on it with the explicit convection and mesh
/// velocity, solve the saddle point system and update u_s += k v_s. The
/// structure is always assembled on its reference configuration.
class GceIntegrator {
 public:
  GceIntegrator(std::shared_ptr<const Mesh> reference, const MaterialParams& params, StepConfig config);

  const femcore::CoupledSpace& space() const { return space_; }
  const MaterialParams& params() const { return params_; }
  const StepConfig& config() const { return config_; }

  TimeState initial_state() const;
  StepProblem prepare(const TimeState& state) const;
  TimeState step(const TimeState& state) const;

  std::vector<femcore::BoundaryValue> inflow_values(const femcore::CoupledSpace& space, int step) const;

 private:
  std::shared_ptr<const Mesh> reference_;
  MaterialParams params_;
  StepConfig config_;
  femcore::CoupledSpace space_;
  CsrMatrix structure_stiffness_;
};

TimeState gce_time_step(const TimeState& state, const GceIntegrator& integrator);

/// Mesh (mesh file format) followed by velocity, pressure and displacement
/// as `index value` lines with 17 significant digits.
void write_checkpoint(std::ostream& os, const TimeState& state);

}  // namespace fsi::fsisystem
