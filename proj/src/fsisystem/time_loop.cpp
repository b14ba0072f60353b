#include "fsi/fsisystem/time_loop.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "fsi/meshkit/builders.hpp"

namespace fsi::fsisystem {

using femcore::BoundaryValue;
using femcore::CoupledSpace;

GceIntegrator::GceIntegrator(std::shared_ptr<const Mesh> reference, const MaterialParams& params, StepConfig config)
    : reference_(std::move(reference)), params_(params), config_(config) {
  params_.validate();
  if (config_.inflow.ramp_steps < 0) throw Error("GceIntegrator: ramp_steps must be nonnegative");
  space_ = femcore::build_space(reference_, config_.outflow);
  structure_stiffness_ = femcore::assemble_structure_stiffness(space_, params_);
}

TimeState GceIntegrator::initial_state() const {
  TimeState s;
  s.mesh = reference_;
  s.motion = meshkit::identity_motion(reference_);
  s.velocity.assign(static_cast<std::size_t>(space_.num_velocity()), 0.0);
  s.pressure.assign(static_cast<std::size_t>(space_.num_pressure), 0.0);
  s.displacement.assign(static_cast<std::size_t>(space_.num_velocity()), 0.0);
  return s;
}

std::vector<BoundaryValue> GceIntegrator::inflow_values(const CoupledSpace& space, int step) const {
  std::vector<BoundaryValue> out;
  double scale = config_.inflow.peak;
  if (config_.inflow.ramp_steps > 0) scale *= std::min(1.0, static_cast<double>(step) / config_.inflow.ramp_steps);
  if (scale == 0.0) return out;

  const auto x = space.point_coordinates();
  double xmin = x[0].x;
  for (const auto& p : x) xmin = std::min(xmin, p.x);
  const double tol = 1e-12 * std::max(space.mesh->diameter(), 1.0);
  std::vector<Index> pts;
  double y0 = 0.0, y1 = 0.0;
  for (Index d : space.dirichlet_dofs) {
    const Index p = d / 2;
    if (d % 2 != 0 || !space.fluid_point[p] || std::abs(x[p].x - xmin) > tol) continue;
    if (pts.empty()) y0 = y1 = x[p].y;
    y0 = std::min(y0, x[p].y);
    y1 = std::max(y1, x[p].y);
    pts.push_back(p);
  }
  if (pts.empty() || y1 <= y0) return out;
  for (Index p : pts) {
    const double y = x[p].y;
    out.push_back({CoupledSpace::dof(p, 0), scale * 4.0 * (y - y0) * (y1 - y) / ((y1 - y0) * (y1 - y0))});
  }
  return out;
}

StepProblem GceIntegrator::prepare(const TimeState& state) const {
  const int n1 = state.step + 1;
  const double k = params_.k;
  const auto nv = static_cast<std::size_t>(space_.num_velocity());
  if (state.velocity.size() != nv || state.displacement.size() != nv ||
      state.pressure.size() != static_cast<std::size_t>(space_.num_pressure))
    throw StepError(n1, "time step: state does not match the space");

  StepProblem pb;
  pb.step = n1;

  // Interface position from vertex values of u_s + k v.
  const Mesh& ref = *reference_;
  std::vector<Vec2> datum(static_cast<std::size_t>(ref.num_nodes()));
  for (Index v = 0; v < ref.num_nodes(); ++v) {
    if (!ref.on_interface(v) || ref.node_subdomain(v) != meshkit::Subdomain::fluid) continue;
    const Index p = space_.node_point[v];
    datum[v] = {state.displacement[CoupledSpace::dof(p, 0)] + k * state.velocity[CoupledSpace::dof(p, 0)],
                state.displacement[CoupledSpace::dof(p, 1)] + k * state.velocity[CoupledSpace::dof(p, 1)]};
  }
  meshkit::ExtensionOptions opt;
  opt.op = config_.ale;
  pb.motion = meshkit::solve_ale_extension(reference_, datum, opt);
  if (!pb.motion.valid)
    throw StepError(n1, "time step " + std::to_string(n1) + ": mesh motion folds a fluid element (min det " +
                            std::to_string(pb.motion.min_det) + ")");
  pb.mesh = std::make_shared<const Mesh>(meshkit::move_mesh(pb.motion));
  const auto w = state.motion.reference ? meshkit::mesh_velocity(state.motion, pb.motion, k)
                                        : std::vector<Vec2>(static_cast<std::size_t>(ref.num_nodes()));
  pb.space = space_.on_mesh(pb.mesh);

  const auto blocks = femcore::assemble_blocks(pb.space, params_);
  femcore::RhsInputs in;
  in.velocity = state.velocity;
  in.displacement = state.displacement;
  in.mesh_velocity = w;
  in.g_f = config_.g_f;
  in.g_s = config_.g_s;
  in.structure_stiffness = &structure_stiffness_;
  const auto f = femcore::assemble_rhs(pb.space, params_, in);
  const auto bv = inflow_values(pb.space, n1);
  pb.reduced = femcore::apply_dirichlet(blocks, f, pb.space.dirichlet_dofs, bv);
  pb.system = build_system(pb.reduced, params_, config_.effective_variant());
  return pb;
}

TimeState GceIntegrator::step(const TimeState& state) const {
  StepProblem pb = prepare(state);
  const auto pc = make_preconditioner(pb.system, config_.preconditioner, config_.mode);
  auto sol = solve(pb.system, pc, config_.gmres);
  if (!sol.report.converged)
    throw StepError(pb.step, "time step " + std::to_string(pb.step) + ": GMRES did not converge in " +
                                 std::to_string(sol.report.iterations) + " iterations");

  TimeState next;
  next.residual = residual(pb.system, sol.velocity, sol.pressure);
  auto divergence_limit = [&] {
    double vmax = 0.0;
    for (double v : pb.reduced.dirichlet_values) vmax = std::max(vmax, std::abs(v));
    for (double v : sol.velocity) vmax = std::max(vmax, std::abs(v));
    return config_.divergence_tolerance * std::min(1.0, vmax);
  };
  while (config_.divergence_tolerance > 0.0 && next.residual.divergence > divergence_limit() &&
         next.refinements < config_.max_refinements) {
    std::vector<double> x(sol.velocity);
    x.insert(x.end(), sol.pressure.begin(), sol.pressure.end());
    std::vector<double> res(x.size());
    pb.system.apply(x, res);
    const auto rhs = pb.system.rhs();
    for (std::size_t i = 0; i < res.size(); ++i) res[i] = rhs[i] - res[i];
    const auto corr = solve(pb.system, pc, res, config_.gmres);
    for (std::size_t i = 0; i < sol.velocity.size(); ++i) sol.velocity[i] += corr.velocity[i];
    for (std::size_t i = 0; i < sol.pressure.size(); ++i) sol.pressure[i] += corr.pressure[i];
    ++next.refinements;
    next.residual = residual(pb.system, sol.velocity, sol.pressure);
  }
  next.step = pb.step;
  next.time = pb.step * params_.k;
  next.mesh = pb.mesh;
  next.motion = std::move(pb.motion);
  next.velocity = pb.reduced.expand(sol.velocity);
  next.pressure = std::move(sol.pressure);
  next.displacement = state.displacement;
  for (Index p = 0; p < space_.num_points; ++p) {
    if (!space_.structure_point[p]) continue;
    for (int c = 0; c < 2; ++c) next.displacement[CoupledSpace::dof(p, c)] += params_.k * next.velocity[CoupledSpace::dof(p, c)];
  }
  next.report = std::move(sol.report);
  return next;
}

TimeState gce_time_step(const TimeState& state, const GceIntegrator& integrator) { return integrator.step(state); }

void write_checkpoint(std::ostream& os, const TimeState& state) {
  const auto old = os.precision(17);
  os << "step " << state.step << " time " << state.time << '\n';
  meshkit::write_mesh(os, *state.mesh);
  auto vec = [&](const char* name, const std::vector<double>& v) {
    os << name << ' ' << v.size() << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) os << i << ' ' << v[i] << '\n';
  };
  os.precision(17);
  vec("velocity", state.velocity);
  vec("pressure", state.pressure);
  vec("displacement", state.displacement);
  os.precision(old);
}

}  // namespace fsi::fsisystem
