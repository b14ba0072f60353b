#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "fsi/analysis/theory.hpp"
#include "fsi/femcore/space.hpp"
#include "fsi/fsisystem/time_loop.hpp"
#include "fsi/meshkit/builders.hpp"

namespace fsi::bench {

using krylov::PreconditionerKind;
using femcore::MaterialParams;

struct BenchConfig {
  meshkit::Geometry geometry = meshkit::Geometry::cavity_halves;
  std::vector<int> levels{0, 1, 2};
  std::vector<double> k_values{1e-2, 1e-3, 1e-4};
  std::vector<double> density_ratios{1.0, 10.0, 100.0};
  std::vector<PreconditionerKind> preconditioners{PreconditionerKind::M1, PreconditionerKind::M2,
                                                  PreconditionerKind::M3, PreconditionerKind::SC};
  double tolerance = 1e-10;
  int max_iter = 500;
  std::filesystem::path output = "out";
  std::uint64_t seed = 1;
  bool serial = false;

  double rho_f = 1e3;
  double mu_f = 1.0;
  double mu_s = 0.5e6;
  double lambda_s = 2e6;
  krylov::ApplicationMode mode = krylov::ApplicationMode::triangular;
  femcore::OutflowMode outflow = femcore::OutflowMode::natural;
  double inflow_peak = 1.0;
  /// Tables report the solve of this step (1 = first step from rest).
  int table_step = 1;

  int steps = 10;
  /// Inflow ramp length for `evolve`; negative means 10% of the steps.
  int ramp_steps = -1;
  /// Reference position of the tracked interface point; defaults per geometry.
  std::optional<meshkit::Vec2> tip;

  /// Throws fsi::Error on empty lists or out-of-range values.
  void validate() const;
  MaterialParams params(double k, double density_ratio) const;
};

/// Applies one `key=value` setting. Lists are comma separated.
void apply_setting(BenchConfig& config, std::string_view key, std::string_view value);
/// Reads `key=value` lines; blank lines and lines starting with '#' are skipped.
void apply_config_file(BenchConfig& config, std::istream& in);
void apply_config_file(BenchConfig& config, const std::filesystem::path& path);

struct TableCell {
  int level = 0;
  double k = 0.0;
  double density_ratio = 0.0;
  PreconditionerKind kind = PreconditionerKind::M1;
  int iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;
  double wall_time = 0.0;
  std::optional<std::string> error;
};

struct IterationTable {
  int max_iter = 0;
  std::vector<int> levels;
  std::vector<Index> dofs;  ///< per level: velocity + pressure unknowns before elimination
  /// Column order: k outermost, then density ratio, then preconditioner.
  std::vector<std::tuple<double, double, PreconditionerKind>> columns;
  /// Row-major, levels x columns.
  std::vector<TableCell> cells;

  const TableCell& at(std::size_t level_index, std::size_t column) const {
    return cells[level_index * columns.size() + column];
  }
  /// Cell for the given axis values; throws if absent.
  const TableCell& find(int level, double k, double density_ratio, PreconditionerKind kind) const;
  /// Iteration count or the failure marker "×(max_iter)".
  std::string label(const TableCell& cell) const;
};

/// Solves the step-`table_step` system for every (level, k, ratio,
/// preconditioner) combination. Failures are recorded, never dropped.
IterationTable run_iteration_table(const BenchConfig& config);
void write_table_csv(std::ostream& os, const IterationTable& table);
void write_table_text(std::ostream& os, const IterationTable& table);

struct TheoryCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct TheoryReport {
  std::vector<TheoryCheck> checks;
  std::vector<analysis::InfSupReport> infsup;
  std::vector<analysis::SpectrumReport> spectra;
  bool pass() const;
};

/// Norm identities, inf-sup sweeps and spectrum sweeps on the configured
/// geometry. Uses config.levels for refinement checks and the first level
/// for parameter sweeps. Writes infsup.csv, spectrum.csv and
/// theory_checks.csv to config.output when `write` is set.
TheoryReport run_theory_suite(const BenchConfig& config, bool write = true);
void write_theory_checks(std::ostream& os, const TheoryReport& report);

struct EvolutionResult {
  std::vector<krylov::SolveReport> reports;
  std::vector<fsisystem::ResidualNorms> residuals;
  std::vector<int> refinements;
  std::vector<double> times;
  std::vector<meshkit::Vec2> tip_displacement;
  Index tip_point = -1;
  fsisystem::TimeState final_state;
};

/// Runs config.steps steps of the time loop on config.levels.front() with
/// k = config.k_values.front(), ratio = config.density_ratios.front() and
/// preconditioner config.preconditioners.front(). Writes
/// checkpoint_NNNN.txt, steps.csv and tip.dat to config.output when
/// `write` is set. Errors propagate as fsisystem::StepError.
EvolutionResult run_time_evolution(const BenchConfig& config, bool write = true);

/// Writes mesh_<geometry>_L<level>.txt for each configured level and
/// returns the paths.
std::vector<std::filesystem::path> export_meshes(const BenchConfig& config);

/// Structure point nearest to `where` (reference coordinates).
Index nearest_structure_point(const femcore::CoupledSpace& space, meshkit::Vec2 where);

}  // namespace fsi::bench
