#include "fsi/bench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

namespace fsi::bench {

using analysis::NormKind;
using krylov::ApplicationMode;
using meshkit::Vec2;

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto c = s.find(',');
    const auto item = trim(s.substr(0, c));
    if (!item.empty()) out.push_back(item);
    if (c == std::string_view::npos) break;
    s.remove_prefix(c + 1);
  }
  return out;
}

double parse_double(std::string_view key, std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw Error("config: '" + std::string(key) + "' expects a number, got '" + std::string(s) + "'");
  return v;
}

long long parse_int(std::string_view key, std::string_view s) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw Error("config: '" + std::string(key) + "' expects an integer, got '" + std::string(s) + "'");
  return v;
}

bool parse_bool(std::string_view key, std::string_view s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw Error("config: '" + std::string(key) + "' expects a boolean, got '" + std::string(s) + "'");
}

template <class F>
void parallel_for(std::size_t n, bool serial, F&& f) {
  const std::size_t workers =
      serial ? 1 : std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  for (auto& t : pool) t.join();
}

std::shared_ptr<const meshkit::Mesh> make_mesh(const BenchConfig& c, int level) {
  return std::make_shared<const meshkit::Mesh>(meshkit::build_two_region_mesh(c.geometry, level));
}

double spread(const std::vector<double>& v) {
  if (v.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

void ensure_dir(const std::filesystem::path& p) {
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw Error("cannot create output directory '" + p.string() + "': " + ec.message());
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write '" + p.string() + "'");
  return os;
}

}  // namespace

void BenchConfig::validate() const {
  if (levels.empty() || k_values.empty() || density_ratios.empty() || preconditioners.empty())
    throw Error("config: levels, dt, density_ratios and precond must be nonempty");
  for (int l : levels)
    if (l < 0) throw Error("config: refinement levels must be nonnegative");
  for (double k : k_values)
    if (!(k > 0.0) || !std::isfinite(k)) throw Error("config: time steps must be positive");
  for (double r : density_ratios)
    if (!(r > 0.0) || !std::isfinite(r)) throw Error("config: density ratios must be positive");
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw Error("config: tolerance must lie in (0, 1)");
  if (max_iter < 1) throw Error("config: max_iter must be positive");
  if (table_step < 1) throw Error("config: step must be at least 1");
  if (steps < 0) throw Error("config: steps must be nonnegative");
  params(k_values.front(), density_ratios.front()).validate();
}

MaterialParams BenchConfig::params(double k, double density_ratio) const {
  MaterialParams p;
  p.rho_f = rho_f;
  p.rho_s = density_ratio * rho_f;
  p.mu_f = mu_f;
  p.mu_s = mu_s;
  p.lambda_s = lambda_s;
  p.k = k;
  return p;
}

void apply_setting(BenchConfig& c, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "geometry") {
    c.geometry = meshkit::parse_geometry(value);
  } else if (key == "levels") {
    c.levels.clear();
    for (auto s : split_list(value)) c.levels.push_back(static_cast<int>(parse_int(key, s)));
  } else if (key == "dt" || key == "k") {
    c.k_values.clear();
    for (auto s : split_list(value)) c.k_values.push_back(parse_double(key, s));
  } else if (key == "density_ratios" || key == "density-ratios") {
    c.density_ratios.clear();
    for (auto s : split_list(value)) c.density_ratios.push_back(parse_double(key, s));
  } else if (key == "precond") {
    c.preconditioners.clear();
    for (auto s : split_list(value)) c.preconditioners.push_back(krylov::parse_preconditioner_kind(s));
  } else if (key == "tol") {
    c.tolerance = parse_double(key, value);
  } else if (key == "max_iter" || key == "max-iter") {
    c.max_iter = static_cast<int>(parse_int(key, value));
  } else if (key == "out") {
    c.output = std::string(value);
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "serial") {
    c.serial = parse_bool(key, value);
  } else if (key == "rho_f") {
    c.rho_f = parse_double(key, value);
  } else if (key == "mu_f") {
    c.mu_f = parse_double(key, value);
  } else if (key == "mu_s") {
    c.mu_s = parse_double(key, value);
  } else if (key == "lambda_s") {
    c.lambda_s = parse_double(key, value);
  } else if (key == "mode") {
    c.mode = krylov::parse_application_mode(value);
  } else if (key == "outflow") {
    if (value == "natural")
      c.outflow = femcore::OutflowMode::natural;
    else if (value == "no_flux" || value == "no-flux")
      c.outflow = femcore::OutflowMode::no_flux;
    else
      throw Error("config: unknown outflow mode '" + std::string(value) + "'");
  } else if (key == "inflow") {
    c.inflow_peak = parse_double(key, value);
  } else if (key == "step") {
    c.table_step = static_cast<int>(parse_int(key, value));
  } else if (key == "steps") {
    c.steps = static_cast<int>(parse_int(key, value));
  } else if (key == "ramp_steps") {
    c.ramp_steps = static_cast<int>(parse_int(key, value));
  } else if (key == "tip") {
    const auto xy = split_list(value);
    if (xy.size() != 2) throw Error("config: tip expects 'x,y'");
    c.tip = Vec2{parse_double(key, xy[0]), parse_double(key, xy[1])};
  } else {
    throw Error("config: unknown key '" + std::string(key) + "'");
  }
}

void apply_config_file(BenchConfig& c, std::istream& in) {
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw Error("config line " + std::to_string(n) + ": expected key=value");
    apply_setting(c, t.substr(0, eq), t.substr(eq + 1));
  }
}

void apply_config_file(BenchConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file '" + path.string() + "'");
  apply_config_file(c, in);
}

// ---------------------------------------------------------------- tables

const TableCell& IterationTable::find(int level, double k, double ratio, PreconditionerKind kind) const {
  for (const auto& c : cells)
    if (c.level == level && c.k == k && c.density_ratio == ratio && c.kind == kind) return c;
  throw Error("iteration table: no such cell");
}

std::string IterationTable::label(const TableCell& c) const {
  if (!c.converged) return "×(" + std::to_string(max_iter) + ")";
  return std::to_string(c.iterations);
}

IterationTable run_iteration_table(const BenchConfig& config) {
  config.validate();
  IterationTable t;
  t.max_iter = config.max_iter;
  t.levels = config.levels;
  for (double k : config.k_values)
    for (double ratio : config.density_ratios)
      for (auto kind : config.preconditioners) t.columns.emplace_back(k, ratio, kind);

  std::vector<std::shared_ptr<const meshkit::Mesh>> meshes;
  for (int l : config.levels) {
    meshes.push_back(make_mesh(config, l));
    const auto space = femcore::build_space(meshes.back(), config.outflow);
    t.dofs.push_back(space.num_velocity() + space.num_pressure);
  }

  const std::size_t nc = t.columns.size();
  t.cells.resize(t.levels.size() * nc);
  parallel_for(t.cells.size(), config.serial, [&](std::size_t idx) {
    const std::size_t li = idx / nc;
    const auto [k, ratio, kind] = t.columns[idx % nc];
    TableCell& cell = t.cells[idx];
    cell.level = t.levels[li];
    cell.k = k;
    cell.density_ratio = ratio;
    cell.kind = kind;
    try {
      fsisystem::StepConfig sc;
      sc.preconditioner = kind;
      sc.mode = config.mode;
      sc.gmres.tolerance = config.tolerance;
      sc.gmres.max_iterations = config.max_iter;
      sc.inflow.peak = config.inflow_peak;
      sc.outflow = config.outflow;
      const fsisystem::GceIntegrator integ(meshes[li], config.params(k, ratio), sc);
      auto state = integ.initial_state();
      for (int n = 1; n < config.table_step; ++n) state = integ.step(state);
      const auto pb = integ.prepare(state);
      const auto pc = fsisystem::make_preconditioner(pb.system, kind, config.mode);
      const auto sol = fsisystem::solve(pb.system, pc, sc.gmres);
      cell.iterations = sol.report.iterations;
      cell.converged = sol.report.converged;
      cell.relative_residual = sol.report.final_relative_residual;
      cell.wall_time = sol.report.wall_time;
    } catch (const std::exception& e) {
      cell.converged = false;
      cell.iterations = config.max_iter;
      cell.error = e.what();
    }
  });
  return t;
}

namespace {

std::string column_name(const std::tuple<double, double, PreconditionerKind>& c) {
  std::ostringstream os;
  os << "k=" << std::get<0>(c) << " ratio=" << std::get<1>(c) << ' ' << krylov::to_string(std::get<2>(c));
  return os.str();
}

}  // namespace

void write_table_csv(std::ostream& os, const IterationTable& t) {
  os << "level,dofs";
  for (const auto& c : t.columns) os << ',' << column_name(c);
  os << '\n';
  for (std::size_t li = 0; li < t.levels.size(); ++li) {
    os << t.levels[li] << ',' << t.dofs[li];
    for (std::size_t j = 0; j < t.columns.size(); ++j) os << ',' << t.label(t.at(li, j));
    os << '\n';
  }
}

void write_table_text(std::ostream& os, const IterationTable& t) {
  // Group header per (k, ratio), one column per preconditioner.
  std::vector<std::string> head{"level", "dofs"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : t.columns) head.push_back(column_name(c));
  for (std::size_t li = 0; li < t.levels.size(); ++li) {
    std::vector<std::string> r{std::to_string(t.levels[li]), std::to_string(t.dofs[li])};
    for (std::size_t j = 0; j < t.columns.size(); ++j) r.push_back(t.label(t.at(li, j)));
    rows.push_back(std::move(r));
  }
  // Display width; "×" is two bytes in UTF-8 but one column.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> w(head.size());
  for (std::size_t j = 0; j < head.size(); ++j) {
    w[j] = width(head[j]);
    for (const auto& r : rows) w[j] = std::max(w[j], width(r[j]));
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) os << "  ";
      os << std::string(w[j] - width(cells[j]), ' ') << cells[j];
    }
    os << '\n';
  };
  line(head);
  for (const auto& r : rows) line(r);
}

// ---------------------------------------------------------------- theory

bool TheoryReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const TheoryCheck& c) { return c.pass; });
}

TheoryReport run_theory_suite(const BenchConfig& config, bool write) {
  config.validate();
  TheoryReport rep;
  const int level0 = config.levels.front();
  const auto space0 = femcore::build_space(make_mesh(config, level0), config.outflow);

  struct Sweep {
    double k, ratio;
  };
  std::vector<Sweep> sweep;
  for (double k : config.k_values)
    for (double ratio : config.density_ratios) sweep.push_back({k, ratio});

  // Norm identities.
  double worst_identity = 0.0;
  for (const auto& s : sweep) {
    const auto p = config.params(s.k, s.ratio);
    worst_identity = std::max(
        worst_identity, analysis::norm_identity_check(space0, p, fsisystem::compute_r(p), 100, config.seed).worst());
  }
  rep.checks.push_back({"norm identities, max relative deviation", worst_identity, 1e-12, worst_identity <= 1e-12});

  // Inf-sup and spectra over the material sweep.
  std::vector<double> bv, bq, c1, c3;
  double brezzi = 0.0, imag = 0.0;
  std::vector<analysis::InfSupReport> inf(sweep.size() * 3);
  std::vector<analysis::SpectrumReport> spec(sweep.size() * 2);
  parallel_for(sweep.size(), config.serial, [&](std::size_t i) {
    const auto p = config.params(sweep[i].k, sweep[i].ratio);
    const auto pb = analysis::make_theory_problem(space0, p);
    const NormKind norms[3] = {NormKind::V, NormKind::V_Q, NormKind::H1};
    for (int n = 0; n < 3; ++n) {
      inf[3 * i + n] = analysis::infsup_constant(pb, norms[n]);
      inf[3 * i + n].level = level0;
    }
    spec[2 * i] = analysis::preconditioned_spectrum(analysis::theory_system(pb, fsisystem::Variant::stabilized),
                                                    PreconditionerKind::M1, ApplicationMode::diagonal);
    spec[2 * i + 1] = analysis::preconditioned_spectrum(analysis::theory_system(pb, fsisystem::Variant::augmented),
                                                        PreconditionerKind::M3, ApplicationMode::diagonal);
    spec[2 * i].params = spec[2 * i + 1].params = p;
  });
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    bv.push_back(inf[3 * i].beta);
    bq.push_back(inf[3 * i + 1].beta);
    c1.push_back(spec[2 * i].condition);
    c3.push_back(spec[2 * i + 1].condition);
    brezzi = std::max(brezzi, spec[2 * i].brezzi ? spec[2 * i].brezzi->worst_violation : 1.0);
    imag = std::max(imag, spec[2 * i].max_imag);
  }
  rep.checks.push_back({"inf-sup (V) spread over material sweep", spread(bv), 2.0, spread(bv) < 2.0});
  rep.checks.push_back({"inf-sup (V_Q) spread over material sweep", spread(bq), 2.0, spread(bq) < 2.0});
  rep.checks.push_back({"M1 diagonal condition spread over material sweep", spread(c1), 2.0, spread(c1) < 2.0});
  rep.checks.push_back({"M3 diagonal condition spread over material sweep", spread(c3), 2.0, spread(c3) < 2.0});
  rep.checks.push_back({"M1 diagonal Brezzi interval violation", brezzi, 1e-6, brezzi <= 1e-6});
  rep.checks.push_back({"M1 diagonal spectrum imaginary part", imag, 1e-10, imag <= 1e-10});

  // Refinement: beta(V) per level for unit parameters and for the first sweep point.
  if (config.levels.size() > 1) {
    const MaterialParams unit;
    const auto pmat = config.params(config.k_values.front(), config.density_ratios.front());
    std::vector<analysis::InfSupReport> lv(config.levels.size() * 2);
    parallel_for(config.levels.size(), config.serial, [&](std::size_t i) {
      const auto sp = femcore::build_space(make_mesh(config, config.levels[i]), config.outflow);
      lv[2 * i] = analysis::infsup_constant(analysis::make_theory_problem(sp, unit), NormKind::V);
      lv[2 * i + 1] = analysis::infsup_constant(analysis::make_theory_problem(sp, pmat), NormKind::V);
      lv[2 * i].level = lv[2 * i + 1].level = config.levels[i];
    });
    for (int which = 0; which < 2; ++which) {
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < config.levels.size(); ++i)
        worst = std::min(worst, lv[2 * i + which].beta / lv[2 * (i - 1) + which].beta);
      rep.checks.push_back({which == 0 ? "inf-sup (V) per-level ratio, unit parameters"
                                       : "inf-sup (V) per-level ratio, first sweep point",
                            worst, 0.9, worst > 0.9});
    }
    rep.infsup.insert(rep.infsup.end(), lv.begin(), lv.end());
  }
  rep.infsup.insert(rep.infsup.end(), inf.begin(), inf.end());
  rep.spectra = std::move(spec);

  // Self-test: K equal to the inverse preconditioner.
  {
    const auto pb = analysis::make_theory_problem(space0, MaterialParams{});
    const auto sys = analysis::theory_system(pb, fsisystem::Variant::stabilized);
    const auto pc = fsisystem::make_preconditioner(sys, PreconditionerKind::M1, ApplicationMode::diagonal);
    const Index n = sys.size();
    Eigen::MatrixXd pinv(n, n);
    std::vector<double> e(static_cast<std::size_t>(n), 0.0), z(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
      e[j] = 1.0;
      pc.op.apply(e, z);
      e[j] = 0.0;
      for (Index i = 0; i < n; ++i) pinv(i, j) = z[i];
    }
    const auto s = analysis::spectrum_of(pinv.inverse(), [&](std::span<const double> in, std::span<double> out) {
      pc.op.apply(in, out);
    });
    double dev = 0.0;
    for (auto l : s.eigenvalues) dev = std::max(dev, std::abs(l - 1.0));
    rep.checks.push_back({"exact-inverse self-test, max |lambda - 1|", dev, 1e-10, dev <= 1e-10});
  }

  if (write) {
    ensure_dir(config.output);
    auto a = open_out(config.output / "infsup.csv");
    analysis::write_infsup_csv(a, rep.infsup);
    auto b = open_out(config.output / "spectrum.csv");
    analysis::write_spectrum_csv(b, rep.spectra);
    auto c = open_out(config.output / "theory_checks.csv");
    write_theory_checks(c, rep);
  }
  return rep;
}

void write_theory_checks(std::ostream& os, const TheoryReport& r) {
  const auto old = os.precision(10);
  os << "check,value,threshold,pass\n";
  for (const auto& c : r.checks)
    os << '"' << c.name << "\"," << c.value << ',' << c.threshold << ',' << (c.pass ? "yes" : "no") << '\n';
  os.precision(old);
}

// ---------------------------------------------------------------- evolution

Index nearest_structure_point(const femcore::CoupledSpace& space, Vec2 where) {
  const auto x = space.point_coordinates();
  Index best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (Index p = 0; p < space.num_points; ++p) {
    if (!space.structure_point[p]) continue;
    const double d = meshkit::norm(x[p] - where);
    if (d < bd) {
      bd = d;
      best = p;
    }
  }
  if (best < 0) throw Error("mesh has no structure points");
  return best;
}

EvolutionResult run_time_evolution(const BenchConfig& config, bool write) {
  config.validate();
  const double k = config.k_values.front();
  fsisystem::StepConfig sc;
  sc.preconditioner = config.preconditioners.front();
  sc.mode = config.mode;
  sc.gmres.tolerance = config.tolerance;
  sc.gmres.max_iterations = config.max_iter;
  sc.inflow.peak = config.inflow_peak;
  sc.inflow.ramp_steps =
      config.ramp_steps >= 0 ? config.ramp_steps : static_cast<int>(std::ceil(0.1 * config.steps));
  sc.outflow = config.outflow;
  const fsisystem::GceIntegrator integ(make_mesh(config, config.levels.front()),
                                       config.params(k, config.density_ratios.front()), sc);

  const Vec2 tip = config.tip ? *config.tip
                              : (config.geometry == meshkit::Geometry::cavity_halves ? Vec2{0.5, 0.5}
                                                                                     : Vec2{0.45, 0.2});
  EvolutionResult res;
  res.tip_point = nearest_structure_point(integ.space(), tip);
  const Index dx = femcore::CoupledSpace::dof(res.tip_point, 0);

  std::ofstream steps_csv, tip_dat;
  if (write) {
    ensure_dir(config.output);
    steps_csv = open_out(config.output / "steps.csv");
    steps_csv << std::setprecision(10)
              << "step,time,preconditioner,variant,iterations,converged,relative_residual,velocity_residual,"
                 "divergence_residual,refinements,wall_time\n";
    tip_dat = open_out(config.output / "tip.dat");
    tip_dat << std::setprecision(17) << "# time displacement_y\n0 0\n";
  }

  auto state = integ.initial_state();
  for (int n = 1; n <= config.steps; ++n) {
    state = integ.step(state);
    const auto& r = *state.report;
    res.reports.push_back(r);
    res.residuals.push_back(state.residual);
    res.refinements.push_back(state.refinements);
    res.times.push_back(state.time);
    res.tip_displacement.push_back({state.displacement[dx], state.displacement[dx + 1]});
    if (write) {
      steps_csv << n << ',' << state.time << ',' << r.preconditioner << ',' << r.variant << ',' << r.iterations << ','
                << (r.converged ? 1 : 0) << ',' << r.final_relative_residual << ',' << state.residual.velocity << ','
                << state.residual.divergence << ',' << state.refinements << ',' << r.wall_time << '\n';
      tip_dat << state.time << ' ' << state.displacement[dx + 1] << '\n';
      std::ostringstream name;
      name << "checkpoint_" << std::setw(4) << std::setfill('0') << n << ".txt";
      auto os = open_out(config.output / name.str());
      fsisystem::write_checkpoint(os, state);
    }
  }
  res.final_state = std::move(state);
  return res;
}

std::vector<std::filesystem::path> export_meshes(const BenchConfig& config) {
  config.validate();
  ensure_dir(config.output);
  std::vector<std::filesystem::path> out;
  for (int l : config.levels) {
    const auto path =
        config.output / ("mesh_" + std::string(meshkit::to_string(config.geometry)) + "_L" + std::to_string(l) + ".txt");
    auto os = open_out(path);
    meshkit::write_mesh(os, *make_mesh(config, l));
    out.push_back(path);
  }
  return out;
}

}  // namespace fsi::bench
