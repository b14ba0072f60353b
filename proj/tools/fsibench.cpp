#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "fsi/bench/bench.hpp"

namespace {

struct Flags {
  std::string config;
  std::string geometry, levels, dt, ratios, precond, tol, max_iter, out;
  bool serial = false;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "key=value config file, applied before other flags");
  sub->add_option("--geometry", f.geometry, "cavity_halves or channel_flag");
  sub->add_option("--levels", f.levels, "refinement levels, comma separated");
  sub->add_option("--dt", f.dt, "time steps k, comma separated");
  sub->add_option("--density-ratios", f.ratios, "rho_s / rho_f values, comma separated");
  sub->add_option("--precond", f.precond, "M1, M2, M3, SC, comma separated");
  sub->add_option("--tol", f.tol, "GMRES relative tolerance");
  sub->add_option("--max-iter", f.max_iter, "GMRES iteration limit");
  sub->add_option("--out", f.out, "output directory");
  sub->add_flag("--serial", f.serial, "run sweep cells sequentially");
  sub->add_option("settings", f.overrides, "extra key=value settings");
}

fsi::bench::BenchConfig build_config(const Flags& f) {
  fsi::bench::BenchConfig c;
  if (!f.config.empty()) fsi::bench::apply_config_file(c, std::filesystem::path(f.config));
  const std::pair<const char*, const std::string*> flags[] = {
      {"geometry", &f.geometry}, {"levels", &f.levels},   {"dt", &f.dt},           {"density_ratios", &f.ratios},
      {"precond", &f.precond},   {"tol", &f.tol},         {"max_iter", &f.max_iter}, {"out", &f.out}};
  for (const auto& [key, value] : flags)
    if (!value->empty()) fsi::bench::apply_setting(c, key, *value);
  if (f.serial) c.serial = true;
  for (const auto& s : f.overrides) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw fsi::Error("expected key=value, got '" + s + "'");
    fsi::bench::apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
  }
  c.validate();
  return c;
}

int run_table(const fsi::bench::BenchConfig& c) {
  const auto t = fsi::bench::run_iteration_table(c);
  std::filesystem::create_directories(c.output);
  std::ofstream csv(c.output / "table.csv");
  fsi::bench::write_table_csv(csv, t);
  std::ofstream txt(c.output / "table.txt");
  fsi::bench::write_table_text(txt, t);
  fsi::bench::write_table_text(std::cout, t);
  for (const auto& cell : t.cells)
    if (cell.error) std::cerr << "level " << cell.level << " k=" << cell.k << " ratio=" << cell.density_ratio << ' '
                              << fsi::krylov::to_string(cell.kind) << ": " << *cell.error << '\n';
  return 0;
}

int run_theory(const fsi::bench::BenchConfig& c) {
  const auto rep = fsi::bench::run_theory_suite(c);
  fsi::bench::write_theory_checks(std::cout, rep);
  return rep.pass() ? 0 : 1;
}

int run_evolve(const fsi::bench::BenchConfig& c) {
  const auto res = fsi::bench::run_time_evolution(c);
  for (std::size_t n = 0; n < res.reports.size(); ++n)
    std::cout << "step " << n + 1 << " t=" << res.times[n] << " iterations=" << res.reports[n].iterations
              << " divergence=" << res.residuals[n].divergence << " tip_y=" << res.tip_displacement[n].y << '\n';
  return 0;
}

int run_mesh(const fsi::bench::BenchConfig& c) {
  for (const auto& p : fsi::bench::export_meshes(c)) std::cout << p.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FSI saddle point preconditioner benchmarks"};
  app.require_subcommand(1);
  Flags flags;
  auto* table = app.add_subcommand("table", "iteration counts over levels x k x ratio x preconditioner");
  auto* theory = app.add_subcommand("theory", "norm identities, inf-sup constants and spectra");
  auto* evolve = app.add_subcommand("evolve", "time loop with checkpoints and tip displacement");
  auto* mesh = app.add_subcommand("mesh", "export meshes");
  for (auto* s : {table, theory, evolve, mesh}) add_common(s, flags);
  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = build_config(flags);
    if (table->parsed()) return run_table(cfg);
    if (theory->parsed()) return run_theory(cfg);
    if (evolve->parsed()) return run_evolve(cfg);
    return run_mesh(cfg);
  } catch (const std::exception& e) {
    std::cerr << "fsibench: " << e.what() << '\n';
    return 2;
  }
}
