// cablevib: simulate a string on elastic point supports, list its modes,
// invert measured frequencies to tension, and cross-check the solvers.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cable/classical.hpp"
#include "cable/config.hpp"
#include "cable/diagnostics.hpp"
#include "cable/errors.hpp"
#include "cable/galerkin.hpp"
#include "cable/io.hpp"
#include "cable/tension.hpp"

namespace fs = std::filesystem;
using namespace cable;
using io::Json;

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericExit = 3;

struct Options {
  std::string config;
  std::string preset;
  std::string out = "out";
  std::string solver;
  std::string convention;
  std::string measured;
  std::optional<int> m, nx, nt;
  std::optional<double> horizon;
  int count = 8;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "YAML run file");
  sub->add_option("--preset", o.preset, "built-in run (see `cablevib presets`)");
  sub->add_option("--out", o.out, "output directory")->capture_default_str();
  sub->add_option("--solver", o.solver, "galerkin-exact | galerkin-leapfrog | fd-coupled");
  sub->add_option("--m", o.m, "Galerkin truncation");
  sub->add_option("--nx", o.nx, "spatial samples");
  sub->add_option("--nt", o.nt, "time samples");
  sub->add_option("--horizon", o.horizon, "final time (s)");
  sub->add_option("--convention", o.convention, "dirac | paper-L");
}

RunConfig resolve(const Options& o) {
  if (!o.config.empty() && !o.preset.empty()) {
    throw ConfigError("--config and --preset are mutually exclusive", 0);
  }
  RunConfig rc = o.config.empty() ? preset(o.preset.empty() ? "paper-2-4-sigma1" : o.preset)
                                  : load_config(o.config);
  if (!o.solver.empty()) {
    if (o.solver != "galerkin-exact" && o.solver != "galerkin-leapfrog" &&
        o.solver != "fd-coupled") {
      throw ConfigError("unknown solver '" + o.solver + "'", 0);
    }
    rc.solver.name = o.solver;
  }
  if (o.m) rc.solver.m = *o.m;
  if (o.nx) rc.grid.nx = *o.nx;
  if (o.nt) rc.grid.nt = *o.nt;
  if (o.horizon) rc.grid.horizon = *o.horizon;
  try {
    if (!o.convention.empty()) rc.convention = parse_convention(o.convention);
    rc.grid.validate(rc.length_L);
    (void)rc.cable();
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), 0);
  }
  if (rc.solver.m < 1) throw ConfigError("--m must be >= 1", 0);
  return rc;
}

/// Collects emitted files and writes manifest.json last.
class Manifest {
 public:
  Manifest(fs::path dir, std::string subcommand, const RunConfig& rc)
      : dir_(std::move(dir)), subcommand_(std::move(subcommand)), digest_(rc.digest()) {
    fs::create_directories(dir_);
    std::ofstream(dir_ / "config.yaml") << rc.canonical_yaml();
    add("config.yaml", "resolved-config");
  }
  fs::path path(const std::string& name) const { return dir_ / name; }
  void add(const std::string& name, const std::string& role) { outputs_.push_back({name, role}); }
  void finish() const {
    Json files = Json::array();
    for (const auto& [name, role] : outputs_) {
      std::ifstream in(dir_ / name, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      files.push_back({{"path", name}, {"role", role}, {"sha256", sha256_hex(ss.str())}});
    }
    io::write_json(dir_ / "manifest.json",
                   Json{{"config_digest", digest_}, {"subcommand", subcommand_}, {"outputs", files}});
  }

 private:
  fs::path dir_;
  std::string subcommand_;
  std::string digest_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

void fill_probes(WaveField& field, const std::vector<double>& xs) {
  for (double x : xs) {
    ProbeSeries p{x, {}, {}};
    for (int j = 0; j < field.grid.nt; ++j) {
      const auto v = evaluate_solution(field, x, field.grid.t(j));
      p.u.push_back(v.u);
      p.ut.push_back(v.ut);
    }
    field.probes.push_back(std::move(p));
  }
}

struct Simulation {
  std::shared_ptr<WaveField> field;
  std::shared_ptr<const ModalSystem> modal;
  std::optional<FdResult> fd;
};

Simulation simulate(const RunConfig& rc, const std::string& solver) {
  const auto cfg = rc.cable();
  const auto init = rc.initial_data();
  Simulation s;
  if (solver == "fd-coupled") {
    FdOptions opt;
    opt.target_cfl = rc.solver.target_cfl;
    opt.substeps = rc.solver.substeps;
    s.fd = solve_fd_coupled(cfg, init, rc.grid, opt);
    s.field = std::make_shared<WaveField>(s.fd->field);
    fill_probes(*s.field, rc.probes);
    return s;
  }
  s.modal = std::make_shared<const ModalSystem>(build_modal_system(cfg, init, rc.solver.m));
  if (solver == "galerkin-exact") {
    s.field = std::make_shared<WaveField>(propagate_exact(s.modal, rc.grid, rc.probes));
  } else {
    const int sub = rc.solver.substeps > 0 ? rc.solver.substeps : leapfrog_substeps(*s.modal, rc.grid);
    s.field = std::make_shared<WaveField>(propagate_leapfrog(s.modal, rc.grid, rc.probes, sub));
  }
  return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

FrequencySpectrum characteristic_spectrum(const CableConfig& cfg, int count) {
  if (cfg.supports().empty()) {
    FrequencySpectrum s;
    s.method = SpectrumMethod::CharacteristicRoot;
    for (int k = 1; k <= count; ++k) {
      s.frequencies_hz.push_back(k * cfg.wave_speed_a() / (2.0 * cfg.length_L()));
    }
    s.resolution_hz = 0.0;
    return s;
  }
  auto scan = characteristic_roots(cfg, count);
  if (scan.shortfall > 0) {
    throw NonConvergenceError("characteristic scan is short by " + std::to_string(scan.shortfall) +
                              " roots");
  }
  return scan.spectrum;
}

// ---------------------------------------------------------------------------

int run_simulate(const Options& o) {
  const auto rc = resolve(o);
  Manifest man(o.out, "simulate", rc);
  const auto sim = simulate(rc, rc.solver.name);
  const auto& field = *sim.field;
  const auto cfg = rc.cable();

  io::write_field_csv(man.path("field.csv"), field);
  man.add("field.csv", "wave-field");
  io::write_field_binary(man.path("field.cwv"), field);
  man.add("field.cwv", "wave-field-binary");
  const auto energy_report = energy(field, cfg);
  io::write_json(man.path("energy.json"), io::to_json(energy_report));
  man.add("energy.json", "energy-report");
  io::write_energy_csv(man.path("energy.csv"), energy_report);
  man.add("energy.csv", "energy-series");
  if (!rc.slice_times.empty()) {
    io::write_profiles_csv(man.path("profiles.csv"), field, rc.slice_times);
    man.add("profiles.csv", "time-slices");
  }
  if (!field.probes.empty()) {
    io::write_probes_csv(man.path("probes.csv"), field);
    man.add("probes.csv", "probe-series");
  }
  if (sim.fd && !sim.fd->trace.support_positions.empty()) {
    io::write_trace_csv(man.path("interface_trace.csv"), sim.fd->trace);
    man.add("interface_trace.csv", "interface-trace");
  }
  man.finish();
  std::printf("%s: nx=%d nt=%d max|u|=%s energy drift=%s\n", rc.solver.name.c_str(), rc.grid.nx,
              rc.grid.nt, io::format_double(max_abs(field)).c_str(),
              io::format_double(energy_report.drift).c_str());
  return 0;
}

int run_modes(const Options& o) {
  const auto rc = resolve(o);
  Manifest man(o.out, "modes", rc);
  const auto cfg = rc.cable();
  const int count = std::min(o.count, rc.solver.m);
  const auto galerkin = galerkin_frequencies(cfg, rc.solver.m, count);
  Json doc{{"convention", std::string(to_string(cfg.dirac_convention()))},
           {"m", rc.solver.m},
           {"galerkin", io::to_json(galerkin)}};
  io::write_spectrum_csv(man.path("modes.csv"), galerkin);
  man.add("modes.csv", "galerkin-spectrum");
  if (cfg.supports().size() <= 1) {
    doc["characteristic"] = io::to_json(characteristic_spectrum(cfg, count));
  }
  io::write_json(man.path("modes.json"), doc);
  man.add("modes.json", "spectra");
  man.finish();
  for (std::size_t i = 0; i < galerkin.frequencies_hz.size(); ++i) {
    std::printf("f%zu = %s Hz\n", i + 1, io::format_double(galerkin.frequencies_hz[i]).c_str());
  }
  return 0;
}

int run_invert(const Options& o) {
  const auto rc = resolve(o);
  Manifest man(o.out, "invert-tension", rc);
  std::string source = o.measured;
  if (source.empty()) {
    if (rc.measured.empty()) throw ConfigError("no measured frequencies (--measured or tension.measured)", 0);
    source = (rc.base_dir / rc.measured).string();
  }
  const auto measured = io::read_frequency_csv(source);
  const auto cfg = rc.cable();
  KnownCable known{rc.length_L, rc.density_rho, cfg.placements(), rc.convention};
  InversionOptions opt;
  opt.tension_lo = rc.bracket_lo;
  opt.tension_hi = rc.bracket_hi;
  opt.galerkin_m = rc.solver.m;
  const auto est = invert_tension(measured, known, rc.mode_indices, opt);
  io::write_json(man.path("tension.json"), io::to_json(est));
  man.add("tension.json", "tension-estimate");
  man.finish();
  std::printf("T = %s N (rms misfit %s Hz, %d evaluations)\n",
              io::format_double(est.tension_hat).c_str(), io::format_double(est.residual).c_str(),
              est.iterations);
  return 0;
}

int run_validate(const Options& o) {
  const auto rc = resolve(o);
  Manifest man(o.out, "validate", rc);
  const auto cfg = rc.cable();
  const auto init = rc.initial_data();
  const auto report = validate_initial_data(cfg, init);
  Json doc = io::to_json(report);
  if (cfg.supports().size() == 1) {
    const double l = cfg.supports().front().position_xk;
    const double h0 = init.phi(l), hp0 = init.psi(l);
    doc["compatibility"] = io::to_json(compatibility_flags(cfg, init, h0, hp0));
    const int n = rc.series_terms;
    const std::vector<int> sweep{std::max(1, n / 4), std::max(1, n / 2), n, 2 * n};
    doc["initial_compatibility"] = io::to_json(initial_compatibility_sweep(cfg, init, h0, sweep));
  }
  io::write_json(man.path("validate.json"), doc);
  man.add("validate.json", "validation-report");
  man.finish();
  std::printf("piecewise_smooth_only = %s\n", report.piecewise_smooth_only ? "true" : "false");
  return 0;
}

int run_residuals(const Options& o) {
  const auto rc = resolve(o);
  Manifest man(o.out, "residuals", rc);
  const auto cfg = rc.cable();
  const auto init = rc.initial_data();
  Json doc;

  auto modal = std::make_shared<const ModalSystem>(build_modal_system(cfg, init, rc.solver.m));
  doc["loss_galerkin"] =
      io::to_json(collocation_loss(ModalEvaluator(modal), cfg, init, rc.grid.horizon, rc.weights,
                                   rc.counts));

  auto fd = solve_fd_coupled(cfg, init, rc.grid, {rc.solver.target_cfl, rc.solver.substeps});
  std::vector<double> supports;
  for (const auto& s : cfg.supports()) supports.push_back(s.position_xk);
  const auto fd_field = std::make_shared<const WaveField>(fd.field);
  doc["loss_fd"] = io::to_json(collocation_loss(GridFieldEvaluator(fd_field, supports), cfg, init,
                                                rc.grid.horizon, rc.weights, rc.counts));

  if (cfg.supports().size() == 1) {
    auto exp = build_series_expansion(cfg, init, fd.trace.times, fd.trace.u_at_support[0],
                                      rc.series_terms);
    io::write_series_coefficients_csv(man.path("series_coefficients.csv"), exp);
    man.add("series_coefficients.csv", "series-coefficients");
    std::ofstream csv(man.path("h_residual.csv"));
    csv << "t,residual\n";
    double worst = 0.0;
    for (double t : exp.times) {
      const double r = h_consistency_residual(exp, cfg, init, t);
      worst = std::max(worst, std::abs(r));
      csv << io::format_double(t) << ',' << io::format_double(r) << '\n';
    }
    csv.close();
    man.add("h_residual.csv", "h-consistency-residual");
    doc["h_residual_max"] = worst;
    doc["initial_compatibility_residual"] =
        initial_compatibility_residual(cfg, init, init.phi(cfg.supports().front().position_xk),
                                       rc.series_terms);
    doc["loss_series"] = io::to_json(
        collocation_loss(SeriesEvaluator(exp), cfg, init, rc.grid.horizon, rc.weights, rc.counts));
  }
  io::write_json(man.path("residuals.json"), doc);
  man.add("residuals.json", "residual-report");
  man.finish();
  std::printf("galerkin loss total = %s, fd loss total = %s\n",
              io::format_double(doc["loss_galerkin"]["total"].get<double>()).c_str(),
              io::format_double(doc["loss_fd"]["total"].get<double>()).c_str());
  return 0;
}

int run_crosscheck(const Options& o) {
  constexpr double kTolerance = 1e-3;
  RunConfig rc = resolve(o);
  if (!o.m) rc.solver.m = 512;
  Manifest man(o.out, "crosscheck", rc);
  const auto base = rc.cable();
  const int count = std::min(8, rc.solver.m);
  if (base.supports().size() > 1) {
    throw CapabilityError("crosscheck compares against the single-support characteristic equation");
  }

  Json methods = Json::array();
  bool pass = true;
  std::ofstream table(man.path("crosscheck.csv"));
  table << "convention,method";
  for (int k = 1; k <= count; ++k) table << ",f" << k;
  table << '\n';
  for (auto conv : {base.dirac_convention(), base.dirac_convention() == DiracConvention::DiracConsistent
                                                 ? DiracConvention::PaperFactorL
                                                 : DiracConvention::DiracConsistent}) {
    const auto cfg = base.with_convention(conv);
    const auto g = galerkin_frequencies(cfg, rc.solver.m, count);
    const auto c = characteristic_spectrum(cfg, count);
    std::vector<double> diff;
    double worst = 0.0;
    for (int k = 0; k < count; ++k) {
      diff.push_back(rel(g.frequencies_hz[k], c.frequencies_hz[k]));
      worst = std::max(worst, diff.back());
    }
    const bool ok = worst <= kTolerance;
    // Only the configured convention gates the result; the other is reported.
    if (conv == base.dirac_convention()) pass = pass && ok;
    methods.push_back({{"convention", std::string(to_string(conv))},
                       {"galerkin", io::to_json(g)},
                       {"characteristic", io::to_json(c)},
                       {"relative_difference", diff},
                       {"max_relative_difference", worst},
                       {"pass", ok}});
    for (const auto* s : {&g, &c}) {
      table << to_string(conv) << ',' << to_string(s->method);
      for (double f : s->frequencies_hz) table << ',' << io::format_double(f);
      table << '\n';
    }
  }
  table.close();
  man.add("crosscheck.csv", "frequency-table");

  // Field-level comparison on the configured grid; reported, not gated.
  Json fields;
  const auto init = rc.initial_data();
  auto sys = std::make_shared<const ModalSystem>(build_modal_system(base, init, rc.solver.m));
  const auto gal = propagate_exact(sys, rc.grid);
  const auto fd = solve_fd_coupled(base, init, rc.grid, {rc.solver.target_cfl, rc.solver.substeps});
  const double scale = max_abs(gal);
  fields["fd_vs_galerkin_max_rel"] = scale > 0 ? max_abs(difference(fd.field, gal)) / scale : 0.0;
  if (base.supports().size() == 1) {
    const auto exp = build_series_expansion(base, init, fd.trace.times, fd.trace.u_at_support[0],
                                            rc.series_terms);
    const double fd_scale = max_abs(fd.field);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const double x = rc.length_L * (i + 0.5) / 10.0;
      for (int j = 0; j < 10; ++j) {
        const double t = rc.grid.horizon * (j + 0.5) / 10.0;
        const double d = evaluate_series_solution(exp, x, t) - evaluate_solution(fd.field, x, t).u;
        worst = std::max(worst, std::abs(d));
      }
    }
    fields["series_vs_fd_max_rel"] = fd_scale > 0 ? worst / fd_scale : 0.0;
  }

  io::write_json(man.path("crosscheck.json"), Json{{"tolerance", kTolerance},
                                                   {"m", rc.solver.m},
                                                   {"methods", methods},
                                                   {"fields", fields},
                                                   {"pass", pass}});
  man.add("crosscheck.json", "crosscheck-report");
  man.finish();
  std::printf("crosscheck %s (tolerance %.1e)\n", pass ? "PASS" : "FAIL", kTolerance);
  return pass ? 0 : kNumericExit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"String vibration on elastic point supports"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "run a solver and write the field, energy and traces");
  auto* modes = app.add_subcommand("modes", "modal frequencies");
  auto* inv = app.add_subcommand("invert-tension", "fit tension to measured frequencies");
  auto* val = app.add_subcommand("validate", "initial-data regularity and compatibility report");
  auto* res = app.add_subcommand("residuals", "collocation losses and series residuals");
  auto* cross = app.add_subcommand("crosscheck", "compare frequency methods and solver fields");
  auto* pre = app.add_subcommand("presets", "list built-in runs");
  for (auto* s : {sim, modes, inv, val, res, cross}) add_common(s, o);
  modes->add_option("--count", o.count, "number of modes")->capture_default_str();
  inv->add_option("--measured", o.measured, "CSV of measured frequencies (Hz)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*pre) {
      for (const auto& n : preset_names()) std::printf("%s\n", n.c_str());
      return 0;
    }
    if (*sim) return run_simulate(o);
    if (*modes) return run_modes(o);
    if (*inv) return run_invert(o);
    if (*val) return run_validate(o);
    if (*res) return run_residuals(o);
    if (*cross) return run_crosscheck(o);
  } catch (const ConfigError& e) {
    if (e.line() > 0) {
      std::fprintf(stderr, "config error (line %d): %s\n", e.line(), e.what());
    } else {
      std::fprintf(stderr, "config error: %s\n", e.what());
    }
    return kConfigExit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumericExit;
  }
  return 0;
}
