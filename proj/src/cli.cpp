#include "usc/cli.hpp"

#include "usc/boundary_trace.hpp"
#include "usc/brick.hpp"
#include "usc/cell_graph.hpp"
#include "usc/errors.hpp"
#include "usc/format.hpp"
#include "usc/metric_lab.hpp"
#include "usc/parallel.hpp"
#include "usc/poincare.hpp"
#include "usc/spec_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace usc {
namespace {

std::string spec_tag(const std::string& name) {
  std::string out;
  for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

void add_metadata(CsvTable& t, const CarpetSpec* spec, const RunConfig& cfg) {
  if (spec) t.add_meta("spec_hash", fnv1a_hex(spec_to_json(*spec)));
  t.add_meta("config_hash", fnv1a_hex(canonical_config(cfg)));
  t.add_meta("seed", std::to_string(cfg.seed));
  t.add_meta("version", std::string(kToolVersion));
}

Artifact finish(std::string name, CsvTable& t, const CarpetSpec* spec, const RunConfig& cfg) {
  add_metadata(t, spec, cfg);
  std::ostringstream os;
  t.write(os);
  return {std::move(name), os.str()};
}

std::string fr(double v) { return format_real(v); }

double estimate_r(const CarpetSpec& spec, const RunConfig& cfg) {
  if (cfg.r_hat > 0.0) return cfg.r_hat;
  return renorm_factor(spec, cfg.renorm_level, cfg.solver).r_hat;
}

std::vector<Artifact> cmd_validate(const CarpetSpec& spec, const RunConfig& cfg) {
  auto rep = validate(spec);
  nlohmann::ordered_json j;
  j["spec"] = cfg.spec;
  j["spec_hash"] = fnv1a_hex(spec_to_json(spec));
  j["k"] = spec.k();
  j["N"] = spec.N();
  j["ok"] = rep.ok();
  auto& checks = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : rep.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"witness", c.witness}});
  j["version"] = kToolVersion;
  return {{"validate_" + spec_tag(cfg.spec) + ".json", j.dump(2) + "\n", !rep.ok()}};
}

std::vector<Artifact> cmd_graph(const CarpetSpec& spec, const RunConfig& cfg) {
  require_valid(spec);
  CsvTable t({"level", "vertices", "edges", "min_degree", "max_degree", "components", "boundary_vertices"});
  for (int n = 1; n <= cfg.n_max; ++n) {
    auto g = build_graph(spec, n);
    auto L = laplacian(*g);
    std::int32_t lo = g->size() ? g->degree(0) : 0, hi = lo;
    for (std::int32_t v = 0; v < g->size(); ++v) {
      lo = std::min(lo, g->degree(v));
      hi = std::max(hi, g->degree(v));
    }
    t.add_row({std::to_string(n), std::to_string(g->size()), std::to_string(g->edges().size()), std::to_string(lo),
               std::to_string(hi), std::to_string(L.component_count()), std::to_string(g->boundary_vertices().size())});
  }
  return {finish("graph_" + spec_tag(cfg.spec) + "_n" + std::to_string(cfg.n_max) + ".csv", t, &spec, cfg)};
}

std::vector<Artifact> cmd_constants(const CarpetSpec& spec, const RunConfig& cfg) {
  require_valid(spec);
  if (cfg.n_max < 2) throw std::invalid_argument("constants needs --n-max >= 2");
  auto est = renorm_factor(spec, cfg.n_max - 1, cfg.solver);
  CsvTable t({"n", "lambda", "R_cross", "r_lambda", "r_cross", "sigma_hat"});
  for (const auto& lc : est.levels) {
    std::string sigma;
    if (lc.n <= 4) sigma = fr(sigma_estimate(spec, lc.n, 2, cfg.solver).value);
    t.add_row({std::to_string(lc.n), fr(lc.lambda), fr(lc.cross), lc.r_lambda > 0 ? fr(lc.r_lambda) : "",
               lc.r_cross > 0 ? fr(lc.r_cross) : "", sigma});
  }
  t.add_meta("r_hat", fr(est.r_hat));
  t.add_meta("theta", fr(est.theta));
  t.add_meta("sigma", fr(est.sigma));
  t.add_meta("d_H", fr(est.d_H));
  t.add_meta("d_W", fr(est.d_W));
  t.add_meta("disagreement", fr(est.disagreement));
  t.add_meta("valid", est.valid ? "true" : "false");
  t.add_meta("warning", est.warning ? "true" : "false");
  return {finish("constants_" + spec_tag(cfg.spec) + "_n" + std::to_string(cfg.n_max) + ".csv", t, &spec, cfg)};
}

std::vector<Artifact> cmd_extension(const CarpetSpec& spec, const RunConfig& cfg) {
  require_valid(spec);
  ExtensionBuilder b(spec, cfg.solver);
  CsvTable t({"n", "brick_energy", "bound_ratio", "err_sides", "err_top", "err_annulus", "linear_energy",
              "linear_bound", "boundary_error", "mirror_error"});
  for (int n = 2; n <= cfg.n_max; ++n) {
    const auto& br = b.brick(n);
    const auto& lin = b.linear(n);
    t.add_row({std::to_string(n), fr(br.energy), fr(br.bound_ratio()), fr(br.err_sides), fr(br.err_top),
               fr(br.err_annulus), fr(lin.energy), fr(lin.bound_sum), fr(lin.boundary_error), fr(lin.mirror_error)});
  }
  return {finish("extension_" + spec_tag(cfg.spec) + "_n" + std::to_string(cfg.n_max) + ".csv", t, &spec, cfg)};
}

std::vector<Artifact> cmd_trace(const CarpetSpec& spec, const RunConfig& cfg) {
  require_valid(spec);
  const double r = estimate_r(spec, cfg);
  auto rep = trace_ratio_experiment(spec, cfg.n, cfg.m, r, cfg.trials, cfg.seed, cfg.solver);
  CsvTable t({"trial", "label", "seminorm2", "energy", "ratio"});
  for (const auto& tr : rep.trials)
    t.add_row({std::to_string(tr.id), tr.label, fr(tr.seminorm2), fr(tr.energy), fr(tr.ratio)});
  t.add_row({"summary", "min", "", "", fr(rep.min_ratio)});
  t.add_row({"summary", "max", "", "", fr(rep.max_ratio)});
  t.add_row({"summary", "spread", "", "", fr(rep.spread())});
  t.add_meta("r_hat", fr(r));
  t.add_meta("excluded", std::to_string(rep.excluded));
  return {finish("trace_" + spec_tag(cfg.spec) + "_n" + std::to_string(cfg.n) + "_m" + std::to_string(cfg.m) + ".csv",
                 t, &spec, cfg)};
}

std::vector<Artifact> cmd_metrics(const CarpetSpec& spec, const RunConfig& cfg) {
  require_valid(spec);
  const double r = estimate_r(spec, cfg);
  auto scan = theta_ratio_scan(spec, cfg.pairs, cfg.m, r, cfg.seed, cfg.solver);
  CsvTable t({"x1", "x2", "y1", "y2", "euclid", "geodesic", "resistance", "ratio"});
  for (const auto& p : scan.pairs)
    t.add_row({to_string(p.x.x), to_string(p.x.y), to_string(p.y.x), to_string(p.y.y), fr(p.euclid), fr(p.geodesic),
               fr(p.resistance), fr(p.ratio)});
  t.add_meta("r_hat", fr(scan.r_hat));
  t.add_meta("theta", fr(scan.theta));
  t.add_meta("min_ratio", fr(scan.min_ratio));
  t.add_meta("max_ratio", fr(scan.max_ratio));
  t.add_meta("spread", fr(scan.spread()));
  t.add_meta("excluded", std::to_string(scan.excluded));
  return {finish("metrics_" + spec_tag(cfg.spec) + "_m" + std::to_string(cfg.m) + ".csv", t, &spec, cfg)};
}

std::vector<Artifact> cmd_slide(const RunConfig& cfg) {
  const Rational step = parse_rational(cfg.grid), lo = parse_rational(cfg.z_lo), hi = parse_rational(cfg.z_hi);
  if (step <= 0) throw std::invalid_argument("grid step must be positive");
  if (lo > hi) throw std::invalid_argument("empty z range");
  std::vector<Rational> grid;
  for (Rational z = lo; z <= hi; z += step) grid.push_back(z);
  if (grid.size() > 10000) throw ResourceError("slide grid too fine");
  SlideOptions opt;
  opt.m = cfg.m;
  opt.delta = cfg.delta;
  opt.with_modulus = cfg.modulus;
  opt.solver = cfg.solver;
  auto samples = sliding_scan(grid, opt);
  const auto probes = slide_probes();
  std::vector<std::string> header{"z", "cross_R"};
  for (std::size_t i = 0; i < probes.size(); ++i) header.push_back("R_probe_" + std::to_string(i + 1));
  for (auto h : {"modulus_delta", "r_hat", "m", "error_bound"}) header.push_back(h);
  CsvTable t(header);
  for (const auto& s : samples) {
    std::vector<std::string> row{to_string(s.z), fr(s.cross)};
    for (double v : s.probe) row.push_back(fr(v));
    row.push_back(cfg.modulus ? fr(s.modulus) : "");
    row.push_back(fr(s.r_hat));
    row.push_back(std::to_string(cfg.m));
    row.push_back(fr(*std::max_element(s.probe_err.begin(), s.probe_err.end())));
    t.add_row(std::move(row));
  }
  auto cont = interior_continuity(samples);
  t.add_meta("lipschitz", fr(cont.lipschitz));
  t.add_meta("continuity_violations", std::to_string(cont.violations));
  t.add_meta("delta", fr(cfg.delta));
  return {finish("slide_m" + std::to_string(cfg.m) + ".csv", t, nullptr, cfg)};
}

}  // namespace

CarpetSpec builtin_spec(std::string_view name) {
  if (name == "sc3") return standard_carpet();
  constexpr std::string_view prefix = "slide:z=";
  if (name.starts_with(prefix)) return sliding_family_spec(parse_rational(name.substr(prefix.size())));
  throw SpecError("unknown builtin spec '" + std::string(name) + "'");
}

CarpetSpec resolve_spec(const std::string& name_or_path) {
  if (name_or_path == "sc3" || name_or_path.starts_with("slide:")) return builtin_spec(name_or_path);
  if (!std::filesystem::exists(name_or_path)) throw SpecError("no builtin or file named '" + name_or_path + "'");
  return load_spec_file(name_or_path);
}

std::string canonical_config(const RunConfig& c) {
  std::ostringstream os;
  os << "command=" << c.command << ";spec=" << c.spec << ";n_max=" << c.n_max << ";n=" << c.n << ";m=" << c.m
     << ";trials=" << c.trials << ";pairs=" << c.pairs << ";r_hat=" << format_real(c.r_hat)
     << ";renorm_level=" << c.renorm_level << ";grid=" << c.grid << ";z_lo=" << c.z_lo << ";z_hi=" << c.z_hi
     << ";delta=" << format_real(c.delta) << ";modulus=" << c.modulus << ";seed=" << c.seed
     << ";cg_tol=" << format_real(c.solver.cg_tol) << ";cg_max_mult=" << format_real(c.solver.cg_max_mult)
     << ";lanczos_tol=" << format_real(c.solver.lanczos_tol);
  return os.str();
}

std::vector<Artifact> run(const RunConfig& cfg) {
  if (cfg.command == "slide") return cmd_slide(cfg);
  const auto spec = resolve_spec(cfg.spec);
  if (cfg.command == "validate") return cmd_validate(spec, cfg);
  if (cfg.command == "graph") return cmd_graph(spec, cfg);
  if (cfg.command == "constants") return cmd_constants(spec, cfg);
  if (cfg.command == "extension") return cmd_extension(spec, cfg);
  if (cfg.command == "trace") return cmd_trace(spec, cfg);
  if (cfg.command == "metrics") return cmd_metrics(spec, cfg);
  throw std::invalid_argument("unknown command '" + cfg.command + "'");
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on unconstrained Sierpinski carpets", "carpetlab"};
  app.set_config("--config", "", "TOML/INI config file; flags override it");
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolVersion));

  RunConfig cfg;
  std::string out_dir = ".";
  int threads = 0;
  app.add_option("--out", out_dir, "output directory, '-' for stdout");
  app.add_option("--threads", threads, "worker count (default: CARPET_THREADS or hardware)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--cg-tol,--cg_tol", cfg.solver.cg_tol, "CG relative residual")->check(CLI::PositiveNumber);
  app.add_option("--cg-max-mult,--cg_max_mult", cfg.solver.cg_max_mult, "CG iteration cap per dimension")->check(CLI::PositiveNumber);
  app.add_option("--lanczos-tol,--lanczos_tol", cfg.solver.lanczos_tol, "Lanczos relative residual")->check(CLI::PositiveNumber);

  auto with_spec = [&](CLI::App* sub) { sub->add_option("spec", cfg.spec, "builtin name or JSON file")->required(); };
  auto* validate_cmd = app.add_subcommand("validate", "geometric checks, JSON report");
  with_spec(validate_cmd);
  auto* graph_cmd = app.add_subcommand("graph", "cell graph statistics per level");
  with_spec(graph_cmd);
  graph_cmd->add_option("--n-max", cfg.n_max)->check(CLI::Range(1, 12));
  auto* constants_cmd = app.add_subcommand("constants", "lambda, cross resistance, sigma and r tables");
  with_spec(constants_cmd);
  constants_cmd->add_option("--n-max", cfg.n_max)->check(CLI::Range(2, 12));
  auto* extension_cmd = app.add_subcommand("extension", "brick and boundary-function audit");
  with_spec(extension_cmd);
  extension_cmd->add_option("--n-max", cfg.n_max)->check(CLI::Range(2, 12));
  auto* trace_cmd = app.add_subcommand("trace", "trace ratio experiment");
  with_spec(trace_cmd);
  trace_cmd->add_option("--n", cfg.n)->check(CLI::Range(0, 10));
  trace_cmd->add_option("--m", cfg.m)->check(CLI::Range(2, 12));
  trace_cmd->add_option("--trials", cfg.trials, "random data in addition to the 6 fixed ones")->check(CLI::Range(0, 100000));
  trace_cmd->add_option("--r-hat", cfg.r_hat, "renormalization factor, 0 = estimate");
  trace_cmd->add_option("--renorm-level", cfg.renorm_level)->check(CLI::Range(1, 10));
  auto* metrics_cmd = app.add_subcommand("metrics", "resistance over geodesic^theta scan");
  with_spec(metrics_cmd);
  metrics_cmd->add_option("--m", cfg.m)->check(CLI::Range(1, 12));
  metrics_cmd->add_option("--pairs", cfg.pairs)->check(CLI::Range(1, 100000));
  metrics_cmd->add_option("--r-hat", cfg.r_hat, "renormalization factor, 0 = estimate");
  metrics_cmd->add_option("--renorm-level", cfg.renorm_level)->check(CLI::Range(1, 10));
  auto* slide_cmd = app.add_subcommand("slide", "sliding family scan over z");
  slide_cmd->add_option("--grid", cfg.grid, "z step, p/q");
  slide_cmd->add_option("--z-lo", cfg.z_lo);
  slide_cmd->add_option("--z-hi", cfg.z_hi);
  slide_cmd->add_option("--m", cfg.m)->check(CLI::Range(2, 8));
  slide_cmd->add_option("--delta", cfg.delta, "modulus scale")->check(CLI::PositiveNumber);
  slide_cmd->add_flag("!--no-modulus", cfg.modulus, "skip the equicontinuity modulus");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (threads > 0) set_worker_count(threads);

  auto emit = [&](const std::vector<Artifact>& arts) {
    for (const auto& a : arts) {
      if (out_dir == "-") {
        std::cout << a.content;
        continue;
      }
      std::filesystem::create_directories(out_dir);
      const auto path = std::filesystem::path(out_dir) / a.name;
      std::ofstream f(path, std::ios::binary);
      if (!(f << a.content)) throw std::runtime_error("cannot write " + path.string());
      std::cout << path.string() << '\n';
    }
  };

  try {
    auto arts = run(cfg);
    emit(arts);
    for (const auto& a : arts)
      if (a.failed_validation) {
        std::cerr << "validation failed\n";
        return 3;
      }
    return 0;
  } catch (const SpecError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation failed: " << e.what() << '\n';
    return 3;
  } catch (const DisconnectedError& e) {
    std::cerr << "validation failed: " << e.what() << '\n';
    return 3;
  } catch (const ResourceError& e) {
    std::cerr << "resource guard: " << e.what() << '\n';
    return 4;
  } catch (const ConvergenceError& e) {
    std::cerr << "no convergence: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace usc
