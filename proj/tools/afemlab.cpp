#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "afem/driver.hpp"
#include "afem/error.hpp"
#include "afem/nlsolve.hpp"
#include "afem/verify.hpp"

using namespace afem;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return os;
}

void summary(bool ok, const std::string& name, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// A relative mesh path inside a config is taken relative to the config file.
MeshPtr config_mesh(const AfemConfig& cfg, const std::string& config_path,
                    const std::string& override_path) {
  if (!override_path.empty()) return resolve_mesh(override_path);
  if (cfg.mesh.rfind("builtin:", 0) == 0) return resolve_mesh(cfg.mesh);
  if (!cfg.mesh.empty()) {
    const fs::path p(cfg.mesh);
    return resolve_mesh(p.is_absolute() ? p.string() : (fs::path(config_path).parent_path() / p).string());
  }
  throw Error(ErrorCode::kInvalidArgument, "no mesh given (use --mesh or the mesh key)");
}

int cmd_run(const std::string& config_path, const std::string& mesh_path, const std::string& out,
            bool dump_indicators, int dump_mesh_every) {
  const auto cfg = load_config(config_path);
  const auto mesh = config_mesh(cfg, config_path, mesh_path);
  const fs::path out_path(out);
  const fs::path dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
  const std::string stem = out_path.stem().string();
  fs::create_directories(dir);

  RunHooks hooks;
  hooks.on_iteration = [&](const IterationRecord& rec, const FeFunction& u, const IndicatorField& field) {
    const std::string k = std::to_string(rec.k);
    if (dump_indicators) {
      auto os = open_out(dir / (stem + "_indicators_" + k + ".csv"));
      write_indicators_csv(os, field);
    }
    if (dump_mesh_every > 0 && rec.k % static_cast<std::size_t>(dump_mesh_every) == 0) {
      write_mesh_file((dir / (stem + "_mesh_" + k + ".txt")).string(), u.mesh());
      auto vtk = open_out(dir / (stem + "_mesh_" + k + ".vtk"));
      write_vtk(vtk, u.mesh(), field.eta, "eta");
    }
  };
  const auto report = afem_run(cfg, mesh, hooks);
  auto os = open_out(out_path);
  write_csv(os, report);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  const auto& last = report.records.back();
  std::cout << "stopped (" << report.stop_reason << ") after " << report.records.size()
            << " iterations: ndof=" << last.n_dofs << " eta=" << num(last.eta) << '\n';
  return 0;
}

bool suite_reduction(const AfemConfig& cfg, const MeshPtr& mesh) {
  const auto problem = make_problem(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::bernoulli_distribution pick(0.3);
  std::cout << "instance,n_elems,n_marked,eta2_coarse,eta2_fine,margin,relative_margin\n";
  double worst = -INFINITY;
  for (int i = 0; i < 20; ++i) {
    MeshPtr m = mesh;
    for (int s = 0; s < i % 4; ++s) m = refine_uniform(m);
    const auto sp = make_space(m);
    std::vector<double> c(sp->n_dofs());
    for (auto& x : c) x = coef(rng);
    std::vector<std::size_t> marked;
    for (std::size_t t = 0; t < m->num_triangles(); ++t)
      if (pick(rng)) marked.push_back(t);
    if (marked.empty()) marked.push_back(0);
    const auto r = indicator_reduction_check(FeFunction(sp, std::move(c)), problem, marked,
                                             refine(m, marked, cfg.ell), cfg.ell);
    worst = std::max(worst, r.relative_margin);
    std::printf("%d,%zu,%zu,%.17g,%.17g,%.17g,%.17g\n", i, m->num_triangles(), marked.size(),
                r.eta2_coarse, r.eta2_fine, r.margin, r.relative_margin);
  }
  const bool ok = worst <= 1e-10;
  summary(ok, "indicator_reduction", "max relative margin " + num(worst));
  return ok;
}

bool suite_quasiorth(const AfemConfig& cfg, const MeshPtr& mesh) {
  const auto report = afem_run(cfg, mesh);
  std::vector<double> e, E;
  for (const auto& r : report.records) {
    e.push_back(r.energy_error);
    if (!std::isnan(r.e_increment)) E.push_back(r.e_increment);
  }
  if (std::isnan(e.front())) throw Error(ErrorCode::kInvalidArgument, "quasiorth needs energy errors");
  const auto lam = quasi_orthogonality_report(e, E);
  std::cout << "k,ndof,energy_err,E_inc,Lambda,alpha\n";
  double worst = 0.0;
  for (std::size_t k = 0; k < lam.size(); ++k) {
    const auto& r = report.records[k];
    std::printf("%zu,%zu,%.17g,%.17g,%s,%.17g\n", k, r.n_dofs, r.energy_error, r.e_increment,
                lam[k] ? num(*lam[k]).c_str() : "nan", r.alpha);
    if (k >= 5 && lam[k]) worst = std::max(worst, *lam[k]);
  }
  const bool ok = worst <= 1.2;
  summary(ok, "quasi_orthogonality", "max Lambda_k (k>=5) " + num(worst));
  std::vector<double> eta;
  for (const auto& r : report.records) eta.push_back(r.eta);
  const bool conv = estimator_convergence_check(eta);
  summary(conv, "estimator_convergence", "eta " + num(eta.front()) + " -> " + num(eta.back()));
  return ok && conv;
}

bool suite_infsup(const AfemConfig& cfg, const MeshPtr& mesh) {
  const auto problem = make_problem(cfg);
  std::cout << "level,ndof,beta_energy,beta_h1\n";
  std::vector<double> h1;
  MeshPtr m = mesh;
  for (int level = 0; level < 4; ++level) {
    const auto sp = make_space(m);
    if (sp->n_dofs() > kInfSupMaxDofs) break;
    const auto u = newton(problem, FeFunction(sp), cfg.newton).u;
    const double be = discrete_infsup(u, problem, InfSupNorm::kEnergy);
    const double bh = discrete_infsup(u, problem, InfSupNorm::kH1);
    h1.push_back(bh);
    std::printf("%d,%zu,%.17g,%.17g\n", level, sp->n_dofs(), be, bh);
    m = refine_uniform(m);
  }
  const auto [lo, hi] = std::minmax_element(h1.begin(), h1.end());
  const bool ok = h1.size() >= 2 && *lo > 0.0 && *hi / *lo <= 1.2;
  summary(ok, "infsup_stability", "H1 beta in [" + num(*lo) + ", " + num(*hi) + "] over " +
                                      std::to_string(h1.size()) + " levels");
  return ok;
}

bool suite_lipschitz(const AfemConfig& cfg, const MeshPtr& mesh) {
  const auto problem = make_problem(cfg);
  if (problem.kind == ProblemKind::kQuasilinearHeat || problem.m != 3) {
    throw Error(ErrorCode::kInvalidArgument, "lipschitz suite supports the cubic problem only");
  }
  const auto bounds = apriori_bounds_cubic(linear_part_bounds(problem, mesh), data_sign(problem, *mesh));
  const auto sp = make_space(mesh);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> d(bounds.u_minus, bounds.u_plus);
  auto random_fn = [&] {
    std::vector<double> c(sp->n_dofs());
    for (auto& x : c) x = d(rng);
    return FeFunction(sp, std::move(c));
  };
  std::cout << "trial,ratio,element\n";
  std::vector<double> r;
  for (int i = 0; i < 100; ++i) {
    const auto probe = local_lipschitz_probe(random_fn(), random_fn(), problem, bounds);
    r.push_back(probe.ratio);
    std::printf("%d,%.17g,%s\n", i, probe.ratio,
                probe.element ? std::to_string(*probe.element).c_str() : "");
  }
  std::sort(r.begin(), r.end());
  const double median = r[r.size() / 2];
  const bool ok = std::isfinite(r.back()) && r.back() <= 10.0 * median;
  summary(ok, "lipschitz_probe", "max " + num(r.back()) + ", median " + num(median));
  return ok;
}

int cmd_verify(const std::string& suite, const std::string& config_path, const std::string& mesh_path) {
  const auto cfg = load_config(config_path);
  const auto mesh = config_mesh(cfg, config_path, mesh_path);
  bool ok = false;
  if (suite == "reduction") ok = suite_reduction(cfg, mesh);
  else if (suite == "quasiorth") ok = suite_quasiorth(cfg, mesh);
  else if (suite == "infsup") ok = suite_infsup(cfg, mesh);
  else ok = suite_lipschitz(cfg, mesh);
  return ok ? 0 : 1;
}

int cmd_mesh_info(const std::string& path) {
  const auto mesh = resolve_mesh(path);
  const auto s = mesh_stats(*mesh);
  std::size_t boundary = 0;
  for (const auto& e : mesh->edges()) boundary += e.on_boundary();
  std::cout << "vertices: " << mesh->num_vertices() << '\n'
            << "triangles: " << mesh->num_triangles() << '\n'
            << "edges: " << mesh->edges().size() << " (" << boundary << " on boundary)\n"
            << "area: " << num(mesh->total_area()) << '\n'
            << "h: [" << num(s.h_min) << ", " << num(s.h_max) << "]\n"
            << "min angle (deg): " << num(s.min_angle * 180.0 / M_PI) << '\n'
            << "max vertex valence: " << s.max_vertex_valence << '\n'
            << "conforming: " << (mesh->is_conforming() ? "yes" : "no") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive P1 finite elements for nonlinear elliptic problems"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the adaptive loop and write the history CSV");
  std::string config, mesh, out;
  bool dump_indicators = false;
  int dump_mesh_every = 0;
  run->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--mesh", mesh, "Mesh file or builtin:<name> (overrides the config)");
  run->add_option("--out", out, "History CSV")->required();
  run->add_flag("--dump-indicators", dump_indicators, "Write per-element indicators each iteration");
  run->add_option("--dump-mesh-every", dump_mesh_every, "Write mesh and VTK every N iterations")
      ->check(CLI::NonNegativeNumber);

  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  std::string suite;
  verify->add_option("--suite", suite, "Suite")
      ->required()
      ->check(CLI::IsMember({"reduction", "quasiorth", "infsup", "lipschitz"}));
  verify->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  verify->add_option("--mesh", mesh, "Mesh file or builtin:<name> (overrides the config)");

  auto* mesh_cmd = app.add_subcommand("mesh", "Mesh utilities");
  mesh_cmd->require_subcommand(1);
  auto* info = mesh_cmd->add_subcommand("info", "Print mesh statistics");
  std::string mesh_file;
  info->add_option("file", mesh_file, "Mesh file or builtin:<name>")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, mesh, out, dump_indicators, dump_mesh_every);
    if (*verify) return cmd_verify(suite, config, mesh);
    return cmd_mesh_info(mesh_file);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
