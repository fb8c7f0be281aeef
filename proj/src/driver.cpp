#include "afem/driver.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "afem/error.hpp"

namespace afem {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(int line, const std::string& key, const std::string& value) {
  throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": bad value '" +
                                          value + "' for " + key);
}

double to_double(int line, const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno != 0 || !std::isfinite(d)) bad_value(line, key, v);
  return d;
}

long long to_int(int line, const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno != 0) bad_value(line, key, v);
  return i;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_const(const std::string& spec, const char* what) {
  if (spec.rfind("const:", 0) != 0) {
    throw Error(ErrorCode::kParseError, std::string(what) + " must be const:<v>, got " + spec);
  }
  return to_double(0, what, spec.substr(6));
}

ExactSolution exact_by_name(const std::string& name) {
  if (name == "sinsin") return exact_solutions::sin_sin();
  if (name == "bubble") return exact_solutions::bubble();
  if (name == "zero") return exact_solutions::zero();
  throw Error(ErrorCode::kParseError, "unknown exact solution '" + name + "'");
}

Error with_context(const Error& e, std::size_t k) {
  std::string msg = e.what();
  const auto colon = msg.find(": ");
  if (colon != std::string::npos) msg = msg.substr(colon + 2);
  return Error(e.code(), "iteration " + std::to_string(k) + ": " + msg);
}

}  // namespace

AfemConfig parse_config(std::istream& is) {
  AfemConfig c;
  std::string raw_line;
  int line = 0;
  while (std::getline(is, raw_line)) {
    ++line;
    const auto hash = raw_line.find('#');
    const std::string text = trim(raw_line.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": expected key = value");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string v = trim(text.substr(eq + 1));
    c.raw[key] = v;
    if (key == "problem") {
      if (v != "cubic_mms" && v != "semilinear_power" && v != "quasilinear_heat") bad_value(line, key, v);
      c.problem = v;
    } else if (key == "m") {
      c.m = static_cast<int>(to_int(line, key, v));
    } else if (key == "p") {
      c.p = to_double(line, key, v);
    } else if (key == "kappa") {
      c.kappa = v;
    } else if (key == "b") {
      const auto comma = v.find(',');
      if (comma == std::string::npos) bad_value(line, key, v);
      c.b = {to_double(line, key, trim(v.substr(0, comma))),
             to_double(line, key, trim(v.substr(comma + 1)))};
    } else if (key == "f") {
      c.f = v;
    } else if (key == "exact") {
      c.exact = v;
    } else if (key == "mark.strategy") {
      if (v == "dorfler") c.mark.strategy = MarkStrategy::kDorfler;
      else if (v == "maximum") c.mark.strategy = MarkStrategy::kMaximum;
      else bad_value(line, key, v);
    } else if (key == "mark.theta") {
      c.mark.theta = to_double(line, key, v);
    } else if (key == "mark.mu") {
      c.mark.mu = to_double(line, key, v);
    } else if (key == "ell") {
      c.ell = static_cast<int>(to_int(line, key, v));
    } else if (key == "newton.tol") {
      c.newton.tol_residual = to_double(line, key, v);
    } else if (key == "newton.max_iters") {
      c.newton.max_iters = static_cast<int>(to_int(line, key, v));
    } else if (key == "newton.damping") {
      if (v == "armijo") c.newton.damping.kind = DampingKind::kArmijo;
      else if (v == "none") c.newton.damping.kind = DampingKind::kNone;
      else bad_value(line, key, v);
    } else if (key == "newton.backtrack") {
      c.newton.damping.backtrack = to_double(line, key, v);
    } else if (key == "newton.max_backtracks") {
      c.newton.damping.max_backtracks = static_cast<int>(to_int(line, key, v));
    } else if (key == "linear.kind") {
      if (v == "cg") c.newton.linear.kind = LinearKind::kCg;
      else if (v == "direct") c.newton.linear.kind = LinearKind::kDirect;
      else bad_value(line, key, v);
    } else if (key == "linear.tol") {
      c.newton.linear.tol = to_double(line, key, v);
    } else if (key == "linear.max_iters") {
      c.newton.linear.max_iters = static_cast<int>(to_int(line, key, v));
    } else if (key == "stop.tol_eta") {
      c.stop.tol_eta = to_double(line, key, v);
    } else if (key == "stop.max_dofs") {
      const auto n = to_int(line, key, v);
      if (n < 0) bad_value(line, key, v);
      c.stop.max_dofs = static_cast<std::size_t>(n);
    } else if (key == "stop.max_iters") {
      c.stop.max_iters = static_cast<int>(to_int(line, key, v));
    } else if (key == "gamma") {
      c.gamma = to_double(line, key, v);
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(to_int(line, key, v));
    } else if (key == "error.mode") {
      if (v == "auto") c.error_mode = ErrorMode::kAuto;
      else if (v == "exact") c.error_mode = ErrorMode::kExact;
      else if (v == "reference") c.error_mode = ErrorMode::kReference;
      else if (v == "probe") c.error_mode = ErrorMode::kProbe;
      else if (v == "none") c.error_mode = ErrorMode::kNone;
      else bad_value(line, key, v);
    } else if (key == "error.probe_every") {
      c.probe_every = static_cast<int>(to_int(line, key, v));
    } else if (key == "error.probe_levels") {
      c.probe_levels = static_cast<int>(to_int(line, key, v));
    } else if (key == "error.reference_levels") {
      c.reference_levels = static_cast<int>(to_int(line, key, v));
    } else if (key == "estimate.jump_weight") {
      if (v == "edge") c.jump_weight = JumpWeight::kEdgeLength;
      else if (v == "element") c.jump_weight = JumpWeight::kElementSize;
      else bad_value(line, key, v);
    } else if (key == "mesh") {
      c.mesh = v;
    } else {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }
  if (c.ell < 1) throw Error(ErrorCode::kInvalidArgument, "ell must be >= 1");
  if (c.stop.max_iters < 1) throw Error(ErrorCode::kInvalidArgument, "stop.max_iters must be >= 1");
  if (c.probe_every < 1 || c.probe_levels < 0 || c.reference_levels < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bad error.* settings");
  }
  c.mark.validate();
  return c;
}

AfemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path);
  return parse_config(in);
}

ProblemSpec make_problem(const AfemConfig& cfg) {
  if (cfg.problem == "cubic_mms") return make_cubic_mms(exact_by_name(cfg.exact));
  if (cfg.problem == "semilinear_power") {
    if (cfg.f == "mms") {
      throw Error(ErrorCode::kParseError, "f = mms needs problem = cubic_mms or quasilinear_heat");
    }
    const double v = parse_const(cfg.f, "f");
    return make_semilinear_power(cfg.m, [v](Point) { return v; }, cfg.p);
  }
  Diffusion d;
  if (cfg.kappa == "quadratic") d = diffusions::quadratic();
  else d = diffusions::constant(parse_const(cfg.kappa, "kappa"));
  VectorField b;
  if (cfg.b.x != 0.0 || cfg.b.y != 0.0) {
    const Point bv = cfg.b;
    b = [bv](Point) { return bv; };
  }
  if (cfg.f == "mms") return make_heat_mms(std::move(d), std::move(b), exact_by_name(cfg.exact), cfg.p);
  const double v = parse_const(cfg.f, "f");
  return make_quasilinear_heat(std::move(d), std::move(b), [v](Point) { return v; }, cfg.p);
}

MeshPtr resolve_mesh(const std::string& spec) {
  if (spec.rfind("builtin:", 0) == 0) {
    const std::string name = spec.substr(8);
    if (name == "lshape") return meshes::lshape();
    if (name == "square") return meshes::unit_square_two();
    if (name == "triangle") return meshes::single_triangle({0, 0}, {1, 0}, {0, 1});
    if (name.rfind("square:", 0) == 0) {
      return meshes::unit_square_grid(static_cast<int>(to_int(0, "mesh", name.substr(7))));
    }
    throw Error(ErrorCode::kParseError, "unknown builtin mesh '" + name + "'");
  }
  return read_mesh_file(spec);
}

namespace {

enum class Marking { kConfigured, kAll };

AfemReport run_loop(const AfemConfig& cfg, const MeshPtr& initial, Marking marking,
                    int max_iters, const RunHooks& hooks) {
  const ProblemSpec problem = make_problem(cfg);
  AfemReport report;
  report.config = cfg;
  for (const auto& w : problem.warnings) report.warnings.push_back(w);

  ErrorMode mode = cfg.error_mode;
  if (mode == ErrorMode::kAuto) mode = problem.exact ? ErrorMode::kExact : ErrorMode::kReference;
  if (mode == ErrorMode::kExact && !problem.exact) {
    throw Error(ErrorCode::kInvalidArgument, "error.mode = exact needs a manufactured solution");
  }

  IndicatorOptions iopts;
  iopts.jump_weight = cfg.jump_weight;
  const int ell = marking == Marking::kAll ? 1 : cfg.ell;

  MeshPtr mesh = initial;
  std::optional<FeFunction> prev;
  std::vector<FeFunction> history;  // only kept for reference errors
  for (std::size_t k = 0;; ++k) {
    IterationRecord rec;
    rec.k = k;
    try {
      const auto space = make_space(mesh);
      const FeFunction u0 = prev ? prolong(*prev, space) : FeFunction(space);
      const auto solved = newton(problem, u0, cfg.newton);
      const FeFunction& u = solved.u;
      rec.n_dofs = space->n_dofs();
      rec.n_elems = mesh->num_triangles();
      rec.newton_iters = solved.iters;
      rec.newton_residual = solved.final_residual;
      rec.newton_tol = solved.tol;
      rec.min_angle = mesh_stats(*mesh).min_angle;
      rec.conforming = mesh->is_conforming();
      if (!rec.conforming) throw Error(ErrorCode::kNonConforming, "mesh lost conformity");
      if (problem.has_reaction()) rec.mesh_condition_violations = check_mesh_condition(*space).size();

      if (prev) {
        report.records[k - 1].e_increment = h1_seminorm(u - u0);
      }
      const auto field = compute_indicators(u, problem, iopts);
      rec.eta = field.total();
      rec.osc = field.osc_total();
      if (mode == ErrorMode::kExact) {
        rec.energy_error = h1_seminorm_error(u, *problem.exact);
      } else if (mode == ErrorMode::kProbe && k % static_cast<std::size_t>(cfg.probe_every) == 0) {
        try {
          rec.energy_error = dual_residual_probe(u, problem, cfg.probe_levels);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kMeshTooLarge) throw;
        }
      } else if (mode == ErrorMode::kReference) {
        history.push_back(u);
      }

      std::string stop;
      if (rec.eta <= cfg.stop.tol_eta) stop = "tol_eta";
      else if (cfg.stop.max_dofs && rec.n_dofs >= *cfg.stop.max_dofs) stop = "max_dofs";
      else if (static_cast<int>(k) + 1 >= max_iters) stop = "max_iters";

      std::vector<std::size_t> marked;
      if (stop.empty()) {
        if (marking == Marking::kAll) {
          marked.resize(mesh->num_triangles());
          for (std::size_t t = 0; t < marked.size(); ++t) marked[t] = t;
        } else {
          marked = mark(field, cfg.mark);
          if (cfg.mark.strategy == MarkStrategy::kDorfler) {
            const auto cert = dorfler_certificate(field.eta, field.p, cfg.mark.theta, marked);
            rec.dorfler_margin = cert.margin;
            rec.dorfler_minimal = cert.minimal;
            if (!cert.satisfied || !cert.minimal) {
              report.warnings.push_back("iteration " + std::to_string(k) +
                                        ": Dörfler certificate failed");
            }
          }
        }
        rec.n_marked = marked.size();
      }
      report.records.push_back(rec);
      if (hooks.on_iteration) hooks.on_iteration(rec, u, field);
      if (!stop.empty()) {
        report.stop_reason = stop;
        prev = u;
        break;
      }
      mesh = refine(mesh, marked, ell);
      prev = u;
    } catch (const Error& e) {
      throw with_context(e, k);
    }
  }

  if (mode == ErrorMode::kReference && !history.empty()) {
    const auto ref_mesh = refine_uniform(history.back().space().mesh_ptr(), cfg.reference_levels);
    const auto ref_space = make_space(ref_mesh);
    NewtonConfig ncfg = cfg.newton;
    const auto ref = newton(problem, prolong(history.back(), ref_space), ncfg).u;
    for (std::size_t k = 0; k < history.size(); ++k)
      report.records[k].energy_error = h1_seminorm(ref - prolong(history[k], ref_space));
  }

  std::vector<double> e, eta;
  for (const auto& r : report.records) {
    e.push_back(r.energy_error);
    eta.push_back(r.eta);
  }
  const bool have_errors = !report.records.empty() && !std::isnan(e.front());
  if (have_errors && mode != ErrorMode::kProbe) {
    report.contraction = contraction_report(e, eta, cfg.gamma.value_or(0.0));
    const auto& c = report.contraction;
    for (std::size_t k = 0; k < report.records.size(); ++k) {
      report.records[k].q_error = c.q[k];
      if (k < c.alpha.size()) report.records[k].alpha = c.alpha[k];
    }
    int rising = 0;
    for (std::size_t k = 1; k < c.q.size(); ++k) {
      rising = c.q[k] > c.q[k - 1] ? rising + 1 : 0;
      if (rising == 3) {
        report.warnings.push_back("NonContracting: quasi-error increased for 3 consecutive "
                                  "iterations ending at k=" + std::to_string(k));
      }
    }
  }
  return report;
}

}  // namespace

AfemReport afem_run(const AfemConfig& cfg, const MeshPtr& initial, const RunHooks& hooks) {
  return run_loop(cfg, initial, Marking::kConfigured, cfg.stop.max_iters, hooks);
}

AfemReport uniform_run(const AfemConfig& cfg, const MeshPtr& initial, int sweeps,
                       const RunHooks& hooks) {
  if (sweeps < 0) throw Error(ErrorCode::kInvalidArgument, "sweeps must be >= 0");
  return run_loop(cfg, initial, Marking::kAll, sweeps + 1, hooks);
}

void write_csv(std::ostream& os, const AfemReport& report) {
  os << kCsvHeader << '\n';
  for (const auto& r : report.records) {
    os << r.k << ',' << r.n_dofs << ',' << r.n_elems << ',' << fmt(r.eta) << ',' << fmt(r.osc)
       << ',' << fmt(r.energy_error) << ',' << fmt(r.e_increment) << ',' << fmt(r.q_error)
       << ',' << fmt(r.alpha) << ',' << r.newton_iters << ',' << fmt(r.dorfler_margin) << ','
       << fmt(r.min_angle) << '\n';
  }
}

void write_indicators_csv(std::ostream& os, const IndicatorField& field) {
  os << "elem_id,eta,osc\n";
  for (std::size_t t = 0; t < field.eta.size(); ++t)
    os << t << ',' << fmt(field.eta[t]) << ',' << fmt(field.osc[t]) << '\n';
}

}  // namespace afem
