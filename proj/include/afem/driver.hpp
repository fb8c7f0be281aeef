#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "afem/estimate.hpp"
#include "afem/mark.hpp"
#include "afem/nlsolve.hpp"
#include "afem/problems.hpp"
#include "afem/verify.hpp"

namespace afem {

enum class ErrorMode {
  kAuto,       // exact if the problem has one, otherwise reference
  kExact,      // |u - u_k|_1 against the manufactured solution
  kReference,  // against a solve on the final mesh refined uniformly
  kProbe,      // dual_residual_probe every few iterations
  kNone,
};

struct StopRule {
  double tol_eta = 0.0;
  std::optional<std::size_t> max_dofs;
  int max_iters = 20;
};

struct AfemConfig {
  std::string problem = "cubic_mms";
  int m = 3;
  double p = 2.0;
  std::string kappa = "quadratic";  // const:<v> | quadratic
  Point b{0.0, 0.0};
  std::string f = "const:1";  // const:<v> | mms
  std::string exact = "sinsin";
  MarkConfig mark;
  int ell = 1;
  NewtonConfig newton;
  StopRule stop;
  std::optional<double> gamma;
  std::uint64_t seed = 0;
  ErrorMode error_mode = ErrorMode::kAuto;
  int probe_every = 5;
  int probe_levels = 1;
  int reference_levels = 2;
  JumpWeight jump_weight = JumpWeight::kEdgeLength;
  std::string mesh;  // file path or builtin:<name>

  // Every key seen while parsing, for the config echo.
  std::map<std::string, std::string> raw;
};

/// Flat "key = value" lines; '#' starts a comment. Unknown keys and
/// malformed values raise ParseError with the line number.
AfemConfig parse_config(std::istream& is);
AfemConfig load_config(const std::string& path);

ProblemSpec make_problem(const AfemConfig& cfg);

// builtin:lshape, builtin:square, builtin:square:<n>, builtin:triangle, or
// a mesh file path.
MeshPtr resolve_mesh(const std::string& spec);

struct IterationRecord {
  std::size_t k = 0;
  std::size_t n_dofs = 0;
  std::size_t n_elems = 0;
  double eta = 0.0;
  double osc = 0.0;
  double energy_error = std::nan("");
  double e_increment = std::nan("");  // |u_{k+1} - u_k|_1
  double q_error = std::nan("");      // e_k^2 + gamma eta_k^2
  double alpha = std::nan("");        // sqrt(Q_{k+1} / Q_k)
  int newton_iters = 0;
  double newton_residual = 0.0;
  double newton_tol = 0.0;
  double dorfler_margin = std::nan("");
  bool dorfler_minimal = true;
  double min_angle = 0.0;
  bool conforming = true;
  std::size_t n_marked = 0;
  std::size_t mesh_condition_violations = 0;
};

struct AfemReport {
  AfemConfig config;
  std::vector<IterationRecord> records;
  std::string stop_reason;
  ContractionReport contraction;
  std::vector<std::string> warnings;
};

struct RunHooks {
  std::function<void(const IterationRecord&, const FeFunction&, const IndicatorField&)>
      on_iteration;
};

AfemReport afem_run(const AfemConfig& cfg, const MeshPtr& initial,
                    const RunHooks& hooks = {});

// Same loop with every element marked once per sweep; records 0..sweeps.
AfemReport uniform_run(const AfemConfig& cfg, const MeshPtr& initial, int sweeps,
                       const RunHooks& hooks = {});

void write_csv(std::ostream& os, const AfemReport& report);
void write_indicators_csv(std::ostream& os, const IndicatorField& field);

inline constexpr const char* kCsvHeader =
    "k,ndof,nelem,eta,osc,energy_err,E_inc,q_err,alpha,newton_iters,dorfler_margin,min_angle";

}  // namespace afem
