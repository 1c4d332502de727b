#include "CLI11.hpp"

#include "ictmc/cones.hpp"
#include "ictmc/io.hpp"
#include "ictmc/solver.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

namespace {

using namespace ictmc;

bool verbose_logging() {
  const char* v = std::getenv("ICTMC_LOG");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

void log_notes(const std::vector<std::string>& notes) {
  if (!verbose_logging()) return;
  for (const std::string& n : notes) std::cerr << "[ictmc] " << n << "\n";
}

// --h accepts "state:i" (indicator of state i), "neg-state:i", or a plain
// comma-separated vector.
Vec parse_h(const std::string& spec, int m) {
  auto indicator = [&](const std::string& tail, double sign) {
    int i = -1;
    try {
      size_t used = 0;
      i = std::stoi(tail, &used);
      if (used != tail.size()) i = -1;
    } catch (...) {
      i = -1;
    }
    if (i < 0 || i >= m)
      throw ParseError("--h state index out of range: " + tail + " (states: " +
                       std::to_string(m) + ")");
    return Vec(sign * Vec::Unit(m, i));
  };
  if (spec.rfind("state:", 0) == 0) return indicator(spec.substr(6), 1.0);
  if (spec.rfind("neg-state:", 0) == 0) return indicator(spec.substr(10), -1.0);

  std::vector<double> vals;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (...) {
      throw ParseError("--h entry is not a number: '" + item + "'");
    }
  }
  if (static_cast<int>(vals.size()) != m)
    throw ParseError("--h has " + std::to_string(vals.size()) + " entries, model has " +
                     std::to_string(m) + " states");
  return Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::string vec_text(const Vec& v) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v(i));
  }
  return out + ")";
}

void print_solve_text(const SolveReport& r) {
  std::cout << "h_T       " << vec_text(r.h_T) << "\n";
  std::cout << "max_err   " << format_double(r.max_err) << "\n";
  std::cout << "steps     " << r.steps.size() << "\n";
  std::cout << "lp_calls  " << r.lp_calls << "\n";
  std::printf("wall      %.3fs\n", r.wall_seconds);
  for (size_t i = 0; i < r.steps.size(); ++i) {
    const StepCertificate& s = r.steps[i];
    std::printf("  step %-3zu t=%-22s dt=%-22s eps=%-13s err=%-13s %s r=%d\n", i + 1,
                format_double(s.t_start).c_str(), format_double(s.dt).c_str(),
                format_double(s.epsilon).c_str(), format_double(s.step_error).c_str(),
                s.exact ? "exact" : "     ", s.r_used);
  }
  if (std::isfinite(r.debug_min_coeff)) {
    std::cout << "debug_min_coeff        " << format_double(r.debug_min_coeff) << "\n";
    std::cout << "debug_max_operator_gap " << format_double(r.debug_max_operator_gap) << "\n";
  }
}

void print_grid_text(const GridReport& r) {
  std::cout << "h_T       " << vec_text(r.h_T) << "\n";
  std::cout << "bound     " << format_double(r.bound) << "\n";
  std::cout << "n         " << r.n << "\n";
  std::cout << "lp_calls  " << r.lp_calls << "\n";
}

// Vertex census for one row polytope: try every (m-1)-subset of constraints
// as a candidate active set on the zero-sum hyperplane and keep the feasible
// solves.  Exponential, so info only reports it for small models.
int count_row_vertices(const Problem& p, int k) {
  const int m = p.num_states();
  const int n = p.num_gambles();
  std::vector<int> idx;
  std::vector<Vec> found;
  std::vector<int> pick(m - 1);
  auto feasible = [&](const Vec& q) {
    for (int i = 0; i < n; ++i) {
      const double b = p.lower_bounds(i, k);
      if (b == kNoBound) continue;
      if (p.gambles.row(i).dot(q) < b - 1e-9 * (1 + std::abs(b))) return false;
    }
    return true;
  };
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == m - 1) {
      Mat A(m, m);
      Vec b(m);
      A.row(0).setOnes();
      b(0) = 0;
      for (int d = 0; d < m - 1; ++d) {
        A.row(d + 1) = p.gambles.row(pick[d]);
        b(d + 1) = p.lower_bounds(pick[d], k);
      }
      Eigen::FullPivLU<Mat> lu(A);
      if (!lu.isInvertible()) return;
      Vec q = lu.solve(b);
      if (!feasible(q)) return;
      for (const Vec& other : found)
        if ((other - q).lpNorm<Eigen::Infinity>() < 1e-8 * (1 + q.lpNorm<Eigen::Infinity>()))
          return;
      found.push_back(q);
      return;
    }
    for (int i = start; i < n; ++i) {
      if (p.lower_bounds(i, k) == kNoBound) continue;
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return static_cast<int>(found.size());
}

struct SolveArgs {
  std::string problem;
  std::string h_spec;
  double T = 0;
  double max_error = 0;
  std::string method = "adaptive";
  long steps = 0;
  double dt_min = 0;
  std::string output = "text";
  bool debug_invariants = false;
};

int cmd_solve(const SolveArgs& a) {
  Problem p = load_problem(a.problem);
  log_notes(p.notes);
  const Vec h0 = parse_h(a.h_spec, p.num_states());

  if (a.method == "adaptive") {
    AdaptiveOptions opts;
    opts.dt_min = a.dt_min;
    opts.debug_invariants = a.debug_invariants;
    SolveReport r;
    try {
      r = solve_adaptive(p, h0, a.T, a.max_error, opts);
    } catch (const BudgetExhausted& e) {
      log_notes(e.partial.notes);
      if (a.output == "structured")
        std::cout << serialize_report(e.partial, "budget-exhausted");
      else {
        std::cerr << "error: " << e.what() << "\n";
        print_solve_text(e.partial);
      }
      return 3;
    }
    log_notes(r.notes);
    if (a.output == "structured")
      std::cout << serialize_report(r, "ok");
    else
      print_solve_text(r);
    return 0;
  }

  long n = a.steps;
  const double nq = qset_norm(p);
  const double hc = center_seminorm(h0);
  if (n <= 0) {
    if (a.max_error <= 0) throw ParseError("grid methods need --steps or a positive --max-error");
    if (a.method == "uniform-exp") {
      n = required_steps_uniform(a.T, nq, hc, a.max_error);
    } else {
      n = 1;
      if (a.max_error > 0 && hc > 0)
        n = std::max<long>(n, static_cast<long>(std::ceil(a.T * a.T * nq * nq * hc / a.max_error)));
      n = std::max<long>(n, static_cast<long>(std::ceil(a.T * nq / 2)));
    }
  }
  GridReport r = a.method == "uniform-exp" ? solve_uniform_exp(p, h0, a.T, n)
                                           : solve_uniform_euler(p, h0, a.T, n);
  if (a.output == "structured")
    std::cout << serialize_report(r, "ok");
  else
    print_grid_text(r);
  return 0;
}

int cmd_compare(const SolveArgs& a) {
  Problem p = load_problem(a.problem);
  log_notes(p.notes);
  const Vec h0 = parse_h(a.h_spec, p.num_states());
  const double nq = qset_norm(p);
  const double hc = center_seminorm(h0);

  AdaptiveOptions opts;
  opts.dt_min = a.dt_min;
  SolveReport ar = solve_adaptive(p, h0, a.T, a.max_error, opts);

  const long n_exp = required_steps_uniform(a.T, nq, hc, a.max_error);
  GridReport xr = solve_uniform_exp(p, h0, a.T, n_exp);

  long n_eul = 1;
  if (a.max_error > 0 && hc > 0)
    n_eul = std::max<long>(n_eul,
                           static_cast<long>(std::ceil(a.T * a.T * nq * nq * hc / a.max_error)));
  n_eul = std::max<long>(n_eul, static_cast<long>(std::ceil(a.T * nq / 2)));
  GridReport er = solve_uniform_euler(p, h0, a.T, n_eul);

  const double d_ax = max_norm(ar.h_T - xr.h_T);
  const double d_ae = max_norm(ar.h_T - er.h_T);
  const double d_xe = max_norm(xr.h_T - er.h_T);

  if (a.output == "structured") {
    std::ostringstream os;
    os << "{\n";
    os << "  \"status\": \"ok\",\n";
    os << "  \"required_steps_uniform\": " << n_exp << ",\n";
    auto entry = [&](const char* name, const Vec& h, long steps, long lp, double err,
                     bool last) {
      os << "  \"" << name << "\": {\"steps\": " << steps << ", \"lp_calls\": " << lp
         << ", \"error_bound\": " << format_double(err) << ", \"h_T\": [";
      for (Eigen::Index i = 0; i < h.size(); ++i)
        os << (i ? ", " : "") << format_double(h(i));
      os << "]}" << (last ? "\n" : ",\n");
    };
    entry("adaptive", ar.h_T, static_cast<long>(ar.steps.size()), ar.lp_calls, ar.max_err, false);
    entry("uniform_exp", xr.h_T, xr.n, xr.lp_calls, xr.bound, false);
    entry("uniform_euler", er.h_T, er.n, er.lp_calls, er.bound, false);
    os << "  \"diff_adaptive_exp\": " << format_double(d_ax) << ",\n";
    os << "  \"diff_adaptive_euler\": " << format_double(d_ae) << ",\n";
    os << "  \"diff_exp_euler\": " << format_double(d_xe) << "\n";
    os << "}\n";
    std::cout << os.str();
    return 0;
  }

  std::printf("%-14s %10s %10s %14s  h_T\n", "method", "steps", "lp_calls", "error_bound");
  std::printf("%-14s %10zu %10ld %14s  %s\n", "adaptive", ar.steps.size(), ar.lp_calls,
              format_double(ar.max_err).c_str(), vec_text(ar.h_T).c_str());
  std::printf("%-14s %10ld %10ld %14s  %s\n", "uniform-exp", xr.n, xr.lp_calls,
              format_double(xr.bound).c_str(), vec_text(xr.h_T).c_str());
  std::printf("%-14s %10ld %10ld %14s  %s\n", "uniform-euler", er.n, er.lp_calls,
              format_double(er.bound).c_str(), vec_text(er.h_T).c_str());
  std::cout << "required_steps_uniform " << n_exp << "\n";
  std::cout << "diff adaptive/exp   " << format_double(d_ax) << "\n";
  std::cout << "diff adaptive/euler " << format_double(d_ae) << "\n";
  std::cout << "diff exp/euler      " << format_double(d_xe) << "\n";
  return 0;
}

int cmd_info(const std::string& path) {
  Problem p = load_problem(path);
  log_notes(p.notes);
  const int m = p.num_states();
  const int n = p.num_gambles();
  if (!p.name.empty()) std::cout << "name        " << p.name << "\n";
  if (!p.description.empty()) std::cout << "description " << p.description << "\n";
  std::cout << "states      " << m << "\n";
  std::cout << "gambles     " << n << "\n";
  std::cout << "validated   " << (p.validated ? "yes" : "no") << "\n";
  std::cout << "qset_norm   " << format_double(qset_norm(p)) << "\n";
  std::cout << "iota_bound  " << format_double(imprecision_bound(p)) << "\n";
  std::string points;
  for (int k = 0; k < m; ++k)
    if (p.point_row[k]) points += (points.empty() ? "" : ", ") + std::to_string(k);
  std::cout << "point_rows  " << (points.empty() ? "none" : points) << "\n";
  if (m <= 5 && n <= 14) {
    for (int k = 0; k < m; ++k)
      std::cout << "row " << k << " vertices " << count_row_vertices(p, k) << "\n";
  }
  return 0;
}

int cmd_bounds(const std::string& path, int state, double T, double E,
               const std::string& output) {
  Problem p = load_problem(path);
  log_notes(p.notes);
  if (state < 0 || state >= p.num_states())
    throw ParseError("--state out of range (states: " + std::to_string(p.num_states()) + ")");
  TransitionBounds b = transition_bounds(p, state, T, E);
  if (output == "structured") {
    std::cout << serialize_bounds(b, "ok");
    return 0;
  }
  std::cout << "state " << b.state << "  T " << format_double(b.T) << "\n";
  for (Eigen::Index j = 0; j < b.lower.size(); ++j)
    std::printf("  from %-3ld [%s, %s]\n", static_cast<long>(j),
                format_double(b.lower(j)).c_str(), format_double(b.upper(j)).c_str());
  std::cout << "lower_err " << format_double(b.lower_err) << " (" << b.lower_steps
            << " steps)\n";
  std::cout << "upper_err " << format_double(b.upper_err) << " (" << b.upper_steps
            << " steps)\n";
  std::cout << "lp_calls  " << b.lp_calls << "\n";
  std::cout << "converged " << (b.converged ? "yes" : "no") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified expectation bounds for imprecise continuous-time Markov chains"};
  app.require_subcommand(1);

  SolveArgs sa;
  CLI::App* solve = app.add_subcommand("solve", "Solve the backward equation for one gamble");
  solve->set_help_flag("--help", "Print this help message and exit");
  solve->add_option("--problem", sa.problem, "Problem file")->required();
  solve->add_option("--h", sa.h_spec, "Initial gamble: csv, state:i, or neg-state:i")->required();
  solve->add_option("--T", sa.T, "Time horizon")->required();
  solve->add_option("--max-error", sa.max_error, "Total certified error budget");
  solve->add_option("--method", sa.method, "adaptive | uniform-exp | uniform-euler")
      ->check(CLI::IsMember({"adaptive", "uniform-exp", "uniform-euler"}));
  solve->add_option("--steps", sa.steps, "Step count for the uniform methods");
  solve->add_option("--dt-min", sa.dt_min, "Smallest adaptive interval (default 0.01*T)");
  solve->add_option("--output", sa.output, "text | structured")
      ->check(CLI::IsMember({"text", "structured"}));
  solve->add_flag("--debug-invariants", sa.debug_invariants,
                  "Check interior-time cone membership on every accepted step");

  SolveArgs ca;
  CLI::App* compare = app.add_subcommand("compare", "Adaptive vs uniform grids at matched error");
  compare->set_help_flag("--help", "Print this help message and exit");
  compare->add_option("--problem", ca.problem, "Problem file")->required();
  compare->add_option("--h", ca.h_spec, "Initial gamble")->required();
  compare->add_option("--T", ca.T, "Time horizon")->required();
  compare->add_option("--max-error", ca.max_error, "Error budget for all methods")->required();
  compare->add_option("--dt-min", ca.dt_min, "Smallest adaptive interval");
  compare->add_option("--output", ca.output, "text | structured")
      ->check(CLI::IsMember({"text", "structured"}));

  std::string info_path;
  CLI::App* info = app.add_subcommand("info", "Model summary and polytope census");
  info->add_option("--problem", info_path, "Problem file")->required();

  std::string bounds_path, bounds_output = "text";
  int bounds_state = 0;
  double bounds_T = 1.0, bounds_E = 1e-3;
  CLI::App* bounds = app.add_subcommand("bounds", "Transition probability bounds for one state");
  bounds->add_option("--problem", bounds_path, "Problem file")->required();
  bounds->add_option("--state", bounds_state, "Target state index")->required();
  bounds->add_option("--T", bounds_T, "Time horizon");
  bounds->add_option("--max-error", bounds_E, "Error budget per direction");
  bounds->add_option("--output", bounds_output, "text | structured")
      ->check(CLI::IsMember({"text", "structured"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(sa);
    if (compare->parsed()) return cmd_compare(ca);
    if (info->parsed()) return cmd_info(info_path);
    if (bounds->parsed()) return cmd_bounds(bounds_path, bounds_state, bounds_T, bounds_E,
                                            bounds_output);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidModel& e) {
    std::cerr << "error: invalid model: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleModel& e) {
    std::cerr << "error: infeasible model: " << e.what() << "\n";
    return 2;
  } catch (const UnboundedModel& e) {
    std::cerr << "error: unbounded model: " << e.what() << "\n";
    return 2;
  } catch (const StepTooCoarse& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetExhausted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: numerical failure: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
