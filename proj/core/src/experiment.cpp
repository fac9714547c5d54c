#include "splitstep/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace splitstep {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

std::string fmt_short(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return std::string(buf);
}

std::ofstream open_output(const ExperimentConfig& cfg, const std::string& name) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const fs::path path = fs::path(cfg.output_dir) / name;
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file '" + path.string() + "'");
  return out;
}

} // namespace

ExperimentSetup build_setup(const ExperimentConfig& cfg) {
  const int alpha_keys = int(bool(cfg.alpha_value)) + int(bool(cfg.alpha_slope)) +
                         int(!cfg.alpha_table.empty());
  if (alpha_keys > 1)
    throw ConfigError("alpha_value, alpha_slope and alpha_table are mutually exclusive");

  OperatorSpec op;
  SourceDescriptor source;
  std::function<double(double, double, double)> exact;

  if (cfg.problem == "heat_neumann" || cfg.problem == "plaplace_steady_forcing") {
    if (cfg.extent_lo != 0.0 || cfg.extent_hi != 1.0)
      throw ConfigError("problem '" + cfg.problem + "' is posed on (0, 1)");
    ManufacturedProblem mp = manufactured_problem(cfg.problem, cfg.T);
    if (cfg.p_set && cfg.p != mp.op.p)
      throw ConfigError("problem '" + cfg.problem + "' fixes p = " +
                        std::to_string(int(mp.op.p)) + "; drop the key or match it");
    if (cfg.kind && *cfg.kind != mp.op.kind)
      throw ConfigError("problem '" + cfg.problem + "' uses the p_laplace operator");
    const bool alpha_matches =
        (mp.op.alpha.kind == Alpha::Kind::constant)
            ? (!cfg.alpha_slope && cfg.alpha_table.empty() &&
               (!cfg.alpha_value || *cfg.alpha_value == mp.op.alpha.value))
            : (!cfg.alpha_value && cfg.alpha_table.empty() &&
               (!cfg.alpha_slope || *cfg.alpha_slope == mp.op.alpha.slope));
    if (!alpha_matches)
      throw ConfigError("problem '" + cfg.problem +
                        "' fixes the coefficient; drop the alpha keys or match them");
    op = mp.op;
    source = mp.source;
    exact = std::move(mp.exact);
  } else if (cfg.problem == "zero" || cfg.problem == "decay") {
    op.kind = cfg.kind.value_or(OperatorKind::p_laplace);
    op.p = cfg.p;
    if (!cfg.alpha_table.empty())
      op.alpha = Alpha::tabulated(cfg.alpha_table);
    else if (cfg.alpha_slope)
      op.alpha = Alpha::affine(*cfg.alpha_slope);
    else
      op.alpha = Alpha::constant(cfg.alpha_value.value_or(1.0));
    op.horizon = cfg.T;
    if (cfg.problem == "zero") exact = [](double, double, double) { return 0.0; };
  } else {
    throw ConfigError("unknown problem '" + cfg.problem +
                      "' (expected heat_neumann, plaplace_steady_forcing, zero or decay)");
  }

  const SpatialMesh mesh =
      build_uniform_mesh(Interval{cfg.extent_lo, cfg.extent_hi}, cfg.m);
  GridFunction u0;
  if (cfg.problem == "decay") {
    const double lo = cfg.extent_lo, len = cfg.extent_hi - cfg.extent_lo;
    u0 = sample_function(
        mesh, [lo, len](double, double x, double) { return std::cos(kPi * (x - lo) / len); },
        0.0);
  } else {
    u0 = sample_function(mesh, exact, 0.0);
  }

  PartitionOfUnity pou;
  try {
    pou = build_partition_of_unity(
        mesh, build_overlapping_subdomains(mesh, cfg.s, cfg.overlap_fraction));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }

  ExperimentSetup setup;
  setup.cfg = cfg;
  setup.problem = make_split_problem(mesh, op, pou, source, u0);
  setup.exact = std::move(exact);
  return setup;
}

namespace {

double linf(const GridFunction& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

AssumptionReport merge_reports(const std::string& property,
                               const std::vector<AssumptionReport>& parts, bool min_margin) {
  AssumptionReport out;
  out.property = property;
  out.pass = true;
  out.worst_margin = min_margin ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
  for (const AssumptionReport& r : parts) {
    out.samples += r.samples;
    out.worst_margin =
        min_margin ? std::min(out.worst_margin, r.worst_margin)
                   : std::max(out.worst_margin, r.worst_margin);
    out.pass = out.pass && r.pass;
    auto fold = [min_margin](std::optional<double>& acc, const std::optional<double>& v) {
      if (!v) return;
      if (!acc) {
        acc = v;
        return;
      }
      acc = min_margin ? std::min(*acc, *v) : std::max(*acc, *v);
    };
    fold(out.eta_hat, r.eta_hat);
    fold(out.mu_hat, r.mu_hat);
    fold(out.lambda_hat, r.lambda_hat);
    fold(out.beta_hat, r.beta_hat);
    if (out.detail.empty()) out.detail = r.detail;
  }
  return out;
}

} // namespace

std::vector<AssumptionReport> run_validators(const ExperimentSetup& setup,
                                             const PartitionOfUnity& pou) {
  const SplitProblem& pb = setup.problem;
  const SpatialMesh& mesh = pb.mesh;
  const ExperimentConfig& cfg = setup.cfg;
  const std::size_t nn = mesh.node_count();
  const int m0 = mesh.nodes_along(0);

  if (pou.weights.empty() || int(pou.weights.size()) != int(pou.subdomains.size()))
    throw InvalidArgument("run_validators: malformed partition of unity");
  for (const GridFunction& w : pou.weights)
    if (w.size() != nn)
      throw InvalidArgument("run_validators: partition weights do not match mesh");

  std::vector<AssumptionReport> reports;

  {
    AssumptionReport r;
    r.property = "partition_sum";
    r.samples = int(nn);
    double worst = 0.0;
    for (std::size_t i = 0; i < nn; ++i) {
      double total = 0.0;
      for (const GridFunction& w : pou.weights) total += w[i];
      worst = std::max(worst, std::abs(total - 1.0));
    }
    r.worst_margin = worst;
    r.pass = worst <= 1e-14;
    r.detail = "max |sum_l chi_l - 1| over nodes";
    reports.push_back(std::move(r));
  }
  {
    AssumptionReport r;
    r.property = "partition_range";
    r.samples = int(nn) * int(pou.weights.size());
    double worst = 0.0;
    for (const GridFunction& w : pou.weights)
      for (double x : w) worst = std::max({worst, -x, x - 1.0});
    r.worst_margin = worst;
    r.pass = worst <= 1e-14;
    r.detail = "max violation of 0 <= chi_l <= 1";
    reports.push_back(std::move(r));
  }
  {
    AssumptionReport r;
    r.property = "partition_support";
    r.samples = int(nn) * int(pou.weights.size());
    double worst = 0.0;
    for (std::size_t l = 0; l < pou.weights.size(); ++l) {
      const Subdomain& d = pou.subdomains[l];
      const GridFunction& w = pou.weights[l];
      for (std::size_t i = 0; i < nn; ++i) {
        const int i0 = int(i % std::size_t(m0));
        if (d.contains_axis0(i0)) {
          if (!(w[i] > 0.0)) worst = std::max(worst, 1.0);
        } else {
          worst = std::max(worst, std::abs(w[i]));
        }
      }
    }
    r.worst_margin = worst;
    r.pass = worst <= 1e-14;
    r.detail = "chi_l positive on its slab and zero elsewhere";
    reports.push_back(std::move(r));
  }
  {
    AssumptionReport r;
    r.property = "partition_gradient";
    int min_shared = 0;
    for (std::size_t l = 0; l + 1 < pou.subdomains.size(); ++l) {
      const int shared = pou.subdomains[l].hi - pou.subdomains[l + 1].lo + 1;
      min_shared = (min_shared == 0) ? shared : std::min(min_shared, shared);
    }
    const double bound = 1.0 / double(min_shared + 1);
    double observed = 0.0;
    for (const GridFunction& w : pou.weights)
      for (std::size_t i = 0; i + 1 < nn; ++i)
        if (int(i % std::size_t(m0)) + 1 < m0)
          observed = std::max(observed, std::abs(w[i + 1] - w[i]));
    r.samples = int(nn) * int(pou.weights.size());
    r.worst_margin = observed / bound;
    r.pass = r.worst_margin <= 1.0 + 1e-9;
    r.detail = "max nodal increment of chi_l against the ramp slope 1/(W+1)";
    reports.push_back(std::move(r));
  }

  const std::vector<double> times = {0.0, 0.5 * cfg.T, cfg.T};
  {
    const std::vector<SourceDescriptor> split = split_source(pb.source, pou);
    AssumptionReport sum_r, norm_r;
    sum_r.property = "source_split";
    norm_r.property = "source_norms";
    double worst_sum = 0.0, worst_norm = 0.0;
    for (double t : times) {
      const GridFunction full = eval_source(pb.source, mesh, t);
      const double scale = 1.0 + linf(full);
      const double full_norm = h_norm(mesh, full);
      GridFunction acc(nn, 0.0);
      for (const SourceDescriptor& part : split) {
        const GridFunction fl = eval_source(part, mesh, t);
        for (std::size_t i = 0; i < nn; ++i) acc[i] += fl[i];
        worst_norm =
            std::max(worst_norm, (h_norm(mesh, fl) - full_norm) / (1.0 + full_norm));
      }
      for (std::size_t i = 0; i < nn; ++i)
        worst_sum = std::max(worst_sum, std::abs(acc[i] - full[i]) / scale);
    }
    sum_r.samples = int(times.size()) * int(nn);
    sum_r.worst_margin = worst_sum;
    sum_r.pass = worst_sum <= 1e-14;
    sum_r.detail = "max |sum_l f_l - f| over nodes and sample times";
    norm_r.samples = int(times.size()) * int(split.size());
    norm_r.worst_margin = worst_norm;
    norm_r.pass = worst_norm <= 1e-12;
    norm_r.detail = "excess of ||f_l||_H over ||f||_H at sample times";
    reports.push_back(std::move(sum_r));
    reports.push_back(std::move(norm_r));
  }

  {
    std::vector<AssumptionReport> at_times;
    for (double t : times)
      at_times.push_back(check_sum_property(pb.parts, pb.whole, mesh, t, 4, 0xa11ce));
    reports.push_back(merge_reports("operator_sum", at_times, false));
  }

  const double tmid = 0.5 * cfg.T;
  reports.push_back(check_monotonicity(pb.whole, mesh, tmid, 5, 0xbead1));
  reports.back().property = "monotonicity_whole";
  {
    std::vector<AssumptionReport> per_part;
    for (const OperatorSpec& part : pb.parts)
      per_part.push_back(check_monotonicity(part, mesh, tmid, 4, 0xbead2));
    reports.push_back(merge_reports("monotonicity_parts", per_part, true));
  }

  reports.push_back(check_coercivity_boundedness(pb.whole, mesh, tmid, 5, 0xc0ffe));
  reports.back().property = "coercivity_boundedness_whole";
  {
    std::vector<AssumptionReport> per_part;
    for (const OperatorSpec& part : pb.parts)
      per_part.push_back(check_coercivity_boundedness(part, mesh, tmid, 4, 0xc0ffd));
    // the margin is a lower bound (most negative is worst); beta is folded up
    AssumptionReport merged = merge_reports("coercivity_boundedness_parts", per_part, true);
    if (!per_part.empty()) {
      std::optional<double> beta;
      for (const AssumptionReport& r : per_part)
        if (r.beta_hat) beta = beta ? std::max(*beta, *r.beta_hat) : *r.beta_hat;
      merged.beta_hat = beta;
    }
    reports.push_back(std::move(merged));
  }

  reports.push_back(check_radial_continuity(pb.whole, mesh, tmid, 4, 0xdead5));
  reports.back().property = "radial_continuity";
  reports.push_back(check_time_continuity(pb.whole, mesh, 5, 0xfee1d));
  reports.back().property = "time_continuity";

  {
    const double k = cfg.T / double(cfg.N);
    reports.push_back(
        check_nonexpansive(pb.whole, mesh, k, cfg.T, 3, cfg.resolvent, 0xab1e5));
    reports.back().property = "resolvent_nonexpansive_whole";
    std::vector<AssumptionReport> per_part;
    const double tau = double(pb.s()) * k;
    for (const OperatorSpec& part : pb.parts)
      per_part.push_back(check_nonexpansive(part, mesh, tau, cfg.T, 2, cfg.resolvent, 0xab1e6));
    reports.push_back(merge_reports("resolvent_nonexpansive_parts", per_part, false));
  }

  return reports;
}

namespace {

void write_trajectory_csv(const ExperimentConfig& cfg, const Trajectory& tr) {
  std::ofstream csv = open_output(cfg, "trajectory.csv");
  csv << "n,t,node_index,value\n";
  for (std::size_t n = 0; n < tr.states.size(); ++n) {
    const std::string t = fmt(tr.grid.t(int(n)));
    const GridFunction& u = tr.states[n];
    for (std::size_t i = 0; i < u.size(); ++i)
      csv << n << ',' << t << ',' << i << ',' << fmt(u[i]) << '\n';
  }
}

std::string estimates_column(const AssumptionReport& r) {
  std::string out;
  auto add = [&out](const char* name, const std::optional<double>& v) {
    if (!v) return;
    if (!out.empty()) out += ' ';
    out += name;
    out += '=';
    out += fmt_short(*v);
  };
  add("eta", r.eta_hat);
  add("mu", r.mu_hat);
  add("lambda", r.lambda_hat);
  add("beta", r.beta_hat);
  return out.empty() ? "-" : out;
}

} // namespace

int cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
  ExperimentSetup setup = build_setup(cfg);
  const TimeGrid grid = make_time_grid(cfg.T, cfg.N);
  RunOptions opts;
  opts.resolvent = cfg.resolvent;
  opts.threads = cfg.threads;
  opts.record_sublevels = cfg.record_sublevels;

  Trajectory tr;
  bool failed = false;
  std::string failure;
  try {
    tr = run(setup.problem, grid, cfg.scheme, opts);
  } catch (const SolverFailure& e) {
    failed = true;
    std::ostringstream what;
    what << "step " << e.step;
    if (e.part >= 0) what << " subdomain " << e.part;
    what << ": " << e.what();
    failure = what.str();
    if (e.partial) tr = *e.partial;
    else {
      tr.grid = grid;
      tr.states.push_back(setup.problem.u0);
    }
  }

  write_trajectory_csv(cfg, tr);

  int newton = 0, damping = 0;
  double maxres = 0.0;
  for (const StepStats& st : tr.step_stats) {
    newton += st.newton_iterations;
    damping += st.damping_events;
    maxres = std::max(maxres, st.max_residual);
  }

  std::ofstream out = open_output(cfg, "summary.txt");
  out << "problem = " << cfg.problem << "\n";
  out << "scheme = " << to_string(cfg.scheme) << "\n";
  out << "s = " << setup.problem.s() << "\n";
  out << "overlap_nodes = " << setup.problem.pou.overlap_nodes << "\n";
  out << "m = " << cfg.m << "\n";
  out << "N = " << grid.N << "\n";
  out << "k = " << fmt(grid.k) << "\n";
  out << "T = " << fmt(grid.T) << "\n";
  out << "p = " << fmt(setup.problem.whole.p) << "\n";
  out << "status = " << (failed ? "solver_failure" : "ok") << "\n";
  out << "completed_steps = " << (tr.states.size() - 1) << "\n";
  out << "newton_iterations = " << newton << "\n";
  out << "damping_events = " << damping << "\n";
  out << "max_newton_residual = " << fmt(maxres) << "\n";
  out << "final_h_norm = " << fmt(h_norm(setup.problem.mesh, tr.states.back())) << "\n";
  if (!failed && setup.exact) {
    const ErrorNorms e = error_norms(tr, setup.problem.mesh, setup.problem.whole.p,
                                     setup.exact, &setup.problem.pou);
    out << "error_linf_h = " << fmt(e.linf_h) << "\n";
    out << "error_lp_v = " << fmt(e.lp_v) << "\n";
    for (std::size_t l = 0; l < e.per_subdomain.size(); ++l)
      out << "error_lp_v_subdomain_" << l << " = " << fmt(e.per_subdomain[l]) << "\n";
  }

  if (failed) {
    log << "solver failure: " << failure << "\n";
    log << "partial trajectory written to " << cfg.output_dir << "/trajectory.csv\n";
    return 2;
  }
  log << "completed " << grid.N << " steps of " << to_string(cfg.scheme) << " on "
      << cfg.problem << " (s = " << setup.problem.s() << ")\n";
  log << "wrote " << cfg.output_dir << "/trajectory.csv and " << cfg.output_dir
      << "/summary.txt\n";
  return 0;
}

int cmd_converge(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.N_sweep.size() < 3)
    throw ConfigError("converge needs N_sweep with at least three step counts");
  ExperimentSetup setup = build_setup(cfg);
  RunOptions opts;
  opts.resolvent = cfg.resolvent;
  opts.threads = cfg.threads;

  ConvergenceReport report;
  if (cfg.reference == "exact") {
    if (!setup.exact)
      throw ConfigError("problem '" + cfg.problem +
                        "' has no closed form; set reference to a step count");
    report =
        convergence_study(setup.problem, cfg.scheme, cfg.T, cfg.N_sweep, setup.exact, opts);
  } else {
    const int nref = std::stoi(cfg.reference);
    if (nref < 4 * cfg.N_sweep.front())
      throw ConfigError("reference step count must be at least 4x the coarsest sweep value");
    for (int n : cfg.N_sweep)
      if (nref % n != 0)
        throw ConfigError("reference step count must be a multiple of every sweep value");
    report = convergence_study(setup.problem, cfg.scheme, cfg.T, cfg.N_sweep, nref, opts);
  }

  {
    std::ofstream csv = open_output(cfg, "convergence.csv");
    csv << "N,k,error_LinfH,error_LpV\n";
    for (const ConvergencePoint& pt : report.points)
      csv << pt.N << ',' << fmt(pt.k) << ',' << fmt(pt.err_linf_h) << ','
          << fmt(pt.err_lp_v) << '\n';
  }
  {
    std::ofstream ord = open_output(cfg, "orders.txt");
    ord << "order_linf_h = " << fmt(report.order_linf_h) << "\n";
    ord << "order_lp_v = " << fmt(report.order_lp_v) << "\n";
  }

  for (const ConvergencePoint& pt : report.points)
    log << "N = " << pt.N << "  k = " << fmt_short(pt.k)
        << "  error_LinfH = " << fmt_short(pt.err_linf_h)
        << "  error_LpV = " << fmt_short(pt.err_lp_v) << "\n";
  log << "order_linf_h = " << fmt_short(report.order_linf_h) << "\n";
  log << "order_lp_v = " << fmt_short(report.order_lp_v) << "\n";

  for (std::size_t i = 1; i < report.points.size(); ++i) {
    if (report.points[i].err_linf_h >= report.points[i - 1].err_linf_h) {
      log << "error_LinfH does not decrease from N = " << report.points[i - 1].N
          << " to N = " << report.points[i].N << "\n";
      return 3;
    }
  }
  return 0;
}

int cmd_validate(const ExperimentConfig& cfg, std::ostream& log,
                 const PartitionOfUnity* override_pou) {
  ExperimentSetup setup = build_setup(cfg);
  const std::vector<AssumptionReport> reports =
      run_validators(setup, override_pou ? *override_pou : setup.problem.pou);

  std::ofstream out = open_output(cfg, "validate.txt");
  out << std::left << std::setw(34) << "name" << std::setw(9) << "samples" << std::setw(15)
      << "worst_margin" << std::setw(28) << "estimate" << "pass\n";
  std::vector<std::string> failing;
  for (const AssumptionReport& r : reports) {
    out << std::left << std::setw(34) << r.property << std::setw(9) << r.samples
        << std::setw(15) << fmt_short(r.worst_margin) << std::setw(28)
        << estimates_column(r) << (r.pass ? "yes" : "NO") << "\n";
    log << r.property << ": " << (r.pass ? "pass" : "FAIL")
        << " (margin " << fmt_short(r.worst_margin) << ")\n";
    if (!r.pass) failing.push_back(r.property);
  }
  log << "wrote " << cfg.output_dir << "/validate.txt\n";
  if (!failing.empty()) {
    log << "failed validators:";
    for (const std::string& name : failing) log << ' ' << name;
    log << "\n";
    return 4;
  }
  return 0;
}

int cmd_monitor(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.N_sweep.size() < 2)
    throw ConfigError("monitor needs N_sweep with at least two step counts");
  if (cfg.scheme == SchemeKind::backward_euler && cfg.s != 1)
    throw ConfigError("monitoring the unsplit scheme requires s = 1");
  ExperimentSetup setup = build_setup(cfg);
  RunOptions opts;
  opts.resolvent = cfg.resolvent;
  opts.threads = cfg.threads;
  opts.record_sublevels = true;

  std::vector<AprioriReport> rows;
  for (int N : cfg.N_sweep) {
    const Trajectory tr = run(setup.problem, make_time_grid(cfg.T, N), cfg.scheme, opts);
    rows.push_back(apriori_quantities(setup.problem, tr));
  }

  {
    std::ofstream csv = open_output(cfg, "monitor.csv");
    csv << "N,k,term1,term2,term3,term4_surrogate\n";
    for (const AprioriReport& r : rows)
      csv << r.N << ',' << fmt(r.k) << ',' << fmt(r.term1) << ',' << fmt(r.term2) << ','
          << fmt(r.term3) << ',' << fmt(r.term4_surrogate) << '\n';
  }

  const char* names[4] = {"term1", "term2", "term3", "term4_surrogate"};
  auto value = [](const AprioriReport& r, int j) {
    switch (j) {
      case 0: return r.term1;
      case 1: return r.term2;
      case 2: return r.term3;
      default: return r.term4_surrogate;
    }
  };
  bool ok = true;
  for (int j = 0; j < 4; ++j) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const AprioriReport& r : rows) {
      lo = std::min(lo, value(r, j));
      hi = std::max(hi, value(r, j));
    }
    const double ratio = (hi <= 1e-300) ? 1.0 : hi / lo;
    const bool stable = ratio < 2.0;
    log << names[j] << ": max/min = " << fmt_short(ratio)
        << (stable ? "" : "  (exceeds factor 2)") << "\n";
    ok = ok && stable;
  }
  log << "wrote " << cfg.output_dir << "/monitor.csv\n";
  return ok ? 0 : 5;
}

} // namespace splitstep
