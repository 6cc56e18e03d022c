// Command-line driver for the coupling sweeps. Exit status: 0 when every
// valid bracket holds, 1 on a violated bracket or identity, 2 on bad usage.
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stiffspec/harness.hpp"
#include "stiffspec/models_abstract.hpp"

using namespace stiffspec;

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct Output {
  std::string format = "csv";
  std::string out;
  Index m = 2;
  bool parallel = false;
};

void add_output(CLI::App* sub, Output& o) {
  sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", o.out, "Output path (default: standard output)");
  sub->add_option("--m", o.m, "Number of tracked eigenvalues")->check(CLI::PositiveNumber);
  sub->add_flag("--parallel", o.parallel, "Evaluate grid points on several threads");
}

void print_summary(const BracketSummary& s) {
  for (const auto& t : s.tags)
    std::fprintf(stderr, "  %-22s pass %3ld  fail %3ld  invalid %3ld\n", t.tag.c_str(), static_cast<long>(t.passed),
                 static_cast<long>(t.failed), static_cast<long>(t.invalid));
  for (const auto& l : s.failure_lines) std::fprintf(stderr, "  FAIL %s\n", l.c_str());
  if (!s.note.empty()) std::fprintf(stderr, "  note: %s\n", s.note.c_str());
}

int run_sweep(const Problem& pr, const std::vector<double>& grid, const Output& o) {
  const BuiltProblem bp = build_problem(pr);
  SweepOptions opt;
  opt.parallel = o.parallel;
  const auto records = kappa_sweep(bp, grid, opt);
  const Format f = parse_format(o.format);
  if (o.out.empty()) {
    emit(records, f, std::cout);
  } else {
    emit(records, f, o.out);
  }
  if (records.empty()) return kOk;
  const BracketSummary s = verify_brackets(records);
  std::fprintf(stderr, "%s: %zu grid points, %ld valid checks, %ld failures\n", model_name(pr.model).c_str(),
               records.size(), static_cast<long>(s.valid_checks), static_cast<long>(s.failures));
  if (pr.model != Model::Arch) {
    const Kappa0Result k0 = sweep_kappa0(bp, records);
    if (k0.reached)
      std::fprintf(stderr, "  kappa0 on grid: %g (threshold %.6g on eta_m)\n", k0.kappa0, k0.threshold);
    else
      std::fprintf(stderr, "  kappa0: %s (threshold %.6g)\n", k0.note.c_str(), k0.threshold);
  }
  print_summary(s);
  return s.success() ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral asymptotics of stiff coupled eigenproblems"};
  app.require_subcommand(1);

  Output out;
  std::vector<double> kappas = {5, 10, 20, 50, 100, 200};
  std::vector<double> eps = {0.025, 0.05, 0.1, 0.2};
  Problem pr;

  auto* obstacle = app.add_subcommand("obstacle", "Half-line obstacle, truncated to [0, L]");
  obstacle->add_option("--kappa", kappas, "Coupling grid, ascending")->delimiter(',');
  obstacle->add_option("--elems", pr.obstacle.n_elems, "Number of P1 elements")->check(CLI::PositiveNumber);
  obstacle->add_option("--length", pr.obstacle.L, "Truncation length L");
  add_output(obstacle, out);

  std::string variant = "regular";
  auto* interval = app.add_subcommand("interval", "Penalty on [1, 2] of the interval [0, 2]");
  interval->add_option("--variant", variant, "regular or singular")->check(CLI::IsMember({"regular", "singular"}));
  interval->add_option("--kappa", kappas, "Coupling grid, ascending")->delimiter(',');
  interval->add_option("--elems", pr.interval_elems, "Number of P1 elements (even)")->check(CLI::PositiveNumber);
  add_output(interval, out);

  auto* arch = app.add_subcommand("arch", "Clamped circular arch, thickness sweep");
  arch->add_option("--radius", pr.arch.R, "Radius R (inf for a straight rod)");
  arch->add_option("--area", pr.arch.A, "Cross-section area A");
  arch->add_option("--inertia", pr.arch.I, "Moment of inertia I");
  arch->add_option("--length", pr.arch.l, "Arc length l");
  arch->add_option("--youngs", pr.arch.E_mod, "Young's modulus E");
  arch->add_option("--eps", eps, "Thickness grid, ascending")->delimiter(',');
  arch->add_option("--elems", pr.arch.n_elems, "Number of elements")->check(CLI::PositiveNumber);
  add_output(arch, out);

  std::vector<double> abstract_kappas = {2, 5, 10, 100};
  auto* abstract = app.add_subcommand("abstract", "Projection family with a closed-form resolvent");
  abstract->add_option("--dim", pr.dim, "Dimension")->check(CLI::PositiveNumber);
  abstract->add_option("--rank", pr.rank, "Rank of the projector")->check(CLI::PositiveNumber);
  abstract->add_option("--seed", pr.seed, "Seed");
  abstract->add_option("--kappa", abstract_kappas, "Coupling grid, ascending")->delimiter(',');
  add_output(abstract, out);

  Index trials = 100, subspace = 3;
  Index schur_dim = 30;
  std::uint64_t schur_seed = 1;
  auto* schur = app.add_subcommand("schur-check", "Schur-complement identity on random exact pencils");
  schur->add_option("--dim", schur_dim, "Dimension")->check(CLI::PositiveNumber);
  schur->add_option("--subspace", subspace, "Cluster multiplicity")->check(CLI::PositiveNumber);
  schur->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
  schur->add_option("--seed", schur_seed, "Base seed");

  std::string model = "obstacle", field = "rel_err_1";
  double expect = NAN, tol = 0.1;
  Index elems = 0;
  auto* rates = app.add_subcommand("rates", "Sweep, log-log slope fit and verdict");
  rates->add_option("--model", model, "obstacle, regular, singular, arch, projection, random or cluster");
  rates->add_option("--kappa", kappas, "Coupling grid (eps grid for the arch)")->delimiter(',');
  rates->add_option("--elems", elems, "Element count (model default when 0)");
  rates->add_option("--field", field, "Fitted field");
  rates->add_option("--expect", expect, "Expected slope (model default when omitted)");
  rates->add_option("--tol", tol, "Slope tolerance");
  add_output(rates, out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    pr.m = out.m;
    if (*obstacle) {
      pr.model = Model::Obstacle;
      pr.obstacle.min_kappa = kappas.empty() ? pr.obstacle.min_kappa : kappas.front();
      return run_sweep(pr, kappas, out);
    }
    if (*interval) {
      pr.model = variant == "regular" ? Model::Regular : Model::Singular;
      return run_sweep(pr, kappas, out);
    }
    if (*arch) {
      pr.model = Model::Arch;
      if (arch->count("--m") == 0) pr.m = 3;
      return run_sweep(pr, eps, out);
    }
    if (*abstract) {
      pr.model = Model::Projection;
      if (abstract->count("--m") == 0) pr.m = 1;
      const ProjectionFamily fam = make_projection_family(pr.dim, pr.rank, pr.seed);
      Rng rng(pr.seed + 7);
      Vec f(pr.dim);
      for (Index i = 0; i < pr.dim; ++i) f(i) = rng.normal();
      bool ok = true;
      for (double k : abstract_kappas) {
        const ProjectionErrors e = projection_family_errors(fam, k, f);
        const double exact = 1.0 / (1.0 + k * k);
        const bool pass = std::abs(e.exact_ratio - exact) <= 1e-12 && e.exact_ratio >= e.lower - 1e-12 &&
                          e.exact_ratio <= e.upper + 1e-12;
        ok = ok && pass;
        std::fprintf(stderr, "kappa %-6g ratio %.17g  1/(1+k^2) %.17g  bracket [%.6g, %.6g]  solve %.2e  %s\n", k,
                     e.exact_ratio, exact, e.lower, e.upper, e.solve_mismatch, pass ? "ok" : "FAIL");
      }
      const int code = run_sweep(pr, abstract_kappas, out);
      return ok ? code : kFail;
    }
    if (*schur) {
      const SchurSummary s = schur_check(schur_dim, subspace, trials, schur_seed);
      std::printf("trials %ld  skipped %ld\n", static_cast<long>(s.trials), static_cast<long>(s.skipped));
      std::printf("max Schur residual        %.3e\n", s.max_residual);
      std::printf("max |s_i(Gamma) - eta_i|  %.3e\n", s.max_sv_mismatch);
      std::printf("max energy residual       %.3e\n", s.max_energy_residual);
      std::printf("Ritz bound checked %ld  failed %ld\n", static_cast<long>(s.ritz_checked),
                  static_cast<long>(s.ritz_failed));
      const bool ok = s.max_residual <= 1e-10 && s.max_sv_mismatch <= 1e-10 && s.max_energy_residual <= 1e-12 &&
                      s.ritz_failed == 0 && s.skipped < s.trials;
      return ok ? kOk : kFail;
    }
    if (*rates) {
      pr.model = parse_model(model);
      if (elems > 0) {
        pr.obstacle.n_elems = elems;
        pr.interval_elems = elems;
        pr.arch.n_elems = elems;
      }
      const bool is_arch = pr.model == Model::Arch;
      std::vector<double> grid = kappas;
      if (is_arch && rates->count("--kappa") == 0) grid = eps;
      if (is_arch && rates->count("--m") == 0) pr.m = 3;
      if (pr.model == Model::Obstacle) {
        pr.obstacle.min_kappa = grid.front();
      }
      if (std::isnan(expect)) {
        switch (pr.model) {
          case Model::Regular: expect = -2.0; break;
          case Model::Singular:
          case Model::Obstacle: expect = -1.0; break;
          case Model::Arch: expect = 2.0; break;
          default: break;
        }
      }
      const BuiltProblem bp = build_problem(pr);
      const auto records = kappa_sweep(bp, grid, SweepOptions{std::nullopt, out.parallel, 0});
      if (!out.out.empty()) emit(records, parse_format(out.format), out.out);
      const BracketSummary bs = verify_brackets(records);
      std::fprintf(stderr, "%s: %ld valid checks, %ld failures\n", model.c_str(), static_cast<long>(bs.valid_checks),
                   static_cast<long>(bs.failures));
      print_summary(bs);
      const RateFit fit = fit_loglog_slope(records, "grid_value", field);
      std::printf("model %s  field %s  slope %.6f  intercept %.6f  r^2 %.6f  points %ld\n", model.c_str(),
                  field.c_str(), fit.slope, fit.intercept, fit.r_squared, static_cast<long>(fit.points_used));
      if (std::isnan(expect)) {
        std::printf("verdict: no expected slope for this model\n");
        return bs.success() ? kOk : kFail;
      }
      const bool ok = std::abs(fit.slope - expect) <= tol && bs.success();
      std::printf("verdict: %s (expected %.3f +- %.3f)\n", ok ? "PASS" : "FAIL", expect, tol);
      return ok ? kOk : kFail;
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFail;
  }
  return kUsage;
}
