// Experiment driver: coupling and thickness sweeps, bracket checks against
// measured quantities, log-log rate fits and CSV / JSON reports.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stiffspec/bounds.hpp"
#include "stiffspec/defects.hpp"
#include "stiffspec/forms.hpp"
#include "stiffspec/models_1d.hpp"
#include "stiffspec/models_arch.hpp"

namespace stiffspec {

// Absolute slack on relative quantities for every bracket comparison.
inline constexpr double kBracketSlack = 1e-10;

// One scalar comparison lower <= measured <= upper. A missing side is NaN.
struct BoundCheck {
  std::string tag;  // report tag, with a 1-based suffix when the report has several entries
  double lower = 0.0;
  double measured = 0.0;
  double upper = 0.0;
  bool valid = true;
  int ok = -1;  // 1 pass, 0 fail, -1 precondition not met
  std::string note;
};

BoundCheck make_check(const std::string& tag, double lower, double measured, double upper, bool valid,
                      const std::string& note = "");

struct SweepRecord {
  double grid_value = 0.0;  // kappa, or eps for the arch
  double kappa = 0.0;
  Vec eigenvalues;          // lambda_i^kappa, i < m
  Vec limit_values;         // lambda_i^inf, i < m
  DefectSet defects;        // of the first m limit vectors
  Vec true_rel_errors;      // (lambda_inf - lambda_kappa) / lambda_inf
  std::vector<BoundReport> bound_reports;
  std::vector<BoundCheck> checks;
  std::optional<double> proj_distance;  // ||E_kappa(D) - E_inf(D)||
  std::optional<double> truth_rel_error;  // continuum truth, obstacle only
  double energy_residual = 0.0;  // max over i < m of the energy identity residual
  bool past_kappa0 = false;      // eta_m below the kappa0 threshold
  bool bracket_ok() const;       // no valid check failed
};

enum class Model { Obstacle, Regular, Singular, Arch, Projection, Random, Cluster };

Model parse_model(const std::string& name);
std::string model_name(Model m);

struct Problem {
  Model model = Model::Obstacle;
  ObstacleConfig obstacle;
  Index interval_elems = 400;
  ArchConfig arch;
  Index dim = 24;
  Index rank = 8;          // projection: rank of P; random: kernel dimension
  Index cluster_m = 2;
  std::uint64_t seed = 1;
  Index m = 2;             // tracked eigenvalues
};

struct SweepOptions {
  std::optional<double> cut;  // D; default (lambda_m^inf + lambda_{m+1}^inf) / 2
  bool parallel = false;
  Index threads = 0;          // 0: hardware concurrency
};

// A built problem: the pair, its limit and, for regular families, the
// inf-sup estimate.
struct BuiltProblem {
  Problem problem;
  FormPair pair;
  LimitSpectrum limit;
  std::optional<LbbEstimate> lbb;
  Vec eta_sq_1;    // plain squared defects at kappa = 1 (regular families)
  Vec eta_sq_ref;  // normalized squared defects at the reference coupling
  std::optional<ArchThresholds> arch;
  double arch_eta_ref = 0.0;  // lowest defect at kappa = eps1^-2
};

BuiltProblem build_problem(const Problem& problem);

// One record per grid point, in grid order. For the arch the grid holds
// thicknesses eps and kappa = 1/eps.
std::vector<SweepRecord> kappa_sweep(const Problem& problem, const std::vector<double>& grid,
                                     const SweepOptions& options = {});
std::vector<SweepRecord> kappa_sweep(const BuiltProblem& built, const std::vector<double>& grid,
                                     const SweepOptions& options = {});

// kappa0 from the recorded eta_m, first grid point below the threshold.
Kappa0Result sweep_kappa0(const BuiltProblem& built, const std::vector<SweepRecord>& records);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  Index points_used = 0;
};

RateFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Field names: grid_value, kappa, lambda_<i>, lambda_inf_<i>, eta_<i>,
// rel_err_<i>, proj_distance, truth_rel_error (1-based i).
RateFit fit_loglog_slope(const std::vector<SweepRecord>& records, const std::string& x_field,
                         const std::string& y_field);
double record_field(const SweepRecord& r, const std::string& field);

struct TagSummary {
  std::string tag;
  Index passed = 0;
  Index failed = 0;
  Index invalid = 0;
};

struct BracketSummary {
  std::vector<TagSummary> tags;  // first-appearance order
  Index failures = 0;
  Index valid_checks = 0;
  std::vector<std::string> failure_lines;
  std::string note;
  bool success() const { return failures == 0; }
};

BracketSummary verify_brackets(const std::vector<SweepRecord>& records);

enum class Format { Csv, Json };

Format parse_format(const std::string& name);

void emit(const std::vector<SweepRecord>& records, Format format, std::ostream& os);
// Throws std::runtime_error naming the path when it cannot be written.
void emit(const std::vector<SweepRecord>& records, Format format, const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable parse_csv(std::istream& is);

// Random exact pencils with an m-fold eigenvalue: Schur residual, singular
// values of the coupling block against the pencil defects, the Ritz bound and
// the energy identity.
struct SchurSummary {
  Index trials = 0;
  double max_residual = 0.0;
  double max_sv_mismatch = 0.0;
  double max_energy_residual = 0.0;
  Index ritz_checked = 0;
  Index ritz_failed = 0;
  Index skipped = 0;  // the gap precondition failed
};

SchurSummary schur_check(Index dim, Index subspace, Index trials, std::uint64_t seed, double theta = 0.05);

}  // namespace stiffspec
