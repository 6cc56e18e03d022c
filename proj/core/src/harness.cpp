#include "stiffspec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "stiffspec/models_abstract.hpp"

namespace stiffspec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string suffixed(const std::string& tag, Index i) { return tag + "_" + std::to_string(i + 1); }

void add_report(SweepRecord& rec, const BoundReport& r, const std::vector<double>& measured,
                const std::string& tag_override = "") {
  rec.bound_reports.push_back(r);
  const std::string tag = tag_override.empty() ? r.tag : tag_override;
  const size_t k = measured.size();
  for (size_t j = 0; j < k; ++j) {
    const double lo = j < r.lower.size() ? r.lower[j] : (r.lower.size() == 1 ? r.lower[0] : kNaN);
    const double up = j < r.upper.size() ? r.upper[j] : (r.upper.size() == 1 ? r.upper[0] : kNaN);
    const std::string t = k == 1 ? tag : suffixed(tag, static_cast<Index>(j));
    rec.checks.push_back(make_check(t, lo, measured[j], up, r.valid, r.note));
  }
}

// Aligns the sign of v with psi in the M inner product.
Vec aligned(const Vec& v, const Vec& psi, const Mat& M) { return v.dot(M * psi) < 0.0 ? Vec(-v) : v; }

Mat subspace_below(const EigDecomp& e, double cut, bool inclusive) {
  Index k = 0;
  while (k < e.values.size() && (inclusive ? e.values(k) <= cut : e.values(k) < cut)) ++k;
  return e.vectors.leftCols(k);
}

[[noreturn]] void rethrow_with(const std::string& context) {
  try {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(context + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(context + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(context + ": " + e.what());
  }
}

SweepRecord evaluate(const BuiltProblem& bp, double grid_value, const SweepOptions& opt) {
  const Problem& pr = bp.problem;
  const FormPair& P = bp.pair;
  const LimitSpectrum& L = bp.limit;
  const Index m = pr.m;
  const bool is_arch = pr.model == Model::Arch;
  const double kappa = is_arch ? 1.0 / grid_value : grid_value;

  SweepRecord rec;
  rec.grid_value = grid_value;
  rec.kappa = kappa;

  const SymPencil pen = assemble_coupled(P, kappa);
  const EigDecomp ek = geig_lowest(pen, m + 1);
  if (ek.values.size() < m + 1) throw ValidationError("sweep: pencil has fewer than m + 1 eigenvalues");
  const Vec& disc = ek.values;
  const Vec lam_inf = L.values.head(m + 1);
  rec.eigenvalues = disc.head(m);
  rec.limit_values = lam_inf.head(m);
  rec.true_rel_errors = (rec.limit_values - rec.eigenvalues).cwiseQuotient(rec.limit_values);
  rec.defects = defects_kappa(P, kappa, L, IndexRange{0, m});

  // Ritz pairs of the limit subspace for the pencil at this kappa.
  const Mat V = L.vectors.leftCols(m);
  Eigen::SelfAdjointEigenSolver<Mat> ex(ritz_matrix(pen, V));
  const Vec mu = ex.eigenvalues();
  const Mat Psi = V * ex.eigenvectors();
  std::vector<DefectSet> single;
  for (Index i = 0; i < m; ++i) single.push_back(defects_general(pen, Psi.col(i)));

  const double cut = opt.cut ? *opt.cut : 0.5 * (lam_inf(m - 1) + lam_inf(m));
  const double eta_m = rec.defects.eta_max();
  rec.past_kappa0 = eta_m < kappa0_threshold(L.values, m);

  std::vector<double> rel(static_cast<size_t>(m)), ritz_rel(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) {
    rel[static_cast<size_t>(i)] = std::abs(disc(i) - lam_inf(i)) / lam_inf(i);
    ritz_rel[static_cast<size_t>(i)] = std::abs(disc(i) - mu(i)) / mu(i);
  }

  // Spectral family cut at D against the limit family.
  add_report(rec, defect_eigenvalue_bound(rec.defects, cut, lam_inf(m - 1)), rel);
  {
    const BoundReport r = projection_bound(cut, lam_inf(m - 1), rec.defects, ProjectionVariant::Sweep);
    const double dist = proj_distance(subspace_below(ek, cut, false), V, P.M);
    rec.proj_distance = dist;
    add_report(rec, r, {dist});
  }

  // Single-operator estimates for the pencil at this kappa, test space = span V.
  const double gate33 = (disc(m) - mu(m - 1)) / (disc(m - 1) + mu(m - 1));
  {
    ProjectionExtra ext;
    ext.lambda_next = disc(m);
    ext.lambda_m = disc(m - 1);
    const BoundReport r = projection_bound(0.0, mu(m - 1), rec.defects, ProjectionVariant::SingleOperator, ext);
    add_report(rec, r, {proj_distance(subspace_below(ek, mu(m - 1), true), Psi, P.M)});
  }
  {
    double gmin = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < m; ++i) {
      const GapData g = relative_gaps(disc, i, 1, single[static_cast<size_t>(i)].eta_max(), Vec::Constant(1, mu(i)));
      gmin = std::min(gmin, g.g_q_zeta);
    }
    double s = 0.0;
    for (double x : ritz_rel) s += x;
    add_report(rec, trace_bracket(rec.defects, mu, gmin, gate33), {s});
  }
  {
    BoundReport lower;
    lower.tag = "lower-sum";
    const double c = lam_inf(0) / (2.0 * lam_inf(m - 1));
    lower.lower = {m == 1 ? rec.defects.etas.squaredNorm() : c * rec.defects.etas.squaredNorm()};
    if (!(eta_m / (1.0 - eta_m) < gate33)) {
      lower.valid = false;
      lower.note = "eta_m/(1-eta_m) >= gap precondition";
    }
    double s = 0.0;
    for (double x : rel) s += x;
    add_report(rec, lower, {s});
  }

  rec.energy_residual = 0.0;
  for (Index i = 0; i < m; ++i) {
    const Vec psi = Psi.col(i);
    const Vec v = aligned(ek.vectors.col(i), psi, P.M);
    const Vec d = v - psi;
    const double dist = std::sqrt(std::max(d.dot(P.M * d), 0.0));
    add_report(rec, eigenvector_bound(rec.defects, disc, i, mu(i), gate33), {dist}, suffixed("eigenvector", i));
    rec.energy_residual = std::max(rec.energy_residual, energy_identity_check(energy_terms(pen, v, psi)));
  }

  for (Index i = 0; i < m; ++i) {
    const DefectSet& di = single[static_cast<size_t>(i)];
    const Vec mui = Vec::Constant(1, mu(i));
    const GapData g = relative_gaps(disc, i, 1, di.eta_max(), mui);
    add_report(rec, ritz_value_bound(di, g, mui), {ritz_rel[static_cast<size_t>(i)]}, suffixed("ritz-value", i));
    const std::optional<double> prev = i > 0 ? std::optional<double>(lam_inf(i - 1)) : std::nullopt;
    const BoundReport ss = simple_sharp_bound(di.eta_max(), prev, lam_inf(i), lam_inf(i + 1), g.gamma_q);
    add_report(rec, ss, {(lam_inf(i) - disc(i)) / lam_inf(i)}, suffixed("simple-sharp", i));
  }

  if (bp.lbb) {
    const BoundReport r = regular_bracket(bp.eta_sq_1, bp.eta_sq_ref, *bp.lbb, kappa);
    std::vector<double> meas;
    for (Index i = 0; i < m; ++i) meas.push_back(rec.defects.etas(i) * rec.defects.etas(i));
    add_report(rec, r, meas);
    const Vec c = Vec::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
    const BoundReport mr = moment_bracket(P, L, IndexRange{0, m}, c, *bp.lbb, kappa);
    add_report(rec, mr, {mr.inputs.at("measured")});
  }

  if (pr.model == Model::Cluster) {
    const Index q = 1, cm = pr.cluster_m;
    const DefectSet dc = defects_kappa(P, kappa, L, IndexRange{q, cm});
    const double lq = L.values(q);
    const GapData g = relative_gaps(L.values, q, cm, dc.eta_max());
    BoundReport r = cluster_bound(dc.eta_max(), g.gamma_s, lq);
    std::vector<double> meas;
    bool close = true;
    for (Index i = 0; i < cm; ++i) {
      const double e = std::abs(disc(q + i) - lq) / lq;
      meas.push_back(e);
      close = close && e <= g.gamma_s / 3.0;
    }
    if (!close) {
      r.valid = false;
      r.note += r.note.empty() ? "" : "; ";
      r.note += "cluster eigenvalues farther than gamma_s/3 from the limit";
    }
    add_report(rec, r, meas);
  }

  if (pr.model == Model::Obstacle) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double truth = (pi2 - obstacle_exact_eig(kappa, 1)) / pi2;
    rec.truth_rel_error = truth;
    const ObstacleBracket b = obstacle_bracket(kappa);
    BoundReport r;
    r.tag = "obstacle-bracket";
    r.lower = {b.lower};
    r.upper = {b.upper};
    r.valid = b.in_range;
    r.note = b.warning;
    r.inputs = {{"kappa", kappa}, {"D", b.d}};
    add_report(rec, r, {truth});
  }

  if (is_arch && bp.arch) {
    const ArchThresholds& th = *bp.arch;
    add_report(rec, arch_bracket(th, grid_value, bp.arch_eta_ref), {rec.true_rel_errors(0)});
    BoundReport up = arch_upper(th, grid_value);
    const Index k = std::min<Index>(m, th.m);
    up.upper.resize(static_cast<size_t>(k));
    std::vector<double> meas;
    for (Index i = 0; i < k; ++i) meas.push_back(rec.true_rel_errors(i));
    add_report(rec, up, meas);
  }
  return rec;
}

}  // namespace

BoundCheck make_check(const std::string& tag, double lower, double measured, double upper, bool valid,
                      const std::string& note) {
  BoundCheck c{tag, lower, measured, upper, valid, -1, note};
  if (valid) {
    bool inside = !std::isnan(measured);
    if (!std::isnan(lower)) inside = inside && measured >= lower - kBracketSlack;
    if (!std::isnan(upper)) inside = inside && measured <= upper + kBracketSlack;
    c.ok = inside ? 1 : 0;
  }
  return c;
}

bool SweepRecord::bracket_ok() const {
  return std::none_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.ok == 0; });
}

Model parse_model(const std::string& name) {
  static const std::pair<const char*, Model> table[] = {
      {"obstacle", Model::Obstacle}, {"regular", Model::Regular},       {"singular", Model::Singular},
      {"arch", Model::Arch},         {"projection", Model::Projection}, {"random", Model::Random},
      {"cluster", Model::Cluster}};
  for (const auto& [n, m] : table)
    if (name == n) return m;
  throw ValidationError("unknown model '" + name + "'");
}

std::string model_name(Model m) {
  switch (m) {
    case Model::Obstacle: return "obstacle";
    case Model::Regular: return "regular";
    case Model::Singular: return "singular";
    case Model::Arch: return "arch";
    case Model::Projection: return "projection";
    case Model::Random: return "random";
    case Model::Cluster: return "cluster";
  }
  return "?";
}

BuiltProblem build_problem(const Problem& problem) {
  if (problem.m < 1) throw ValidationError("problem: need at least one tracked eigenvalue");
  BuiltProblem bp;
  bp.problem = problem;
  bool regular = false;
  switch (problem.model) {
    case Model::Obstacle: bp.pair = build_obstacle(problem.obstacle); break;
    case Model::Regular:
      bp.pair = build_regular(problem.interval_elems);
      regular = true;
      break;
    case Model::Singular: bp.pair = build_singular(problem.interval_elems); break;
    case Model::Arch:
      bp.pair = build_arch(problem.arch);
      regular = true;
      break;
    case Model::Projection:
      bp.pair = projection_family_pair(make_projection_family(problem.dim, problem.rank, problem.seed));
      regular = true;
      break;
    case Model::Random:
      bp.pair = random_spd_pair(problem.dim, problem.rank, problem.seed);
      regular = true;
      break;
    case Model::Cluster: {
      const ClusterPair cp = degenerate_cluster_pair(problem.dim, problem.cluster_m, problem.seed);
      bp.pair = cp.pair;
      regular = true;
      if (bp.problem.m < 1 + cp.m) bp.problem.m = 1 + cp.m;
      break;
    }
  }
  validate(bp.pair);
  const Index m = bp.problem.m;
  const bool coordinate = problem.model == Model::Obstacle || problem.model == Model::Regular ||
                          problem.model == Model::Singular;
  bp.limit = limit_spectrum(bp.pair, 1e-8, coordinate ? m + 2 : -1);
  if (bp.limit.values.size() < m + 1) throw ValidationError("problem: limit spectrum has fewer than m + 1 values");

  if (regular) {
    bp.lbb = lbb_constant(bp.pair);
    const DefectSet d1 = defects_kappa(bp.pair, 1.0, bp.limit, IndexRange{0, m});
    bp.eta_sq_1 = d1.etas.cwiseProduct(d1.etas);
    const double ref = bp.lbb->reference == LbbReference::Base ? 0.0 : 1.0;
    bp.eta_sq_ref = normalized_defect_sq(bp.pair, ref, bp.limit, IndexRange{0, m});
  }
  if (problem.model == Model::Arch) {
    bp.arch = eps_thresholds(problem.arch, bp.limit, 3);
    const double kref = arch_reference_kappa(bp.arch->eps1);
    bp.arch_eta_ref = defects_kappa(bp.pair, kref, bp.limit, IndexRange{0, 1}).etas(0);
  }
  return bp;
}

std::vector<SweepRecord> kappa_sweep(const Problem& problem, const std::vector<double>& grid,
                                     const SweepOptions& options) {
  if (grid.empty()) return {};
  return kappa_sweep(build_problem(problem), grid, options);
}

std::vector<SweepRecord> kappa_sweep(const BuiltProblem& built, const std::vector<double>& grid,
                                     const SweepOptions& options) {
  for (size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0)) throw ValidationError("sweep: grid values must be positive");
    if (k > 0 && !(grid[k] > grid[k - 1])) throw ValidationError("sweep: grid must be ascending");
  }
  std::vector<SweepRecord> out(grid.size());
  auto run = [&](size_t k) {
    try {
      out[k] = evaluate(built, grid[k], options);
    } catch (...) {
      std::ostringstream os;
      os << model_name(built.problem.model) << " at grid value " << grid[k];
      rethrow_with(os.str());
    }
  };
  if (!options.parallel || grid.size() < 2) {
    for (size_t k = 0; k < grid.size(); ++k) run(k);
    return out;
  }
  size_t nt = options.threads > 0 ? static_cast<size_t>(options.threads) : std::thread::hardware_concurrency();
  nt = std::clamp<size_t>(nt, 1, grid.size());
  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(grid.size());
  std::vector<std::thread> pool;
  for (size_t t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (size_t k; (k = next.fetch_add(1)) < grid.size();) {
        try {
          run(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

Kappa0Result sweep_kappa0(const BuiltProblem& built, const std::vector<SweepRecord>& records) {
  std::vector<double> grid;
  for (const auto& r : records) grid.push_back(r.kappa);
  std::sort(grid.begin(), grid.end());
  auto eta = [&](double kappa) {
    for (const auto& r : records)
      if (r.kappa == kappa) return r.defects.eta_max();
    return 1.0;
  };
  return kappa0_criterion(eta, grid, built.limit.values, built.problem.m);
}

RateFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("fit_loglog_slope: x and y differ in length");
  if (x.size() < 3) throw ValidationError("fit_loglog_slope: need at least 3 points");
  std::ostringstream bad;
  for (size_t i = 0; i < x.size(); ++i)
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) bad << " [" << i << "] x=" << x[i] << " y=" << y[i];
  if (!bad.str().empty()) throw ValidationError("fit_loglog_slope: nonpositive values at" + bad.str());

  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx, dy = std::log(y[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw ValidationError("fit_loglog_slope: x values are all equal");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double ss_res = std::max(syy - f.slope * sxy, 0.0);
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  f.points_used = static_cast<Index>(x.size());
  return f;
}

double record_field(const SweepRecord& r, const std::string& field) {
  auto indexed = [&](const std::string& prefix, const Vec& v) -> std::optional<double> {
    if (field.rfind(prefix, 0) != 0) return std::nullopt;
    const std::string rest = field.substr(prefix.size());
    if (rest.empty() || rest.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    const long i = std::stol(rest);
    if (i < 1 || i > v.size()) throw ValidationError("record field " + field + ": index out of range");
    return v(i - 1);
  };
  if (field == "grid_value") return r.grid_value;
  if (field == "kappa") return r.kappa;
  if (field == "proj_distance") {
    if (!r.proj_distance) throw ValidationError("record field proj_distance is not set");
    return *r.proj_distance;
  }
  if (field == "truth_rel_error") {
    if (!r.truth_rel_error) throw ValidationError("record field truth_rel_error is not set");
    return *r.truth_rel_error;
  }
  if (auto v = indexed("lambda_inf_", r.limit_values)) return *v;
  if (auto v = indexed("lambda_", r.eigenvalues)) return *v;
  if (auto v = indexed("eta_", r.defects.etas)) return *v;
  if (auto v = indexed("rel_err_", r.true_rel_errors)) return *v;
  throw ValidationError("unknown record field '" + field + "'");
}

RateFit fit_loglog_slope(const std::vector<SweepRecord>& records, const std::string& x_field,
                         const std::string& y_field) {
  std::vector<double> x, y;
  for (const auto& r : records) {
    x.push_back(record_field(r, x_field));
    y.push_back(record_field(r, y_field));
  }
  return fit_loglog_slope(x, y);
}

BracketSummary verify_brackets(const std::vector<SweepRecord>& records) {
  if (records.empty()) throw ValidationError("verify_brackets: no records");
  BracketSummary s;
  auto slot = [&](const std::string& tag) -> TagSummary& {
    for (auto& t : s.tags)
      if (t.tag == tag) return t;
    s.tags.push_back(TagSummary{tag});
    return s.tags.back();
  };
  for (const auto& r : records)
    for (const auto& c : r.checks) {
      TagSummary& t = slot(c.tag);
      if (c.ok < 0) {
        ++t.invalid;
        continue;
      }
      ++s.valid_checks;
      if (c.ok == 1) {
        ++t.passed;
      } else {
        ++t.failed;
        ++s.failures;
        std::ostringstream os;
        os << c.tag << " at " << r.grid_value << ": " << fmt17(c.lower) << " <= " << fmt17(c.measured)
           << " <= " << fmt17(c.upper) << " violated";
        s.failure_lines.push_back(os.str());
      }
    }
  if (s.valid_checks == 0) s.note = "no valid bounds";
  return s;
}

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw ValidationError("unknown format '" + name + "' (csv or json)");
}

namespace {

std::vector<std::string> check_tags(const std::vector<SweepRecord>& records) {
  std::vector<std::string> tags;
  for (const auto& r : records)
    for (const auto& c : r.checks)
      if (std::find(tags.begin(), tags.end(), c.tag) == tags.end()) tags.push_back(c.tag);
  return tags;
}

void emit_csv(const std::vector<SweepRecord>& records, std::ostream& os) {
  Index m = 0;
  for (const auto& r : records) m = std::max<Index>(m, r.eigenvalues.size());
  const std::vector<std::string> tags = check_tags(records);
  os << "grid_value";
  for (const char* p : {"lambda_", "lambda_inf_", "eta_", "rel_err_"})
    for (Index i = 1; i <= m; ++i) os << ',' << p << i;
  for (const auto& t : tags) os << ',' << t << "_lower," << t << "_upper," << t << "_ok";
  os << '\n';
  auto at = [](const Vec& v, Index i) { return i < v.size() ? v(i) : kNaN; };
  for (const auto& r : records) {
    os << fmt17(r.grid_value);
    for (const Vec* v : {&r.eigenvalues, &r.limit_values, &r.defects.etas, &r.true_rel_errors})
      for (Index i = 0; i < m; ++i) os << ',' << fmt17(at(*v, i));
    for (const auto& t : tags) {
      auto it = std::find_if(r.checks.begin(), r.checks.end(), [&](const BoundCheck& c) { return c.tag == t; });
      if (it == r.checks.end()) {
        os << ",nan,nan,-1";
      } else {
        os << ',' << fmt17(it->lower) << ',' << fmt17(it->upper) << ',' << it->ok;
      }
    }
    os << '\n';
  }
}

nlohmann::json num(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

nlohmann::json vec_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

nlohmann::json std_vec_json(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

void emit_json(const std::vector<SweepRecord>& records, std::ostream& os) {
  nlohmann::json all = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json j;
    j["grid_value"] = num(r.grid_value);
    j["kappa"] = num(r.kappa);
    j["eigenvalues"] = vec_json(r.eigenvalues);
    j["limit_values"] = vec_json(r.limit_values);
    j["defects"] = {{"kappa", num(r.defects.kappa)},     {"m", r.defects.m},
                    {"etas", vec_json(r.defects.etas)},  {"test_label", r.defects.test_label},
                    {"clamped", r.defects.clamped},      {"clamp_excess", num(r.defects.clamp_excess)}};
    j["true_rel_errors"] = vec_json(r.true_rel_errors);
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& b : r.bound_reports) {
      nlohmann::json in = nlohmann::json::object();
      for (const auto& [k, v] : b.inputs) in[k] = num(v);
      reps.push_back({{"tag", b.tag},
                      {"lower", std_vec_json(b.lower)},
                      {"upper", std_vec_json(b.upper)},
                      {"valid", b.valid},
                      {"note", b.note},
                      {"inputs", in}});
    }
    j["bound_reports"] = reps;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks)
      checks.push_back({{"tag", c.tag},
                        {"lower", num(c.lower)},
                        {"measured", num(c.measured)},
                        {"upper", num(c.upper)},
                        {"valid", c.valid},
                        {"ok", c.ok}});
    j["checks"] = checks;
    j["proj_distance"] = r.proj_distance ? num(*r.proj_distance) : nlohmann::json(nullptr);
    j["truth_rel_error"] = r.truth_rel_error ? num(*r.truth_rel_error) : nlohmann::json(nullptr);
    j["energy_residual"] = num(r.energy_residual);
    j["past_kappa0"] = r.past_kappa0;
    j["bracket_ok"] = r.bracket_ok();
    all.push_back(std::move(j));
  }
  os << all.dump(2) << '\n';
}

}  // namespace

void emit(const std::vector<SweepRecord>& records, Format format, std::ostream& os) {
  if (format == Format::Csv) {
    emit_csv(records, os);
  } else {
    emit_json(records, os);
  }
}

void emit(const std::vector<SweepRecord>& records, Format format, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("emit: cannot open '" + path + "' for writing");
  emit(records, format, f);
  f.flush();
  if (!f) throw std::runtime_error("emit: write to '" + path + "' failed");
}

CsvTable parse_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  if (!std::getline(is, line)) throw ValidationError("parse_csv: empty input");
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) throw ValidationError("parse_csv: row width differs from header");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(std::strtod(c.c_str(), nullptr));
    t.rows.push_back(std::move(row));
  }
  return t;
}

SchurSummary schur_check(Index dim, Index subspace, Index trials, std::uint64_t seed, double theta) {
  if (subspace < 1 || dim < subspace + 2) throw ValidationError("schur_check: need 1 <= subspace <= dim - 2");
  if (trials < 1) throw ValidationError("schur_check: need at least one trial");
  SchurSummary s;
  for (Index t = 0; t < trials; ++t) {
    const Index q = 1 + t % (dim - subspace - 1);
    const ClusteredPencil cp = clustered_pencil(dim, q, subspace, seed + static_cast<std::uint64_t>(t));
    const Mat V = rotated_basis(cp, theta);
    ++s.trials;
    double res;
    try {
      res = schur_residual(cp.pencil, V, cp.lambda_q);
    } catch (const ValidationError&) {
      ++s.skipped;
      continue;
    }
    s.max_residual = std::max(s.max_residual, res);

    const BlockSplit b = gamma_block(cp.pencil, V);
    const DefectSet d = defects_general(cp.pencil, V);
    Vec sv = Eigen::JacobiSVD<Mat>(b.Gamma).singularValues();
    std::sort(sv.data(), sv.data() + sv.size());
    s.max_sv_mismatch = std::max(s.max_sv_mismatch, (sv - d.etas).cwiseAbs().maxCoeff());

    const GapData g = relative_gaps(cp.eig.values, q, subspace, d.eta_max(), b.mu);
    const BoundReport r = ritz_value_bound(d, g, b.mu);
    if (r.valid) {
      const Vec err = (b.mu.array() - cp.lambda_q).abs() / b.mu.array();
      ++s.ritz_checked;
      if (!(err.maxCoeff() <= r.upper[0] + kBracketSlack)) ++s.ritz_failed;
    }

    const Mat Vo = m_orthonormalize(V, cp.pencil.M);
    Eigen::SelfAdjointEigenSolver<Mat> ex(ritz_matrix(cp.pencil, Vo));
    const Mat Psi = Vo * ex.eigenvectors();
    for (Index i = 0; i < subspace; ++i) {
      const Vec psi = Psi.col(i);
      const Vec v = aligned(cp.eig.vectors.col(q + i), psi, cp.pencil.M);
      s.max_energy_residual = std::max(s.max_energy_residual, energy_identity_check(energy_terms(cp.pencil, v, psi)));
    }
  }
  return s;
}

}  // namespace stiffspec
