// Acceptance checks, one line per criterion:
//   acceptance            all criteria
//   acceptance 3 5        selected criteria
// Exit status is 0 only if every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "podrom/podrom.hpp"
#include "test_util.hpp"

using namespace podrom;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared full preset-A sweep with bounds; built on first use.
struct PresetARun {
  RunReport report;
  double seconds = 0.0;
};

RunConfig preset_a_config() {
  RunConfig cfg = config_from_preset(fhn::preset(fhn::PresetId::A));
  cfg.evaluate_bounds = true;
  return cfg;
}

const PresetARun& preset_a() {
  static const PresetARun run = [] {
    PresetARun r;
    const auto t0 = std::chrono::steady_clock::now();
    r.report = run_experiment(preset_a_config());
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

const CellResult& cell(const RunReport& r, SnapshotKind m, double delta, const std::string& rule) {
  const CellResult* c = r.find(m, delta, rule);
  if (!c) throw std::runtime_error("missing cell " + to_string(m) + " " + format_number(delta) + " " + rule);
  if (!c->ok) throw std::runtime_error("cell " + to_string(m) + " " + format_number(delta) + " " + rule +
                                       " failed: " + c->failure);
  return *c;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20140101);
  std::uniform_int_distribution<std::size_t> rows(1, 30), cols(1, 12);
  double worst_ey = 0.0, worst_rec = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = rows(rng), n = cols(rng);
    const DenseMatrix a = testing::random_matrix(m, n, rng);
    const SvdResult s = svd_one_sided_jacobi(a);
    const double s1 = s.largest();
    const std::size_t r = s.numerical_rank;
    // Partial sums X_l = Σ_{k<l} σ_k u_k v_kᵀ.
    DenseMatrix x(m, n);
    for (std::size_t l = 0; l <= r; ++l) {
      if (l > 0)
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j)
            x(i, j) += s.left_vectors(i, l - 1) * s.singular_values[l - 1] * s.right_vectors(j, l - 1);
      if (l >= 1 && l < r) {
        const double resid = spectral_norm(a - x, 1e-13);
        worst_ey = std::max(worst_ey, std::abs(resid - s.singular_values[l]) / s.singular_values[l]);
      }
    }
    worst_rec = std::max(worst_rec, (a - x).max_abs() / s1);
  }
  const double secs = seconds_since(t0);
  const bool pass = worst_ey <= 1e-8 && worst_rec <= 1e-10 && secs < 10.0;
  return {pass, fmt("Eckart-Young max rel dev %.2e (<= 1e-8), reconstruction %.2e*sigma1 (<= 1e-10), %.2f s (< 10)",
                    worst_ey, worst_rec, secs)};
}

Outcome criterion2() {
  long checks = 0, violations = 0;
  double worst = -1e300;
  for (fhn::PresetId id : {fhn::PresetId::A, fhn::PresetId::B}) {
    const RunConfig cfg = config_from_preset(fhn::preset(id));
    const OdeSystem sys = fhn::build_fhn(cfg.params);
    for (double delta : cfg.deltas) {
      const Vector times = uniform_snapshot_times(cfg.final_time, delta);
      const SnapshotSet snaps =
          collect_snapshots(sys, fhn::initial_state(cfg.params), times, cfg.tolerances, true);
      for (SnapshotKind kind : {SnapshotKind::Y, SnapshotKind::Z}) {
        const SvdResult svd = svd_one_sided_jacobi(build_snapshot_matrix(snaps, kind), cfg.rank_tol_factor);
        const double slack = 1e-10 * svd.largest();
        std::vector<Vector> resid;
        for (std::size_t j = 0; j < snaps.solutions.cols(); ++j) resid.push_back(snaps.solutions.column(j));
        if (kind == SnapshotKind::Z)
          for (std::size_t j = 0; j < snaps.derivatives->cols(); ++j) resid.push_back(snaps.derivatives->column(j));
        // r ← (I − u_l u_lᵀ) r accumulates P̃⊥ for l = 1, 2, ...
        for (std::size_t l = 1; l <= svd.numerical_rank; ++l) {
          const Vector u = svd.left_vectors.column(l - 1);
          const double sigma_next = l < svd.singular_values.size() ? svd.singular_values[l] : 0.0;
          for (Vector& r : resid) {
            axpy(-dot(u, r), u, r);
            const double excess = norm2(r) - (sigma_next + slack);
            worst = std::max(worst, excess / svd.largest());
            ++checks;
            if (excess > 0.0) ++violations;
          }
        }
      }
    }
  }
  return {violations == 0, fmt("%ld of %ld projection estimates violated (max excess %.2e*sigma1)", violations,
                               checks, worst)};
}

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  auto max_err = [](double delta, bool hermite) {
    SnapshotSet s;
    s.times = uniform_snapshot_times(4.0, delta);
    s.solutions = DenseMatrix(1, s.times.size());
    DenseMatrix d(1, s.times.size());
    for (std::size_t j = 0; j < s.times.size(); ++j) {
      s.solutions(0, j) = std::sin(s.times[j]);
      d(0, j) = std::cos(s.times[j]);
    }
    s.derivatives = d;
    double e = 0.0;
    for (double t : uniform_grid(4.0, 4001))
      e = std::max(e, std::abs((hermite ? hermite_piecewise(s, t) : lagrange_piecewise(s, t))[0] - std::sin(t)));
    return e;
  };
  double lo_l = 1e9, hi_l = -1e9, lo_h = 1e9, hi_h = -1e9;
  double delta = 0.5;
  double prev_l = max_err(delta, false), prev_h = max_err(delta, true);
  for (int k = 0; k < 5; ++k) {
    delta /= 2;
    const double el = max_err(delta, false), eh = max_err(delta, true);
    const double sl = std::log2(prev_l / el), sh = std::log2(prev_h / eh);
    lo_l = std::min(lo_l, sl), hi_l = std::max(hi_l, sl);
    lo_h = std::min(lo_h, sh), hi_h = std::max(hi_h, sh);
    prev_l = el, prev_h = eh;
  }
  const double secs = seconds_since(t0);
  const bool pass = lo_l >= 1.9 && hi_l <= 2.1 && lo_h >= 3.9 && hi_h <= 4.1 && secs < 5.0;
  return {pass, fmt("Lagrange slopes [%.3f, %.3f] (2 +- 0.1), Hermite slopes [%.3f, %.3f] (4 +- 0.1), %.2f s (< 5)",
                    lo_l, hi_l, lo_h, hi_h, secs)};
}

Outcome criterion4() {
  const RunReport& r = preset_a().report;
  long points = 0, violations = 0, cells = 0;
  std::string problems;
  for (const CellResult& c : r.cells) {
    if (c.rule.kind != TruncationRule::Kind::cutoff) continue;
    ++cells;
    if (!c.ok || !c.bound) {
      problems += " " + to_string(c.method) + "/" + format_number(c.delta) + "/" + c.rule.label() + ": " +
                  (c.ok ? c.bound_failure : c.failure);
      ++violations;
      continue;
    }
    if (c.bound_provenance != BoundConstants::Provenance::linear_exact) ++violations;
    for (std::size_t k = 0; k < c.error.norms.size(); ++k, ++points)
      if (!(c.bound->values[k] >= c.error.norms[k])) ++violations;
  }
  return {violations == 0 && cells == 18,
          fmt("%ld violations over %ld evaluation points in %ld (delta, eps) cells", violations, points, cells) +
              problems};
}

Outcome criterion5() {
  const PresetARun& run = preset_a();
  const std::vector<double> deltas{0.01, 0.005, 0.0025};
  std::map<SnapshotKind, std::vector<double>> maxima;
  bool pass = run.seconds < 300.0;
  std::ostringstream os;
  for (SnapshotKind m : {SnapshotKind::Y, SnapshotKind::Z})
    for (double d : deltas) {
      const CellResult& c = cell(run.report, m, d, TruncationRule::cutoff(1e-15).label());
      pass = pass && c.sigma_next <= 1e-15;
      maxima[m].push_back(c.max_error);
    }
  for (std::size_t i = 0; i + 1 < deltas.size(); ++i) {
    const double ry = maxima[SnapshotKind::Y][i] / maxima[SnapshotKind::Y][i + 1];
    const double rz = maxima[SnapshotKind::Z][i] / maxima[SnapshotKind::Z][i + 1];
    os << fmt("halving %g->%g: Y ratio %.2f (>= 4), Z ratio %.2f (>= 16); ", deltas[i], deltas[i + 1], ry, rz);
    pass = pass && ry >= 4.0 && rz >= 16.0;
  }
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double y = maxima[SnapshotKind::Y][i], z = maxima[SnapshotKind::Z][i];
    os << fmt("delta %g: Z %.3e < Y %.3e; ", deltas[i], z, y);
    pass = pass && z < y;
  }
  os << fmt("sweep %.1f s (< 300)", run.seconds);
  return {pass, os.str()};
}

Outcome criterion6() {
  const RunReport& r = preset_a().report;
  double lo = 1e300, hi = 0.0;
  std::ostringstream os;
  for (double d : {0.01, 0.005, 0.0025}) {
    const double e = cell(r, SnapshotKind::Y, d, TruncationRule::cutoff(0.1).label()).max_error;
    lo = std::min(lo, e);
    hi = std::max(hi, e);
    os << fmt("delta %g: %.3e; ", d, e);
  }
  os << fmt("max/min %.2f (< 3)", hi / lo);
  return {hi / lo < 3.0, os.str()};
}

Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = config_from_preset(fhn::preset(fhn::PresetId::B));
  cfg.rules = {TruncationRule::fixed(5), TruncationRule::fixed(25), TruncationRule::fixed(50)};
  const RunReport r = run_experiment(cfg);
  auto e = [&](SnapshotKind m, std::size_t l) { return cell(r, m, 0.04, TruncationRule::fixed(l).label()).max_error; };
  const double y5 = e(SnapshotKind::Y, 5), z5 = e(SnapshotKind::Z, 5);
  const double y25 = e(SnapshotKind::Y, 25), z25 = e(SnapshotKind::Z, 25);
  const double y50 = e(SnapshotKind::Y, 50), z50 = e(SnapshotKind::Z, 50);
  const double ratio5 = std::max(y5, z5) / std::min(y5, z5);
  const double secs = seconds_since(t0);
  const bool pass = z25 < y25 && z50 < y50 && ratio5 < 3.0 && secs < 600.0;
  return {pass, fmt("l=25: Z %.3e < Y %.3e; l=50: Z %.3e < Y %.3e; l=5: Y %.3e, Z %.3e, ratio %.2f (< 3); %.1f s (< 600)",
                    z25, y25, z50, y50, y5, z5, ratio5, secs)};
}

Outcome criterion8() {
  RunConfig cfg = config_from_preset(fhn::preset(fhn::PresetId::C));
  cfg.deltas = {1.0};
  cfg.rules = {TruncationRule::fixed(20)};
  const RunReport r = run_experiment(cfg);
  const double y = cell(r, SnapshotKind::Y, 1.0, "l20").max_error;
  const double z = cell(r, SnapshotKind::Z, 1.0, "l20").max_error;
  return {z <= y, fmt("delta 1, l=20: Z %.3e <= Y %.3e", z, y)};
}

Outcome criterion9() {
  RunConfig cfg = config_from_preset(fhn::preset(fhn::PresetId::A));
  cfg.deltas = {0.01};
  cfg.rules = {TruncationRule::fixed(cfg.params.dimension())};
  const RunReport r = run_experiment(cfg);
  const double y = cell(r, SnapshotKind::Y, 0.01, r.cells[0].rule.label()).max_error;
  const double z = cell(r, SnapshotKind::Z, 0.01, r.cells[0].rule.label()).max_error;
  return {std::max(y, z) <= 1e-8, fmt("l = n = %zu: Y %.3e, Z %.3e (<= 1e-8)", cfg.params.dimension(), y, z)};
}

Outcome criterion10() {
  const RunReport& first = preset_a().report;
  const RunReport second = run_experiment(preset_a_config());
  std::vector<std::pair<std::string, bool>> files{
      {"errors.csv", error_csv(first) == error_csv(second)},
      {"spectrum.csv", spectrum_csv(first) == spectrum_csv(second)},
      {"summary.csv", summary_csv(first) == summary_csv(second)},
      {"bounds.csv", bounds_csv(first) == bounds_csv(second)},
      {"plot.gp", plot_script(first) == plot_script(second)}};
  for (const auto& lab : rule_labels(first))
    files.emplace_back(error_file_name(lab), error_csv(first, lab) == error_csv(second, lab));
  std::string differing;
  for (const auto& [name, same] : files)
    if (!same) differing += " " + name;
  return {differing.empty(), fmt("%zu outputs compared across two runs (seed %llu)", files.size(),
                                 static_cast<unsigned long long>(preset_a_config().seed)) +
                                 (differing.empty() ? "" : ", differing:" + differing)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
      return 1;
    }
    selected.push_back(n);
  }
  if (selected.empty())
    for (int n = 1; n <= static_cast<int>(criteria.size()); ++n) selected.push_back(n);

  int failed = 0;
  for (int n : selected) {
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("[%s] criterion %d: %s\n", o.pass ? "PASS" : "FAIL", n, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
