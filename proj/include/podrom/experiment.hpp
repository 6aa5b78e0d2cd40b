#pragma once

// Sweep driver: one truth solve, then snapshots -> SVD -> truncation -> ROM
// -> error curve (-> bound curve) for every (method, delta, rule) cell.

#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "podrom/bounds.hpp"
#include "podrom/errors.hpp"
#include "podrom/fhn.hpp"
#include "podrom/linalg.hpp"
#include "podrom/ode.hpp"
#include "podrom/pod.hpp"

namespace podrom {

struct RunConfig {
  std::string label = "custom";
  fhn::FhnParams params;
  double final_time = 0.5;
  std::vector<TruncationRule> rules;
  std::vector<double> deltas;
  std::vector<SnapshotKind> methods{SnapshotKind::Y, SnapshotKind::Z};
  IntegrationOptions tolerances;
  std::size_t eval_grid_size = 400;
  std::string output_dir = "out";
  bool emit_plots = false;
  bool evaluate_bounds = false;
  std::uint64_t seed = 20140101;
  Method2Coefficient method2_coefficient = Method2Coefficient::conservative;
  // Relative to the SVD's max(m,n)·eps·σ₁ convention. Kept small so that
  // singular values down to ~1e-15 stay selectable by the cutoff rule.
  double rank_tol_factor = 1e-8;
  std::size_t bound_samples_per_interval = 64;

  void validate() const {
    params.validate();
    if (methods.empty()) throw InvalidInput("RunConfig: at least one method is required");
    if (deltas.empty()) throw InvalidInput("RunConfig: at least one snapshot spacing is required");
    if (rules.empty()) throw InvalidInput("RunConfig: at least one truncation rule is required");
    if (!(final_time > 0.0)) throw InvalidInput("RunConfig: final time must be > 0");
    if (eval_grid_size < 2) throw InvalidInput("RunConfig: eval_grid_size must be >= 2");
    if (!(rank_tol_factor > 0.0)) throw InvalidInput("RunConfig: rank_tol_factor must be > 0");
    if (bound_samples_per_interval < 2) throw InvalidInput("RunConfig: need >= 2 bound samples per interval");
    if (!(tolerances.rel_tol > 0.0) || !(tolerances.abs_tol > 0.0))
      throw InvalidInput("RunConfig: tolerances must be > 0");
    for (double d : deltas) fhn::intervals_for(final_time, d);
  }
};

/// Full grid of a preset: every cutoff and every fixed dimension.
inline RunConfig config_from_preset(const fhn::ExperimentPreset& p) {
  RunConfig c;
  c.label = fhn::to_string(p.id);
  c.params = p.params;
  c.final_time = p.final_time;
  c.deltas = p.delta_list;
  c.eval_grid_size = p.eval_grid_size;
  for (double e : p.epsilon_list) c.rules.push_back(TruncationRule::cutoff(e));
  for (std::size_t l : p.l_list) c.rules.push_back(TruncationRule::fixed(l));
  return c;
}

struct CellResult {
  SnapshotKind method = SnapshotKind::Y;
  double delta = 0.0;
  TruncationRule rule;
  bool ok = false;
  std::string failure;
  ErrorCurve error;
  std::size_t l = 0;
  double sigma_next = 0.0;
  double max_error = 0.0;
  bool cutoff_warning = false;
  std::optional<BoundCurve> bound;
  std::optional<BoundConstants::Provenance> bound_provenance;
  std::string bound_failure;
};

struct Spectrum {
  SnapshotKind method = SnapshotKind::Y;
  double delta = 0.0;
  Vector singular_values;  // descending, first numerical_rank values
  std::size_t numerical_rank = 0;
};

struct StageTimings {
  int fom_solves = 0;
  double fom_seconds = 0.0;
  double svd_seconds = 0.0;
  double rom_seconds = 0.0;
  double bound_seconds = 0.0;
  double total_seconds = 0.0;
};

struct RunReport {
  std::string label;
  std::vector<CellResult> cells;
  std::vector<Spectrum> spectra;
  StageTimings timings;

  std::size_t failed_cells() const {
    std::size_t k = 0;
    for (const auto& c : cells) k += c.ok ? 0 : 1;
    return k;
  }

  const CellResult* find(SnapshotKind m, double delta, const std::string& rule_label) const {
    for (const auto& c : cells)
      if (c.method == m && c.delta == delta && c.rule.label() == rule_label) return &c;
    return nullptr;
  }
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Sorted union of time lists; points closer than tol collapse to the first seen.
inline Vector merge_times(const std::vector<Vector>& lists, double tol) {
  std::set<double> all;
  for (const auto& l : lists) all.insert(l.begin(), l.end());
  Vector out;
  for (double t : all)
    if (out.empty() || t - out.back() > tol) out.push_back(t);
  return out;
}

inline Vector dense_interval_samples(const Vector& snapshot_times, std::size_t per_interval) {
  Vector t;
  for (std::size_t i = 0; i + 1 < snapshot_times.size(); ++i) {
    const double a = snapshot_times[i], b = snapshot_times[i + 1];
    for (std::size_t k = 0; k < per_interval; ++k)
      t.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(per_interval));
  }
  t.push_back(snapshot_times.back());
  return t;
}

}  // namespace detail

inline RunReport run_experiment(const RunConfig& config) {
  config.validate();
  detail::Stopwatch total;
  RunReport report;
  report.label = config.label;
  const double t_end = config.final_time;
  const OdeSystem system = fhn::build_fhn(config.params);
  const Vector x0 = fhn::initial_state(config.params);
  const Vector eval_times = uniform_grid(t_end, config.eval_grid_size);

  std::vector<Vector> snapshot_times;
  std::vector<Vector> grids{eval_times};
  for (double d : config.deltas) {
    snapshot_times.push_back(uniform_snapshot_times(t_end, d));
    grids.push_back(snapshot_times.back());
    // Included even without bounds so the truth steps, and every output,
    // do not depend on whether bounds are requested.
    grids.push_back(detail::dense_interval_samples(snapshot_times.back(), config.bound_samples_per_interval));
  }
  const Vector all_times = detail::merge_times(grids, 1e-12 * t_end);

  // The single truth solve shared by every cell.
  detail::Stopwatch fom_clock;
  const Trajectory truth = integrate(system, x0, 0.0, t_end, all_times, config.tolerances);
  report.timings.fom_solves = 1;
  report.timings.fom_seconds = fom_clock.seconds();
  const Trajectory truth_eval = restrict_trajectory(truth, eval_times);

  for (std::size_t di = 0; di < config.deltas.size(); ++di) {
    const double delta = config.deltas[di];
    const Vector& st = snapshot_times[di];
    const SnapshotSet snaps = snapshots_from_trajectory(system, truth, st, true);

    std::optional<BoundConstants> constants;
    std::string constants_failure;
    if (config.evaluate_bounds) {
      detail::Stopwatch clock;
      const Trajectory dense = restrict_trajectory(
          truth, detail::dense_interval_samples(st, config.bound_samples_per_interval));
      try {
        if (system.linear_matrix) {
          constants = linear_bound_constants(*system.linear_matrix, dense, st, 1e-12, config.seed);
        } else {
          SampledConstantsOptions o;
          o.seed = config.seed;
          constants = sampled_bound_constants(system, dense, st, o);
        }
      } catch (const std::exception& e) {
        constants_failure = e.what();
      }
      report.timings.bound_seconds += clock.seconds();
    }

    for (SnapshotKind method : config.methods) {
      std::optional<SvdResult> svd;
      std::string svd_failure;
      {
        detail::Stopwatch clock;
        try {
          svd = svd_one_sided_jacobi(build_snapshot_matrix(snaps, method), config.rank_tol_factor);
          Spectrum s;
          s.method = method;
          s.delta = delta;
          s.numerical_rank = svd->numerical_rank;
          s.singular_values.assign(svd->singular_values.begin(),
                                   svd->singular_values.begin() + static_cast<long>(svd->numerical_rank));
          report.spectra.push_back(std::move(s));
        } catch (const std::exception& e) {
          svd_failure = e.what();
        }
        report.timings.svd_seconds += clock.seconds();
      }

      for (const TruncationRule& rule : config.rules) {
        CellResult cell;
        cell.method = method;
        cell.delta = delta;
        cell.rule = rule;
        if (!svd) {
          cell.failure = "svd: " + svd_failure;
          report.cells.push_back(std::move(cell));
          continue;
        }
        detail::Stopwatch clock;
        try {
          const bool full = rule.kind == TruncationRule::Kind::fixed_dimension && rule.dimension == system.dimension;
          const PodBasis basis = full ? full_basis(system.dimension, method) : truncate_basis(*svd, rule, method);
          const Trajectory rom = solve_rom_lifted(system, basis, x0, eval_times, config.tolerances);
          cell.error = error_curve(truth_eval, rom, method, delta, basis.l, basis.sigma_next);
          cell.l = basis.l;
          cell.sigma_next = basis.sigma_next;
          cell.max_error = cell.error.max_norm();
          cell.cutoff_warning = basis.cutoff_warning;
          cell.ok = true;
        } catch (const std::exception& e) {
          cell.failure = e.what();
        }
        report.timings.rom_seconds += clock.seconds();

        if (cell.ok && config.evaluate_bounds) {
          detail::Stopwatch bclock;
          if (!constants) {
            cell.bound_failure = constants_failure;
          } else {
            try {
              cell.bound = method == SnapshotKind::Y
                               ? method1_bound(cell.sigma_next, *constants, st, eval_times)
                               : method2_bound(cell.sigma_next, *constants, st, eval_times,
                                               config.method2_coefficient);
              cell.bound_provenance = constants->provenance;
            } catch (const std::exception& e) {
              cell.bound_failure = e.what();
            }
          }
          report.timings.bound_seconds += bclock.seconds();
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  report.timings.total_seconds = total.seconds();
  return report;
}

/// Snapshot spectra only (no ROM solves): one truth solve at snapshot times.
inline RunReport compute_spectra(const RunConfig& config) {
  if (config.methods.empty() || config.deltas.empty())
    throw InvalidInput("compute_spectra: need at least one method and one spacing");
  config.params.validate();
  detail::Stopwatch total;
  RunReport report;
  report.label = config.label;
  const OdeSystem system = fhn::build_fhn(config.params);
  std::vector<Vector> lists;
  for (double d : config.deltas) lists.push_back(uniform_snapshot_times(config.final_time, d));
  const Vector all_times = detail::merge_times(lists, 1e-12 * config.final_time);
  detail::Stopwatch fom_clock;
  const Trajectory truth =
      integrate(system, fhn::initial_state(config.params), 0.0, config.final_time, all_times, config.tolerances);
  report.timings.fom_solves = 1;
  report.timings.fom_seconds = fom_clock.seconds();
  for (std::size_t di = 0; di < config.deltas.size(); ++di) {
    const SnapshotSet snaps = snapshots_from_trajectory(system, truth, lists[di], true);
    for (SnapshotKind method : config.methods) {
      detail::Stopwatch clock;
      const SvdResult svd = svd_one_sided_jacobi(build_snapshot_matrix(snaps, method), config.rank_tol_factor);
      Spectrum s;
      s.method = method;
      s.delta = config.deltas[di];
      s.numerical_rank = svd.numerical_rank;
      s.singular_values.assign(svd.singular_values.begin(),
                               svd.singular_values.begin() + static_cast<long>(svd.numerical_rank));
      report.spectra.push_back(std::move(s));
      report.timings.svd_seconds += clock.seconds();
    }
  }
  report.timings.total_seconds = total.seconds();
  return report;
}

}  // namespace podrom
