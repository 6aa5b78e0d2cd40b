#pragma once

// Snapshot collection, POD bases and Galerkin reduced-order models.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "podrom/errors.hpp"
#include "podrom/linalg.hpp"
#include "podrom/ode.hpp"

namespace podrom {

/// Method 1 uses Y = [y(t_i)]; Method 2 uses Z = [y(t_i) | f(y(t_i), t_i)].
enum class SnapshotKind { Y, Z };

inline std::string to_string(SnapshotKind k) { return k == SnapshotKind::Y ? "Y" : "Z"; }

inline SnapshotKind parse_snapshot_kind(const std::string& s) {
  if (s == "Y" || s == "y" || s == "1") return SnapshotKind::Y;
  if (s == "Z" || s == "z" || s == "2") return SnapshotKind::Z;
  throw InvalidInput("unknown method '" + s + "' (expected Y or Z)");
}

struct SnapshotSet {
  Vector times;
  DenseMatrix solutions;                   // n x m
  std::optional<DenseMatrix> derivatives;  // n x m

  std::size_t count() const noexcept { return times.size(); }
  std::size_t dimension() const noexcept { return solutions.rows(); }

  Vector spacings() const {
    Vector d;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) d.push_back(times[i + 1] - times[i]);
    return d;
  }

  void validate() const {
    if (times.size() < 2) throw InvalidInput("SnapshotSet: need at least two snapshot times");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
      if (!(times[i + 1] > times[i])) throw InvalidInput("SnapshotSet: times must be strictly increasing");
    if (solutions.cols() != times.size()) throw InvalidInput("SnapshotSet: solution column count mismatch");
    if (derivatives && (derivatives->cols() != times.size() || derivatives->rows() != solutions.rows()))
      throw InvalidInput("SnapshotSet: derivative block shape mismatch");
  }
};

/// t_i = i·Δ for i = 0..T/Δ, with the last point set to T exactly.
inline Vector uniform_snapshot_times(double final_time, double delta) {
  if (!(delta > 0.0) || !(final_time > 0.0)) throw InvalidInput("uniform_snapshot_times: need Δ, T > 0");
  const double q = final_time / delta;
  const double r = std::round(q);
  if (r < 1.0 || std::abs(q - r) > 1e-12 * std::max(1.0, q))
    throw InvalidInput("uniform_snapshot_times: Δ does not divide T");
  const auto intervals = static_cast<std::size_t>(r);
  Vector t(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) t[i] = static_cast<double>(i) * delta;
  t.back() = final_time;
  return t;
}

/// `count` equally spaced points on [0, T], endpoints included.
inline Vector uniform_grid(double final_time, std::size_t count) {
  if (count < 2) throw InvalidInput("uniform_grid: need at least two points");
  Vector t(count);
  for (std::size_t i = 0; i < count; ++i)
    t[i] = final_time * static_cast<double>(i) / static_cast<double>(count - 1);
  t.back() = final_time;
  return t;
}

/// Index of `t` in sorted `times` within a tolerance; throws if absent.
inline std::size_t find_time_index(std::span<const double> times, double t, double tol) {
  auto it = std::lower_bound(times.begin(), times.end(), t - tol);
  if (it == times.end() || std::abs(*it - t) > tol) {
    std::ostringstream os;
    os << "time " << t << " not present in trajectory";
    throw InvalidInput(os.str());
  }
  return static_cast<std::size_t>(it - times.begin());
}

/// Sub-trajectory at the requested times (matched within 1e-12·span).
inline Trajectory restrict_trajectory(const Trajectory& traj, std::span<const double> times) {
  if (traj.size() == 0) throw InvalidInput("restrict_trajectory: empty trajectory");
  const double tol = 1e-12 * std::max(1.0, std::abs(traj.times.back() - traj.times.front()));
  Trajectory out;
  for (double t : times) {
    const auto k = find_time_index(traj.times, t, tol);
    out.times.push_back(t);
    out.states.push_back(traj.states[k]);
  }
  return out;
}

/// Snapshot set read off an existing trajectory that contains `times`.
inline SnapshotSet snapshots_from_trajectory(const OdeSystem& system, const Trajectory& traj,
                                             std::span<const double> times, bool with_derivatives) {
  Trajectory sub = restrict_trajectory(traj, times);
  SnapshotSet set;
  set.times.assign(times.begin(), times.end());
  set.solutions = DenseMatrix::from_columns(sub.states);
  if (with_derivatives) set.derivatives = sample_rhs(system, sub);
  set.validate();
  return set;
}

/// One high-accuracy integration sampled at the snapshot times (first = 0).
inline SnapshotSet collect_snapshots(const OdeSystem& system, std::span<const double> x0,
                                     std::span<const double> snapshot_times,
                                     const IntegrationOptions& opts, bool with_derivatives) {
  if (snapshot_times.size() < 2) throw InvalidInput("collect_snapshots: need at least two times");
  if (snapshot_times.front() != 0.0) throw InvalidInput("collect_snapshots: first snapshot time must be 0");
  const Trajectory traj = integrate(system, x0, 0.0, snapshot_times.back(), snapshot_times, opts);
  return snapshots_from_trajectory(system, traj, snapshot_times, with_derivatives);
}

/// Y: n x m solutions in time order. Z: n x 2m, solutions then derivatives.
inline DenseMatrix build_snapshot_matrix(const SnapshotSet& set, SnapshotKind kind) {
  if (kind == SnapshotKind::Y) return set.solutions;
  if (!set.derivatives) throw InvalidInput("build_snapshot_matrix: Z requires derivative snapshots");
  const std::size_t n = set.solutions.rows();
  const std::size_t m = set.solutions.cols();
  DenseMatrix z(n, 2 * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      z(i, j) = set.solutions(i, j);
      z(i, m + j) = (*set.derivatives)(i, j);
    }
  }
  return z;
}

struct TruncationRule {
  enum class Kind { fixed_dimension, cutoff };
  Kind kind = Kind::cutoff;
  std::size_t dimension = 0;
  double epsilon = 0.0;

  static TruncationRule fixed(std::size_t l) {
    if (l < 1) throw InvalidInput("TruncationRule: fixed dimension must be >= 1");
    return {Kind::fixed_dimension, l, 0.0};
  }
  static TruncationRule cutoff(double eps) {
    if (!(eps > 0.0)) throw InvalidInput("TruncationRule: cutoff must be > 0");
    return {Kind::cutoff, 0, eps};
  }

  /// Short identifier usable in file names: "eps1e-15", "l20".
  std::string label() const {
    std::ostringstream os;
    if (kind == Kind::fixed_dimension)
      os << "l" << dimension;
    else
      os << "eps" << epsilon;
    return os.str();
  }
};

struct PodBasis {
  DenseMatrix reduced_vectors;  // Ũ, n x l
  Vector all_singular_values;
  std::size_t l = 0;
  double sigma_next = 0.0;
  SnapshotKind source_kind = SnapshotKind::Y;
  std::size_t numerical_rank = 0;
  // Set when a cutoff ε >= σ₁ forced l = 1.
  bool cutoff_warning = false;

  std::size_t dimension() const noexcept { return reduced_vectors.rows(); }
};

/// Cutoff: smallest l with σ_{l+1} < ε, where singular values past the
/// numerical rank count as zero. Fixed: l as given (must not exceed rank).
/// sigma_next is the (l+1)-th computed singular value, or 0 when none remains.
inline PodBasis truncate_basis(const SvdResult& svd, const TruncationRule& rule,
                               SnapshotKind kind = SnapshotKind::Y) {
  const std::size_t rank = svd.numerical_rank;
  if (rank == 0) throw InvalidInput("truncate_basis: snapshot matrix has numerical rank 0");
  PodBasis b;
  b.source_kind = kind;
  b.all_singular_values = svd.singular_values;
  b.numerical_rank = rank;
  if (rule.kind == TruncationRule::Kind::fixed_dimension) {
    if (rule.dimension < 1 || rule.dimension > rank) {
      std::ostringstream os;
      os << "truncate_basis: fixed dimension " << rule.dimension << " exceeds numerical rank " << rank;
      throw InvalidInput(os.str());
    }
    b.l = rule.dimension;
  } else {
    std::size_t l = 0;
    while (l < rank && svd.singular_values[l] >= rule.epsilon) ++l;
    if (rule.epsilon >= svd.singular_values.front()) b.cutoff_warning = true;
    b.l = std::max<std::size_t>(l, 1);
  }
  b.sigma_next = b.l < svd.singular_values.size() ? svd.singular_values[b.l] : 0.0;
  b.reduced_vectors = svd.left_vectors.left_columns(b.l);
  return b;
}

/// Ũ = I_n: the projector is the identity.
inline PodBasis full_basis(std::size_t n, SnapshotKind kind = SnapshotKind::Y) {
  PodBasis b;
  b.reduced_vectors = DenseMatrix::identity(n);
  b.l = n;
  b.sigma_next = 0.0;
  b.source_kind = kind;
  b.numerical_rank = n;
  return b;
}

/// Ũᵀ x
inline Vector reduce(const PodBasis& basis, std::span<const double> x) {
  if (x.size() != basis.dimension()) throw InvalidInput("reduce: dimension mismatch");
  return multiply_transposed(basis.reduced_vectors, x);
}

/// Ũ z
inline Vector lift(const PodBasis& basis, std::span<const double> z) {
  if (z.size() != basis.l) throw InvalidInput("lift: reduced dimension mismatch");
  return multiply(basis.reduced_vectors, z);
}

/// P̃x = Ũ(Ũᵀx), never forming the n x n projector.
inline Vector apply_projector(const PodBasis& basis, std::span<const double> x) {
  return lift(basis, reduce(basis, x));
}

/// P̃⊥x = x − P̃x
inline Vector apply_complement(const PodBasis& basis, std::span<const double> x) {
  return subtract(x, apply_projector(basis, x));
}

/// Galerkin ROM z' = Ũᵀ f(Ũz, t). For a linear FOM the reduced matrix ŨᵀAŨ
/// and forcing Ũᵀb(t) are assembled and used directly.
inline OdeSystem build_rom(const OdeSystem& system, const PodBasis& basis) {
  if (basis.dimension() != system.dimension) throw InvalidInput("build_rom: basis dimension mismatch");
  auto u = std::make_shared<const DenseMatrix>(basis.reduced_vectors);
  const std::size_t l = basis.l;
  OdeSystem rom;
  rom.dimension = l;
  if (system.linear_matrix) {
    DenseMatrix reduced = u->transposed() * (*system.linear_matrix * *u);
    TimeVectorFunction forcing;
    if (system.affine_term) {
      forcing = [u, b = system.affine_term](double t) { return multiply_transposed(*u, b(t)); };
    }
    rom.linear_matrix = reduced;
    rom.affine_term = forcing;
    rom.rhs = [m = std::move(reduced), forcing](double t, std::span<const double> z, std::span<double> out) {
      for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), z);
      if (forcing) {
        const Vector bt = forcing(t);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += bt[i];
      }
    };
    return rom;
  }
  const std::size_t n = system.dimension;
  rom.rhs = [u, f = system.rhs, n](double t, std::span<const double> z, std::span<double> out) {
    Vector x(n), fx(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = dot(u->row(i), z);
    f(t, x, fx);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) axpy(fx[i], u->row(i), out);
  };
  return rom;
}

/// Integrates the ROM from z(t0) = Ũᵀx0 and returns Ũz(t) at `output_times`.
inline Trajectory solve_rom_lifted(const OdeSystem& system, const PodBasis& basis,
                                   std::span<const double> x0, std::span<const double> output_times,
                                   const IntegrationOptions& opts = {}, double t0 = 0.0,
                                   IntegrationStats* stats = nullptr) {
  if (output_times.empty()) throw InvalidInput("solve_rom_lifted: no output times");
  const OdeSystem rom = build_rom(system, basis);
  const Vector z0 = reduce(basis, x0);
  Trajectory lifted;
  lifted.times.assign(output_times.begin(), output_times.end());
  if (output_times.back() <= t0) {
    for (std::size_t i = 0; i < output_times.size(); ++i) lifted.states.push_back(lift(basis, z0));
    return lifted;
  }
  const Trajectory reduced = integrate(rom, z0, t0, output_times.back(), output_times, opts, stats);
  lifted.states.reserve(reduced.size());
  for (const auto& z : reduced.states) lifted.states.push_back(lift(basis, z));
  return lifted;
}

struct ErrorCurve {
  Vector times;
  Vector norms;
  SnapshotKind method = SnapshotKind::Y;
  double delta = 0.0;
  std::size_t l_used = 0;
  double sigma_next_used = 0.0;

  double max_norm() const { return norms.empty() ? 0.0 : *std::max_element(norms.begin(), norms.end()); }
};

/// ‖y(t) − y_P̃(t)‖₂ on a shared time grid.
inline ErrorCurve error_curve(const Trajectory& fom, const Trajectory& rom_lifted, SnapshotKind tag,
                              double delta, std::size_t l, double sigma_next) {
  if (fom.times != rom_lifted.times) throw InvalidInput("error_curve: time grids differ");
  ErrorCurve c;
  c.times = fom.times;
  c.method = tag;
  c.delta = delta;
  c.l_used = l;
  c.sigma_next_used = sigma_next;
  c.norms.reserve(fom.size());
  for (std::size_t k = 0; k < fom.size(); ++k) {
    if (fom.states[k].size() != rom_lifted.states[k].size())
      throw InvalidInput("error_curve: state length mismatch");
    const double e = norm2(subtract(fom.states[k], rom_lifted.states[k]));
    if (!std::isfinite(e)) throw EvaluationError("error_curve: non-finite error norm");
    c.norms.push_back(e);
  }
  return c;
}

}  // namespace podrom
