#pragma once

// Piecewise interpolants through snapshots and the a-priori error bounds
//   Method 1:  ‖e^Y(t)‖ ≤ [2σ_{l+1} + Ψ_i Δ_i²/8] exp(Λt)
//   Method 2:  ‖e^Z(t)‖ ≤ [σ_{l+1}(59/54 + κΔ_i) + Φ_i Δ_i⁴/384] exp(Λt)
// for t in [t_i, t_{i+1}].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "podrom/errors.hpp"
#include "podrom/linalg.hpp"
#include "podrom/ode.hpp"
#include "podrom/pod.hpp"

namespace podrom {

namespace detail {

// Interval index i with times[i] <= t <= times[i+1]; the left-closed interval wins.
inline std::size_t bracket(std::span<const double> times, double t) {
  if (times.size() < 2) throw InvalidInput("need at least two snapshot times");
  if (t < times.front() || t > times.back()) {
    std::ostringstream os;
    os << "time " << t << " outside [" << times.front() << ", " << times.back() << "]";
    throw InvalidInput(os.str());
  }
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t i = static_cast<std::size_t>(it - times.begin());
  i = i == 0 ? 0 : i - 1;
  return std::min(i, times.size() - 2);
}

}  // namespace detail

/// Piecewise-linear interpolant through (t_i, y(t_i)).
inline Vector lagrange_piecewise(const SnapshotSet& set, double t) {
  const std::size_t i = detail::bracket(set.times, t);
  const double t0 = set.times[i];
  const double t1 = set.times[i + 1];
  const double w1 = (t - t0) / (t1 - t0);
  const double w0 = (t1 - t) / (t1 - t0);
  Vector y(set.dimension());
  for (std::size_t r = 0; r < y.size(); ++r) y[r] = w0 * set.solutions(r, i) + w1 * set.solutions(r, i + 1);
  return y;
}

/// Piecewise cubic Hermite interpolant matching y and f = y' at both ends.
inline Vector hermite_piecewise(const SnapshotSet& set, double t) {
  if (!set.derivatives) throw InvalidInput("hermite_piecewise: derivative snapshots required");
  const std::size_t i = detail::bracket(set.times, t);
  const double t0 = set.times[i];
  const double t1 = set.times[i + 1];
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double r = 1.0 - s;
  const double h00 = (1.0 + 2.0 * s) * r * r;
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h10 = h * s * r * r;
  const double h11 = -h * s * s * r;
  const DenseMatrix& f = *set.derivatives;
  Vector y(set.dimension());
  for (std::size_t k = 0; k < y.size(); ++k)
    y[k] = h00 * set.solutions(k, i) + h01 * set.solutions(k, i + 1) + h10 * f(k, i) + h11 * f(k, i + 1);
  return y;
}

struct BoundConstants {
  enum class Provenance { linear_exact, sampled_estimate, user_supplied };
  double lambda = 0.0;
  Vector psi;    // per interval, bound on ‖df/dt‖
  Vector phi;    // per interval, bound on ‖d³f/dt³‖
  Vector theta;  // per interval, max ‖y(t)‖
  Provenance provenance = Provenance::user_supplied;

  void validate(std::size_t intervals) const {
    if (psi.size() != intervals || phi.size() != intervals || theta.size() != intervals)
      throw InvalidInput("BoundConstants: list lengths must equal the number of intervals");
    auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!ok(lambda)) throw InvalidInput("BoundConstants: lambda must be finite and >= 0");
    for (const Vector* list : {&psi, &phi, &theta})
      for (double v : *list)
        if (!ok(v)) throw InvalidInput("BoundConstants: entries must be finite and >= 0");
  }
};

inline std::string to_string(BoundConstants::Provenance p) {
  switch (p) {
    case BoundConstants::Provenance::linear_exact: return "linear_exact";
    case BoundConstants::Provenance::sampled_estimate: return "sampled_estimate";
    case BoundConstants::Provenance::user_supplied: return "user_supplied";
  }
  return "?";
}

namespace detail {

// Trajectory sample indices grouped per snapshot interval (endpoints shared).
inline std::vector<std::vector<std::size_t>> samples_per_interval(const Trajectory& fom,
                                                                  std::span<const double> snapshot_times) {
  if (snapshot_times.size() < 2) throw InvalidInput("need at least two snapshot times");
  if (fom.size() == 0) throw InvalidInput("empty trajectory");
  const double tol = 1e-12 * std::max(1.0, std::abs(snapshot_times.back() - snapshot_times.front()));
  std::vector<std::vector<std::size_t>> groups(snapshot_times.size() - 1);
  for (std::size_t i = 0; i + 1 < snapshot_times.size(); ++i) {
    const double lo = snapshot_times[i] - tol;
    const double hi = snapshot_times[i + 1] + tol;
    auto first = std::lower_bound(fom.times.begin(), fom.times.end(), lo);
    for (auto it = first; it != fom.times.end() && *it <= hi; ++it)
      groups[i].push_back(static_cast<std::size_t>(it - fom.times.begin()));
    if (groups[i].size() < 2) {
      std::ostringstream os;
      os << "interval [" << snapshot_times[i] << ", " << snapshot_times[i + 1]
         << "] has fewer than 2 trajectory samples";
      throw InvalidInput(os.str());
    }
  }
  return groups;
}

}  // namespace detail

/// Exact constants for x' = Ax + b: Λ = σ₁(A), θ_i = max ‖y‖ on the interval,
/// Ψ_i = σ₁(A)θ_i, Φ_i = σ₁(A)³θ_i.
inline BoundConstants linear_bound_constants(const DenseMatrix& a, const Trajectory& fom,
                                             std::span<const double> snapshot_times,
                                             double norm_tol = 1e-12, std::uint64_t seed = 20140101) {
  if (a.rows() != a.cols()) throw InvalidInput("linear_bound_constants: matrix is not square");
  const auto groups = detail::samples_per_interval(fom, snapshot_times);
  BoundConstants c;
  c.provenance = BoundConstants::Provenance::linear_exact;
  c.lambda = spectral_norm(a, norm_tol, seed);
  for (const auto& g : groups) {
    double theta = 0.0;
    for (std::size_t k : g) theta = std::max(theta, norm2(fom.states[k]));
    c.theta.push_back(theta);
    c.psi.push_back(c.lambda * theta);
    c.phi.push_back(c.lambda * c.lambda * c.lambda * theta);
  }
  return c;
}

struct SampledConstantsOptions {
  double fd_step = 1e-6;
  double spectral_tol = 1e-8;
  // Jacobians are formed at every `jacobian_stride`-th sample of each
  // interval (interval endpoints always included).
  std::size_t jacobian_stride = 0;  // 0: interval endpoints only
  std::uint64_t seed = 20140101;
};

namespace detail {

// df/dt along the flow: central difference of f in the direction (f, 1).
inline Vector flow_derivative(const OdeSystem& sys, double t, std::span<const double> y, double h) {
  const Vector f = sys.evaluate(t, y);
  Vector yp(y.size()), ym(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    yp[i] = y[i] + h * f[i];
    ym[i] = y[i] - h * f[i];
  }
  const double span = (t + h) - (t - h);
  if (!(span > 0.0)) throw EvaluationError("sampled_bound_constants: finite-difference step underflows in time");
  Vector fp = sys.evaluate(t + h, yp);
  const Vector fm = sys.evaluate(t - h, ym);
  for (std::size_t i = 0; i < fp.size(); ++i) fp[i] = (fp[i] - fm[i]) / span;
  if (!all_finite(fp)) throw EvaluationError("sampled_bound_constants: non-finite difference quotient");
  return fp;
}

inline DenseMatrix forward_jacobian(const OdeSystem& sys, double t, std::span<const double> y, double h) {
  const std::size_t n = y.size();
  const Vector f0 = sys.evaluate(t, y);
  DenseMatrix j(n, n);
  Vector yp(y.begin(), y.end()), fp(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double step = h * std::max(1.0, std::abs(y[c]));
    const double saved = yp[c];
    yp[c] = saved + step;
    const double actual = yp[c] - saved;
    if (actual == 0.0) throw EvaluationError("sampled_bound_constants: Jacobian step underflows");
    sys.rhs(t, yp, fp);
    for (std::size_t r = 0; r < n; ++r) j(r, c) = (fp[r] - f0[r]) / actual;
    yp[c] = saved;
  }
  if (!j.all_finite()) throw EvaluationError("sampled_bound_constants: non-finite Jacobian");
  return j;
}

}  // namespace detail

/// Heuristic constants for a general system, from a densely sampled
/// trajectory. Ψ_i: max ‖df/dt‖ (central difference along the flow);
/// Φ_i: max ‖d³f/dt³‖ (third differences of f across samples);
/// Λ: max ‖J‖₂ with forward-difference Jacobians. These are maxima over
/// finitely many samples, i.e. lower approximations of the true suprema.
inline BoundConstants sampled_bound_constants(const OdeSystem& system, const Trajectory& fom,
                                              std::span<const double> snapshot_times,
                                              const SampledConstantsOptions& opts = {}) {
  if (!(opts.fd_step > 0.0)) throw InvalidInput("sampled_bound_constants: fd_step must be > 0");
  const auto groups = detail::samples_per_interval(fom, snapshot_times);
  const std::size_t k_total = fom.size();
  if (k_total < 5) throw InvalidInput("sampled_bound_constants: need at least 5 trajectory samples");

  std::vector<Vector> f(k_total), first(k_total);
  for (std::size_t k = 0; k < k_total; ++k) {
    f[k] = system.evaluate(fom.times[k], fom.states[k]);
    first[k] = detail::flow_derivative(system, fom.times[k], fom.states[k], opts.fd_step);
  }

  // Third time derivative of f from the sampled values: the mean of the two
  // third divided differences around the sample (the central five-point
  // formula on a uniform grid). Centers are clamped near the ends.
  auto third_divided = [&](std::size_t a, std::vector<double>& d) {
    const double* t = fom.times.data() + a;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double d01 = (f[a + 1][i] - f[a][i]) / (t[1] - t[0]);
      const double d12 = (f[a + 2][i] - f[a + 1][i]) / (t[2] - t[1]);
      const double d23 = (f[a + 3][i] - f[a + 2][i]) / (t[3] - t[2]);
      const double d012 = (d12 - d01) / (t[2] - t[0]);
      const double d123 = (d23 - d12) / (t[3] - t[1]);
      d[i] = 6.0 * (d123 - d012) / (t[3] - t[0]);
    }
  };
  auto third_norm = [&](std::size_t k) {
    const std::size_t c = std::clamp<std::size_t>(k, 2, k_total - 3);
    std::vector<double> lo(system.dimension), hi(system.dimension);
    third_divided(c - 2, lo);
    third_divided(c - 1, hi);
    double s = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) s += 0.25 * (lo[i] + hi[i]) * (lo[i] + hi[i]);
    return std::sqrt(s);
  };

  BoundConstants out;
  out.provenance = BoundConstants::Provenance::sampled_estimate;
  std::vector<std::size_t> jac_samples;
  for (const auto& g : groups) {
    double theta = 0.0, psi = 0.0, phi = 0.0;
    for (std::size_t k : g) {
      theta = std::max(theta, norm2(fom.states[k]));
      psi = std::max(psi, norm2(first[k]));
      phi = std::max(phi, third_norm(k));
    }
    out.theta.push_back(theta);
    out.psi.push_back(psi);
    out.phi.push_back(phi);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const bool endpoint = p == 0 || p + 1 == g.size();
      if (endpoint || (opts.jacobian_stride > 0 && p % opts.jacobian_stride == 0))
        jac_samples.push_back(g[p]);
    }
  }
  std::sort(jac_samples.begin(), jac_samples.end());
  jac_samples.erase(std::unique(jac_samples.begin(), jac_samples.end()), jac_samples.end());
  for (std::size_t k : jac_samples) {
    const DenseMatrix j = detail::forward_jacobian(system, fom.times[k], fom.states[k], opts.fd_step);
    out.lambda = std::max(out.lambda, spectral_norm(j, opts.spectral_tol, opts.seed));
  }
  return out;
}

struct BoundCurve {
  Vector times;
  Vector values;
  SnapshotKind method = SnapshotKind::Y;
  // Some value hit the 1e300 cap.
  bool saturated = false;
};

inline constexpr double kBoundCap = 1e300;

/// Coefficient κ of σ_{l+1}Δ_i in the Method-2 bound: 8/27 (default) or the
/// tighter 4/27.
enum class Method2Coefficient { conservative, literal };

namespace detail {

template <class Bracket>
BoundCurve evaluate_bound(SnapshotKind method, const BoundConstants& c, std::span<const double> snapshot_times,
                          std::span<const double> eval_times, Bracket bracket_value) {
  c.validate(snapshot_times.size() - 1);
  BoundCurve curve;
  curve.method = method;
  const double log_cap = std::log(kBoundCap);
  for (double t : eval_times) {
    const std::size_t i = bracket(snapshot_times, t);
    const double delta = snapshot_times[i + 1] - snapshot_times[i];
    const double base = bracket_value(i, delta);
    double value = 0.0;
    if (base > 0.0) {
      const double log_value = std::log(base) + c.lambda * t;
      if (log_value >= log_cap) {
        value = kBoundCap;
        curve.saturated = true;
      } else {
        value = base * std::exp(c.lambda * t);
      }
    }
    curve.times.push_back(t);
    curve.values.push_back(value);
  }
  return curve;
}

}  // namespace detail

inline BoundCurve method1_bound(double sigma_next, const BoundConstants& c,
                                std::span<const double> snapshot_times, std::span<const double> eval_times) {
  if (!(sigma_next >= 0.0)) throw InvalidInput("method1_bound: sigma_next must be >= 0");
  return detail::evaluate_bound(SnapshotKind::Y, c, snapshot_times, eval_times, [&](std::size_t i, double d) {
    return 2.0 * sigma_next + c.psi[i] * d * d / 8.0;
  });
}

inline BoundCurve method2_bound(double sigma_next, const BoundConstants& c,
                                std::span<const double> snapshot_times, std::span<const double> eval_times,
                                Method2Coefficient coefficient = Method2Coefficient::conservative) {
  if (!(sigma_next >= 0.0)) throw InvalidInput("method2_bound: sigma_next must be >= 0");
  const double kappa = coefficient == Method2Coefficient::conservative ? 8.0 / 27.0 : 4.0 / 27.0;
  return detail::evaluate_bound(SnapshotKind::Z, c, snapshot_times, eval_times, [&](std::size_t i, double d) {
    return sigma_next * (59.0 / 54.0 + kappa * d) + d * d * d * d * c.phi[i] / 384.0;
  });
}

/// Interpolation-remainder parts of the two bounds (σ-independent terms).
inline double lagrange_remainder_bound(double psi, double delta) { return psi * delta * delta / 8.0; }
inline double hermite_remainder_bound(double phi, double delta) {
  return phi * delta * delta * delta * delta / 384.0;
}

}  // namespace podrom
