#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "podrom/errors.hpp"
#include "podrom/linalg.hpp"

namespace podrom {

/// dx/dt = f(x, t). Writes f into `out` (length = dimension).
using RhsFunction = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
using TimeVectorFunction = std::function<Vector(double t)>;

struct OdeSystem {
  std::size_t dimension = 0;
  RhsFunction rhs;
  // Present when the system is x' = A x + b(t). `rhs` must agree with it.
  std::optional<DenseMatrix> linear_matrix;
  TimeVectorFunction affine_term;

  Vector evaluate(double t, std::span<const double> x) const {
    if (x.size() != dimension) throw InvalidInput("OdeSystem::evaluate: state length mismatch");
    Vector out(dimension, 0.0);
    rhs(t, x, out);
    return out;
  }
};

/// x' = A x + b(t); b may be empty (homogeneous).
inline OdeSystem make_linear_system(DenseMatrix a, TimeVectorFunction b = {}) {
  if (a.rows() != a.cols()) throw InvalidInput("make_linear_system: matrix is not square");
  OdeSystem sys;
  sys.dimension = a.rows();
  sys.linear_matrix = std::move(a);
  sys.affine_term = std::move(b);
  // Captured by value: the OdeSystem may be copied or moved.
  sys.rhs = [m = *sys.linear_matrix, b = sys.affine_term](double t, std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), x);
    if (b) {
      const Vector bt = b(t);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += bt[i];
    }
  };
  return sys;
}

struct Trajectory {
  Vector times;
  std::vector<Vector> states;

  std::size_t size() const noexcept { return times.size(); }
};

struct IntegrationOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  // Initial step as a fraction of (t1 - t0).
  double initial_step_fraction = 1e-6;
  // Step-size floor as a fraction of (t1 - t0).
  double min_step_fraction = 1e-14;
  long max_steps = 50'000'000;
};

struct IntegrationStats {
  long accepted_steps = 0;
  long rejected_steps = 0;
  long rhs_evaluations = 0;
};

namespace detail {

inline void check_finite_rhs(std::span<const double> v, double t) {
  if (!all_finite(v)) {
    std::ostringstream os;
    os << "right-hand side produced a non-finite value at t = " << t;
    throw EvaluationError(os.str());
  }
}

// Dormand–Prince 5(4) tableau.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b̂ (error estimate weights)
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/// Adaptive Dormand–Prince 5(4) integration with PI step control. Steps are
/// truncated so that each requested output time is hit exactly; the returned
/// times are the requested ones bit-for-bit.
inline Trajectory integrate(const OdeSystem& system, std::span<const double> x0, double t0,
                            double t1, std::span<const double> output_times,
                            const IntegrationOptions& opts = {}, IntegrationStats* stats = nullptr) {
  const std::size_t n = system.dimension;
  if (x0.size() != n) throw InvalidInput("integrate: initial state length mismatch");
  if (!(t0 < t1)) throw InvalidInput("integrate: require t0 < t1");
  if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0))
    throw InvalidInput("integrate: tolerances must be positive");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (output_times[i] < t0 || output_times[i] > t1)
      throw InvalidInput("integrate: output time outside [t0, t1]");
    if (i > 0 && !(output_times[i] > output_times[i - 1]))
      throw InvalidInput("integrate: output times must be strictly increasing");
  }

  using T = detail::Dopri5;
  Trajectory traj;
  traj.times.assign(output_times.begin(), output_times.end());
  traj.states.reserve(output_times.size());

  IntegrationStats local;
  Vector x(x0.begin(), x0.end());
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), stage(n), xnew(n);
  auto eval = [&](double t, std::span<const double> s, std::span<double> out) {
    system.rhs(t, s, out);
    ++local.rhs_evaluations;
    detail::check_finite_rhs(out, t);
  };

  std::size_t next_out = 0;
  double t = t0;
  while (next_out < output_times.size() && output_times[next_out] == t0) {
    traj.states.push_back(x);
    ++next_out;
  }
  if (next_out == output_times.size()) {
    if (stats) *stats = local;
    return traj;
  }
  const double t_end = output_times.back();

  const double span = t1 - t0;
  const double h_min = opts.min_step_fraction * span;
  double h = opts.initial_step_fraction * span;
  constexpr double kBeta = 0.04;
  constexpr double kAlpha = 0.2 - 0.75 * kBeta;
  constexpr double kSafety = 0.9;
  double err_prev = 1e-4;
  bool last_rejected = false;

  eval(t, x, k1);
  while (next_out < output_times.size()) {
    if (local.accepted_steps + local.rejected_steps >= opts.max_steps) {
      std::ostringstream os;
      os << "integrate: step budget exhausted at t = " << t;
      throw StiffnessError(os.str(), t);
    }
    const double target = output_times[next_out];
    bool lands = false;
    double h_try = h;
    if (t + h_try >= target) {
      h_try = target - t;
      lands = true;
    }

    for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + h_try * T::a21 * k1[i];
    eval(t + T::c2 * h_try, stage, k2);
    for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + h_try * (T::a31 * k1[i] + T::a32 * k2[i]);
    eval(t + T::c3 * h_try, stage, k3);
    for (std::size_t i = 0; i < n; ++i)
      stage[i] = x[i] + h_try * (T::a41 * k1[i] + T::a42 * k2[i] + T::a43 * k3[i]);
    eval(t + T::c4 * h_try, stage, k4);
    for (std::size_t i = 0; i < n; ++i)
      stage[i] = x[i] + h_try * (T::a51 * k1[i] + T::a52 * k2[i] + T::a53 * k3[i] + T::a54 * k4[i]);
    eval(t + T::c5 * h_try, stage, k5);
    for (std::size_t i = 0; i < n; ++i)
      stage[i] = x[i] + h_try * (T::a61 * k1[i] + T::a62 * k2[i] + T::a63 * k3[i] +
                                 T::a64 * k4[i] + T::a65 * k5[i]);
    const double t_new = lands ? target : t + h_try;
    eval(t_new, stage, k6);
    for (std::size_t i = 0; i < n; ++i)
      xnew[i] = x[i] + h_try * (T::b1 * k1[i] + T::b3 * k3[i] + T::b4 * k4[i] + T::b5 * k5[i] +
                                T::b6 * k6[i]);
    eval(t_new, xnew, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h_try * (T::e1 * k1[i] + T::e3 * k3[i] + T::e4 * k4[i] + T::e5 * k5[i] +
                                T::e6 * k6[i] + T::e7 * k7[i]);
      const double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(x[i]), std::abs(xnew[i]));
      err = std::max(err, std::abs(e) / sc);
    }

    if (err <= 1.0) {
      ++local.accepted_steps;
      t = t_new;
      x.swap(xnew);
      k1.swap(k7);
      double fac = err == 0.0 ? 5.0 : kSafety * std::pow(err, -kAlpha) * std::pow(err_prev, kBeta);
      fac = std::clamp(fac, 0.2, 5.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      // A step truncated to land on an output time keeps the previous proposal.
      if (!(lands && h_try < h)) h = h_try * fac;
      err_prev = std::max(err, 1e-4);
      last_rejected = false;
      if (lands) {
        traj.states.push_back(x);
        ++next_out;
      }
    } else {
      ++local.rejected_steps;
      h = h_try * std::max(0.2, kSafety * std::pow(err, -kAlpha));
      last_rejected = true;
      if (h < h_min) {
        std::ostringstream os;
        os << "integrate: step size underflow at t = " << t << " (h = " << h << ")";
        throw StiffnessError(os.str(), t);
      }
    }
    if (t >= t_end) break;
  }
  if (stats) *stats = local;
  return traj;
}

/// Fixed-step classical RK4 from t0 to t1 in `steps` equal steps; returns the
/// endpoint state.
inline Vector integrate_rk4(const OdeSystem& system, std::span<const double> x0, double t0,
                            double t1, long steps) {
  if (steps < 1) throw InvalidInput("integrate_rk4: steps must be >= 1");
  if (x0.size() != system.dimension) throw InvalidInput("integrate_rk4: state length mismatch");
  const std::size_t n = system.dimension;
  const double h = (t1 - t0) / static_cast<double>(steps);
  Vector x(x0.begin(), x0.end()), k1(n), k2(n), k3(n), k4(n), s(n);
  for (long step = 0; step < steps; ++step) {
    const double t = t0 + static_cast<double>(step) * h;
    system.rhs(t, x, k1);
    for (std::size_t i = 0; i < n; ++i) s[i] = x[i] + 0.5 * h * k1[i];
    system.rhs(t + 0.5 * h, s, k2);
    for (std::size_t i = 0; i < n; ++i) s[i] = x[i] + 0.5 * h * k2[i];
    system.rhs(t + 0.5 * h, s, k3);
    for (std::size_t i = 0; i < n; ++i) s[i] = x[i] + h * k3[i];
    system.rhs(t + h, s, k4);
    for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    detail::check_finite_rhs(x, t + h);
  }
  return x;
}

/// Column j = f(states[j], times[j]).
inline DenseMatrix sample_rhs(const OdeSystem& system, const Trajectory& trajectory) {
  if (trajectory.size() == 0) throw InvalidInput("sample_rhs: empty trajectory");
  DenseMatrix out(system.dimension, trajectory.size());
  for (std::size_t j = 0; j < trajectory.size(); ++j) {
    const Vector f = system.evaluate(trajectory.times[j], trajectory.states[j]);
    detail::check_finite_rhs(f, trajectory.times[j]);
    out.set_column(j, f);
  }
  return out;
}

}  // namespace podrom
