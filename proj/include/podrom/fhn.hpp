#pragma once

// Method-of-lines FitzHugh–Nagumo reaction–diffusion system on [0, X]:
//   v_t = D1 v_xx + λ[v(1−v)(v−a) − w],   v_x(0) = −I0(t), v_x(X) = −IX(t)
//   w_t = D2 w_xx + μ v − γ w,            w(0) = w0(t),   w(X) = wX(t)
// State ordering [v_0..v_L, w_0..w_L], n = 2(L+1).

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "podrom/errors.hpp"
#include "podrom/linalg.hpp"
#include "podrom/ode.hpp"

namespace podrom::fhn {

/// Boundary signal: c, or A·sin²(t).
struct Waveform {
  enum class Kind { constant, sin_squared };
  Kind kind = Kind::constant;
  double value = 0.0;

  static Waveform constant(double c) { return {Kind::constant, c}; }
  static Waveform sin_squared(double amplitude) { return {Kind::sin_squared, amplitude}; }

  double operator()(double t) const {
    if (kind == Kind::constant) return value;
    const double s = std::sin(t);
    return value * s * s;
  }

  double derivative(double t) const {
    if (kind == Kind::constant) return 0.0;
    return value * std::sin(2.0 * t);
  }

  friend bool operator==(const Waveform&, const Waveform&) = default;
};

/// Which index pattern the v boundary rows use.
///  consistent: (v1 − v0 + dx·I0)/dx² and (v_{L−1} − v_L − dx·IX)/dx²
///  literal:    (v2 − v1 + dx·I0)/dx² and (v_{L−2} − v_{L−1} − dx·IX)/dx²
enum class BoundaryStencil { consistent, literal };

struct FhnParams {
  std::size_t L = 200;
  double X = 10.0;
  double D1 = 15.0;
  double D2 = 10.0;
  double lambda = 0.0;
  double a = 0.1;
  double mu = 10.0;
  double gamma = 5.0;
  Waveform I0 = Waveform::constant(1.0);
  Waveform IX = Waveform::constant(5.0);
  Waveform w0 = Waveform::constant(0.0);
  Waveform wX = Waveform::constant(0.0);
  BoundaryStencil stencil = BoundaryStencil::consistent;

  double dx() const { return X / static_cast<double>(L); }
  std::size_t dimension() const { return 2 * (L + 1); }

  void validate() const {
    if (L < 2) throw InvalidInput("FhnParams: L must be >= 2");
    if (stencil == BoundaryStencil::literal && L < 3)
      throw InvalidInput("FhnParams: literal stencil needs L >= 3");
    if (!(X > 0.0)) throw InvalidInput("FhnParams: X must be > 0");
    if (D1 < 0.0 || D2 < 0.0) throw InvalidInput("FhnParams: diffusion coefficients must be >= 0");
    for (double v : {X, D1, D2, lambda, a, mu, gamma, I0.value, IX.value, w0.value, wX.value})
      if (!std::isfinite(v)) throw InvalidInput("FhnParams: non-finite parameter");
  }

  friend bool operator==(const FhnParams&, const FhnParams&) = default;
};

inline double reaction_v(const FhnParams& p, double v, double w) {
  return p.lambda * (v * (1.0 - v) * (v - p.a) - w);
}

inline double reaction_w(const FhnParams& p, double v, double w) { return p.mu * v - p.gamma * w; }

struct LinearForm {
  DenseMatrix matrix;
  TimeVectorFunction forcing;
};

/// A and b(t) with rhs(t, x) = A x + b(t). Only defined for λ = 0.
inline LinearForm assemble_linear_matrix(const FhnParams& p) {
  p.validate();
  if (p.lambda != 0.0) throw InvalidInput("assemble_linear_matrix: requires lambda = 0");
  const std::size_t L = p.L;
  const std::size_t n = p.dimension();
  const double dx = p.dx();
  const double c1 = p.D1 / (dx * dx);
  const double c2 = p.D2 / (dx * dx);
  DenseMatrix a(n, n);
  if (p.stencil == BoundaryStencil::consistent) {
    a(0, 0) = -c1;
    a(0, 1) = c1;
    a(L, L - 1) = c1;
    a(L, L) = -c1;
  } else {
    a(0, 1) = -c1;
    a(0, 2) = c1;
    a(L, L - 2) = c1;
    a(L, L - 1) = -c1;
  }
  for (std::size_t j = 1; j < L; ++j) {
    a(j, j - 1) = c1;
    a(j, j) = -2.0 * c1;
    a(j, j + 1) = c1;
  }
  const std::size_t w = L + 1;
  for (std::size_t j = 1; j < L; ++j) {
    a(w + j, w + j - 1) = c2;
    a(w + j, w + j) = -2.0 * c2 - p.gamma;
    a(w + j, w + j + 1) = c2;
    a(w + j, j) = p.mu;
  }
  auto forcing = [p, c1, dx, n, L](double t) {
    Vector b(n, 0.0);
    b[0] = c1 * dx * p.I0(t);
    b[L] = -c1 * dx * p.IX(t);
    b[L + 1] = p.w0.derivative(t);
    b[2 * L + 1] = p.wX.derivative(t);
    return b;
  };
  return {std::move(a), forcing};
}

/// Semidiscretized system. For λ = 0 the explicit linear form is attached.
inline OdeSystem build_fhn(const FhnParams& p) {
  p.validate();
  OdeSystem sys;
  sys.dimension = p.dimension();
  sys.rhs = [p](double t, std::span<const double> x, std::span<double> out) {
    const std::size_t L = p.L;
    const double dx = p.dx();
    const double c1 = p.D1 / (dx * dx);
    const double c2 = p.D2 / (dx * dx);
    const double* v = x.data();
    const double* w = x.data() + L + 1;
    double* dv = out.data();
    double* dw = out.data() + L + 1;
    if (p.stencil == BoundaryStencil::consistent) {
      dv[0] = c1 * (v[1] - v[0] + dx * p.I0(t));
      dv[L] = c1 * (v[L - 1] - v[L] - dx * p.IX(t));
    } else {
      dv[0] = c1 * (v[2] - v[1] + dx * p.I0(t));
      dv[L] = c1 * (v[L - 2] - v[L - 1] - dx * p.IX(t));
    }
    dv[0] += reaction_v(p, v[0], w[0]);
    dv[L] += reaction_v(p, v[L], w[L]);
    for (std::size_t j = 1; j < L; ++j)
      dv[j] = c1 * (v[j + 1] - 2.0 * v[j] + v[j - 1]) + reaction_v(p, v[j], w[j]);
    dw[0] = p.w0.derivative(t);
    dw[L] = p.wX.derivative(t);
    for (std::size_t j = 1; j < L; ++j)
      dw[j] = c2 * (w[j + 1] - 2.0 * w[j] + w[j - 1]) + reaction_w(p, v[j], w[j]);
  };
  if (p.lambda == 0.0) {
    LinearForm lf = assemble_linear_matrix(p);
    sys.linear_matrix = std::move(lf.matrix);
    sys.affine_term = std::move(lf.forcing);
  }
  return sys;
}

/// Initial state consistent with the Dirichlet data for w; zero otherwise.
inline Vector initial_state(const FhnParams& p) {
  Vector x(p.dimension(), 0.0);
  x[p.L + 1] = p.w0(0.0);
  x[2 * p.L + 1] = p.wX(0.0);
  return x;
}

enum class PresetId { A, B, C };

inline std::string to_string(PresetId id) {
  switch (id) {
    case PresetId::A: return "A";
    case PresetId::B: return "B";
    case PresetId::C: return "C";
  }
  return "?";
}

inline PresetId parse_preset(const std::string& s) {
  if (s == "A" || s == "a") return PresetId::A;
  if (s == "B" || s == "b") return PresetId::B;
  if (s == "C" || s == "c") return PresetId::C;
  throw InvalidInput("unknown preset '" + s + "' (expected A, B or C)");
}

struct ExperimentPreset {
  PresetId id = PresetId::A;
  FhnParams params;
  double final_time = 0.5;
  std::vector<double> delta_list;
  std::vector<double> epsilon_list;
  std::vector<std::size_t> l_list;
  std::size_t eval_grid_size = 400;
};

/// Number of intervals T/Δ when Δ divides T (to 1e-12 relative); throws otherwise.
inline std::size_t intervals_for(double final_time, double delta) {
  if (!(delta > 0.0) || !(final_time > 0.0)) throw InvalidInput("spacing and final time must be > 0");
  const double q = final_time / delta;
  const double r = std::round(q);
  if (r < 1.0 || std::abs(q - r) > 1e-12 * std::max(1.0, q)) {
    std::ostringstream os;
    os << "snapshot spacing " << delta << " does not divide T = " << final_time;
    throw InvalidInput(os.str());
  }
  return static_cast<std::size_t>(r);
}

inline ExperimentPreset preset(PresetId id) {
  ExperimentPreset ep;
  ep.id = id;
  FhnParams& p = ep.params;
  p.L = 200;
  p.X = 10.0;
  p.w0 = Waveform::constant(0.0);
  p.wX = Waveform::constant(0.0);
  if (id == PresetId::A) {
    p.lambda = 0.0;
    p.a = 0.1;
    p.D1 = 15.0;
    p.D2 = 10.0;
    p.mu = 10.0;
    p.gamma = 5.0;
    p.I0 = Waveform::constant(1.0);
    p.IX = Waveform::constant(5.0);
    ep.final_time = 0.5;
    ep.delta_list = {0.01, 0.005, 0.0025};
    ep.epsilon_list = {1e-15, 1e-9, 1e-1};
    ep.l_list = {5, 10, 15, 20, 35, 50};
  } else {
    p.lambda = 2.0;
    p.a = 0.1;
    p.D1 = 5.0;
    p.D2 = 1.0;
    p.mu = 1.0;
    p.gamma = 5.0;
    p.I0 = Waveform::sin_squared(1.5);
    p.IX = Waveform::sin_squared(0.5);
    if (id == PresetId::B) {
      ep.final_time = 2.0;
      ep.delta_list = {0.04, 0.02, 0.01};
      ep.epsilon_list = {1e-15, 1e-7, 1e-4};
      ep.l_list = {5, 20, 25, 50};
    } else {
      ep.final_time = 20.0;
      ep.delta_list = {0.5, 1.0, 2.0};
      ep.epsilon_list = {1e-15, 1e-4};
      ep.l_list = {5, 10, 15, 20, 25, 30, 35, 40};
    }
  }
  for (double d : ep.delta_list) intervals_for(ep.final_time, d);
  return ep;
}

}  // namespace podrom::fhn
