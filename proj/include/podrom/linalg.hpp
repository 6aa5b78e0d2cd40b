#pragma once

// Dense real linear algebra used throughout the toolkit: a row-major matrix,
// small vector kernels, a cyclic Jacobi eigensolver for symmetric matrices,
// a one-sided (Hestenes) Jacobi SVD and a Krylov estimate of the 2-norm.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "podrom/errors.hpp"

namespace podrom {

using Vector = std::vector<double>;

inline constexpr double kMachineEps = std::numeric_limits<double>::epsilon();

// ---------------------------------------------------------------------------
// Vector kernels
// ---------------------------------------------------------------------------

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) {
  // Scaled to stay safe for entries near the overflow/underflow limits.
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double v : a) {
    const double r = v / scale;
    s += r * r;
  }
  return scale * std::sqrt(s);
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// DenseMatrix
// ---------------------------------------------------------------------------

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix from_row_major(std::size_t rows, std::size_t cols, Vector entries) {
    if (entries.size() != rows * cols) {
      throw InvalidInput("DenseMatrix: entries length " + std::to_string(entries.size()) +
                         " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!podrom::all_finite(entries)) throw InvalidInput("DenseMatrix: non-finite entry");
    DenseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.data_ = std::move(entries);
    return m;
  }

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Vector entries;
    entries.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw InvalidInput("DenseMatrix::from_rows: ragged rows");
      entries.insert(entries.end(), row.begin(), row.end());
    }
    return from_row_major(r, c, std::move(entries));
  }

  static DenseMatrix from_columns(const std::vector<Vector>& columns) {
    if (columns.empty()) return {};
    DenseMatrix m(columns.front().size(), columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) m.set_column(j, columns[j]);
    return m;
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static DenseMatrix diagonal(std::span<const double> d) {
    DenseMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  Vector column(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  void set_column(std::size_t j, std::span<const double> values) {
    if (values.size() != rows_) throw InvalidInput("DenseMatrix::set_column: length mismatch");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  DenseMatrix transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Leading `count` columns.
  DenseMatrix left_columns(std::size_t count) const {
    DenseMatrix m(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < count; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  bool all_finite() const { return podrom::all_finite(data_); }
  double max_abs() const { return podrom::max_abs(data_); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

inline DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw InvalidInput("matrix product: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      axpy(aik, b.row(k), ci);
    }
  }
  return c;
}

inline DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidInput("matrix difference: shapes differ");
  DenseMatrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

inline DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidInput("matrix sum: shapes differ");
  DenseMatrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] += bd[i];
  return c;
}

inline DenseMatrix operator*(double s, const DenseMatrix& a) {
  DenseMatrix c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

/// M x
inline Vector multiply(const DenseMatrix& m, std::span<const double> x) {
  if (x.size() != m.cols()) throw InvalidInput("matrix-vector product: length mismatch");
  Vector y(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) y[i] = dot(m.row(i), x);
  return y;
}

/// Mᵀ x
inline Vector multiply_transposed(const DenseMatrix& m, std::span<const double> x) {
  if (x.size() != m.rows()) throw InvalidInput("transposed matrix-vector product: length mismatch");
  Vector y(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) axpy(x[i], m.row(i), y);
  return y;
}

/// max |QᵀQ − I|
inline double orthonormality_defect(const DenseMatrix& q) {
  const DenseMatrix g = q.transposed() * q;
  double d = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j)
      d = std::max(d, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return d;
}

// ---------------------------------------------------------------------------
// Symmetric eigensolver (cyclic Jacobi)
// ---------------------------------------------------------------------------

struct SymmetricEigen {
  Vector eigenvalues;        // descending
  DenseMatrix eigenvectors;  // column k pairs with eigenvalues[k]
};

inline constexpr int kMaxJacobiSweeps = 60;

inline SymmetricEigen jacobi_symmetric_eig(const DenseMatrix& s, double sweep_tol = 1e-14) {
  const std::size_t n = s.rows();
  if (n != s.cols()) throw InvalidInput("jacobi_symmetric_eig: matrix is not square");
  if (n == 0) throw InvalidInput("jacobi_symmetric_eig: empty matrix");
  const double scale = s.max_abs();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(s(i, j) - s(j, i)) > 1e-12 * scale)
        throw InvalidInput("jacobi_symmetric_eig: matrix is not symmetric");

  DenseMatrix a = s;
  DenseMatrix q = DenseMatrix::identity(n);
  auto off_norm = [&] {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) sum += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(sum);
  };

  bool converged = scale == 0.0;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    if (off_norm() <= sweep_tol * scale) {
      converged = true;
      break;
    }
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apq = a(p, r);
        if (std::abs(apq) <= kMachineEps * std::sqrt(std::abs(a(p, p)) * std::abs(a(r, r))) ||
            apq == 0.0)
          continue;
        rotated = true;
        const double zeta = (a(r, r) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double sn = c * t;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akr = a(k, r);
          a(k, p) = c * akp - sn * akr;
          a(k, r) = sn * akp + c * akr;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double ark = a(r, k);
          a(p, k) = c * apk - sn * ark;
          a(r, k) = sn * apk + c * ark;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double qkp = q(k, p);
          const double qkr = q(k, r);
          q(k, p) = c * qkp - sn * qkr;
          q(k, r) = sn * qkp + c * qkr;
        }
      }
    }
    if (!rotated) converged = true;
  }
  if (!converged && off_norm() > sweep_tol * scale)
    throw ConvergenceError("jacobi_symmetric_eig: no convergence after 60 sweeps", off_norm());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  SymmetricEigen out;
  out.eigenvalues.resize(n);
  out.eigenvectors = DenseMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = q(i, order[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// One-sided Jacobi SVD
// ---------------------------------------------------------------------------

/// Thin SVD M = U diag(σ) Vᵀ with r = min(rows, cols) singular triplets.
struct SvdResult {
  DenseMatrix left_vectors;   // rows x r
  Vector singular_values;     // descending, >= 0
  DenseMatrix right_vectors;  // cols x r
  std::size_t numerical_rank = 0;
  double rank_tolerance = 0.0;

  double largest() const { return singular_values.empty() ? 0.0 : singular_values.front(); }
};

namespace detail {

// Column-major scratch matrix for column rotations.
struct ColumnStore {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vector data;

  std::span<double> col(std::size_t j) { return {data.data() + j * rows, rows}; }
  std::span<const double> col(std::size_t j) const { return {data.data() + j * rows, rows}; }
};

inline void rotate_columns(std::span<double> x, std::span<double> y, double c, double s) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

// Orthonormal completion: returns a unit vector orthogonal to `basis`,
// preferring the direction of `hint` when it has a usable component.
inline Vector orthogonal_completion(const std::vector<Vector>& basis, std::span<const double> hint,
                                    std::size_t& next_unit) {
  const std::size_t n = hint.size();
  auto orthogonalize = [&](Vector& v) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) axpy(-dot(b, v), b, v);
  };
  const double hint_norm = norm2(hint);
  if (hint_norm > 0.0) {
    Vector v(hint.begin(), hint.end());
    for (double& x : v) x /= hint_norm;
    orthogonalize(v);
    const double nv = norm2(v);
    if (nv > 0.5) {
      for (double& x : v) x /= nv;
      return v;
    }
  }
  while (next_unit < n) {
    Vector v(n, 0.0);
    v[next_unit++] = 1.0;
    orthogonalize(v);
    const double nv = norm2(v);
    if (nv > 0.5) {
      for (double& x : v) x /= nv;
      return v;
    }
  }
  throw ConvergenceError("svd: orthonormal completion exhausted the unit vectors");
}

// Hestenes SVD of a tall (rows >= cols) matrix.
inline SvdResult hestenes_tall(const DenseMatrix& m, double rank_tol_factor, std::size_t max_dim) {
  const std::size_t n = m.rows();
  const std::size_t r = m.cols();
  ColumnStore w{n, r, Vector(n * r)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < r; ++j) w.data[j * n + i] = m(i, j);
  ColumnStore v{r, r, Vector(r * r, 0.0)};
  for (std::size_t j = 0; j < r; ++j) v.data[j * r + j] = 1.0;

  const double threshold = std::sqrt(static_cast<double>(n)) * kMachineEps;
  bool converged = r < 2;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < r; ++p) {
      for (std::size_t q = p + 1; q < r; ++q) {
        auto cp = w.col(p);
        auto cq = w.col(q);
        const double alpha = dot(cp, cp);
        const double beta = dot(cq, cq);
        if (alpha == 0.0 || beta == 0.0) continue;
        const double gamma = dot(cp, cq);
        if (std::abs(gamma) <= threshold * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        rotate_columns(cp, cq, c, s);
        rotate_columns(v.col(p), v.col(q), c, s);
      }
    }
    if (!rotated) converged = true;
  }
  if (!converged) throw ConvergenceError("svd_one_sided_jacobi: no convergence after 60 sweeps");

  Vector sigma(r);
  for (std::size_t j = 0; j < r; ++j) sigma[j] = norm2(w.col(j));
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  SvdResult out;
  out.singular_values.resize(r);
  for (std::size_t k = 0; k < r; ++k) out.singular_values[k] = sigma[order[k]];
  const double s1 = r == 0 ? 0.0 : out.singular_values.front();
  out.rank_tolerance = rank_tol_factor * static_cast<double>(max_dim) * kMachineEps * s1;
  out.numerical_rank = static_cast<std::size_t>(
      std::count_if(out.singular_values.begin(), out.singular_values.end(),
                    [&](double s) { return s > out.rank_tolerance; }));

  std::vector<Vector> ucols;
  ucols.reserve(r);
  std::size_t next_unit = 0;
  for (std::size_t k = 0; k < r; ++k) {
    const auto col = w.col(order[k]);
    const double sk = out.singular_values[k];
    if (sk > out.rank_tolerance && sk > 0.0) {
      Vector u(col.begin(), col.end());
      for (double& x : u) x /= sk;
      ucols.push_back(std::move(u));
    } else {
      ucols.push_back(orthogonal_completion(ucols, col, next_unit));
    }
  }
  out.left_vectors = DenseMatrix(n, r);
  out.right_vectors = DenseMatrix(r, r);
  for (std::size_t k = 0; k < r; ++k) {
    out.left_vectors.set_column(k, ucols[k]);
    const auto vc = v.col(order[k]);
    out.right_vectors.set_column(k, vc);
  }
  return out;
}

}  // namespace detail

/// Thin SVD by one-sided Jacobi rotations applied to the columns of M
/// directly, so small singular values keep their accuracy (no Gram squaring).
/// rank_tolerance = rank_tol_factor * max(rows, cols) * eps * σ₁.
inline SvdResult svd_one_sided_jacobi(const DenseMatrix& m, double rank_tol_factor = 1.0) {
  if (m.empty()) throw InvalidInput("svd_one_sided_jacobi: empty matrix");
  if (!(rank_tol_factor > 0.0)) throw InvalidInput("svd_one_sided_jacobi: rank_tol_factor must be > 0");
  const std::size_t max_dim = std::max(m.rows(), m.cols());
  if (m.rows() >= m.cols()) return detail::hestenes_tall(m, rank_tol_factor, max_dim);
  SvdResult t = detail::hestenes_tall(m.transposed(), rank_tol_factor, max_dim);
  std::swap(t.left_vectors, t.right_vectors);
  return t;
}

/// U diag(σ) Vᵀ
inline DenseMatrix reconstruct(const SvdResult& svd) {
  DenseMatrix us = svd.left_vectors;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t k = 0; k < us.cols(); ++k) us(i, k) *= svd.singular_values[k];
  return us * svd.right_vectors.transposed();
}

// ---------------------------------------------------------------------------
// Spectral norm
// ---------------------------------------------------------------------------

namespace detail {

// Largest eigenvalue of the symmetric tridiagonal (diag, off) by Sturm bisection.
inline double tridiag_max_eigenvalue(std::span<const double> diag, std::span<const double> off) {
  const std::size_t k = diag.size();
  double lo = diag[0];
  double hi = diag[0];
  for (std::size_t i = 0; i < k; ++i) {
    const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < k ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  const double pivmin = std::max(std::numeric_limits<double>::min(),
                                 kMachineEps * std::max(std::abs(lo), std::abs(hi)) * 1e-3);
  // Number of eigenvalues strictly below x.
  auto count_below = [&](double x) {
    std::size_t count = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double b2 = i > 0 ? off[i - 1] * off[i - 1] : 0.0;
      d = diag[i] - x - (i > 0 ? b2 / d : 0.0);
      if (std::abs(d) < pivmin) d = -pivmin;
      if (d < 0.0) ++count;
    }
    return count;
  };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= 2.0 * kMachineEps * std::max(std::abs(lo), std::abs(hi))) break;
    if (count_below(mid) == k)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

// |last component| of the unit eigenvector of T for eigenvalue theta,
// by two steps of inverse iteration with a pivoted tridiagonal LU.
inline double tridiag_eigvec_last(std::span<const double> diag, std::span<const double> off,
                                  double theta) {
  const std::size_t k = diag.size();
  if (k == 1) return 1.0;
  const double tnorm = std::max(max_abs(diag), max_abs(off));
  const double shift = theta + 4.0 * kMachineEps * std::max(tnorm, std::abs(theta));
  Vector d(k), dl(off.begin(), off.end()), du(off.begin(), off.end()), du2(k, 0.0);
  std::vector<bool> swapped(k, false);
  for (std::size_t i = 0; i < k; ++i) d[i] = diag[i] - shift;
  const double tiny = kMachineEps * std::max(tnorm, std::numeric_limits<double>::min());
  for (std::size_t i = 0; i + 1 < k; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) d[i] = tiny;
      const double fact = dl[i] / d[i];
      dl[i] = fact;
      d[i + 1] -= fact * du[i];
    } else {
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      dl[i] = fact;
      const double temp = du[i];
      du[i] = d[i + 1];
      d[i + 1] = temp - fact * d[i + 1];
      if (i + 2 < k) {
        du2[i] = du[i + 1];
        du[i + 1] = -fact * du[i + 1];
      }
      swapped[i] = true;
    }
  }
  if (d[k - 1] == 0.0) d[k - 1] = tiny;
  Vector b(k, 1.0);
  for (int pass = 0; pass < 3; ++pass) {
    for (std::size_t i = 0; i + 1 < k; ++i) {
      if (swapped[i]) std::swap(b[i], b[i + 1]);
      b[i + 1] -= dl[i] * b[i];
    }
    b[k - 1] /= d[k - 1];
    b[k - 2] = (b[k - 2] - du[k - 2] * b[k - 1]) / d[k - 2];
    for (std::size_t ii = k - 2; ii-- > 0;)
      b[ii] = (b[ii] - du[ii] * b[ii + 1] - du2[ii] * b[ii + 2]) / d[ii];
    const double nb = norm2(b);
    if (!(nb > 0.0) || !std::isfinite(nb)) return 0.0;
    for (double& x : b) x /= nb;
  }
  return std::abs(b[k - 1]);
}

}  // namespace detail

inline constexpr int kMaxSpectralIterations = 10000;

/// σ₁(M) to relative tolerance `tol`. Lanczos iteration on MᵀM from a seeded
/// random start, fully reorthogonalized, stopped on the Ritz residual.
inline double spectral_norm(const DenseMatrix& m, double tol = 1e-12, std::uint64_t seed = 20140101,
                            int max_iterations = kMaxSpectralIterations) {
  if (m.empty()) throw InvalidInput("spectral_norm: empty matrix");
  if (!(tol > 0.0)) throw InvalidInput("spectral_norm: tol must be > 0");
  if (m.max_abs() == 0.0) return 0.0;
  const std::size_t n = m.cols();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector q(n);
  for (double& x : q) x = normal(rng);
  {
    const double nq = norm2(q);
    for (double& x : q) x /= nq;
  }

  std::vector<Vector> basis;
  Vector alpha, beta;
  double theta = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    basis.push_back(q);
    Vector w = multiply_transposed(m, multiply(m, q));
    const double a = dot(w, q);
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) axpy(-dot(b, w), b, w);
    const double bnext = norm2(w);

    theta = detail::tridiag_max_eigenvalue(alpha, beta);
    const bool exhausted = basis.size() == n || bnext <= 16.0 * kMachineEps * std::max(theta, a);
    const double residual = exhausted ? 0.0 : bnext * detail::tridiag_eigvec_last(alpha, beta, theta);
    // σ = sqrt(θ), so a relative residual of 2·tol in θ is tol in σ.
    if (exhausted || residual <= 2.0 * tol * theta) return std::sqrt(std::max(theta, 0.0));
    beta.push_back(bnext);
    for (std::size_t i = 0; i < n; ++i) q[i] = w[i] / bnext;
  }
  throw ConvergenceError("spectral_norm: iteration cap reached", std::sqrt(std::max(theta, 0.0)));
}

}  // namespace podrom
