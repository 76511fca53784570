#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "hdgsc/common.hpp"

namespace hdgsc {

// Row-major dense matrix. Entries must be finite.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(std::size_t(rows) * cols, 0.0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return a_[std::size_t(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[std::size_t(i) * cols_ + j]; }

  double inf_norm() const {
    double m = 0.0;
    for (int i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
      m = std::max(m, s);
    }
    return m;
  }

  DenseMatrix transpose() const {
    DenseMatrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  void check_finite() const {
    for (double v : a_)
      if (!std::isfinite(v)) throw Error("linalg", "non-finite dense matrix entry");
  }

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

// LU factorization with partial pivoting, kept so a factorization can be
// reused for several right-hand sides (element recovery solves).
class DenseLU {
public:
  explicit DenseLU(DenseMatrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
    const int n = lu_.rows();
    if (n != lu_.cols()) throw Error("linalg", "dense LU requires a square matrix");
    const double scale = std::max(lu_.inf_norm(), 1.0);
    for (int i = 0; i < n; ++i) perm_[i] = i;
    for (int col = 0; col < n; ++col) {
      int piv = col;
      double best = std::abs(lu_(col, col));
      for (int i = col + 1; i < n; ++i) {
        const double v = std::abs(lu_(i, col));
        if (v > best) {
          best = v;
          piv = i;
        }
      }
      if (best < 1e-14 * scale)
        throw Error("linalg", "singular dense matrix (pivot " + std::to_string(col) + ")");
      if (piv != col) {
        for (int j = 0; j < n; ++j) std::swap(lu_(col, j), lu_(piv, j));
        std::swap(perm_[col], perm_[piv]);
      }
      const double d = 1.0 / lu_(col, col);
      for (int i = col + 1; i < n; ++i) {
        const double m = lu_(i, col) * d;
        lu_(i, col) = m;
        for (int j = col + 1; j < n; ++j) lu_(i, j) -= m * lu_(col, j);
      }
    }
  }

  // Solves A x = b in place of the returned vector.
  std::vector<double> solve(const std::vector<double>& b) const {
    const int n = lu_.rows();
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (int i = 1; i < n; ++i) {
      double s = x[i];
      for (int j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
      x[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = x[i];
      for (int j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
      x[i] = s / lu_(i, i);
    }
    return x;
  }

private:
  DenseMatrix lu_;
  std::vector<int> perm_;
};

inline std::vector<double> dense_lu_solve(const DenseMatrix& a, const std::vector<double>& b) {
  return DenseLU(a).solve(b);
}

struct Triplet {
  int row;
  int col;
  long double value;  // condensed systems are accumulated in extended precision
};

// Compressed sparse row storage; column indices strictly increasing per row.
class SparseMatrix {
public:
  SparseMatrix() = default;

  static SparseMatrix from_triplets(int n, std::vector<Triplet> triplets) {
    // Index-ordered accumulation keeps assembly deterministic.
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m;
    m.n_ = n;
    m.row_ptr_.assign(n + 1, 0);
    for (std::size_t i = 0; i < triplets.size();) {
      std::size_t j = i;
      long double s = 0.0L;
      while (j < triplets.size() && triplets[j].row == triplets[i].row &&
             triplets[j].col == triplets[i].col) {
        s += triplets[j].value;
        ++j;
      }
      m.cols_.push_back(triplets[i].col);
      m.vals_.push_back(s);
      ++m.row_ptr_[triplets[i].row + 1];
      i = j;
    }
    for (int r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  int size() const { return n_; }
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_index() const { return cols_; }
  const std::vector<long double>& values() const { return vals_; }

  std::vector<double> multiply(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (int r = 0; r < n_; ++r) {
      long double s = 0.0L;
      for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += vals_[k] * x[cols_[k]];
      y[r] = double(s);
    }
    return y;
  }

  double inf_norm() const {
    long double m = 0.0L;
    for (int r = 0; r < n_; ++r) {
      long double s = 0.0L;
      for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += std::abs(vals_[k]);
      m = std::max(m, s);
    }
    return double(m);
  }

  // Largest |A - A^T| entry, for the symmetry diagnostics.
  double asymmetry() const {
    long double m = 0.0L;
    for (int r = 0; r < n_; ++r)
      for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        m = std::max(m, std::abs(vals_[k] - coeff_ld(cols_[k], r)));
    return double(m);
  }

  double coeff(int i, int j) const { return double(coeff_ld(i, j)); }

private:
  long double coeff_ld(int i, int j) const {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      if (cols_[k] == j) return vals_[k];
    return 0.0L;
  }

  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<long double> vals_;
};

// Sparse direct solve of the condensed trace system. The matrix is symmetric
// indefinite (sigma changes sign), so a pivoting LU is required. The
// factorization runs in extended precision: near-critical contrasts amplify
// elementwise matrix roundoff by several orders on fine meshes.
inline std::vector<double> sparse_lu_solve(const SparseMatrix& a, const std::vector<double>& b) {
  const int n = a.size();
  if (n == 0) return {};
  Eigen::SparseMatrix<long double> ea(n, n);
  {
    std::vector<Eigen::Triplet<long double>> trips;
    trips.reserve(a.values().size());
    for (int r = 0; r < n; ++r)
      for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k)
        trips.emplace_back(r, a.col_index()[k], a.values()[k]);
    ea.setFromTriplets(trips.begin(), trips.end());
  }
  Eigen::SparseLU<Eigen::SparseMatrix<long double>> lu;
  lu.compute(ea);
  if (lu.info() != Eigen::Success)
    throw Error("linalg", "singular sparse matrix: " + lu.lastErrorMessage());
  Eigen::Matrix<long double, Eigen::Dynamic, 1> eb(n);
  for (int i = 0; i < n; ++i) eb[i] = b[i];
  Eigen::Matrix<long double, Eigen::Dynamic, 1> ex = lu.solve(eb);

  // One sweep of iterative refinement mops up factorization roundoff.
  {
    Eigen::Matrix<long double, Eigen::Dynamic, 1> r(n);
    for (int i = 0; i < n; ++i) {
      long double acc = -eb[i];
      for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
        acc += a.values()[k] * ex[a.col_index()[k]];
      r[i] = acc;
    }
    ex -= lu.solve(r);
  }

  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = double(ex[i]);

  const std::vector<double> ax = a.multiply(x);
  double res = 0.0, xn = 0.0, bn = 0.0;
  for (int i = 0; i < n; ++i) {
    res = std::max(res, std::abs(ax[i] - b[i]));
    xn = std::max(xn, std::abs(x[i]));
    bn = std::max(bn, std::abs(b[i]));
  }
  if (res > 1e-9 * (a.inf_norm() * xn + bn))
    throw Error("linalg", "sparse solve residual too large; matrix may be near singular");
  return x;
}

}  // namespace hdgsc
