#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "stokeslab/errors.hpp"
#include "stokeslab/spaces.hpp"

namespace stokeslab {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplets = std::vector<Eigen::Triplet<double>>;

struct SolveDiagnostics {
  double relative_residual = 0.0;
  int pivots = 0;                 // factorization dimension
  double min_pivot_ratio = 1.0;   // min |u_jj| / max |u_jj|
};

inline SparseMatrix from_triplets(int rows, int cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(0.0);
  m.makeCompressed();
  return m;
}

namespace detail {

// Exposes the supernodal L store to read the U diagonal (stored with L).
class PivotLU : public Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> {
 public:
  double pivot_ratio() const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (Eigen::Index j = 0; j < m_Lstore.cols(); ++j) {
      for (SCMatrix::InnerIterator it(m_Lstore, j); it; ++it) {
        if (it.index() == j) {
          lo = std::min(lo, std::abs(it.value()));
          hi = std::max(hi, std::abs(it.value()));
          break;
        }
      }
    }
    return hi > 0.0 ? lo / hi : 0.0;
  }
};

}  // namespace detail

/// Direct sparse LU solve (COLAMD ordering, partial pivoting) with
/// singularity and residual checks. Relative residual must reach 1e-10.
inline CoeffVec factor_solve(const SparseMatrix& a, const CoeffVec& b, SolveDiagnostics* diag = nullptr) {
  if (a.rows() != a.cols()) throw ConfigError("factor_solve: matrix is not square");
  if (a.rows() != b.size()) throw ConfigError("factor_solve: dimension mismatch");
  const Eigen::Index n = a.rows();
  if (n == 0) {  // every unknown fixed by constraints
    if (diag) *diag = {};
    return CoeffVec();
  }
  {
    std::vector<char> col_used(n, 0);
    for (Eigen::Index r = 0; r < n; ++r) {
      bool any = false;
      for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
        if (it.value() != 0.0) {
          any = true;
          col_used[it.col()] = 1;
        }
      }
      if (!any) throw NumericalError("singular matrix: row " + std::to_string(r) + " is zero");
    }
    for (Eigen::Index c = 0; c < n; ++c)
      if (!col_used[c]) throw NumericalError("singular matrix: column " + std::to_string(c) + " is zero");
  }

  Eigen::SparseMatrix<double> acol = a;
  acol.makeCompressed();
  detail::PivotLU lu;
  lu.analyzePattern(acol);
  lu.factorize(acol);
  if (lu.info() != Eigen::Success) throw NumericalError("singular matrix: " + lu.lastErrorMessage());
  const double ratio = lu.pivot_ratio();
  if (!(ratio > 1e3 * std::numeric_limits<double>::epsilon()))
    throw NumericalError("numerically singular matrix (pivot ratio " + std::to_string(ratio) + ")");

  CoeffVec x = lu.solve(b);
  const double bnorm = b.norm();
  auto residual = [&](const CoeffVec& y) {
    const double r = (a * y - b).norm();
    return bnorm > 0.0 ? r / bnorm : r;
  };
  double res = residual(x);
  for (int refine = 0; refine < 2 && res > 1e-12; ++refine) {
    CoeffVec dx = lu.solve(CoeffVec(b - a * x));
    x += dx;
    res = residual(x);
  }
  if (!x.allFinite() || !(res <= 1e-10))
    throw NumericalError("linear solve residual " + std::to_string(res) + " exceeds 1e-10");
  if (diag) *diag = {res, static_cast<int>(n), ratio};
  return x;
}

/// System restricted to unconstrained dofs, with known values moved to the
/// right-hand side.
struct ReducedSystem {
  SparseMatrix matrix;
  CoeffVec rhs;
  std::vector<int> free_dofs;
};

inline ReducedSystem reduce(const SparseMatrix& k, const CoeffVec& f, const std::vector<char>& fixed,
                            const CoeffVec& fixed_values) {
  const int n = static_cast<int>(k.rows());
  std::vector<int> map(n, -1);
  ReducedSystem rs;
  for (int i = 0; i < n; ++i) {
    if (!fixed[i]) {
      map[i] = static_cast<int>(rs.free_dofs.size());
      rs.free_dofs.push_back(i);
    }
  }
  const int nf = static_cast<int>(rs.free_dofs.size());
  rs.rhs.resize(nf);
  Triplets t;
  for (int r = 0; r < nf; ++r) {
    const int i = rs.free_dofs[r];
    double rhs = f[i];
    for (SparseMatrix::InnerIterator it(k, i); it; ++it) {
      const int j = static_cast<int>(it.col());
      if (map[j] >= 0)
        t.emplace_back(r, map[j], it.value());
      else
        rhs -= it.value() * fixed_values[j];
    }
    rs.rhs[r] = rhs;
  }
  rs.matrix = from_triplets(nf, nf, t);
  return rs;
}

inline CoeffVec expand(const ReducedSystem& rs, const CoeffVec& reduced, const CoeffVec& fixed_values) {
  CoeffVec x = fixed_values;
  for (size_t r = 0; r < rs.free_dofs.size(); ++r) x[rs.free_dofs[r]] = reduced[r];
  return x;
}

}  // namespace stokeslab
