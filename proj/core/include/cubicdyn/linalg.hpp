// Dense Gaussian elimination over any exact field.

#ifndef CUBICDYN_LINALG_HPP
#define CUBICDYN_LINALG_HPP

#include <optional>
#include <vector>

#include "cubicdyn/field.hpp"

namespace cubicdyn {

template <class F>
using Matrix = std::vector<std::vector<F>>;

template <class F>
struct Echelon {
  Matrix<F> m;              // reduced row echelon form
  std::vector<int> pivots;  // pivot column of each nonzero row
  std::vector<F> divisors;  // every element inverted along the way
};

template <class F>
Echelon<F> rref(Matrix<F> a) {
  Echelon<F> out;
  const int rows = static_cast<int>(a.size());
  const int cols = rows ? static_cast<int>(a[0].size()) : 0;
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int piv = -1;
    for (int i = r; i < rows; ++i)
      if (!is_zero(a[i][c])) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(a[piv], a[r]);
    const F inv = F(1) / a[r][c];
    out.divisors.push_back(a[r][c]);
    for (int k = c; k < cols; ++k) a[r][k] = a[r][k] * inv;
    for (int i = 0; i < rows; ++i) {
      if (i == r || is_zero(a[i][c])) continue;
      const F t = a[i][c];
      for (int k = c; k < cols; ++k) a[i][k] = a[i][k] - t * a[r][k];
    }
    out.pivots.push_back(c);
    ++r;
  }
  a.resize(r);
  out.m = std::move(a);
  return out;
}

template <class F>
int rank(const Matrix<F>& a) {
  return static_cast<int>(rref(a).pivots.size());
}

/// Basis of the right kernel, one vector per free column (in column order),
/// with a 1 in that column.
template <class F>
Matrix<F> kernel(const Matrix<F>& a, int cols) {
  const Echelon<F> e = rref(a);
  std::vector<bool> is_pivot(cols, false);
  for (int c : e.pivots) is_pivot[c] = true;
  Matrix<F> basis;
  for (int f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<F> v(cols, F(0));
    v[f] = F(1);
    for (std::size_t r = 0; r < e.pivots.size(); ++r) v[e.pivots[r]] = -e.m[r][f];
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Some solution of a x = b, or nullopt when inconsistent.
template <class F>
std::optional<std::vector<F>> solve(const Matrix<F>& a, const std::vector<F>& b) {
  const int cols = a.empty() ? 0 : static_cast<int>(a[0].size());
  Matrix<F> aug = a;
  for (std::size_t i = 0; i < aug.size(); ++i) aug[i].push_back(b[i]);
  const Echelon<F> e = rref(aug);
  std::vector<F> x(cols, F(0));
  for (std::size_t r = 0; r < e.pivots.size(); ++r) {
    if (e.pivots[r] == cols) return std::nullopt;
    x[e.pivots[r]] = e.m[r][cols];
  }
  return x;
}

template <class F>
std::optional<Matrix<F>> inverse(const Matrix<F>& a) {
  const int n = static_cast<int>(a.size());
  Matrix<F> aug = a;
  for (int i = 0; i < n; ++i) {
    aug[i].resize(2 * n, F(0));
    aug[i][n + i] = F(1);
  }
  const Echelon<F> e = rref(aug);
  if (static_cast<int>(e.pivots.size()) < n || e.pivots[n - 1] != n - 1) return std::nullopt;
  Matrix<F> inv(n, std::vector<F>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv[i][j] = e.m[i][n + j];
  return inv;
}

template <class F>
std::vector<F> mat_vec(const Matrix<F>& a, const std::vector<F>& v) {
  std::vector<F> r(a.size(), F(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) r[i] = r[i] + a[i][j] * v[j];
  return r;
}

template <class F>
Matrix<F> mat_mul(const Matrix<F>& a, const Matrix<F>& b) {
  const std::size_t n = a.size(), m = b[0].size(), k = b.size();
  Matrix<F> r(n, std::vector<F>(m, F(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      if (is_zero(a[i][l])) continue;
      for (std::size_t j = 0; j < m; ++j) r[i][j] = r[i][j] + a[i][l] * b[l][j];
    }
  return r;
}

}  // namespace cubicdyn

#endif  // CUBICDYN_LINALG_HPP
