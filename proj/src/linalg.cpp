#include "shimura/linalg.hpp"

#include <algorithm>

namespace shimura {

namespace {

// floor division for cpp_int (operator/ truncates toward zero)
Int fdiv(const Int& a, const Int& b) {
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

void row_sub(ZMat& a, size_t dst, size_t src, const Int& q) {
  if (q == 0) return;
  auto& d = a[dst];
  const auto& s = a[src];
  for (size_t j = 0; j < d.size(); ++j) d[j] -= q * s[j];
}

void row_neg(ZMat& a, size_t r) {
  for (auto& x : a[r]) x = -x;
}

}  // namespace

ZMat zmat(size_t rows, size_t cols) { return ZMat(rows, ZVec(cols, Int(0))); }

ZMat identity(size_t n) {
  ZMat a = zmat(n, n);
  for (size_t i = 0; i < n; ++i) a[i][i] = 1;
  return a;
}

ZMat transpose(const ZMat& a) {
  if (a.empty()) return {};
  ZMat t = zmat(a[0].size(), a.size());
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
  return t;
}

ZMat mul(const ZMat& a, const ZMat& b) {
  size_t m = a.size(), k = b.size(), n = b.empty() ? 0 : b[0].size();
  ZMat c = zmat(m, n);
  for (size_t i = 0; i < m; ++i)
    for (size_t t = 0; t < k; ++t) {
      if (a[i][t] == 0) continue;
      for (size_t j = 0; j < n; ++j) c[i][j] += a[i][t] * b[t][j];
    }
  return c;
}

ZVec mul_vec(const ZVec& x, const ZMat& a) {
  size_t n = a.empty() ? 0 : a[0].size();
  ZVec r(n, Int(0));
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0) continue;
    for (size_t j = 0; j < n; ++j) r[j] += x[i] * a[i][j];
  }
  return r;
}

bool is_zero(const ZMat& a) {
  for (const auto& row : a)
    for (const auto& x : row)
      if (x != 0) return false;
  return true;
}

namespace {

// shared HNF core; u == nullptr skips transform tracking
size_t hnf_core(ZMat& a, ZMat* u) {
  size_t m = a.size();
  size_t n = m ? a[0].size() : 0;
  size_t r = 0;
  for (size_t c = 0; c < n && r < m; ++c) {
    // clear column c below row r by repeated euclidean steps
    while (true) {
      size_t best = m;
      for (size_t i = r; i < m; ++i) {
        if (a[i][c] == 0) continue;
        if (best == m || abs_int(a[i][c]) < abs_int(a[best][c])) best = i;
      }
      if (best == m) break;
      if (best != r) {
        std::swap(a[best], a[r]);
        if (u) std::swap((*u)[best], (*u)[r]);
      }
      bool clean = true;
      for (size_t i = r + 1; i < m; ++i) {
        if (a[i][c] == 0) continue;
        Int q = fdiv(a[i][c], a[r][c]);
        row_sub(a, i, r, q);
        if (u) row_sub(*u, i, r, q);
        if (a[i][c] != 0) clean = false;
      }
      if (clean) break;
    }
    if (a[r][c] == 0) continue;
    if (a[r][c] < 0) {
      row_neg(a, r);
      if (u) row_neg(*u, r);
    }
    for (size_t i = 0; i < r; ++i) {
      Int q = fdiv(a[i][c], a[r][c]);
      row_sub(a, i, r, q);
      if (u) row_sub(*u, i, r, q);
    }
    ++r;
  }
  return r;
}

}  // namespace

ZMat hnf(ZMat a) {
  size_t r = hnf_core(a, nullptr);
  a.resize(r);
  return a;
}

HnfResult hnf_with_transform(ZMat a) {
  ZMat u = identity(a.size());
  size_t r = hnf_core(a, &u);
  return HnfResult{std::move(a), std::move(u), r};
}

ZMat left_kernel(const ZMat& a) {
  HnfResult h = hnf_with_transform(a);
  ZMat k;
  for (size_t i = h.rank; i < h.u.size(); ++i) k.push_back(h.u[i]);
  return k;
}

SnfResult snf(ZMat a) {
  size_t m = a.size();
  size_t n = m ? a[0].size() : 0;
  ZMat u = identity(m);
  ZMat v = identity(n);

  auto col_sub = [&](ZMat& mat, size_t dst, size_t src, const Int& q) {
    if (q == 0) return;
    for (size_t i = 0; i < mat.size(); ++i) mat[i][dst] -= q * mat[i][src];
  };
  auto col_swap = [&](ZMat& mat, size_t x, size_t y) {
    for (size_t i = 0; i < mat.size(); ++i) std::swap(mat[i][x], mat[i][y]);
  };

  size_t t = 0;
  while (t < m && t < n) {
    // locate a nonzero entry of minimal absolute value in the trailing block
    size_t pi = m, pj = n;
    for (size_t i = t; i < m; ++i)
      for (size_t j = t; j < n; ++j) {
        if (a[i][j] == 0) continue;
        if (pi == m || abs_int(a[i][j]) < abs_int(a[pi][pj])) pi = i, pj = j;
      }
    if (pi == m) break;
    if (pi != t) {
      std::swap(a[pi], a[t]);
      std::swap(u[pi], u[t]);
    }
    if (pj != t) {
      col_swap(a, pj, t);
      col_swap(v, pj, t);
    }
    bool again = false;
    for (size_t i = t + 1; i < m; ++i) {
      if (a[i][t] == 0) continue;
      Int q = fdiv(a[i][t], a[t][t]);
      row_sub(a, i, t, q);
      row_sub(u, i, t, q);
      if (a[i][t] != 0) again = true;
    }
    for (size_t j = t + 1; j < n; ++j) {
      if (a[t][j] == 0) continue;
      Int q = fdiv(a[t][j], a[t][t]);
      col_sub(a, j, t, q);
      col_sub(v, j, t, q);
      if (a[t][j] != 0) again = true;
    }
    if (again) continue;
    // enforce divisibility of the remaining block by the pivot
    bool fixed = true;
    for (size_t i = t + 1; i < m && fixed; ++i)
      for (size_t j = t + 1; j < n && fixed; ++j)
        if (a[i][j] % a[t][t] != 0) {
          row_sub(a, t, i, Int(-1));
          row_sub(u, t, i, Int(-1));
          fixed = false;
        }
    if (!fixed) continue;
    if (a[t][t] < 0) {
      row_neg(a, t);
      row_neg(u, t);
    }
    ++t;
  }

  SnfResult r;
  r.rank = t;
  r.invariants.clear();
  for (size_t i = 0; i < t; ++i) r.invariants.push_back(a[i][i]);
  r.d = std::move(a);
  r.u = std::move(u);
  r.v = std::move(v);
  return r;
}

Int det(ZMat a) {
  size_t n = a.size();
  if (n == 0) return 1;
  if (a[0].size() != n) throw std::invalid_argument("det: not square");
  int sign = 1;
  Int prev = 1;
  for (size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      size_t s = k + 1;
      while (s < n && a[s][k] == 0) ++s;
      if (s == n) return 0;
      std::swap(a[k], a[s]);
      sign = -sign;
    }
    for (size_t i = k + 1; i < n; ++i) {
      for (size_t j = k + 1; j < n; ++j) {
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
      }
      a[i][k] = 0;
    }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

std::optional<std::vector<Rat>> solve_in_span(const ZMat& basis, const ZVec& v) {
  ZMat h = hnf(basis);
  size_t n = v.size();
  std::vector<Rat> coords(h.size(), Rat(0));
  std::vector<Rat> rem(n);
  for (size_t j = 0; j < n; ++j) rem[j] = Rat(v[j]);
  for (size_t i = 0; i < h.size(); ++i) {
    size_t c = 0;
    while (c < n && h[i][c] == 0) ++c;
    if (c == n) continue;
    Rat x = rem[c] / Rat(h[i][c]);
    coords[i] = x;
    if (x != 0)
      for (size_t j = c; j < n; ++j) rem[j] -= x * Rat(h[i][j]);
  }
  for (size_t j = 0; j < n; ++j)
    if (rem[j] != 0) return std::nullopt;
  return coords;
}

bool in_lattice(const ZMat& hnf_basis, const ZVec& v) {
  size_t n = v.size();
  ZVec rem = v;
  for (size_t i = 0; i < hnf_basis.size(); ++i) {
    size_t c = 0;
    while (c < n && hnf_basis[i][c] == 0) ++c;
    if (c == n) continue;
    if (rem[c] % hnf_basis[i][c] != 0) return false;
    Int q = rem[c] / hnf_basis[i][c];
    if (q != 0)
      for (size_t j = c; j < n; ++j) rem[j] -= q * hnf_basis[i][j];
  }
  for (size_t j = 0; j < n; ++j)
    if (rem[j] != 0) return false;
  return true;
}

}  // namespace shimura
