#include "shimura/quaternion.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "shimura/enumeration.hpp"

namespace shimura {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

u64 mod_reduce(const Int& v, u64 p) {
  Int r = v % Int(p);
  if (r < 0) r += Int(p);
  return r.convert_to<u64>();
}

using ModMat = std::vector<std::vector<u64>>;

// Row echelon form mod p in place; returns pivot columns.
std::vector<size_t> rref_mod(ModMat& m, u64 p) {
  std::vector<size_t> pivots;
  size_t rows = m.size();
  size_t cols = rows ? m[0].size() : 0;
  size_t r = 0;
  for (size_t c = 0; c < cols && r < rows; ++c) {
    size_t sel = rows;
    for (size_t i = r; i < rows; ++i)
      if (m[i][c] % p != 0) {
        sel = i;
        break;
      }
    if (sel == rows) continue;
    std::swap(m[r], m[sel]);
    u64 inv = invmod(m[r][c] % p, p);
    for (size_t j = 0; j < cols; ++j) m[r][j] = mulmod(m[r][j] % p, inv, p);
    for (size_t i = 0; i < rows; ++i) {
      if (i == r) continue;
      u64 f = m[i][c] % p;
      if (!f) continue;
      for (size_t j = 0; j < cols; ++j) {
        u64 sub = mulmod(f, m[r][j], p);
        m[i][j] = (m[i][j] % p + p - sub) % p;
      }
    }
    pivots.push_back(c);
    ++r;
  }
  m.resize(r);
  for (auto& row : m)
    for (auto& x : row) x %= p;
  return pivots;
}

// Basis of {x : M x = 0 mod p} (right kernel).
std::vector<std::vector<u64>> kernel_mod(ModMat m, u64 p) {
  size_t cols = m.empty() ? 0 : m[0].size();
  auto pivots = rref_mod(m, p);
  std::vector<bool> is_pivot(cols, false);
  for (size_t c : pivots) is_pivot[c] = true;
  std::vector<std::vector<u64>> basis;
  for (size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<u64> v(cols, 0);
    v[f] = 1;
    for (size_t r = 0; r < pivots.size(); ++r) {
      u64 val = m[r][f] % p;
      v[pivots[r]] = val ? p - val : 0;
    }
    basis.push_back(v);
  }
  return basis;
}

std::vector<u64> mat2_apply(const Mat2& m, u64 v0, u64 v1, u64 p) {
  return {(mulmod(m[0][0], v0, p) + mulmod(m[0][1], v1, p)) % p,
          (mulmod(m[1][0], v0, p) + mulmod(m[1][1], v1, p)) % p};
}

Mat2 mat2_mul(const Mat2& a, const Mat2& b, u64 p) {
  Mat2 c{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      c[i][j] = (mulmod(a[i][0], b[0][j], p) + mulmod(a[i][1], b[1][j], p)) % p;
  return c;
}

ZVec quat_vec(const Quat& u) { return {u.w, u.x, u.y, u.z}; }

Quat vec_quat(const ZVec& v) { return Quat{v[0], v[1], v[2], v[3]}; }

Int vec_gcd(const Int& a, const Int& b) { return boost::multiprecision::gcd(a, b); }

}  // namespace

Algebra build_algebra(const Int& q) {
  require(q > 2 && is_prime(q.convert_to<u64>()), "algebra discriminant must be an odd prime");
  require(q % 4 == 3, "algebra (-1,-q) requires q = 3 mod 4");
  // Ramification can only occur at 2, q and the real place; pin it to {q, oo}.
  require(hilbert_symbol(-1, -q, q) == -1, "algebra not ramified at q");
  require(hilbert_symbol(-1, -q, 0) == -1, "algebra not ramified at the real place");
  require(hilbert_symbol(-1, -q, 2) == 1, "algebra unexpectedly ramified at 2");
  return Algebra{q};
}

Quat qmul(const Algebra& A, const Quat& u, const Quat& v) {
  const Int& q = A.q;
  return Quat{
      u.w * v.w - u.x * v.x - q * (u.y * v.y + u.z * v.z),
      u.w * v.x + u.x * v.w + q * (u.y * v.z - u.z * v.y),
      u.w * v.y + u.y * v.w - u.x * v.z + u.z * v.x,
      u.w * v.z + u.z * v.w + u.x * v.y - u.y * v.x,
  };
}

Quat qconj(const Quat& u) { return Quat{u.w, -u.x, -u.y, -u.z}; }

Quat qadd(const Quat& u, const Quat& v) {
  return Quat{u.w + v.w, u.x + v.x, u.y + v.y, u.z + v.z};
}

Quat qneg(const Quat& u) { return Quat{-u.w, -u.x, -u.y, -u.z}; }

Int qnrd(const Algebra& A, const Quat& u) {
  return u.w * u.w + u.x * u.x + A.q * (u.y * u.y + u.z * u.z);
}

Int qtrd(const Quat& u) { return 2 * u.w; }

Lat lat_make(ZMat rows, const Int& den) {
  require(den != 0, "lattice denominator must be nonzero");
  ZMat h = hnf(std::move(rows));
  require(h.size() == 4, "lattice must have full rank 4");
  Int d = den < 0 ? Int(-den) : den;
  Int g = d;
  for (const auto& r : h)
    for (const auto& x : r) g = vec_gcd(g, x);
  if (g > 1) {
    d /= g;
    for (auto& r : h)
      for (auto& x : r) x /= g;
  }
  return Lat{std::move(h), d};
}

Quat lat_row(const Lat& l, size_t i) { return vec_quat(l.b[i]); }

Lat lat_mul(const Algebra& A, const Lat& l, const Lat& m) {
  ZMat rows;
  rows.reserve(16);
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j)
      rows.push_back(quat_vec(qmul(A, lat_row(l, i), lat_row(m, j))));
  return lat_make(std::move(rows), l.den * m.den);
}

Lat lat_add(const Lat& l, const Lat& m) {
  Int g = vec_gcd(l.den, m.den);
  Int lc = l.den / g * m.den;
  Int sl = lc / l.den, sm = lc / m.den;
  ZMat rows;
  for (const auto& r : l.b) {
    ZVec v;
    for (const auto& x : r) v.push_back(x * sl);
    rows.push_back(v);
  }
  for (const auto& r : m.b) {
    ZVec v;
    for (const auto& x : r) v.push_back(x * sm);
    rows.push_back(v);
  }
  return lat_make(std::move(rows), lc);
}

Lat lat_intersect(const Lat& l, const Lat& m) {
  Int g = vec_gcd(l.den, m.den);
  Int lc = l.den / g * m.den;
  Int sl = lc / l.den, sm = lc / m.den;
  // Rows (u, v) of the left kernel of [A; -B] give intersection vectors uA.
  ZMat stacked;
  for (const auto& r : l.b) {
    ZVec v;
    for (const auto& x : r) v.push_back(x * sl);
    stacked.push_back(v);
  }
  for (const auto& r : m.b) {
    ZVec v;
    for (const auto& x : r) v.push_back(-x * sm);
    stacked.push_back(v);
  }
  ZMat ker = left_kernel(stacked);
  ZMat rows;
  for (const auto& k : ker) {
    ZVec v(4, Int(0));
    for (size_t i = 0; i < 4; ++i)
      for (size_t c = 0; c < 4; ++c) v[c] += k[i] * l.b[i][c] * sl;
    rows.push_back(v);
  }
  return lat_make(std::move(rows), lc);
}

Lat lat_conj(const Lat& l) {
  ZMat rows;
  for (size_t i = 0; i < 4; ++i) rows.push_back(quat_vec(qconj(lat_row(l, i))));
  return lat_make(std::move(rows), l.den);
}

Lat lat_scale(const Lat& l, const Rat& s) {
  require(s != 0, "scaling a lattice by zero");
  Int sn = boost::multiprecision::numerator(s);
  Int sd = boost::multiprecision::denominator(s);
  ZMat rows;
  for (const auto& r : l.b) {
    ZVec v;
    for (const auto& x : r) v.push_back(x * sn);
    rows.push_back(v);
  }
  return lat_make(std::move(rows), l.den * sd);
}

Lat lat_conjugate_by(const Algebra& A, const Lat& l, const Quat& bnum, const Int& bden) {
  require(bden != 0, "conjugating quaternion must be nonzero");
  Int n = qnrd(A, bnum);
  require(n != 0, "conjugating quaternion must be invertible");
  Quat bc = qconj(bnum);
  ZMat rows;
  for (size_t i = 0; i < 4; ++i)
    rows.push_back(quat_vec(qmul(A, qmul(A, bnum, lat_row(l, i)), bc)));
  return lat_make(std::move(rows), l.den * n);
}

bool lat_contains(const Lat& l, const Quat& v, const Int& vden) {
  require(vden > 0, "element denominator must be positive");
  ZMat scaled = l.b;
  for (auto& r : scaled)
    for (auto& x : r) x *= vden;
  ZVec target;
  for (const auto& x : quat_vec(v)) target.push_back(x * l.den);
  return in_lattice(scaled, target);
}

bool lat_subset(const Lat& inner, const Lat& outer) {
  for (size_t i = 0; i < 4; ++i)
    if (!lat_contains(outer, lat_row(inner, i), inner.den)) return false;
  return true;
}

ZMat lat_gram(const Algebra& A, const Lat& l) {
  ZMat g = zmat(4, 4);
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) {
      Quat prod = qmul(A, lat_row(l, i), qconj(lat_row(l, j)));
      g[i][j] = qtrd(prod);
    }
  return g;
}

Rat lat_nrd(const Algebra& A, const Lat& l) {
  // The norm form's values generate the ideal spanned by its diagonal
  // coefficients nrd(r_i) and cross coefficients trd(r_i conj(r_j)).
  ZMat g = lat_gram(A, l);
  Int acc = 0;
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) acc = vec_gcd(acc, i == j ? Int(g[i][i] / 2) : g[i][j]);
  require(acc > 0, "degenerate lattice norm");
  return Rat(acc, l.den * l.den);
}

std::vector<Rat> lat_coords(const Lat& l, const Quat& v, const Int& vden) {
  require(vden > 0, "element denominator must be positive");
  ZMat scaled = l.b;
  for (auto& r : scaled)
    for (auto& x : r) x *= vden;
  ZVec target;
  for (const auto& x : quat_vec(v)) target.push_back(x * l.den);
  auto sol = solve_in_span(scaled, target);
  require(sol.has_value(), "element outside the rational span");
  return *sol;
}

namespace {

// Integer coordinates of v/vden over the true basis of l; throws if not in l.
ZVec int_coords(const Lat& l, const Quat& v, const Int& vden) {
  auto c = lat_coords(l, v, vden);
  ZVec out;
  for (const auto& r : c) {
    require(boost::multiprecision::denominator(r) == 1, "element not in lattice");
    out.push_back(boost::multiprecision::numerator(r));
  }
  return out;
}

// Structure tensor: S[a][b] = integer coordinates of (r_a/den)(r_b/den)
// over the basis of an order's lattice.
using StructTensor = std::array<std::array<ZVec, 4>, 4>;

StructTensor structure_tensor(const Algebra& A, const Lat& l) {
  StructTensor s;
  for (size_t a = 0; a < 4; ++a)
    for (size_t b = 0; b < 4; ++b) {
      Quat prod = qmul(A, lat_row(l, a), lat_row(l, b));
      s[a][b] = int_coords(l, prod, l.den * l.den);
    }
  return s;
}

std::vector<u64> coord_mul_mod(const StructTensor& s, const std::vector<u64>& c,
                               const std::vector<u64>& d, u64 p) {
  std::vector<u64> out(4, 0);
  for (size_t a = 0; a < 4; ++a) {
    if (!c[a]) continue;
    for (size_t b = 0; b < 4; ++b) {
      if (!d[b]) continue;
      u64 f = mulmod(c[a], d[b], p);
      for (size_t t = 0; t < 4; ++t)
        out[t] = (out[t] + mulmod(f, mod_reduce(s[a][b][t], p), p)) % p;
    }
  }
  return out;
}

std::vector<u64> one_coords_mod(const Lat& l, u64 p) {
  ZVec one = int_coords(l, Quat{1, 0, 0, 0}, 1);
  std::vector<u64> out;
  for (const auto& x : one) out.push_back(mod_reduce(x, p));
  return out;
}

Int trd_of_coords(const Lat& l, const ZVec& c) {
  Int t = 0;
  for (size_t a = 0; a < 4; ++a) t += c[a] * 2 * l.b[a][0];
  require(t % l.den == 0, "non-integral trace in order");
  return t / l.den;
}

Int nrd_of_coords(const Algebra& A, const Lat& l, const ZVec& c) {
  ZMat g = lat_gram(A, l);
  Int v = 0;
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) v += c[i] * c[j] * g[i][j];
  Int scale = 2 * l.den * l.den;
  require(v % scale == 0, "non-integral norm in order");
  return v / scale;
}

}  // namespace

Order make_order(const Algebra& A, const Lat& l) {
  require(lat_contains(l, Quat{1, 0, 0, 0}, 1), "order must contain 1");
  ZMat g = lat_gram(A, l);
  Int den2 = l.den * l.den;
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) {
      require(g[i][j] % den2 == 0, "order pairing not integral");
      if (i == j) require(g[i][i] % (2 * den2) == 0, "order norms not integral");
    }
  require(lat_mul(A, l, l) == l, "order not closed under multiplication");
  Int d2 = det(g);
  Int root;
  require(perfect_square(d2, &root), "order Gram determinant is not a square");
  Int den4 = den2 * den2;
  require(root % den4 == 0, "order discriminant is not integral");
  return Order{l, root / den4};
}

Order maximal_order(const Algebra& A) {
  ZMat rows = {{2, 0, 0, 0}, {0, 2, 0, 0}, {0, 1, 1, 0}, {1, 0, 0, 1}};
  Order o = make_order(A, lat_make(std::move(rows), 2));
  require(o.disc == A.q, "standard order is not maximal");
  return o;
}

SplitMap split_order_mod_p(const Algebra& A, const Order& o, u64 p, u64 seed) {
  require(is_prime(p), "splitting prime must be prime");
  require(o.disc % Int(p) != 0, "order is not split at this prime");
  const Lat& l = o.lat;
  StructTensor s = structure_tensor(A, l);
  std::vector<u64> one = one_coords_mod(l, p);

  // Find a nonscalar idempotent in O/pO (rank 1 automatically).
  std::vector<u64> idem;
  if (p == 2) {
    for (u64 mask = 1; mask < 16 && idem.empty(); ++mask) {
      std::vector<u64> c = {mask & 1, (mask >> 1) & 1, (mask >> 2) & 1, (mask >> 3) & 1};
      if (c == one) continue;
      if (coord_mul_mod(s, c, c, p) == c) idem = c;
    }
  } else {
    std::mt19937_64 rng(seed ^ (0x51a7a9d5u + 2654435769u * p));
    std::uniform_int_distribution<u64> dist(0, p - 1);
    for (int tries = 0; tries < 4096 && idem.empty(); ++tries) {
      ZVec c = {Int(dist(rng)), Int(dist(rng)), Int(dist(rng)), Int(dist(rng))};
      Int t = trd_of_coords(l, c), n = nrd_of_coords(A, l, c);
      u64 tm = mod_reduce(t, p), nm = mod_reduce(n, p);
      u64 disc = (mulmod(tm, tm, p) + p - mulmod(4 % p, nm, p) % p) % p;
      if (disc == 0 || kronecker(Int(disc), Int(p)) != 1) continue;
      u64 sq = sqrt_mod(disc, p);
      u64 inv2 = invmod(2 % p, p);
      u64 l1 = mulmod((tm + sq) % p, inv2, p);
      u64 l2 = mulmod((tm + p - sq) % p, inv2, p);
      u64 fi = invmod((l1 + p - l2) % p, p);
      std::vector<u64> e(4);
      for (size_t a = 0; a < 4; ++a) {
        u64 ca = mod_reduce(c[a], p);
        u64 shift = mulmod(l2, one[a], p);
        e[a] = mulmod((ca + p - shift) % p, fi, p);
      }
      require(coord_mul_mod(s, e, e, p) == e, "idempotent construction failed");
      idem = e;
    }
  }
  require(!idem.empty(), "no splitting idempotent found");

  // W = (O/p) e is 2-dimensional; O acts on it by left multiplication.
  ModMat w_rows;
  for (size_t a = 0; a < 4; ++a) {
    std::vector<u64> delta(4, 0);
    delta[a] = 1;
    w_rows.push_back(coord_mul_mod(s, delta, idem, p));
  }
  ModMat w_ech = w_rows;
  auto pivots = rref_mod(w_ech, p);
  require(w_ech.size() == 2, "idempotent does not have rank 1");

  auto express = [&](const std::vector<u64>& v) -> std::array<u64, 2> {
    // v must be alpha * w_ech[0] + beta * w_ech[1]; read off pivot columns.
    u64 alpha = v[pivots[0]] % p;
    u64 beta = v[pivots[1]] % p;
    for (size_t j = 0; j < 4; ++j) {
      u64 expect = (mulmod(alpha, w_ech[0][j], p) + mulmod(beta, w_ech[1][j], p)) % p;
      require(v[j] % p == expect, "vector outside the splitting module");
    }
    return {alpha, beta};
  };

  SplitMap out;
  out.p = p;
  for (size_t a = 0; a < 4; ++a) {
    std::vector<u64> delta(4, 0);
    delta[a] = 1;
    for (int k = 0; k < 2; ++k) {
      auto img = express(coord_mul_mod(s, delta, w_ech[k], p));
      out.basis_image[a][0][k] = img[0];
      out.basis_image[a][1][k] = img[1];
    }
  }

  // Homomorphism checks: phi(1) = 1 and phi respects the structure tensor.
  {
    ZVec onez = int_coords(l, Quat{1, 0, 0, 0}, 1);
    Mat2 iphi = split_apply(out, onez);
    require(iphi[0][0] == 1 && iphi[1][1] == 1 && iphi[0][1] == 0 && iphi[1][0] == 0,
            "splitting does not send 1 to the identity");
    for (size_t a = 0; a < 4; ++a)
      for (size_t b = 0; b < 4; ++b) {
        Mat2 lhs = mat2_mul(out.basis_image[a], out.basis_image[b], p);
        Mat2 rhs = split_apply(out, s[a][b]);
        require(lhs == rhs, "splitting is not multiplicative");
      }
  }
  return out;
}

Mat2 split_apply(const SplitMap& s, const ZVec& coords) {
  Mat2 m{};
  for (size_t a = 0; a < 4; ++a) {
    u64 c = mod_reduce(coords[a], s.p);
    if (!c) continue;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        m[i][j] = (m[i][j] + mulmod(c, s.basis_image[a][i][j], s.p)) % s.p;
  }
  return m;
}

Order eichler_order(const Algebra& A, const Order& maximal, const Int& p, u64 seed) {
  require(maximal.disc == A.q, "level structure requires a maximal order");
  require(p != A.q, "level prime must differ from the discriminant");
  require(p % 2 == 1 && is_prime(p.convert_to<u64>()), "level must be an odd prime");
  SplitMap s = split_order_mod_p(A, maximal, p.convert_to<u64>(), seed);
  // Preimage of upper triangular matrices mod p.
  ModMat cond(1, std::vector<u64>(4, 0));
  for (size_t a = 0; a < 4; ++a) cond[0][a] = s.basis_image[a][1][0];
  auto ker = kernel_mod(cond, s.p);
  require(ker.size() == 3, "unexpected kernel dimension for level condition");
  ZMat rows;
  for (const auto& k : ker) {
    ZVec v(4, Int(0));
    for (size_t a = 0; a < 4; ++a)
      for (size_t c = 0; c < 4; ++c) v[c] += Int(k[a]) * maximal.lat.b[a][c];
    rows.push_back(v);
  }
  for (size_t a = 0; a < 4; ++a) {
    ZVec v;
    for (const auto& x : maximal.lat.b[a]) v.push_back(x * p);
    rows.push_back(v);
  }
  Order e = make_order(A, lat_make(std::move(rows), maximal.lat.den));
  require(e.disc == p * A.q, "level structure has wrong discriminant");
  return e;
}

Ideal make_ideal(const Algebra& A, const Lat& l) {
  Rat n = lat_nrd(A, l);
  require(boost::multiprecision::denominator(n) == 1, "ideal norm must be integral");
  return Ideal{l, boost::multiprecision::numerator(n)};
}

Ideal ideal_mul(const Algebra& A, const Ideal& a, const Ideal& b) {
  Lat prod = lat_mul(A, a.lat, b.lat);
  Ideal out = make_ideal(A, prod);
  require(out.nrd == a.nrd * b.nrd, "ideal product norms are not multiplicative");
  return out;
}

Ideal ideal_conj(const Ideal& a) { return Ideal{lat_conj(a.lat), a.nrd}; }

Order right_order(const Algebra& A, const Ideal& a) {
  Lat prod = lat_mul(A, lat_conj(a.lat), a.lat);
  return make_order(A, lat_scale(prod, Rat(1, a.nrd)));
}

Order left_order(const Algebra& A, const Ideal& a) {
  Lat prod = lat_mul(A, a.lat, lat_conj(a.lat));
  return make_order(A, lat_scale(prod, Rat(1, a.nrd)));
}

Ideal kernel_ideal(const Algebra& A, const Order& r, const SplitMap& s, u64 v0, u64 v1) {
  u64 p = s.p;
  require(v0 % p != 0 || v1 % p != 0, "kernel line must be nonzero");
  ModMat cond(2, std::vector<u64>(4, 0));
  for (size_t a = 0; a < 4; ++a) {
    auto img = mat2_apply(s.basis_image[a], v0 % p, v1 % p, p);
    cond[0][a] = img[0];
    cond[1][a] = img[1];
  }
  auto ker = kernel_mod(cond, p);
  require(ker.size() == 2, "kernel ideal has unexpected dimension");
  ZMat rows;
  for (const auto& k : ker) {
    ZVec v(4, Int(0));
    for (size_t a = 0; a < 4; ++a)
      for (size_t c = 0; c < 4; ++c) v[c] += Int(k[a]) * r.lat.b[a][c];
    rows.push_back(v);
  }
  for (size_t a = 0; a < 4; ++a) {
    ZVec v;
    for (const auto& x : r.lat.b[a]) v.push_back(x * Int(p));
    rows.push_back(v);
  }
  Ideal out = make_ideal(A, lat_make(std::move(rows), r.lat.den));
  require(out.nrd == Int(p), "kernel ideal has wrong norm");
  return out;
}

std::pair<u64, u64> kernel_line(const Algebra& A, const Order& r, const SplitMap& s,
                                const Ideal& p_ideal) {
  (void)A;
  u64 p = s.p;
  ModMat cond;
  for (size_t i = 0; i < 4; ++i) {
    ZVec c = int_coords(r.lat, lat_row(p_ideal.lat, i), p_ideal.lat.den);
    Mat2 m = split_apply(s, c);
    cond.push_back({m[0][0], m[0][1]});
    cond.push_back({m[1][0], m[1][1]});
  }
  auto ker = kernel_mod(cond, p);
  require(ker.size() == 1, "ideal does not cut a unique line");
  u64 v0 = ker[0][0] % p, v1 = ker[0][1] % p;
  if (v0 != 0) {
    u64 inv = invmod(v0, p);
    return {1, mulmod(v1, inv, p)};
  }
  return {0, 1};
}

Ideal atkin_lehner_ideal(const Algebra& A, const Order& o, const Int& ell) {
  require(ell > 1 && is_prime(ell.convert_to<u64>()), "ideal prime must be prime");
  require(o.disc % ell == 0, "prime does not divide the discriminant");
  u64 p = ell.convert_to<u64>();
  require(o.lat.den % ell != 0, "order denominator collides with the prime");
  // Radical of the trace pairing mod ell, plus ell * O.
  ZMat g = lat_gram(A, o.lat);
  Int den2 = o.lat.den * o.lat.den;
  ModMat cond(4, std::vector<u64>(4, 0));
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) cond[i][j] = mod_reduce(g[i][j] / den2, p);
  auto ker = kernel_mod(cond, p);
  ZMat rows;
  for (const auto& k : ker) {
    ZVec v(4, Int(0));
    for (size_t a = 0; a < 4; ++a)
      for (size_t c = 0; c < 4; ++c) v[c] += Int(k[a]) * o.lat.b[a][c];
    rows.push_back(v);
  }
  for (size_t a = 0; a < 4; ++a) {
    ZVec v;
    for (const auto& x : o.lat.b[a]) v.push_back(x * ell);
    rows.push_back(v);
  }
  Ideal j = make_ideal(A, lat_make(std::move(rows), o.lat.den));
  require(j.nrd == ell, "two-sided ideal has wrong norm");
  require(lat_mul(A, o.lat, j.lat) == j.lat && lat_mul(A, j.lat, o.lat) == j.lat,
          "ideal is not two-sided");
  require(lat_mul(A, j.lat, j.lat) == lat_scale(o.lat, Rat(ell)),
          "two-sided ideal square is not ell * O");
  return j;
}

std::vector<ZVec> unit_group(const Algebra& A, const Order& o) {
  ZMat g = lat_gram(A, o.lat);
  Int target = 2 * o.lat.den * o.lat.den;
  std::vector<ZVec> units = norm_vectors(g, target);
  require(units.size() % 2 == 0, "unit group must be symmetric");
  require(units.size() == 2 || units.size() == 4 || units.size() == 6,
          "unit group order outside the supported range");
  return units;
}

std::optional<Transporter> ideal_isomorphism(const Algebra& A, const Ideal& i, const Ideal& j) {
  Lat m = lat_mul(A, lat_conj(i.lat), j.lat);
  ZMat g = lat_gram(A, m);
  Int target = 2 * i.nrd * j.nrd * m.den * m.den;
  auto x = find_norm_vector(g, target);
  if (!x) return std::nullopt;
  ZVec v(4, Int(0));
  for (size_t s = 0; s < 4; ++s)
    for (size_t c = 0; c < 4; ++c) v[c] += (*x)[s] * m.b[s][c];
  Transporter t{vec_quat(v), m.den * i.nrd};
  // Verify J = I * b exactly.
  ZMat rows;
  for (size_t s = 0; s < 4; ++s) rows.push_back(quat_vec(qmul(A, lat_row(i.lat, s), t.num)));
  Lat check = lat_make(std::move(rows), i.lat.den * t.den);
  require(check == j.lat, "transporter verification failed");
  return t;
}

size_t identify_class(const Algebra& A, const ClassSet& cs, const Ideal& j, Transporter* t) {
  for (size_t idx = 0; idx < cs.cls.size(); ++idx) {
    auto iso = ideal_isomorphism(A, cs.cls[idx].ideal, j);
    if (iso) {
      if (t) *t = *iso;
      return idx;
    }
  }
  fail("ideal does not belong to any class");
}

size_t identify_class(const Algebra& A, const ClassSet& cs, const Ideal& j) {
  return identify_class(A, cs, j, nullptr);
}

namespace {

IdealClass finish_class(const Algebra& A, Ideal rep) {
  Order r = right_order(A, rep);
  std::vector<ZVec> units = unit_group(A, r);
  IdealClass c{std::move(rep), std::move(r), std::move(units), 0};
  c.w = static_cast<int>(c.units.size() / 2);
  return c;
}

// All dimension-2 left submodules of I/ell I, as lifted sub-ideals.
std::vector<Ideal> neighbor_ideals(const Algebra& A, const Order& base, const Ideal& i, u64 ell) {
  const Lat& il = i.lat;
  // Action matrices of the base order's basis on I-coordinates mod ell.
  std::array<ModMat, 4> act;
  for (size_t a = 0; a < 4; ++a) {
    act[a] = ModMat(4, std::vector<u64>(4, 0));
    for (size_t sidx = 0; sidx < 4; ++sidx) {
      Quat prod = qmul(A, lat_row(base.lat, a), lat_row(il, sidx));
      ZVec c = int_coords(il, prod, base.lat.den * il.den);
      for (size_t t = 0; t < 4; ++t) act[a][t][sidx] = mod_reduce(c[t], ell);
    }
  }
  auto apply = [&](const ModMat& m, const std::vector<u64>& v) {
    std::vector<u64> out(4, 0);
    for (size_t r = 0; r < 4; ++r)
      for (size_t c = 0; c < 4; ++c) out[r] = (out[r] + mulmod(m[r][c], v[c], ell)) % ell;
    return out;
  };

  std::set<std::vector<u64>> seen;
  std::vector<Ideal> out;
  // Canonical representatives of lines in F_ell^4.
  for (size_t lead = 0; lead < 4; ++lead) {
    std::vector<u64> w(4, 0);
    w[lead] = 1;
    size_t free = 3 - lead;
    u64 total = 1;
    for (size_t t = 0; t < free; ++t) total *= ell;
    for (u64 code = 0; code < total; ++code) {
      u64 rem = code;
      for (size_t t = lead + 1; t < 4; ++t) {
        w[t] = rem % ell;
        rem /= ell;
      }
      ModMat span;
      for (size_t a = 0; a < 4; ++a) span.push_back(apply(act[a], w));
      rref_mod(span, ell);
      if (span.size() != 2) continue;
      std::vector<u64> sig;
      for (const auto& r : span)
        for (u64 x : r) sig.push_back(x);
      if (!seen.insert(sig).second) continue;
      ZMat rows;
      for (const auto& k : span) {
        ZVec v(4, Int(0));
        for (size_t sidx = 0; sidx < 4; ++sidx)
          for (size_t c = 0; c < 4; ++c) v[c] += Int(k[sidx]) * il.b[sidx][c];
        rows.push_back(v);
      }
      for (size_t sidx = 0; sidx < 4; ++sidx) {
        ZVec v;
        for (const auto& x : il.b[sidx]) v.push_back(x * Int(ell));
        rows.push_back(v);
      }
      Ideal n = make_ideal(A, lat_make(std::move(rows), il.den));
      require(n.nrd == i.nrd * Int(ell), "neighbor ideal has wrong norm");
      out.push_back(std::move(n));
    }
  }
  require(out.size() == ell + 1, "wrong neighbor count");
  return out;
}

}  // namespace

Rat mass_of(const ClassSet& cs) {
  Rat m = 0;
  for (const auto& c : cs.cls) m += Rat(1, 2 * c.w);
  return m;
}

ClassSet ideal_classes(const Algebra& A, const Order& base) {
  require(base.disc % A.q == 0, "order discriminant must be a multiple of q");
  Int level = base.disc / A.q;
  ClassSet cs{base, level, {}};

  u64 ell = 3;
  while (base.disc % Int(ell) == 0 || base.lat.den % Int(ell) == 0 || !is_prime(ell))
    ell = next_prime(ell);

  cs.cls.push_back(finish_class(A, make_ideal(A, base.lat)));
  size_t head = 0;
  while (head < cs.cls.size()) {
    Ideal current = cs.cls[head].ideal;
    ++head;
    for (Ideal& n : neighbor_ideals(A, base, current, ell)) {
      bool known = false;
      for (const auto& c : cs.cls)
        if (ideal_isomorphism(A, c.ideal, n)) {
          known = true;
          break;
        }
      if (!known) cs.cls.push_back(finish_class(A, std::move(n)));
    }
  }

  // Certify saturation against the mass formula.
  Rat expected = Rat(A.q - 1, 24);
  for (const auto& [p, e] : factorize(level)) {
    require(e == 1, "order level must be squarefree");
    expected *= Rat(p + 1, 1);
  }
  require(mass_of(cs) == expected, "class set does not saturate the mass formula");
  return cs;
}

ZMat brandt_matrix(const Algebra& A, const ClassSet& cs, const Int& n) {
  require(n >= 1, "Hecke index must be positive");
  require(boost::multiprecision::gcd(n, cs.base.disc) == 1,
          "Hecke index must be coprime to the discriminant");
  size_t h = cs.cls.size();
  ZMat b = zmat(h, h);
  for (size_t i = 0; i < h; ++i)
    for (size_t j = 0; j < h; ++j) {
      Lat m = lat_mul(A, lat_conj(cs.cls[j].ideal.lat), cs.cls[i].ideal.lat);
      ZMat g = lat_gram(A, m);
      Int target = 2 * n * cs.cls[i].ideal.nrd * cs.cls[j].ideal.nrd * m.den * m.den;
      Int count = count_norm_vectors(g, target);
      Int denom = 2 * cs.cls[j].w;
      require(count % denom == 0, "Brandt count not divisible by unit order");
      b[i][j] = count / denom;
    }
  return b;
}

Int optimal_embedding_count(const Algebra& A, const Order& o, const QuadDisc& d) {
  const Int& D = d.D;
  Int t = (D % 2 == 0) ? 0 : 1;
  require((t * t + D) % 4 == 0, "discriminant must be 0 or 3 mod 4");
  Int m = (t * t + D) / 4;
  const Lat& l = o.lat;
  ZMat g = lat_gram(A, l);
  Int den2 = l.den * l.den;

  std::vector<Quat> cands;
  for (const ZVec& c : norm_vectors(g, 2 * m * den2)) {
    ZVec v(4, Int(0));
    for (size_t s = 0; s < 4; ++s)
      for (size_t col = 0; col < 4; ++col) v[col] += c[s] * l.b[s][col];
    Quat x = vec_quat(v);  // true element is x / den
    if (qtrd(x) != t * l.den) continue;
    // Optimality: x must not come from the larger order at any prime
    // dividing the conductor.
    bool optimal = true;
    for (const auto& [ell, e] : factorize(d.cond)) {
      (void)e;
      std::vector<Int> shifts;
      if (ell == 2) {
        shifts = {Int(0), Int(1)};
      } else {
        Int a = (t * ((ell + 1) / 2)) % ell;
        shifts = {a};
      }
      for (const Int& a : shifts) {
        Quat y = x;
        y.w -= a * l.den;
        if (lat_contains(l, y, l.den * ell)) {
          optimal = false;
          break;
        }
      }
      if (!optimal) break;
    }
    if (optimal) cands.push_back(x);
  }

  // Count orbits under conjugation by the unit group.
  std::vector<Quat> units;
  for (const ZVec& c : unit_group(A, o)) {
    ZVec v(4, Int(0));
    for (size_t s = 0; s < 4; ++s)
      for (size_t col = 0; col < 4; ++col) v[col] += c[s] * l.b[s][col];
    units.push_back(vec_quat(v));  // true unit is v / den, nrd = den^2
  }

  std::set<std::array<Int, 4>> visited;
  auto key = [](const Quat& u) { return std::array<Int, 4>{u.w, u.x, u.y, u.z}; };
  Int orbits = 0;
  for (const Quat& x : cands) {
    if (visited.count(key(x))) continue;
    ++orbits;
    for (const Quat& u : units) {
      Quat num = qmul(A, qmul(A, qconj(u), x), u);
      Quat img;
      img.w = num.w / den2;
      img.x = num.x / den2;
      img.y = num.y / den2;
      img.z = num.z / den2;
      require(img.w * den2 == num.w && img.x * den2 == num.x && img.y * den2 == num.y &&
                  img.z * den2 == num.z,
              "unit conjugation left the order");
      visited.insert(key(img));
    }
  }
  return orbits;
}

}  // namespace shimura
