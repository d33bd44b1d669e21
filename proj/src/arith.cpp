#include "shimura/arith.hpp"

#include <algorithm>
#include <random>

namespace shimura {

Fq2Ctx::Fq2Ctx(u64 q_) : q(q_), nsd(0) {
  if (q < 3 || !is_prime(q)) throw std::invalid_argument("Fq2Ctx: odd prime required");
  for (u64 n = 2; n < q; ++n) {
    if (kronecker((i64)n, (i64)q) == -1) {
      nsd = n;
      break;
    }
  }
  if (nsd == 0) throw std::invalid_argument("Fq2Ctx: no non-residue found");
}

Fq2 Fq2Ctx::add(Fq2 x, Fq2 y) const {
  u64 a = x.a + y.a, b = x.b + y.b;
  return Fq2{a >= q ? a - q : a, b >= q ? b - q : b};
}

Fq2 Fq2Ctx::sub(Fq2 x, Fq2 y) const {
  return Fq2{x.a >= y.a ? x.a - y.a : x.a + q - y.a,
             x.b >= y.b ? x.b - y.b : x.b + q - y.b};
}

Fq2 Fq2Ctx::neg(Fq2 x) const {
  return Fq2{x.a ? q - x.a : 0, x.b ? q - x.b : 0};
}

Fq2 Fq2Ctx::mul(Fq2 x, Fq2 y) const {
  u64 ac = mulmod(x.a, y.a, q);
  u64 bd = mulmod(x.b, y.b, q);
  u64 ad = mulmod(x.a, y.b, q);
  u64 bc = mulmod(x.b, y.a, q);
  u64 re = (ac + mulmod(bd, nsd, q)) % q;
  u64 im = (ad + bc) % q;
  return Fq2{re, im};
}

Fq2 Fq2Ctx::inv(Fq2 x) const {
  u64 n = norm(x);
  if (n == 0) throw std::invalid_argument("Fq2: division by zero");
  u64 ninv = invmod(n, q);
  Fq2 conj{x.a, x.b ? q - x.b : 0};
  return Fq2{mulmod(conj.a, ninv, q), mulmod(conj.b, ninv, q)};
}

Fq2 Fq2Ctx::pow(Fq2 x, Int e) const {
  if (e < 0) return pow(inv(x), -e);
  Fq2 r = from(1);
  Fq2 base = x;
  while (e > 0) {
    if ((e & 1) != 0) r = mul(r, base);
    base = mul(base, base);
    e >>= 1;
  }
  return r;
}

Fq2 Fq2Ctx::frob(Fq2 x) const { return Fq2{x.a, x.b ? q - x.b : 0}; }

u64 Fq2Ctx::norm(Fq2 x) const {
  u64 a2 = mulmod(x.a, x.a, q);
  u64 b2 = mulmod(x.b, x.b, q);
  u64 t = mulmod(b2, nsd, q);
  return a2 >= t ? a2 - t : a2 + q - t;
}

u64 Fq2Ctx::trace(Fq2 x) const { return (x.a * 2) % q; }

PolyQ2 poly_trim(PolyQ2 f) {
  while (!f.empty() && f.back() == Fq2{}) f.pop_back();
  return f;
}

int poly_deg(const PolyQ2& f) { return (int)f.size() - 1; }

PolyQ2 poly_add(const Fq2Ctx& F, const PolyQ2& f, const PolyQ2& g) {
  PolyQ2 r(std::max(f.size(), g.size()));
  for (size_t i = 0; i < r.size(); ++i) {
    Fq2 x = i < f.size() ? f[i] : Fq2{};
    Fq2 y = i < g.size() ? g[i] : Fq2{};
    r[i] = F.add(x, y);
  }
  return poly_trim(std::move(r));
}

PolyQ2 poly_sub(const Fq2Ctx& F, const PolyQ2& f, const PolyQ2& g) {
  PolyQ2 r(std::max(f.size(), g.size()));
  for (size_t i = 0; i < r.size(); ++i) {
    Fq2 x = i < f.size() ? f[i] : Fq2{};
    Fq2 y = i < g.size() ? g[i] : Fq2{};
    r[i] = F.sub(x, y);
  }
  return poly_trim(std::move(r));
}

PolyQ2 poly_mul(const Fq2Ctx& F, const PolyQ2& f, const PolyQ2& g) {
  if (f.empty() || g.empty()) return {};
  PolyQ2 r(f.size() + g.size() - 1);
  for (size_t i = 0; i < f.size(); ++i) {
    if (f[i] == Fq2{}) continue;
    for (size_t j = 0; j < g.size(); ++j) r[i + j] = F.add(r[i + j], F.mul(f[i], g[j]));
  }
  return poly_trim(std::move(r));
}

std::pair<PolyQ2, PolyQ2> poly_divrem(const Fq2Ctx& F, PolyQ2 num, const PolyQ2& den) {
  PolyQ2 d = poly_trim(den);
  if (d.empty()) throw std::invalid_argument("poly_divrem: zero divisor");
  num = poly_trim(std::move(num));
  if (num.size() < d.size()) return {PolyQ2{}, std::move(num)};
  Fq2 lead_inv = F.inv(d.back());
  PolyQ2 quot(num.size() - d.size() + 1);
  for (size_t k = quot.size(); k-- > 0;) {
    Fq2 c = F.mul(num[k + d.size() - 1], lead_inv);
    quot[k] = c;
    if (c == Fq2{}) continue;
    for (size_t j = 0; j < d.size(); ++j)
      num[k + j] = F.sub(num[k + j], F.mul(c, d[j]));
  }
  return {poly_trim(std::move(quot)), poly_trim(std::move(num))};
}

PolyQ2 poly_mod(const Fq2Ctx& F, PolyQ2 num, const PolyQ2& den) {
  return poly_divrem(F, std::move(num), den).second;
}

PolyQ2 poly_monic(const Fq2Ctx& F, PolyQ2 f) {
  f = poly_trim(std::move(f));
  if (f.empty() || f.back() == F.from(1)) return f;
  Fq2 c = F.inv(f.back());
  for (auto& x : f) x = F.mul(x, c);
  return f;
}

PolyQ2 poly_gcd(const Fq2Ctx& F, PolyQ2 f, PolyQ2 g) {
  f = poly_trim(std::move(f));
  g = poly_trim(std::move(g));
  while (!g.empty()) {
    PolyQ2 r = poly_mod(F, std::move(f), g);
    f = std::move(g);
    g = std::move(r);
  }
  return poly_monic(F, std::move(f));
}

PolyQ2 poly_powmod(const Fq2Ctx& F, PolyQ2 base, Int e, const PolyQ2& mod) {
  PolyQ2 r = poly_mod(F, {F.from(1)}, mod);
  base = poly_mod(F, std::move(base), mod);
  while (e > 0) {
    if ((e & 1) != 0) r = poly_mod(F, poly_mul(F, r, base), mod);
    base = poly_mod(F, poly_mul(F, base, base), mod);
    e >>= 1;
  }
  return r;
}

Fq2 poly_eval(const Fq2Ctx& F, const PolyQ2& f, Fq2 x) {
  Fq2 r{};
  for (size_t i = f.size(); i-- > 0;) r = F.add(F.mul(r, x), f[i]);
  return r;
}

PolyQ2 poly_deriv(const Fq2Ctx& F, const PolyQ2& f) {
  if (f.size() < 2) return {};
  PolyQ2 r(f.size() - 1);
  for (size_t i = 1; i < f.size(); ++i) {
    u64 m = i % F.q;
    r[i - 1] = F.mul(F.from(m), f[i]);
  }
  return poly_trim(std::move(r));
}

std::vector<Fq2> poly_roots_distinct(const Fq2Ctx& F, PolyQ2 f, u64 seed) {
  f = poly_trim(std::move(f));
  if (f.empty()) throw std::invalid_argument("poly_roots: zero polynomial");
  if (poly_deg(f) == 0) return {};
  f = poly_monic(F, std::move(f));

  // squarefree part
  PolyQ2 df = poly_deriv(F, f);
  if (!df.empty()) {
    PolyQ2 g = poly_gcd(F, f, df);
    if (poly_deg(g) > 0) f = poly_divrem(F, f, g).first;
  }

  // product of linear factors over F_{q^2}: gcd(f, x^{q^2} - x)
  Int q2 = Int(F.q) * F.q;
  PolyQ2 x = {F.from(0), F.from(1)};
  PolyQ2 xq2 = poly_powmod(F, x, q2, f);
  PolyQ2 lin = poly_gcd(F, poly_sub(F, xq2, x), f);
  if (poly_deg(lin) <= 0) return {};

  std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * F.q));
  Int half = (q2 - 1) / 2;
  std::vector<Fq2> roots;
  std::vector<PolyQ2> stack = {lin};
  while (!stack.empty()) {
    PolyQ2 t = std::move(stack.back());
    stack.pop_back();
    int d = poly_deg(t);
    if (d <= 0) continue;
    if (d == 1) {
      roots.push_back(F.neg(t[0]));
      continue;
    }
    while (true) {
      Fq2 r{rng() % F.q, rng() % F.q};
      PolyQ2 w = poly_powmod(F, {r, F.from(1)}, half, t);
      w = poly_sub(F, w, {F.from(1)});
      PolyQ2 g = poly_gcd(F, w, t);
      int dg = poly_deg(g);
      if (dg > 0 && dg < d) {
        PolyQ2 other = poly_divrem(F, t, g).first;
        stack.push_back(std::move(g));
        stack.push_back(std::move(other));
        break;
      }
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<Fq2> poly_roots(const Fq2Ctx& F, const PolyQ2& f, u64 seed) {
  std::vector<Fq2> distinct = poly_roots_distinct(F, f, seed);
  std::vector<Fq2> out;
  for (const Fq2& r : distinct) {
    PolyQ2 lin = {F.neg(r), F.from(1)};
    PolyQ2 cur = poly_trim(f);
    while (true) {
      auto [quo, rem] = poly_divrem(F, cur, lin);
      if (!rem.empty()) break;
      out.push_back(r);
      cur = std::move(quo);
      if (cur.empty()) break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

QuadDisc quad_disc(const Int& D) {
  if (D <= 0 || (D % 4 != 0 && D % 4 != 3))
    throw std::invalid_argument("quad_disc: need D > 0 with -D ≡ 0,1 mod 4");
  Int c = 1;
  for (const auto& [p, e] : factorize(D))
    for (int k = 0; k < e / 2; ++k) c *= p;
  Int d0 = D / (c * c);
  if (d0 % 4 != 3) {
    // fundamental part must carry the factor 4
    if (c % 2 != 0) throw std::invalid_argument("quad_disc: invalid discriminant");
    c /= 2;
    d0 *= 4;
  }
  return QuadDisc{D, d0, c};
}

Int class_number(const QuadDisc& d) {
  const Int& D = d.D;
  Int h = 0;
  for (Int b = (D % 2 == 0) ? 0 : 1; b * b * 3 <= D; b += 2) {
    Int M4 = D + b * b;
    if (M4 % 4 != 0) continue;
    Int M = M4 / 4;
    for (Int a = b > 0 ? b : 1; a * a <= M; ++a) {
      if (M % a != 0) continue;
      Int cc = M / a;
      Int g = boost::multiprecision::gcd(boost::multiprecision::gcd(a, b), cc);
      if (g != 1) continue;
      h += (b == 0 || b == a || a == cc) ? 1 : 2;
    }
  }
  return h;
}

Int class_number(const Int& D) { return class_number(quad_disc(D)); }

u64 expected_ss_count(u64 q) {
  u64 base = q / 12;
  switch (q % 12) {
    case 1: return base;
    case 5: return base + 1;
    case 7: return base + 1;
    default: return base + 2;  // q ≡ 11 mod 12
  }
}

SsPoly supersingular_polynomial(u64 q, u64 seed) {
  if (q <= 3 || !is_prime(q)) throw std::invalid_argument("supersingular_polynomial: prime q > 3 required");
  Fq2Ctx F(q);

  // Hasse polynomial H(t) = sum binom(m,i)^2 t^i, m = (q-1)/2
  u64 m = (q - 1) / 2;
  PolyQ2 hasse(m + 1);
  u64 binom = 1;
  hasse[0] = F.from(1);
  for (u64 i = 1; i <= m; ++i) {
    binom = mulmod(binom, (m - i + 1) % q, q);
    binom = mulmod(binom, invmod(i % q, q), q);
    hasse[i] = F.from(mulmod(binom, binom, q));
  }

  std::vector<Fq2> lambdas = poly_roots_distinct(F, hasse, seed);

  // j(λ) = 256 (λ² − λ + 1)³ / (λ²(λ−1)²)
  std::vector<Fq2> js;
  for (const Fq2& l : lambdas) {
    Fq2 l2 = F.mul(l, l);
    Fq2 num = F.add(F.sub(l2, l), F.from(1));
    num = F.mul(F.mul(num, num), num);
    num = F.mul(num, F.from(256 % q));
    Fq2 lm1 = F.sub(l, F.from(1));
    Fq2 den = F.mul(l2, F.mul(lm1, lm1));
    js.push_back(F.mul(num, F.inv(den)));
  }
  std::sort(js.begin(), js.end());
  js.erase(std::unique(js.begin(), js.end()), js.end());

  SsPoly out;
  out.q = q;
  out.seed = seed;
  out.lambda_count = lambdas.size();
  out.roots = js;
  PolyQ2 prod = {F.from(1)};
  for (const Fq2& j : js) {
    if (F.in_base(j)) {
      out.rational_roots.push_back(j.a);
      prod = poly_mul(F, prod, {F.neg(j), F.from(1)});
    } else if (j.b < q - j.b) {
      // pick one representative per Frobenius pair
      u64 B = (q - F.trace(j)) % q;
      u64 C = F.norm(j);
      out.quad_factors.push_back({B, C});
      prod = poly_mul(F, prod, {F.from(C), F.from(B), F.from(1)});
    }
  }
  std::sort(out.rational_roots.begin(), out.rational_roots.end());
  std::sort(out.quad_factors.begin(), out.quad_factors.end());
  out.poly.reserve(prod.size());
  for (const Fq2& c : prod) out.poly.push_back(c.a);
  return out;
}

}  // namespace shimura
