#pragma once

#include <array>
#include <utility>
#include <vector>

#include "shimura/intmath.hpp"

namespace shimura {

// element of F_{q^2} = F_q(s) with s^2 = a fixed non-residue; value a + b*s
struct Fq2 {
  u64 a = 0;
  u64 b = 0;
  friend bool operator==(const Fq2&, const Fq2&) = default;
};

inline bool operator<(const Fq2& x, const Fq2& y) {
  return x.a != y.a ? x.a < y.a : x.b < y.b;
}

// all F_{q^2} arithmetic goes through the context (q odd prime)
struct Fq2Ctx {
  u64 q;
  u64 nsd;  // smallest quadratic non-residue mod q

  explicit Fq2Ctx(u64 q);

  Fq2 from(u64 x) const { return Fq2{x % q, 0}; }
  Fq2 add(Fq2 x, Fq2 y) const;
  Fq2 sub(Fq2 x, Fq2 y) const;
  Fq2 neg(Fq2 x) const;
  Fq2 mul(Fq2 x, Fq2 y) const;
  Fq2 inv(Fq2 x) const;
  Fq2 pow(Fq2 x, Int e) const;
  Fq2 frob(Fq2 x) const;  // x -> x^q
  u64 norm(Fq2 x) const;  // x * frob(x), lands in F_q
  u64 trace(Fq2 x) const;
  bool in_base(Fq2 x) const { return x.b == 0; }
};

// dense univariate polynomials over F_{q^2}, coefficients low to high, trimmed
using PolyQ2 = std::vector<Fq2>;

PolyQ2 poly_trim(PolyQ2 f);
int poly_deg(const PolyQ2& f);  // -1 for zero
PolyQ2 poly_add(const Fq2Ctx& F, const PolyQ2& f, const PolyQ2& g);
PolyQ2 poly_sub(const Fq2Ctx& F, const PolyQ2& f, const PolyQ2& g);
PolyQ2 poly_mul(const Fq2Ctx& F, const PolyQ2& f, const PolyQ2& g);
std::pair<PolyQ2, PolyQ2> poly_divrem(const Fq2Ctx& F, PolyQ2 num, const PolyQ2& den);
PolyQ2 poly_mod(const Fq2Ctx& F, PolyQ2 num, const PolyQ2& den);
PolyQ2 poly_monic(const Fq2Ctx& F, PolyQ2 f);
PolyQ2 poly_gcd(const Fq2Ctx& F, PolyQ2 f, PolyQ2 g);  // monic
PolyQ2 poly_powmod(const Fq2Ctx& F, PolyQ2 base, Int e, const PolyQ2& mod);
Fq2 poly_eval(const Fq2Ctx& F, const PolyQ2& f, Fq2 x);
PolyQ2 poly_deriv(const Fq2Ctx& F, const PolyQ2& f);

// distinct roots of f in F_{q^2}, sorted; equal-degree splitting, deterministic per seed
std::vector<Fq2> poly_roots_distinct(const Fq2Ctx& F, PolyQ2 f, u64 seed);
// roots with multiplicity, sorted; rejects the zero polynomial
std::vector<Fq2> poly_roots(const Fq2Ctx& F, const PolyQ2& f, u64 seed);

// negative discriminant -D written as -fund * cond^2 with -fund fundamental
struct QuadDisc {
  Int D;     // positive, -D ≡ 0 or 1 mod 4
  Int fund;  // positive, -fund fundamental
  Int cond;  // D = fund * cond^2
};

// throws std::invalid_argument unless D > 0 and -D ≡ 0,1 mod 4
QuadDisc quad_disc(const Int& D);

// class number h(-D): primitive reduced forms of discriminant -D
Int class_number(const QuadDisc& d);
Int class_number(const Int& D);

// supersingular j-invariants in characteristic q, via the Hasse polynomial
// on the Legendre line followed by the lambda -> j map
struct SsPoly {
  u64 q = 0;
  u64 seed = 0;
  std::size_t lambda_count = 0;                 // roots of the Hasse polynomial
  std::vector<Fq2> roots;                       // distinct supersingular j, sorted
  std::vector<u64> rational_roots;              // the roots lying in F_q, sorted
  std::vector<std::array<u64, 2>> quad_factors; // {B, C}: x^2 + Bx + C over F_q, sorted
  std::vector<u64> poly;                        // monic product over F_q, low to high
};

inline constexpr u64 kSsDefaultSeed = 0x5353504f4c59ull;

// requires q > 3 prime; throws std::invalid_argument otherwise
SsPoly supersingular_polynomial(u64 q, u64 seed = kSsDefaultSeed);

// floor(q/12) plus the correction from q mod 12
u64 expected_ss_count(u64 q);

}  // namespace shimura
