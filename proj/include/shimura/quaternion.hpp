#pragma once

#include <array>
#include <optional>

#include "shimura/arith.hpp"
#include "shimura/linalg.hpp"

namespace shimura {

/// B = (-1, -q) over the rationals: i^2 = -1, j^2 = -q, k = ij.
/// For q ≡ 3 mod 4 prime this algebra is ramified exactly at q and infinity
/// (verified at construction).
struct Algebra {
  Int q;
};

Algebra build_algebra(const Int& q);

/// Quaternion with integer coordinates over the basis {1, i, j, k}.
/// Rational quaternions are carried as (Quat, denominator) pairs.
struct Quat {
  Int w, x, y, z;
  friend bool operator==(const Quat&, const Quat&) = default;
};

Quat qmul(const Algebra& A, const Quat& u, const Quat& v);
Quat qconj(const Quat& u);
Quat qadd(const Quat& u, const Quat& v);
Quat qneg(const Quat& u);
Int qnrd(const Algebra& A, const Quat& u);  // w^2 + x^2 + q(y^2 + z^2)
Int qtrd(const Quat& u);                    // 2w

/// Full-rank lattice in B: rows of b are coordinates over {1,i,j,k},
/// the lattice is (1/den) * rowspan. Canonical form: b in HNF, den minimal.
struct Lat {
  ZMat b;
  Int den;
  friend bool operator==(const Lat&, const Lat&) = default;
};

Lat lat_make(ZMat rows, const Int& den);
Quat lat_row(const Lat& l, size_t i);  // numerator; true vector is /den
Lat lat_mul(const Algebra& A, const Lat& l, const Lat& m);
Lat lat_add(const Lat& l, const Lat& m);
Lat lat_intersect(const Lat& l, const Lat& m);
Lat lat_conj(const Lat& l);
Lat lat_scale(const Lat& l, const Rat& s);
/// b * L * b^{-1} for the rational quaternion b = bnum/bden.
Lat lat_conjugate_by(const Algebra& A, const Lat& l, const Quat& bnum, const Int& bden);
bool lat_contains(const Lat& l, const Quat& v, const Int& vden);
bool lat_subset(const Lat& inner, const Lat& outer);
/// Integer Gram matrix trd(r_i * conj(r_j)) of the numerator rows;
/// the Gram of the true basis is this divided by den^2.
ZMat lat_gram(const Algebra& A, const Lat& l);
/// Reduced norm of the lattice: the positive generator of the fractional
/// ideal generated by nrd(v), v in L (content of the norm form).
Rat lat_nrd(const Algebra& A, const Lat& l);
/// Coordinates of v/vden over the true basis of l, if v lies in QL = B.
std::vector<Rat> lat_coords(const Lat& l, const Quat& v, const Int& vden);

/// An order with its verified reduced discriminant.
struct Order {
  Lat lat;
  Int disc;
  friend bool operator==(const Order&, const Order&) = default;
};

/// Verifies: contains 1, integrally closed under multiplication, integral
/// Gram; computes the reduced discriminant. Throws on violation.
Order make_order(const Algebra& A, const Lat& l);

/// The standard maximal order for q ≡ 3 mod 4: Z<1, i, (i+j)/2, (1+k)/2>.
Order maximal_order(const Algebra& A);

/// Index-p Eichler suborder of a maximal order, p an odd prime not equal to q.
Order eichler_order(const Algebra& A, const Order& maximal, const Int& p, u64 seed = 1);

/// Splitting O/pO ≅ M2(F_p) for p not dividing disc(O)*den: images of the
/// four basis rows as 2x2 matrices over F_p.
using Mat2 = std::array<std::array<u64, 2>, 2>;
struct SplitMap {
  u64 p;
  std::array<Mat2, 4> basis_image;
};
SplitMap split_order_mod_p(const Algebra& A, const Order& o, u64 p, u64 seed = 1);
/// Image of the element with integer coordinates c over o's basis rows.
Mat2 split_apply(const SplitMap& s, const ZVec& coords);

/// Lattice with its reduced norm pinned (asserted against lat_nrd).
struct Ideal {
  Lat lat;
  Int nrd;
  friend bool operator==(const Ideal&, const Ideal&) = default;
};

Ideal make_ideal(const Algebra& A, const Lat& l);
Ideal ideal_mul(const Algebra& A, const Ideal& a, const Ideal& b);
Ideal ideal_conj(const Ideal& a);
Order left_order(const Algebra& A, const Ideal& a);
Order right_order(const Algebra& A, const Ideal& a);

/// Kernel ideal {x in R : phi(x) v = 0 mod p} for the line v = (v0 : v1);
/// an integral left R-ideal of reduced norm p.
Ideal kernel_ideal(const Algebra& A, const Order& r, const SplitMap& s, u64 v0, u64 v1);
/// Inverse map: the common kernel line of phi on an integral nrd-p left ideal.
std::pair<u64, u64> kernel_line(const Algebra& A, const Order& r, const SplitMap& s,
                                const Ideal& p_ideal);

/// The unique integral two-sided ideal of reduced norm ell of an order whose
/// reduced discriminant ell divides. Its square is ell * order.
Ideal atkin_lehner_ideal(const Algebra& A, const Order& o, const Int& ell);

/// All units of nrd 1, as integer coordinate vectors over o's basis rows.
std::vector<ZVec> unit_group(const Algebra& A, const Order& o);

/// One ideal class: representative I with left order the base order,
/// its right order R = O_r(I), and w = |R^x / ±1|.
struct IdealClass {
  Ideal ideal;
  Order right_ord;
  std::vector<ZVec> units;  // units of right_ord, coords over its basis
  int w;
};

struct ClassSet {
  Order base;
  Int level;  // disc(base) / q
  std::vector<IdealClass> cls;
};

/// Complete set of ideal classes with left order `base` (conjugation gives
/// the right-module picture), by neighbor BFS at the smallest good prime.
/// Saturation is certified against the Eichler mass formula; a mismatch
/// throws. Class 0 is the trivial class.
ClassSet ideal_classes(const Algebra& A, const Order& base);

/// b with J = I * b when [I] = [J] (classes of left O-ideals), else nullopt.
struct Transporter {
  Quat num;
  Int den;
};
std::optional<Transporter> ideal_isomorphism(const Algebra& A, const Ideal& i, const Ideal& j);

/// Index of the class of J in the class set (linear scan with fingerprint skip).
size_t identify_class(const Algebra& A, const ClassSet& cs, const Ideal& j);
size_t identify_class(const Algebra& A, const ClassSet& cs, const Ideal& j, Transporter* t);

/// Hecke action on classes: entry (i, j) = number of integral sub-ideals of
/// I_i with norm n * nrd(I_i) lying in class j. Rows sum to sigma_1(n) for
/// gcd(n, disc) = 1, i.e. n + 1 for prime n.
ZMat brandt_matrix(const Algebra& A, const ClassSet& cs, const Int& n);

/// Number of optimal embeddings of the quadratic order of discriminant -D
/// into o, modulo conjugation by the unit group of o.
Int optimal_embedding_count(const Algebra& A, const Order& o, const QuadDisc& d);

/// Eichler mass of a class set as an exact rational: sum of 1/|R^x|.
Rat mass_of(const ClassSet& cs);

}  // namespace shimura
