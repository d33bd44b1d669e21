#pragma once

#include <optional>
#include <vector>

#include "shimura/intmath.hpp"

namespace shimura {

/// Dense row-major matrix over Z. Sizes here are desk scale (<= a few hundred),
/// entries can be large, so everything is cpp_int and exact.
using ZMat = std::vector<std::vector<Int>>;
using ZVec = std::vector<Int>;

ZMat zmat(size_t rows, size_t cols);
ZMat identity(size_t n);
ZMat transpose(const ZMat& a);
ZMat mul(const ZMat& a, const ZMat& b);
ZVec mul_vec(const ZVec& x, const ZMat& a);  // row vector times matrix
bool is_zero(const ZMat& a);

/// Row Hermite normal form. Pivot columns strictly increase, pivots are
/// positive, entries above each pivot are reduced into [0, pivot).
/// Zero rows are dropped, so the result has full row rank.
ZMat hnf(ZMat a);

/// As hnf(), but also returns a unimodular U with U * input == [H; 0].
/// The returned H keeps its zero rows so U lines up.
struct HnfResult {
  ZMat h;  // same shape as the input, zero rows at the bottom
  ZMat u;  // unimodular, u * input == h
  size_t rank;
};
HnfResult hnf_with_transform(ZMat a);

/// Basis of { x : x * a == 0 } as rows.
ZMat left_kernel(const ZMat& a);

/// Smith normal form with transforms: u * a * v == d, u and v unimodular,
/// d diagonal with d[i] | d[i+1], nonnegative. Pivoting picks a nonzero
/// entry of minimal absolute value at each step.
struct SnfResult {
  ZMat d;
  ZMat u;
  ZMat v;
  std::vector<Int> invariants;  // nonzero diagonal entries, divisibility chain
  size_t rank;
};
SnfResult snf(ZMat a);

/// Determinant of a square matrix, Bareiss fraction-free elimination.
Int det(ZMat a);

/// Solve x * basis == v over Q for a full-row-rank `basis` whose HNF is
/// square (a rank-4 lattice basis, typically). Returns the rational
/// coordinates, or nullopt if v is outside the span.
std::optional<std::vector<Rat>> solve_in_span(const ZMat& basis, const ZVec& v);

/// True if v lies in the Z-span of the rows of `basis` (basis in HNF form).
bool in_lattice(const ZMat& hnf_basis, const ZVec& v);

}  // namespace shimura
