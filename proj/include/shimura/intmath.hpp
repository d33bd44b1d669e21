#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace shimura {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;
using i64 = long long;
using u64 = unsigned long long;

/// Raised when inputs fall outside the regime the pipeline supports
/// (as opposed to an internal consistency failure, which is a runtime_error).
struct UnsupportedCase : std::runtime_error {
  explicit UnsupportedCase(const std::string& what) : std::runtime_error(what) {}
};

u64 mulmod(u64 a, u64 b, u64 m);
u64 powmod(u64 a, u64 e, u64 m);
u64 invmod(u64 a, u64 p);  // p prime, a not divisible by p

bool is_prime(u64 n);
u64 next_prime(u64 n);

/// Square root mod an odd prime p via Tonelli-Shanks. Requires kronecker(a,p) == 1.
u64 sqrt_mod(u64 a, u64 p);

Int isqrt_floor(const Int& n);
bool perfect_square(const Int& n, Int* root = nullptr);
/// Exact integer k-th root if it exists.
bool perfect_power(const Int& n, unsigned k, Int* root = nullptr);

/// Full Kronecker symbol (a|n). n == 0 is rejected.
int kronecker(const Int& a, const Int& n);
int kronecker(i64 a, i64 n);

/// Hilbert symbol (a,b)_v over Q_v. Pass p == 0 for the real place.
int hilbert_symbol(Int a, Int b, const Int& p);

/// Trial-division factorization, (prime, exponent) pairs, smallest prime first.
std::vector<std::pair<Int, int>> factorize(Int n);

inline Int abs_int(const Int& x) { return x < 0 ? Int(-x) : x; }

}  // namespace shimura
