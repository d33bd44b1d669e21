#include "shimura/intmath.hpp"

namespace shimura {

u64 mulmod(u64 a, u64 b, u64 m) {
  return (u64)((unsigned __int128)a * b % m);
}

u64 powmod(u64 a, u64 e, u64 m) {
  u64 r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

u64 invmod(u64 a, u64 p) {
  a %= p;
  if (a == 0) throw std::invalid_argument("invmod: zero");
  return powmod(a, p - 2, p);
}

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) d >>= 1, ++s;
  // deterministic Miller-Rabin base set for 64-bit inputs
  for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 0; i + 1 < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

u64 next_prime(u64 n) {
  u64 k = n + 1;
  if (k <= 2) return 2;
  if (k % 2 == 0) ++k;
  while (!is_prime(k)) k += 2;
  return k;
}

u64 sqrt_mod(u64 a, u64 p) {
  a %= p;
  if (a == 0) return 0;
  if (p == 2) return a;
  if (powmod(a, (p - 1) / 2, p) != 1) throw std::invalid_argument("sqrt_mod: non-residue");
  if (p % 4 == 3) return powmod(a, (p + 1) / 4, p);
  // Tonelli-Shanks
  u64 q = p - 1;
  int s = 0;
  while ((q & 1) == 0) q >>= 1, ++s;
  u64 z = 2;
  while (powmod(z, (p - 1) / 2, p) != p - 1) ++z;
  u64 m = s;
  u64 c = powmod(z, q, p);
  u64 t = powmod(a, q, p);
  u64 r = powmod(a, (q + 1) / 2, p);
  while (t != 1) {
    u64 t2 = t;
    u64 i = 0;
    while (t2 != 1) {
      t2 = mulmod(t2, t2, p);
      ++i;
      if (i == m) throw std::runtime_error("sqrt_mod: failed");
    }
    u64 b = c;
    for (u64 k = 0; k + i + 1 < m; ++k) b = mulmod(b, b, p);
    m = i;
    c = mulmod(b, b, p);
    t = mulmod(t, c, p);
    r = mulmod(r, b, p);
  }
  return r;
}

Int isqrt_floor(const Int& n) {
  if (n < 0) throw std::invalid_argument("isqrt_floor: negative");
  if (n == 0) return 0;
  Int x = Int(1) << ((msb(n) / 2) + 1);
  while (true) {
    Int y = (x + n / x) / 2;
    if (y >= x) break;
    x = y;
  }
  return x;
}

bool perfect_square(const Int& n, Int* root) {
  if (n < 0) return false;
  Int r = isqrt_floor(n);
  if (r * r != n) return false;
  if (root) *root = r;
  return true;
}

bool perfect_power(const Int& n, unsigned k, Int* root) {
  if (k == 0) throw std::invalid_argument("perfect_power: k = 0");
  if (n < 0) return false;
  if (n == 0 || n == 1) {
    if (root) *root = n;
    return true;
  }
  // bisection on r^k = n
  Int lo = 1, hi = 1;
  while (boost::multiprecision::pow(hi, k) < n) hi <<= 1;
  while (lo < hi) {
    Int mid = (lo + hi) / 2;
    if (boost::multiprecision::pow(mid, k) < n)
      lo = mid + 1;
    else
      hi = mid;
  }
  if (boost::multiprecision::pow(lo, k) != n) return false;
  if (root) *root = lo;
  return true;
}

namespace {
int mod8(const Int& x) {
  Int r = x % 8;
  if (r < 0) r += 8;
  return (int)r.convert_to<long>();
}
int mod4(const Int& x) {
  Int r = x % 4;
  if (r < 0) r += 4;
  return (int)r.convert_to<long>();
}
}  // namespace

int kronecker(const Int& a_in, const Int& n_in) {
  // Cohen, alg. 1.4.10
  static const int tab2[8] = {0, 1, 0, -1, 0, -1, 0, 1};
  Int a = a_in, n = n_in;
  if (n == 0) throw std::invalid_argument("kronecker: n = 0");
  if (a % 2 == 0 && n % 2 == 0) return 0;
  int v = 0;
  while (n % 2 == 0) n /= 2, ++v;
  int k = (v % 2 == 0) ? 1 : tab2[mod8(a)];
  if (n < 0) {
    n = -n;
    if (a < 0) k = -k;
  }
  while (true) {
    if (a == 0) return (n > 1) ? 0 : k;
    v = 0;
    while (a % 2 == 0) a /= 2, ++v;
    if (v % 2 == 1) k *= tab2[mod8(n)];
    if (mod4(a) == 3 && mod4(n) == 3) k = -k;
    Int r = abs_int(a);
    a = n % r;
    n = r;
  }
}

int kronecker(i64 a, i64 n) { return kronecker(Int(a), Int(n)); }

namespace {
// (u-1)/2 mod 2 and (u^2-1)/8 mod 2 for odd u
int eps2(const Int& u) { return (mod4(u) == 1) ? 0 : 1; }
int omega2(const Int& u) {
  int m = mod8(u);
  return (m == 1 || m == 7) ? 0 : 1;
}
}  // namespace

int hilbert_symbol(Int a, Int b, const Int& p) {
  if (a == 0 || b == 0) throw std::invalid_argument("hilbert_symbol: zero argument");
  if (p == 0) return (a < 0 && b < 0) ? -1 : 1;
  if (p < 2) throw std::invalid_argument("hilbert_symbol: bad place");
  int alpha = 0, beta = 0;
  while (a % p == 0) a /= p, ++alpha;
  while (b % p == 0) b /= p, ++beta;
  if (p == 2) {
    int e = eps2(a) * eps2(b) + alpha * omega2(b) + beta * omega2(a);
    return (e % 2 == 0) ? 1 : -1;
  }
  int s = 0;
  if ((alpha % 2) && (beta % 2) && mod4(p) == 3) s = 1;
  int r = 1;
  if (beta % 2) r *= kronecker(a, p);
  if (alpha % 2) r *= kronecker(b, p);
  if (r == 0) throw std::runtime_error("hilbert_symbol: unit not coprime to p");
  return (s % 2 == 0) ? r : -r;
}

std::vector<std::pair<Int, int>> factorize(Int n) {
  if (n < 0) n = -n;
  if (n == 0) throw std::invalid_argument("factorize: zero");
  std::vector<std::pair<Int, int>> out;
  auto add = [&](const Int& p) {
    int e = 0;
    while (n % p == 0) n /= p, ++e;
    if (e) out.emplace_back(p, e);
  };
  add(Int(2));
  add(Int(3));
  Int d = 5;
  while (d * d <= n) {
    add(d);
    add(d + 2);
    d += 6;
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

}  // namespace shimura
