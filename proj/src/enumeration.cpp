#include "shimura/enumeration.hpp"

namespace shimura {

namespace {

Int floor_div(const Int& n, const Int& d) {
  Int q = n / d;
  if (n % d != 0 && ((n < 0) != (d < 0))) --q;
  return q;
}

}  // namespace

void enumerate_quadratic(const ZMat& gram, const Int& bound,
                         const std::function<bool(const ZVec&, const Int&)>& visit) {
  size_t n = gram.size();
  if (n == 0 || bound < 0) return;

  // Symmetric decomposition Q(x) = sum_i q[i][i] (x_i + sum_{j>i} q[i][j] x_j)^2,
  // then cleared to a common denominator so the descent below is pure integer
  // arithmetic: with s = lcm of the q-denominators, qs[i][j] = s * q[i][j] and
  // a completed term contributes qs[i][i] * (s * x_i + sum qs[i][j] x_j)^2,
  // which is s^3 times its true value.
  std::vector<std::vector<Rat>> q(n, std::vector<Rat>(n, Rat(0)));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) q[i][j] = Rat(gram[i][j]);
  for (size_t i = 0; i < n; ++i) {
    if (q[i][i] <= 0) throw std::invalid_argument("enumerate_quadratic: form not positive definite");
    for (size_t j = i + 1; j < n; ++j) q[i][j] /= q[i][i];
    for (size_t k = i + 1; k < n; ++k)
      for (size_t l = k; l < n; ++l) q[k][l] -= q[i][k] * q[i][l] * q[i][i];
  }
  Int s(1);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i; j < n; ++j)
      s = boost::multiprecision::lcm(s, boost::multiprecision::denominator(q[i][j]));
  std::vector<std::vector<Int>> qs(n, std::vector<Int>(n, Int(0)));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i; j < n; ++j) {
      Rat scaled = q[i][j] * Rat(s);
      qs[i][j] = boost::multiprecision::numerator(scaled);
    }
  Int s3 = s * s * s;
  Int bound3 = bound * s3;

  ZVec x(n, Int(0));
  bool stop = false;

  // assign x from index n-1 downward; acc3 = s^3 * (partial sum of completed terms)
  std::function<void(size_t, const Int&)> descend = [&](size_t i, const Int& acc3) {
    if (stop) return;
    Int u(0);  // s * (linear offset at level i)
    for (size_t j = i + 1; j < n; ++j)
      if (x[j] != 0) u += qs[i][j] * x[j];
    auto try_value = [&](const Int& xi) -> bool {
      // returns false when xi is outside the ellipsoid (stop scanning this direction)
      Int t = s * xi + u;
      Int total3 = acc3 + qs[i][i] * t * t;
      if (total3 > bound3) return false;
      x[i] = xi;
      if (i == 0) {
        bool zero = true;
        for (const Int& c : x)
          if (c != 0) {
            zero = false;
            break;
          }
        if (!zero) {
          if (total3 % s3 != 0) throw std::logic_error("enumerate_quadratic: non-integral value");
          Int val = total3 / s3;
          if (!visit(x, val)) stop = true;
        }
      } else {
        descend(i - 1, total3);
      }
      return true;
    };
    Int mid = floor_div(-u, s);
    for (Int xi = mid; !stop; --xi)
      if (!try_value(xi)) break;
    for (Int xi = mid + 1; !stop; ++xi)
      if (!try_value(xi)) break;
    x[i] = 0;
  };
  descend(n - 1, Int(0));
}

Int count_norm_vectors(const ZMat& gram, const Int& value) {
  Int count = 0;
  if (value <= 0) return count;
  enumerate_quadratic(gram, value, [&](const ZVec&, const Int& v) {
    if (v == value) ++count;
    return true;
  });
  return count;
}

std::vector<ZVec> norm_vectors(const ZMat& gram, const Int& value) {
  std::vector<ZVec> out;
  if (value <= 0) return out;
  enumerate_quadratic(gram, value, [&](const ZVec& x, const Int& v) {
    if (v == value) out.push_back(x);
    return true;
  });
  return out;
}

std::optional<ZVec> find_norm_vector(const ZMat& gram, const Int& value) {
  std::optional<ZVec> out;
  if (value <= 0) return out;
  enumerate_quadratic(gram, value, [&](const ZVec& x, const Int& v) {
    if (v == value) {
      out = x;
      return false;
    }
    return true;
  });
  return out;
}

}  // namespace shimura
