#include <utility>

#include "cartan/precision.hpp"

namespace cartan {

namespace {

size_t pick_pivot(const BigMatrix& a, size_t col) {
  size_t best = col;
  for (size_t r = col + 1; r < a.size(); ++r)
    if (mpfr_cmpabs(a[r][col].value(), a[best][col].value()) > 0) best = r;
  if (a[best][col].sign() == 0) throw PrecisionExhausted("singular or ill-conditioned matrix");
  return best;
}

}  // namespace

BigMatrix inverse(const BigMatrix& in) {
  const size_t n = in.size();
  BigMatrix a = in;
  BigMatrix inv(n, std::vector<BigReal>(n));
  for (size_t i = 0; i < n; ++i) inv[i][i] = BigReal(1);
  for (size_t col = 0; col < n; ++col) {
    size_t piv = pick_pivot(a, col);
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    BigReal d = a[col][col];
    for (size_t j = 0; j < n; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      BigReal f = a[r][col];
      if (f.is_exact() && mpfr_zero_p(f.value())) continue;
      for (size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

BigReal determinant(const BigMatrix& in) {
  const size_t n = in.size();
  BigMatrix a = in;
  BigReal det(1);
  for (size_t col = 0; col < n; ++col) {
    size_t piv = pick_pivot(a, col);
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (size_t r = col + 1; r < n; ++r) {
      BigReal f = a[r][col] / a[col][col];
      for (size_t j = col; j < n; ++j) a[r][j] -= f * a[col][j];
    }
  }
  return det;
}

std::vector<BigReal> mat_vec(const BigMatrix& a, const std::vector<BigReal>& v) {
  std::vector<BigReal> out(a.size());
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < v.size(); ++j) out[i] += a[i][j] * v[j];
  return out;
}

}  // namespace cartan
