#include "cartan/jfunction.hpp"

#include <cmath>
#include <mutex>

#include "cartan/modp.hpp"

namespace cartan {

namespace {

using Series = std::vector<mpz_class>;

Series mul(const Series& a, const Series& b) {
  const size_t L = a.size();
  Series c(L);
  for (size_t i = 0; i < L; ++i) {
    if (a[i] == 0) continue;
    for (size_t k = 0; i + k < L; ++k) c[i + k] += a[i] * b[k];
  }
  return c;
}

// coefficients of j q = 1 + 744 q + ..., length L
Series jq_series(size_t L) {
  Series euler(L);
  for (long k = -static_cast<long>(L); k <= static_cast<long>(L); ++k) {
    long e = k * (3 * k - 1) / 2;
    if (e >= 0 && static_cast<size_t>(e) < L) euler[e] += (k % 2 == 0) ? 1 : -1;
  }
  Series e2 = mul(euler, euler), e4 = mul(e2, e2), e8 = mul(e4, e4), e16 = mul(e8, e8);
  Series P = mul(e16, e8);
  Series E4(L);
  E4[0] = 1;
  for (size_t n = 1; n < L; ++n) {
    mpz_class s = 0;
    for (size_t dd = 1; dd <= n; ++dd)
      if (n % dd == 0) s += mpz_class(dd) * dd * dd;
    E4[n] = 240 * s;
  }
  Series E = mul(mul(E4, E4), E4);
  Series J(L);
  for (size_t k = 0; k < L; ++k) {
    mpz_class v = E[k];
    for (size_t i = 1; i <= k; ++i) v -= P[i] * J[k - i];
    J[k] = v;
  }
  return J;
}

BigReal r0() { return exp(-(BigReal::pi() * sqrt(BigReal(3)))); }

const char* kCm[][2] = {
    {"-3", "0"},
    {"-4", "1728"},
    {"-7", "-3375"},
    {"-8", "8000"},
    {"-11", "-32768"},
    {"-12", "54000"},
    {"-16", "287496"},
    {"-19", "-884736"},
    {"-27", "-12288000"},
    {"-28", "16581375"},
    {"-43", "-884736000"},
    {"-67", "-147197952000"},
    {"-163", "-262537412640768000"},
};

}  // namespace

std::vector<mpz_class> j_coefficients(int N) {
  static std::mutex mu;
  static Series cache;  // j q coefficients
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() < static_cast<size_t>(N) + 2) cache = jq_series(std::max<size_t>(2 * N + 2, 64));
  return std::vector<mpz_class>(cache.begin() + 1, cache.begin() + N + 2);
}

BigComplex j_modular(const BigComplex& q) {
  BigReal aq = abs(q);
  if (!certainly_lt(aq, BigReal(1))) fail(ErrorKind::invalid_argument, "j_modular needs |q| < 1");
  const double bits = working_precision() + 20;
  const long M = static_cast<long>(std::ceil(bits * std::log(2.0) / -std::log(aq.to_double()))) + 2;
  BigComplex e4(BigReal(1)), prod(BigReal(1)), qn(BigReal(1));
  for (long n = 1; n <= M; ++n) {
    qn = qn * q;
    long s = 0;
    for (long dd = 1; dd <= n; ++dd)
      if (n % dd == 0) s += dd * dd * dd;
    e4 = e4 + qn * BigReal(240 * s);
    prod = prod * (BigComplex(BigReal(1)) - qn);
  }
  BigReal aM1 = pow_int(aq, M + 1);
  // sigma_3(n) < 2 n^3; the tail ratio is at most rho
  BigReal rho = pow_int(BigReal(M + 2) / BigReal(M + 1), 3) * aq;
  BigReal tailE = BigReal(480) * pow_int(BigReal(M + 1), 3) * aM1 / (BigReal(1) - rho);
  e4 = widen(e4, tailE.upper());
  BigComplex delta = q * pow_int(prod, 24);
  BigReal L = BigReal(24) * aM1 / ((BigReal(1) - aq) * (BigReal(1) - aM1));
  BigReal eta = exp(L) - BigReal(1);
  delta = widen(delta, (abs(delta) * eta).upper());
  return pow_int(e4, 3) / delta;
}

BigReal j_tail_bound(int N) {
  BigReal r = r0();
  thread_local long cached_prec = 0;
  thread_local BigReal jr;
  if (cached_prec != working_precision()) {
    jr = j_modular(BigComplex(r)).re();
    cached_prec = working_precision();
  }
  auto c = j_coefficients(N);
  BigReal jn = BigReal(1) / r, rn(1);
  for (int n = 0; n <= N; ++n) {
    jn += BigReal::from_mpz(c[n]) * rn;
    rn = rn * r;
  }
  BigReal t = (jr - jn).upper();
  return t.certainly_positive() ? t : abs(t).upper();
}

namespace {

BigReal tail_for(const BigReal& aq, int N) {
  BigReal r = r0();
  if (certainly_lt(r, aq)) fail(ErrorKind::invalid_argument, "evaluate_j needs |q| <= e^{-pi sqrt3}");
  BigReal ratio = min_value(aq.upper() / r, BigReal(1));
  return (j_tail_bound(N) * pow_int(ratio, N + 1)).upper();
}

}  // namespace

BigComplex evaluate_j(const BigComplex& q, int N) {
  if (N < 0) fail(ErrorKind::invalid_argument, "evaluate_j needs N >= 0");
  BigReal tail = tail_for(abs(q), N);
  auto c = j_coefficients(N);
  BigComplex acc;
  for (int n = N; n >= 0; --n) acc = acc * q + BigComplex(BigReal::from_mpz(c[n]));
  BigComplex j = acc + BigComplex(BigReal(1)) / q;
  return widen(j, tail);
}

BigReal evaluate_j(const BigReal& q, int N) {
  if (N < 0) fail(ErrorKind::invalid_argument, "evaluate_j needs N >= 0");
  BigReal tail = tail_for(abs(q), N);
  auto c = j_coefficients(N);
  BigReal acc;
  for (int n = N; n >= 0; --n) acc = acc * q + BigReal::from_mpz(c[n]);
  BigReal j = acc + BigReal(1) / q;
  return j.add_error(tail);
}

BigReal evaluate_j(const BigReal& q) {
  const BigReal quarter = BigReal::from_string("0.25");
  for (int N = 8; N <= 4096; N *= 2) {
    BigReal j = evaluate_j(q, N);
    if (certainly_lt(BigReal::from_double(j.err_double()), quarter)) return j;
    if (tail_for(abs(q), N).to_double() < 1e-3) throw PrecisionExhausted("evaluate_j: q not known precisely enough");
  }
  throw PrecisionExhausted("evaluate_j: series did not settle");
}

const std::vector<CmValue>& cm_table() {
  static const std::vector<CmValue> t = [] {
    std::vector<CmValue> v;
    for (const auto& e : kCm) v.push_back({std::stoi(e[0]), mpz_class(e[1])});
    return v;
  }();
  return t;
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::cm_match:
      return "cm-match";
    case Classification::integer_j_unverified:
      return "integer-j-unverified";
    case Classification::rejected:
      return "rejected";
    case Classification::unresolved:
      return "unresolved";
  }
  return "unknown";
}

JClass classify_j(const BigReal& j) {
  if (!certainly_lt(BigReal::from_double(j.err_double()), BigReal::from_string("0.5")))
    throw PrecisionExhausted("classify_j: ambiguous, err >= 1/2");
  JClass out;
  BigReal n = nearest_integer(j);
  mpfr_get_z(out.nearest.get_mpz_t(), n.value(), MPFR_RNDN);
  BigReal dist = abs(j.midpoint() - n);
  if (!value_le(dist, BigReal::from_double(j.err_double()))) {
    out.cls = Classification::rejected;
    return out;
  }
  out.cls = Classification::integer_j_unverified;
  for (const auto& c : cm_table())
    if (c.j == out.nearest) {
      out.cls = Classification::cm_match;
      out.disc = c.disc;
    }
  return out;
}

long frobenius_trace(long j, long ell) {
  auto md = [ell](long long v) { return static_cast<long>(((v % ell) + ell) % ell); };
  long u = md(1728 - j), jj = md(j);
  long A = md(3LL * jj % ell * u);
  long B = md(2LL * jj % ell * u % ell * u);
  std::vector<signed char> chi(ell, -1);
  chi[0] = 0;
  for (long x = 1; x < ell; ++x) chi[x * x % ell] = 1;
  long s = 0;
  for (long x = 0; x < ell; ++x) {
    long long v = (static_cast<long long>(x) * x % ell * x + static_cast<long long>(A) * x + B) % ell;
    s += chi[v];
  }
  return -s;
}

SmallJResult small_j_filter(int p, long j, long ell_budget) {
  if (j == 0 || j == 1728) fail(ErrorKind::invalid_argument, "small_j_filter excludes j = 0, 1728");
  SmallJResult r;
  r.j = j;
  const long bad = j * (1728 - j);
  for (long ell = 5; ell <= ell_budget; ++ell) {
    if (!is_prime(ell) || ell == p || bad % ell == 0) continue;
    long a = frobenius_trace(j, ell);
    long am = ((a % p) + p) % p;
    if (am == 0) continue;
    long disc = ((a * a - 4 * ell) % p + p) % p;
    if (disc != 0 && legendre(disc, p) == 1) {
      r.excluded = true;
      r.witness_ell = ell;
      r.a_ell = a;
      return r;
    }
  }
  return r;
}

}  // namespace cartan
