#include "cartan/precision.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace cartan {

namespace {

constexpr mpfr_prec_t kErrBits = 64;

thread_local long g_precision = kDefaultPrecision;

// t <- |v| rounded up, at kErrBits.
void abs_up(mpfr_ptr t, mpfr_srcptr v) {
  mpfr_set(t, v, MPFR_RNDU);
  if (mpfr_sgn(t) < 0) {
    mpfr_set(t, v, MPFR_RNDD);
    mpfr_neg(t, t, MPFR_RNDN);
  }
}

void abs_down(mpfr_ptr t, mpfr_srcptr v) {
  if (mpfr_sgn(v) >= 0) {
    mpfr_set(t, v, MPFR_RNDD);
  } else {
    mpfr_set(t, v, MPFR_RNDU);
    mpfr_neg(t, t, MPFR_RNDN);
  }
}

// err += |r| * 2^(1 - prec(r)); bound for one correctly rounded operation.
void add_rounding(mpfr_ptr err, mpfr_srcptr r, int inexact = 1) {
  if (inexact == 0 || mpfr_zero_p(r)) return;
  MPFR_DECL_INIT(t, kErrBits);
  abs_up(t, r);
  mpfr_mul_2si(t, t, 1 - static_cast<long>(mpfr_get_prec(r)), MPFR_RNDU);
  mpfr_add(err, err, t, MPFR_RNDU);
}

void check_finite(const BigReal& r, const char* op) {
  if (!mpfr_number_p(r.value()) || !mpfr_number_p(r.err()))
    throw PrecisionExhausted(std::string("non-finite result in ") + op);
}

}  // namespace

long working_precision() { return g_precision; }

PrecisionScope::PrecisionScope(long bits) : saved_(g_precision) {
  if (bits < kMinPrecision) fail(ErrorKind::invalid_argument, "precision below 64 bits");
  if (bits > kMaxPrecision) throw PrecisionExhausted("precision ceiling exceeded");
  g_precision = bits;
}

PrecisionScope::~PrecisionScope() { g_precision = saved_; }

BigReal::BigReal() {
  mpfr_init2(v_, g_precision);
  mpfr_init2(e_, kErrBits);
  mpfr_set_zero(v_, 1);
  mpfr_set_zero(e_, 1);
}

BigReal::BigReal(long v) : BigReal() {
  mpfr_set_si(v_, v, MPFR_RNDN);  // exact: precision >= 64
}

BigReal::BigReal(const BigReal& o) {
  mpfr_init2(v_, mpfr_get_prec(o.v_));
  mpfr_init2(e_, kErrBits);
  mpfr_set(v_, o.v_, MPFR_RNDN);
  mpfr_set(e_, o.e_, MPFR_RNDU);
}

BigReal::BigReal(BigReal&& o) noexcept {
  mpfr_init2(v_, MPFR_PREC_MIN);
  mpfr_init2(e_, MPFR_PREC_MIN);
  mpfr_swap(v_, o.v_);
  mpfr_swap(e_, o.e_);
}

BigReal& BigReal::operator=(const BigReal& o) {
  if (this != &o) {
    mpfr_set_prec(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
    mpfr_set(e_, o.e_, MPFR_RNDU);
  }
  return *this;
}

BigReal& BigReal::operator=(BigReal&& o) noexcept {
  mpfr_swap(v_, o.v_);
  mpfr_swap(e_, o.e_);
  return *this;
}

BigReal::~BigReal() {
  mpfr_clear(v_);
  mpfr_clear(e_);
}

BigReal BigReal::from_double(double v) {
  BigReal r;
  mpfr_set_d(r.v_, v, MPFR_RNDN);  // exact at >= 53 bits
  return r;
}

BigReal BigReal::from_mpz(const mpz_class& v) {
  BigReal r;
  if (mpfr_set_z(r.v_, v.get_mpz_t(), MPFR_RNDN) != 0) add_rounding(r.e_, r.v_);
  return r;
}

BigReal BigReal::from_mpq(const mpq_class& v) {
  BigReal r;
  if (mpfr_set_q(r.v_, v.get_mpq_t(), MPFR_RNDN) != 0) add_rounding(r.e_, r.v_);
  return r;
}

BigReal BigReal::from_string(const std::string& decimal) {
  BigReal r;
  if (mpfr_set_str(r.v_, decimal.c_str(), 10, MPFR_RNDN) != 0)
    fail(ErrorKind::invalid_argument, "malformed decimal: " + decimal);
  add_rounding(r.e_, r.v_);
  return r;
}

BigReal BigReal::pi() {
  BigReal r;
  mpfr_const_pi(r.v_, MPFR_RNDN);
  add_rounding(r.e_, r.v_);
  return r;
}

BigReal BigReal::log2() {
  BigReal r;
  mpfr_const_log2(r.v_, MPFR_RNDN);
  add_rounding(r.e_, r.v_);
  return r;
}

double BigReal::to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
double BigReal::err_double() const { return mpfr_get_d(e_, MPFR_RNDU); }

int BigReal::sign() const {
  if (mpfr_zero_p(v_)) return 0;
  MPFR_DECL_INIT(t, kErrBits);
  abs_down(t, v_);
  if (mpfr_cmp(t, e_) <= 0) return 0;
  return mpfr_sgn(v_) > 0 ? 1 : -1;
}

BigReal BigReal::midpoint() const {
  BigReal r(*this);
  mpfr_set_zero(r.e_, 1);
  return r;
}

BigReal BigReal::upper() const {
  BigReal r;
  mpfr_set_prec(r.v_, mpfr_get_prec(v_) + kErrBits);
  mpfr_add(r.v_, v_, e_, MPFR_RNDU);
  return r;
}

BigReal BigReal::lower() const {
  BigReal r;
  mpfr_set_prec(r.v_, mpfr_get_prec(v_) + kErrBits);
  mpfr_sub(r.v_, v_, e_, MPFR_RNDD);
  return r;
}

BigReal& BigReal::add_error(const BigReal& bound) {
  MPFR_DECL_INIT(t, kErrBits);
  abs_up(t, bound.v_);
  mpfr_add(t, t, bound.e_, MPFR_RNDU);
  mpfr_add(e_, e_, t, MPFR_RNDU);
  return *this;
}

BigReal& BigReal::add_error_double(double bound) {
  MPFR_DECL_INIT(t, kErrBits);
  mpfr_set_d(t, std::fabs(bound), MPFR_RNDU);
  mpfr_add(e_, e_, t, MPFR_RNDU);
  return *this;
}

std::string BigReal::str(int digits) const {
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Re", digits - 1, v_);
  std::string s(buf);
  mpfr_free_str(buf);
  return s;
}

std::string BigReal::err_str() const {
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.3RUe", e_);
  std::string s(buf);
  mpfr_free_str(buf);
  return s;
}

BigReal operator-(const BigReal& x) {
  BigReal r(x);
  mpfr_neg(r.raw_value(), r.raw_value(), MPFR_RNDN);
  return r;
}

BigReal operator+(const BigReal& x, const BigReal& y) {
  BigReal r;
  int inex = mpfr_add(r.raw_value(), x.value(), y.value(), MPFR_RNDN);
  mpfr_add(r.raw_err(), x.err(), y.err(), MPFR_RNDU);
  add_rounding(r.raw_err(), r.value(), inex);
  return r;
}

BigReal operator-(const BigReal& x, const BigReal& y) {
  BigReal r;
  int inex = mpfr_sub(r.raw_value(), x.value(), y.value(), MPFR_RNDN);
  mpfr_add(r.raw_err(), x.err(), y.err(), MPFR_RNDU);
  add_rounding(r.raw_err(), r.value(), inex);
  return r;
}

BigReal operator*(const BigReal& x, const BigReal& y) {
  BigReal r;
  int inex = mpfr_mul(r.raw_value(), x.value(), y.value(), MPFR_RNDN);
  MPFR_DECL_INIT(ax, kErrBits);
  MPFR_DECL_INIT(ay, kErrBits);
  MPFR_DECL_INIT(t, kErrBits);
  abs_up(ax, x.value());
  abs_up(ay, y.value());
  // |x| ey + |y| ex + ex ey
  mpfr_mul(t, ax, y.err(), MPFR_RNDU);
  mpfr_add(r.raw_err(), r.err(), t, MPFR_RNDU);
  mpfr_mul(t, ay, x.err(), MPFR_RNDU);
  mpfr_add(r.raw_err(), r.err(), t, MPFR_RNDU);
  mpfr_mul(t, x.err(), y.err(), MPFR_RNDU);
  mpfr_add(r.raw_err(), r.err(), t, MPFR_RNDU);
  add_rounding(r.raw_err(), r.value(), inex);
  return r;
}

BigReal operator/(const BigReal& x, const BigReal& y) {
  MPFR_DECL_INIT(ylow, kErrBits);
  abs_down(ylow, y.value());
  mpfr_sub(ylow, ylow, y.err(), MPFR_RNDD);
  if (mpfr_sgn(ylow) <= 0) throw PrecisionExhausted("division by an enclosure containing zero");
  BigReal r;
  int inex = mpfr_div(r.raw_value(), x.value(), y.value(), MPFR_RNDN);
  // (|x| ey + |y| ex) / (|y| (|y| - ey))
  if (!(x.is_exact() && y.is_exact())) {
    MPFR_DECL_INIT(ax, kErrBits);
    MPFR_DECL_INIT(ay, kErrBits);
    MPFR_DECL_INIT(num, kErrBits);
    MPFR_DECL_INIT(t, kErrBits);
    abs_up(ax, x.value());
    abs_up(ay, y.value());
    mpfr_mul(num, ax, y.err(), MPFR_RNDU);
    mpfr_mul(t, ay, x.err(), MPFR_RNDU);
    mpfr_add(num, num, t, MPFR_RNDU);
    abs_down(t, y.value());
    mpfr_mul(t, t, ylow, MPFR_RNDD);
    mpfr_div(num, num, t, MPFR_RNDU);
    mpfr_add(r.raw_err(), r.err(), num, MPFR_RNDU);
  }
  add_rounding(r.raw_err(), r.value(), inex);
  check_finite(r, "division");
  return r;
}

BigReal abs(const BigReal& x) {
  BigReal r(x);
  mpfr_abs(r.raw_value(), r.value(), MPFR_RNDN);
  return r;
}

BigReal sqrt(const BigReal& x) {
  if (x.certainly_negative()) fail(ErrorKind::invalid_argument, "sqrt of a negative number");
  BigReal r;
  MPFR_DECL_INIT(t, kErrBits);
  if (mpfr_sgn(x.value()) > 0) {
    int inex = mpfr_sqrt(r.raw_value(), x.value(), MPFR_RNDN);
    // |sqrt(a) - sqrt(x)| <= ex / sqrt(x)
    if (!x.is_exact()) {
      abs_down(t, r.value());
      mpfr_div(t, x.err(), t, MPFR_RNDU);
      MPFR_DECL_INIT(s, kErrBits);
      mpfr_sqrt(s, x.err(), MPFR_RNDU);
      mpfr_min(t, t, s, MPFR_RNDU);
      mpfr_add(r.raw_err(), r.err(), t, MPFR_RNDU);
    }
    add_rounding(r.raw_err(), r.value(), inex);
  } else {
    mpfr_sqrt(r.raw_err(), x.err(), MPFR_RNDU);
  }
  return r;
}

BigReal exp(const BigReal& x) {
  BigReal r;
  mpfr_exp(r.raw_value(), x.value(), MPFR_RNDN);
  if (!x.is_exact()) {
    // e^x (e^ex - 1)
    MPFR_DECL_INIT(t, kErrBits);
    MPFR_DECL_INIT(u, kErrBits);
    mpfr_set(t, x.value(), MPFR_RNDU);
    mpfr_exp(t, t, MPFR_RNDU);
    mpfr_expm1(u, x.err(), MPFR_RNDU);
    mpfr_mul(t, t, u, MPFR_RNDU);
    mpfr_add(r.raw_err(), r.err(), t, MPFR_RNDU);
  }
  add_rounding(r.raw_err(), r.value());
  check_finite(r, "exp");
  return r;
}

BigReal log(const BigReal& x) {
  if (!x.certainly_positive()) throw PrecisionExhausted("log of an enclosure not certainly positive");
  BigReal r;
  mpfr_log(r.raw_value(), x.value(), MPFR_RNDN);
  if (!x.is_exact()) {
    // -log(1 - ex/x)
    MPFR_DECL_INIT(t, kErrBits);
    abs_down(t, x.value());
    mpfr_div(t, x.err(), t, MPFR_RNDU);
    mpfr_neg(t, t, MPFR_RNDN);
    mpfr_log1p(t, t, MPFR_RNDD);
    mpfr_neg(t, t, MPFR_RNDN);
    mpfr_add(r.raw_err(), r.err(), t, MPFR_RNDU);
  }
  add_rounding(r.raw_err(), r.value());
  check_finite(r, "log");
  return r;
}

BigReal sin(const BigReal& x) {
  BigReal r;
  mpfr_sin(r.raw_value(), x.value(), MPFR_RNDN);
  mpfr_set(r.raw_err(), x.err(), MPFR_RNDU);
  add_rounding(r.raw_err(), r.value());
  return r;
}

BigReal cos(const BigReal& x) {
  BigReal r;
  mpfr_cos(r.raw_value(), x.value(), MPFR_RNDN);
  mpfr_set(r.raw_err(), x.err(), MPFR_RNDU);
  add_rounding(r.raw_err(), r.value());
  return r;
}

BigReal atan(const BigReal& x) {
  BigReal r;
  mpfr_atan(r.raw_value(), x.value(), MPFR_RNDN);
  mpfr_set(r.raw_err(), x.err(), MPFR_RNDU);
  add_rounding(r.raw_err(), r.value());
  return r;
}

BigReal pow_int(const BigReal& x, long n) {
  if (n == 0) return BigReal(1);
  if (n < 0) return BigReal(1) / pow_int(x, -n);
  BigReal r;
  int inex = mpfr_pow_si(r.raw_value(), x.value(), n, MPFR_RNDN);
  if (!x.is_exact()) {
    MPFR_DECL_INIT(ax, kErrBits);
    MPFR_DECL_INIT(t, kErrBits);
    abs_down(ax, x.value());
    if (mpfr_zero_p(ax)) {
      mpfr_pow_si(t, x.err(), n, MPFR_RNDU);
      abs_up(ax, x.value());
      mpfr_add(t, ax, x.err(), MPFR_RNDU);
      mpfr_pow_si(t, t, n, MPFR_RNDU);
    } else {
      // |x|^n ((1 + ex/|x|)^n - 1)
      mpfr_div(t, x.err(), ax, MPFR_RNDU);
      mpfr_log1p(t, t, MPFR_RNDU);
      mpfr_mul_si(t, t, n, MPFR_RNDU);
      mpfr_expm1(t, t, MPFR_RNDU);
      abs_up(ax, x.value());
      mpfr_pow_si(ax, ax, n, MPFR_RNDU);
      mpfr_mul(t, t, ax, MPFR_RNDU);
    }
    mpfr_add(r.raw_err(), r.err(), t, MPFR_RNDU);
  }
  add_rounding(r.raw_err(), r.value(), inex);
  check_finite(r, "pow_int");
  return r;
}

BigReal pow(const BigReal& x, const BigReal& y) { return exp(y * log(x)); }

BigReal floor_exact(const BigReal& x) {
  BigReal lo = x.lower();
  BigReal hi = x.upper();
  mpz_class a, b;
  mpfr_get_z(a.get_mpz_t(), lo.value(), MPFR_RNDD);
  mpfr_get_z(b.get_mpz_t(), hi.value(), MPFR_RNDD);
  if (a != b) throw PrecisionExhausted("floor undecidable at current precision");
  return BigReal::from_mpz(a);
}

BigReal nearest_integer(const BigReal& x) {
  mpz_class n;
  mpfr_get_z(n.get_mpz_t(), x.value(), MPFR_RNDN);
  return BigReal::from_mpz(n);
}

bool value_lt(const BigReal& x, const BigReal& y) { return mpfr_less_p(x.value(), y.value()) != 0; }
bool value_le(const BigReal& x, const BigReal& y) {
  return mpfr_lessequal_p(x.value(), y.value()) != 0;
}

bool certainly_lt(const BigReal& x, const BigReal& y) {
  BigReal a = x.upper();
  BigReal b = y.lower();
  return mpfr_less_p(a.value(), b.value()) != 0;
}

BigReal max_value(const BigReal& x, const BigReal& y) { return value_lt(x, y) ? y : x; }
BigReal min_value(const BigReal& x, const BigReal& y) { return value_lt(x, y) ? x : y; }

BigReal nearest_integer_distance(const BigReal& x) {
  if (mpfr_cmp_d(x.err(), 0.25) >= 0)
    throw PrecisionExhausted("nearest integer ambiguous: error >= 1/4");
  BigReal n = nearest_integer(x);
  BigReal d = abs(x - n);
  // the triangle inequality keeps the true distance within d.err
  return d;
}

bool contains_lattice_point(const BigReal& lo, const BigReal& hi, long denominator) {
  BigReal a = lo.lower();
  BigReal b = hi.upper();
  mpfr_mul_si(a.raw_value(), a.value(), denominator, MPFR_RNDD);
  mpfr_mul_si(b.raw_value(), b.value(), denominator, MPFR_RNDU);
  mpz_class ca, fb;
  mpfr_get_z(ca.get_mpz_t(), a.value(), MPFR_RNDU);
  mpfr_get_z(fb.get_mpz_t(), b.value(), MPFR_RNDD);
  return ca <= fb;
}

// ---------------------------------------------------------------- complex

BigComplex BigComplex::expi(const BigReal& theta) { return BigComplex(cos(theta), sin(theta)); }

BigComplex operator-(const BigComplex& x) { return BigComplex(-x.re(), -x.im()); }
BigComplex operator+(const BigComplex& x, const BigComplex& y) {
  return BigComplex(x.re() + y.re(), x.im() + y.im());
}
BigComplex operator-(const BigComplex& x, const BigComplex& y) {
  return BigComplex(x.re() - y.re(), x.im() - y.im());
}
BigComplex operator*(const BigComplex& x, const BigComplex& y) {
  return BigComplex(x.re() * y.re() - x.im() * y.im(), x.re() * y.im() + x.im() * y.re());
}
BigComplex operator*(const BigComplex& x, const BigReal& y) {
  return BigComplex(x.re() * y, x.im() * y);
}
BigComplex operator/(const BigComplex& x, const BigComplex& y) {
  BigReal n = norm2(y);
  BigComplex z = x * conj(y);
  return BigComplex(z.re() / n, z.im() / n);
}

BigComplex conj(const BigComplex& z) { return BigComplex(z.re(), -z.im()); }
BigReal norm2(const BigComplex& z) { return z.re() * z.re() + z.im() * z.im(); }
BigReal abs(const BigComplex& z) { return sqrt(norm2(z)); }

BigReal arg(const BigComplex& z) {
  BigReal r;
  mpfr_atan2(r.raw_value(), z.im().value(), z.re().value(), MPFR_RNDN);
  MPFR_DECL_INIT(rho, kErrBits);
  mpfr_add(rho, z.re().err(), z.im().err(), MPFR_RNDU);
  if (!mpfr_zero_p(rho)) {
    if (mpfr_sgn(z.re().value()) < 0 && z.im().sign() == 0)
      throw PrecisionExhausted("argument straddles the branch cut");
    MPFR_DECL_INIT(mod, kErrBits);
    MPFR_DECL_INIT(t, kErrBits);
    // |z| from below
    mpfr_hypot(mod, z.re().value(), z.im().value(), MPFR_RNDD);
    mpfr_sub(t, mod, rho, MPFR_RNDD);
    if (mpfr_sgn(t) <= 0) throw PrecisionExhausted("argument of an enclosure containing zero");
    // (pi/2) rho / (|z| - rho)
    mpfr_div(t, rho, t, MPFR_RNDU);
    mpfr_mul_d(t, t, 1.5707963267948968, MPFR_RNDU);
    mpfr_add(r.raw_err(), r.err(), t, MPFR_RNDU);
  }
  add_rounding(r.raw_err(), r.value());
  return r;
}

BigComplex exp(const BigComplex& z) { return BigComplex::expi(z.im()) * exp(z.re()); }

BigComplex log(const BigComplex& z) {
  BigReal half = BigReal::from_double(0.5);
  return BigComplex(half * log(norm2(z)), arg(z));
}

BigComplex pow_int(const BigComplex& z, long n) {
  if (n < 0) return BigComplex(BigReal(1)) / pow_int(z, -n);
  BigComplex result(BigReal(1));
  BigComplex base = z;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

BigComplex widen(const BigComplex& z, const BigReal& bound) {
  BigComplex r = z;
  r.re().add_error(bound);
  r.im().add_error(bound);
  return r;
}

// ---------------------------------------------------------------- continued fractions

ContinuedFraction continued_fraction_expand(const BigReal& x, const mpz_class& q_limit) {
  if (q_limit < 1) fail(ErrorKind::invalid_argument, "q_limit must be >= 1");
  ContinuedFraction cf;
  mpz_class p1 = 1, p2 = 0, q1 = 0, q2 = 1;  // (p_{k-1}, p_{k-2}), (q_{k-1}, q_{k-2})
  BigReal y = x;
  for (int guard = 0; guard < 100000; ++guard) {
    BigReal lo = y.lower();
    BigReal hi = y.upper();
    mpz_class flo, fhi;
    mpfr_get_z(flo.get_mpz_t(), lo.value(), MPFR_RNDD);
    mpfr_get_z(fhi.get_mpz_t(), hi.value(), MPFR_RNDD);
    if (flo != fhi) {
      // every admissible quotient is >= flo; stop if even that overshoots
      if (!cf.quotients.empty() && flo * q1 + q2 > q_limit) break;
      throw PrecisionExhausted("continued fraction quotient undecidable");
    }
    mpz_class a = flo;
    mpz_class pn = a * p1 + p2;
    mpz_class qn = a * q1 + q2;
    if (qn > q_limit) break;
    cf.quotients.push_back(a);
    cf.convergents.push_back({pn, qn});
    p2 = p1;
    p1 = pn;
    q2 = q1;
    q1 = qn;
    BigReal frac = y - BigReal::from_mpz(a);
    if (mpfr_zero_p(frac.value()) && frac.is_exact()) break;
    if (frac.sign() == 0) {
      // true fraction in [0, hi]; next quotient >= floor(1/hi)
      BigReal fhi_v = frac.upper();
      if (mpfr_sgn(fhi_v.value()) <= 0) break;
      BigReal inv = BigReal(1) / fhi_v;
      mpz_class amin;
      mpfr_get_z(amin.get_mpz_t(), inv.lower().value(), MPFR_RNDD);
      if (amin * q1 + q2 > q_limit) break;
      throw PrecisionExhausted("continued fraction remainder undecidable");
    }
    y = BigReal(1) / frac;
  }
  return cf;
}

// ---------------------------------------------------------------- root finding

namespace {

struct Sample {
  BigReal x;
  BigReal fx;  // midpoint of f(x)
  int s = 0;   // certified sign
};

Sample sample(const RealFn& f, const BigReal& x) {
  BigReal v = f(x);
  Sample s{x, v.midpoint(), v.sign()};
  return s;
}

BigReal half(const BigReal& x) {
  BigReal r = x;
  mpfr_div_2ui(r.raw_value(), r.value(), 1, MPFR_RNDN);
  mpfr_div_2ui(r.raw_err(), r.err(), 1, MPFR_RNDU);
  return r;
}

bool mag_le(const BigReal& x, const BigReal& y) {
  return mpfr_cmpabs(x.value(), y.value()) <= 0;
}

}  // namespace

BigReal brent_root(const RealFn& f, const BigReal& a_in, const BigReal& b_in, const BigReal& tol_in) {
  BigReal tol = abs(tol_in.midpoint());
  Sample sa = sample(f, a_in.midpoint());
  Sample sb = sample(f, b_in.midpoint());
  if (sa.s == 0 || sb.s == 0 || sa.s == sb.s) throw NoSignChange("brent_root: no certified sign change");
  const long prec = working_precision();
  {
    BigReal scale = max_value(abs(sa.x), abs(sb.x));
    BigReal floor_tol = scale;
    mpfr_mul_2si(floor_tol.raw_value(), floor_tol.value(), 4 - prec, MPFR_RNDU);
    if (value_lt(tol, floor_tol)) throw PrecisionExhausted("brent_root: tolerance below working precision");
  }
  BigReal eps(1);
  mpfr_mul_2si(eps.raw_value(), eps.value(), -prec, MPFR_RNDN);

  // zeroin: b is the best estimate, c the contrapoint, [b, c] a certified bracket
  Sample a = sa, b = sb, c = sa;
  BigReal d = (b.x - a.x).midpoint(), e = d;
  for (int iter = 0; iter < 20000; ++iter) {
    if (b.s == c.s) {
      c = a;
      d = (b.x - a.x).midpoint();
      e = d;
    }
    if (mpfr_cmpabs(c.fx.value(), b.fx.value()) < 0) {
      a = b;
      b = c;
      c = a;
    }
    BigReal tol1 = (BigReal(2) * eps * abs(b.x) + half(tol)).midpoint();
    BigReal xm = half(c.x - b.x).midpoint();
    if (mag_le(xm, tol1)) {
      BigReal lo = min_value(b.x, c.x), hi = max_value(b.x, c.x);
      BigReal mid = half(lo + hi).midpoint();
      BigReal w = half(hi - lo).upper();
      BigReal res = mid;
      res.add_error(w);
      return res;
    }
    if (!mag_le(e, tol1) && mpfr_cmpabs(a.fx.value(), b.fx.value()) > 0) {
      BigReal s = (b.fx / a.fx).midpoint();
      BigReal p, q;
      if (mpfr_equal_p(a.x.value(), c.x.value())) {
        p = (BigReal(2) * xm * s).midpoint();
        q = (BigReal(1) - s).midpoint();
      } else {
        BigReal qq = (a.fx / c.fx).midpoint();
        BigReal r = (b.fx / c.fx).midpoint();
        p = (s * (BigReal(2) * xm * qq * (qq - r) - (b.x - a.x) * (r - BigReal(1)))).midpoint();
        q = ((qq - BigReal(1)) * (r - BigReal(1)) * (s - BigReal(1))).midpoint();
      }
      if (mpfr_sgn(p.value()) > 0) q = -q;
      p = abs(p);
      BigReal lim1 = (BigReal(3) * xm * q - abs(tol1 * q)).midpoint();
      BigReal lim2 = abs(e * q).midpoint();
      if (value_lt(BigReal(2) * p, min_value(lim1, lim2))) {
        e = d;
        d = (p / q).midpoint();
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    BigReal nx;
    if (!mag_le(d, tol1))
      nx = (b.x + d).midpoint();
    else
      nx = (mpfr_sgn(xm.value()) > 0 ? b.x + tol1 : b.x - tol1).midpoint();
    Sample ns = sample(f, nx);
    if (ns.s == 0) {
      // undecided: probe both sides and keep a certified sub-bracket
      BigReal h = half(tol);
      BigReal lo = min_value(b.x, c.x), hi = max_value(b.x, c.x);
      BigReal xl = max_value((nx - h).midpoint(), lo);
      BigReal xr = min_value((nx + h).midpoint(), hi);
      Sample pl = sample(f, xl), pr = sample(f, xr);
      if (pl.s == 0 || pr.s == 0) throw PrecisionExhausted("brent_root: sign undecidable near root");
      if (pl.s != pr.s) {
        BigReal mid = half(xl + xr).midpoint();
        BigReal res = mid;
        res.add_error(half(xr - xl).upper());
        return res;
      }
      Sample lo_s = value_lt(b.x, c.x) ? b : c;
      Sample hi_s = value_lt(b.x, c.x) ? c : b;
      if (pl.s == lo_s.s) {
        lo_s = pr;
      } else {
        hi_s = pl;
      }
      b = lo_s;
      c = hi_s;
      a = c;
      d = (c.x - b.x).midpoint();
      e = d;
      continue;
    }
    b = ns;
  }
  throw PrecisionExhausted("brent_root: iteration limit");
}

std::vector<CriticalPoint> find_roots_of_derivative(const RealFn& df, const CurvatureBound& d2,
                                                    const BigReal& lo, const BigReal& hi,
                                                    const BigReal& tol) {
  return find_roots_of_derivative(df, d2, RealFn(), CurvatureBound(), lo, hi, tol);
}

std::vector<CriticalPoint> find_roots_of_derivative(const RealFn& df, const CurvatureBound& d2,
                                                    const RealFn& ddf, const CurvatureBound& d3,
                                                    const BigReal& lo, const BigReal& hi,
                                                    const BigReal& tol) {
  struct Job {
    BigReal a, b;
    int sa, sb;
    int depth;
  };
  std::vector<CriticalPoint> roots;
  std::vector<Job> stack;
  const int pieces = 16;
  BigReal width = (hi - lo).midpoint();
  std::vector<BigReal> grid;
  std::vector<int> signs;
  for (int i = 0; i <= pieces; ++i) {
    BigReal x = i == pieces ? hi.midpoint() : (lo + width * BigReal(i) / BigReal(pieces)).midpoint();
    grid.push_back(x);
    signs.push_back(df(x).sign());
  }
  for (int i = pieces - 1; i >= 0; --i) stack.push_back({grid[i], grid[i + 1], signs[i], signs[i + 1], 0});

  while (!stack.empty()) {
    Job j = stack.back();
    stack.pop_back();
    BigReal w = j.b - j.a;
    BigReal m = half(j.a + j.b).midpoint();
    BigReal dm = df(m);
    BigReal slack = d2(j.a, j.b) * half(w);
    if (certainly_lt(slack.upper(), abs(dm).lower())) continue;  // |f'| stays away from 0
    if (ddf && d3 && certainly_lt((d3(j.a, j.b) * half(w)).upper(), abs(ddf(m)).lower())) {
      // f' strictly monotone here: at most one root
      if (j.sa != 0 && j.sb != 0) {
        if (j.sa != j.sb) {
          try {
            roots.push_back({brent_root(df, j.a, j.b, tol).midpoint(), true});
          } catch (const PrecisionExhausted&) {
            roots.push_back({m, false});
          }
        }
      } else {
        roots.push_back({j.sa == 0 ? j.a : j.b, j.sa != 0 || j.sb != 0});
      }
      continue;
    }
    if (!value_lt(tol, w)) {
      int sa = j.sa, sb = j.sb;
      if (sa == 0 || sb == 0) {
        // an endpoint sits on (or next to) the root: look one tolerance further out
        BigReal l = max_value((j.a - tol).midpoint(), lo.midpoint());
        BigReal r = min_value((j.b + tol).midpoint(), hi.midpoint());
        sa = df(l).sign();
        sb = df(r).sign();
      }
      if (sa != 0 && sb != 0) {
        if (sa != sb) roots.push_back({m, true});
      } else {
        roots.push_back({m, false});
      }
      continue;
    }
    if (j.sa != 0 && j.sb != 0 && j.sa != j.sb && j.depth > 40) {
      // localize directly, then keep scanning the remainders
      try {
        BigReal r = brent_root(df, j.a, j.b, tol);
        roots.push_back({r.midpoint(), true});
        BigReal rl = r.lower(), rh = r.upper();
        int sl = df(rl).sign(), sh = df(rh).sign();
        if (value_lt(j.a, rl)) stack.push_back({j.a, rl, j.sa, sl, j.depth + 1});
        if (value_lt(rh, j.b)) stack.push_back({rh, j.b, sh, j.sb, j.depth + 1});
        continue;
      } catch (const Error&) {
        // fall through to bisection
      }
    }
    int sm = dm.sign();
    stack.push_back({m, j.b, sm, j.sb, j.depth + 1});
    stack.push_back({j.a, m, j.sa, sm, j.depth + 1});
  }
  std::sort(roots.begin(), roots.end(),
            [](const CriticalPoint& x, const CriticalPoint& y) { return value_lt(x.t, y.t); });
  std::vector<CriticalPoint> out;
  for (auto& r : roots) {
    if (!out.empty() && !value_lt(BigReal(2) * tol, abs(r.t - out.back().t))) {
      out.back().certified = out.back().certified && r.certified;
      continue;
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace cartan
