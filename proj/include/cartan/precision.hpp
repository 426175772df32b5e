#pragma once

#include <mpfr.h>
#include <gmpxx.h>

#include <functional>
#include <string>
#include <vector>

#include "cartan/error.hpp"

namespace cartan {

constexpr long kMinPrecision = 64;
constexpr long kMaxPrecision = 1L << 16;
constexpr long kDefaultPrecision = 256;

// Working precision of the calling thread, in bits.
long working_precision();

// RAII scope setting the working precision of the calling thread.
class PrecisionScope {
 public:
  explicit PrecisionScope(long bits);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  long saved_;
};

inline PrecisionScope with_precision(long bits) { return PrecisionScope(bits); }

// Runs fn at `bits`, doubling on PrecisionExhausted up to `ceiling`.
template <class Fn>
auto with_escalation(long bits, long ceiling, Fn&& fn) -> decltype(fn()) {
  for (long b = bits;; b *= 2) {
    PrecisionScope scope(b);
    try {
      return fn();
    } catch (const PrecisionExhausted&) {
      if (2 * b > ceiling) throw;
    }
  }
}

// A value with a rigorous absolute error bound: |true - value| <= err.
class BigReal {
 public:
  BigReal();
  BigReal(long v);  // NOLINT(google-explicit-constructor)
  BigReal(int v) : BigReal(static_cast<long>(v)) {}  // NOLINT
  BigReal(const BigReal& o);
  BigReal(BigReal&& o) noexcept;
  BigReal& operator=(const BigReal& o);
  BigReal& operator=(BigReal&& o) noexcept;
  ~BigReal();

  static BigReal from_double(double v);
  static BigReal from_mpz(const mpz_class& v);
  static BigReal from_mpq(const mpq_class& v);
  static BigReal from_string(const std::string& decimal);
  static BigReal pi();
  static BigReal log2();

  mpfr_srcptr value() const { return v_; }
  mpfr_srcptr err() const { return e_; }
  long precision() const { return mpfr_get_prec(v_); }

  double to_double() const;
  double err_double() const;  // rounded up
  bool is_exact() const { return mpfr_zero_p(e_) != 0; }

  // +1 / -1 when the sign is certain, 0 when |value| <= err.
  int sign() const;
  bool certainly_positive() const { return sign() > 0; }
  bool certainly_negative() const { return sign() < 0; }
  // value with the error dropped
  BigReal midpoint() const;
  // value +- err as exact numbers (rounded outward)
  BigReal upper() const;
  BigReal lower() const;

  BigReal& add_error(const BigReal& bound);  // err += |bound.value| + bound.err
  BigReal& add_error_double(double bound);

  std::string str(int digits = 30) const;
  std::string err_str() const;

  mpfr_ptr raw_value() { return v_; }
  mpfr_ptr raw_err() { return e_; }

 private:
  mpfr_t v_;
  mpfr_t e_;
};

BigReal operator-(const BigReal& x);
BigReal operator+(const BigReal& x, const BigReal& y);
BigReal operator-(const BigReal& x, const BigReal& y);
BigReal operator*(const BigReal& x, const BigReal& y);
BigReal operator/(const BigReal& x, const BigReal& y);
inline BigReal& operator+=(BigReal& x, const BigReal& y) { return x = x + y; }
inline BigReal& operator-=(BigReal& x, const BigReal& y) { return x = x - y; }
inline BigReal& operator*=(BigReal& x, const BigReal& y) { return x = x * y; }
inline BigReal& operator/=(BigReal& x, const BigReal& y) { return x = x / y; }

BigReal abs(const BigReal& x);
BigReal sqrt(const BigReal& x);
BigReal exp(const BigReal& x);
BigReal log(const BigReal& x);
BigReal sin(const BigReal& x);
BigReal cos(const BigReal& x);
BigReal atan(const BigReal& x);
BigReal pow_int(const BigReal& x, long n);
BigReal pow(const BigReal& x, const BigReal& y);  // x > 0
BigReal floor_exact(const BigReal& x);            // throws if ambiguous
BigReal nearest_integer(const BigReal& x);        // value of round(x), exact

// Comparisons on values only (no certification).
bool value_lt(const BigReal& x, const BigReal& y);
bool value_le(const BigReal& x, const BigReal& y);
// Certified: true only if the enclosures are disjoint in the right order.
bool certainly_lt(const BigReal& x, const BigReal& y);
BigReal max_value(const BigReal& x, const BigReal& y);
BigReal min_value(const BigReal& x, const BigReal& y);

// ||x||, distance to the nearest integer.
BigReal nearest_integer_distance(const BigReal& x);

// True when [x - err, x + err] contains an element of (1/denominator) Z.
bool contains_lattice_point(const BigReal& lo, const BigReal& hi, long denominator = 1);

class BigComplex {
 public:
  BigComplex() = default;
  BigComplex(BigReal re, BigReal im = BigReal()) : re_(std::move(re)), im_(std::move(im)) {}

  const BigReal& re() const { return re_; }
  const BigReal& im() const { return im_; }
  BigReal& re() { return re_; }
  BigReal& im() { return im_; }

  // unit complex number e^{i theta}
  static BigComplex expi(const BigReal& theta);

 private:
  BigReal re_;
  BigReal im_;
};

BigComplex operator-(const BigComplex& x);
BigComplex operator+(const BigComplex& x, const BigComplex& y);
BigComplex operator-(const BigComplex& x, const BigComplex& y);
BigComplex operator*(const BigComplex& x, const BigComplex& y);
BigComplex operator*(const BigComplex& x, const BigReal& y);
BigComplex operator/(const BigComplex& x, const BigComplex& y);
inline BigComplex& operator+=(BigComplex& x, const BigComplex& y) { return x = x + y; }
inline BigComplex& operator*=(BigComplex& x, const BigComplex& y) { return x = x * y; }

BigComplex conj(const BigComplex& z);
BigReal norm2(const BigComplex& z);
BigReal abs(const BigComplex& z);
BigReal arg(const BigComplex& z);
BigComplex exp(const BigComplex& z);
BigComplex log(const BigComplex& z);  // principal branch
BigComplex pow_int(const BigComplex& z, long n);
// Adds `bound` to the error of both components (enclosure of z + O_1(bound)).
BigComplex widen(const BigComplex& z, const BigReal& bound);

struct Convergent {
  mpz_class p;
  mpz_class q;
};

struct ContinuedFraction {
  std::vector<mpz_class> quotients;
  std::vector<Convergent> convergents;
};

// All convergents p/q of x with q <= q_limit.
ContinuedFraction continued_fraction_expand(const BigReal& x, const mpz_class& q_limit);

using RealFn = std::function<BigReal(const BigReal&)>;
// Upper bound for |f''| on [lo, hi].
using CurvatureBound = std::function<BigReal(const BigReal&, const BigReal&)>;

// Root of f in [a, b]; value is the midpoint of a certified bracket, err its half width.
BigReal brent_root(const RealFn& f, const BigReal& a, const BigReal& b, const BigReal& tol);

struct CriticalPoint {
  BigReal t;
  bool certified = true;  // false: sign of f' undecidable near t, kept as a split point
};

// Sign changes of df on [lo, hi], sorted ascending.
std::vector<CriticalPoint> find_roots_of_derivative(const RealFn& df, const CurvatureBound& d2,
                                                    const BigReal& lo, const BigReal& hi,
                                                    const BigReal& tol);
// With f'' and a bound on |f'''|: pieces where f' is provably monotone are settled at once.
std::vector<CriticalPoint> find_roots_of_derivative(const RealFn& df, const CurvatureBound& d2,
                                                    const RealFn& ddf, const CurvatureBound& d3,
                                                    const BigReal& lo, const BigReal& hi,
                                                    const BigReal& tol);

}  // namespace cartan

namespace cartan {

using BigMatrix = std::vector<std::vector<BigReal>>;

// Gauss-Jordan with partial pivoting; pivots must be certainly nonzero
// (PrecisionExhausted otherwise).
BigMatrix inverse(const BigMatrix& a);
BigReal determinant(const BigMatrix& a);
std::vector<BigReal> mat_vec(const BigMatrix& a, const std::vector<BigReal>& v);

}  // namespace cartan
