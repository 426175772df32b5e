#pragma once

#include <gmpxx.h>

#include <optional>
#include <vector>

#include "cartan/cyclotomic.hpp"
#include "cartan/modp.hpp"
#include "cartan/precision.hpp"

namespace cartan {

// sum_j c[j] zeta^j, j = 0..p-1, kept unreduced
struct RootSum {
  std::vector<mpq_class> c;
  explicit RootSum(int p = 0) : c(p) {}
  int p() const { return static_cast<int>(c.size()); }
  RootSum& operator+=(const RootSum& o);
  RootSum& scale(const mpq_class& r);
  mpq_class l1() const;
  bool times_integral(long k) const;  // k * c[j] in Z for all j
  BigReal real_part() const;
  BigComplex value() const;
  CycloElement element() const { return CycloElement::from_unreduced(p(), c); }
};

// the factor 1 - t^e zeta^r, t = q^{1/p}
struct Factor {
  long e = 0;
  long r = 0;
};

mpq_class ell_of(const mpq_class& a1);  // B2(a1)/2

struct SiegelTerm {
  LiftedPoint lp;
  int p = 0;
  long k1 = 0;  // p * t1, in [0, p)
  long s = 0;   // p * t2
  mpq_class ell;

  static SiegelTerm make(const LiftedPoint& lp, int p);
  bool constant_factor() const { return k1 == 0; }
  // factor kept as a logarithm in the log-form expansion; none when t1 = 0
  std::optional<Factor> retained() const;
  // all product factors with exponent e <= max_e, in increasing n
  std::vector<Factor> factors(long max_e) const;
};

// gamma_a including the leading minus sign of the product formula
BigComplex siegel_gamma(const SiegelTerm& a);
// q^x = exp(2 pi i tau x)
BigComplex q_power(const BigComplex& tau, const mpq_class& x);

// g_a(tau) from the product, n_terms factor pairs, tail folded into err
BigComplex siegel_direct(const SiegelTerm& a, const BigComplex& tau, int n_terms);

enum class SeriesMode { log_only, log_plus_series, no_log };

// log(g_a / (gamma_a q^ell_a)); the error constant of the mode is folded into err.
BigComplex siegel_series(const SiegelTerm& a, const BigComplex& tau, SeriesMode mode, int nu);

// coefficients of t^k, k = 0..nu (entry 0 is zero); exclude_retained gives beta'
std::vector<RootSum> beta_coefficients(const SiegelTerm& a, int nu, bool exclude_retained);

struct OrbitUnit {
  int label = 0;
  int m = 0;
  std::vector<SiegelTerm> terms;
};

// terms are lifts of (orbit * sigma), sigma given mod p (identity for the cusp at infinity)
OrbitUnit build_orbit_unit(const GroupContext& ctx, const Orbit& orbit, const ModMat& sigma = {1, 0, 0, 1},
                           bool alternate_lift = false);
// log|u_O(tau)| = m sum log|g_a|
BigReal orbit_unit_log_abs(const OrbitUnit& u, const BigComplex& tau, int n_terms);

struct CuspSeries {
  int cusp = 0;
  int ell = 0;  // Galois index / unit orbit label
  int p = 0;
  int m = 0;
  int size = 0;           // (p+1)|H|
  mpq_class ord;          // ord_c U^{sigma_ell}
  BigReal log_gamma;      // log|gamma_{c,ell}|
  std::vector<Factor> retained;   // each with multiplicity m
  std::vector<RootSum> beta_prime;  // times m, index 0..nu
  std::vector<RootSum> beta;
  std::vector<SiegelTerm> terms;
  int nu = 0;
};

CuspSeries cusp_series(const GroupContext& ctx, int ell, int cusp, int nu);

enum class UnitLogMode { full_log, truncated, small_q, small_q_series };

// log|U^{sigma_ell}(P)| at real t = q_c^{1/p}, with the matching error constant
BigReal unit_log_abs(const CuspSeries& s, const BigReal& t, UnitLogMode mode);
// reference: the full product at real t, tail bounded rigorously
BigReal unit_log_abs_direct(const CuspSeries& s, const BigReal& t);

// log|1 - x zeta^r| for real x, |x| < 1
BigReal log_abs_one_minus(const BigReal& x, long r, int p);
const std::vector<BigReal>& cos_table(int p);  // cos(2 pi j / p)

struct IdentityCheck {
  bool ok = false;
  BigReal residual;       // |prod - p^{12p}| / p^{12p}
  BigReal orbit_residual; // |prod_l u_{O_l} - (+-p^m)| / p^m
  bool positive = false;
};
IdentityCheck product_identity_check(const GroupContext& ctx, const BigComplex& tau);

// height bound data: the exact gamma_{c,O} modulo roots of unity
CycloElement gamma_element(const CuspSeries& s);

}  // namespace cartan
