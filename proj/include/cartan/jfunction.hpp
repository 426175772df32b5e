#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "cartan/precision.hpp"

namespace cartan {

// c_0 = 744, c_1 = 196884, ...: j(q) = 1/q + sum c_n q^n
std::vector<mpz_class> j_coefficients(int N);

// j = E4^3 / Delta from the Eisenstein series and the eta product, any |q| < 1
BigComplex j_modular(const BigComplex& q);

// j(e^{-pi sqrt3}) - j_N(e^{-pi sqrt3}), rounded up
BigReal j_tail_bound(int N);

// j_N(q) with the tail folded into err; needs |q| <= e^{-pi sqrt3}
BigComplex evaluate_j(const BigComplex& q, int N);
BigReal evaluate_j(const BigReal& q, int N);
// N raised until err < 1/4
BigReal evaluate_j(const BigReal& q);

struct CmValue {
  int disc;
  mpz_class j;
};
// the 13 rational CM j-invariants
const std::vector<CmValue>& cm_table();

enum class Classification { cm_match, integer_j_unverified, rejected, unresolved };
std::string to_string(Classification c);

struct JClass {
  Classification cls = Classification::rejected;
  mpz_class nearest;
  int disc = 0;  // for cm_match
};
// throws PrecisionExhausted when err >= 1/2
JClass classify_j(const BigReal& j);

// trace of Frobenius at ell of y^2 = x^3 + 3j(1728-j)x + 2j(1728-j)^2, which has invariant j
long frobenius_trace(long j, long ell);

struct SmallJResult {
  long j = 0;
  bool excluded = false;
  long witness_ell = 0;
  long a_ell = 0;
};
// j in 1..1727: excluded when some a_ell is nonzero mod p with a_ell^2 - 4 ell a nonzero square mod p
SmallJResult small_j_filter(int p, long j, long ell_budget);

}  // namespace cartan
