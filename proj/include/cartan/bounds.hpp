#pragma once

#include <gmpxx.h>

#include <vector>

#include "cartan/cyclotomic.hpp"
#include "cartan/principal.hpp"

namespace cartan {

struct ReductionStep {
  int companion = 0;
  BigReal T;
  mpz_class r;
  BigReal r_delta;   // ||r delta||
  BigReal r_lambda;  // ||r lambda||
  BigReal Xi;        // bound for log|q_c^{-1}|
  BigReal B;         // resulting bound for |b_pivot|
  // lambda = a - n delta up to eta: the homogeneous form x - delta y is reduced instead
  bool homogeneous = false;
};

struct BoundLedger {
  int cusp = 0;
  BigReal mho1;
  BigReal mho2;
  BigReal B0;
  std::vector<ReductionStep> steps;  // chain of the companion that gave Xi_hat
  int companion = 0;
  BigReal Xi_hat;
  BigReal Xi_hat_spread;  // max/min of the per-companion Xi_hat
  BigReal Upsilon;        // set by the quick enumeration
  bool stalled = false;
  long precision = 0;
};

// C(n) = 40000 * 30^n * n^{5.5}
BigReal matveev_C(int n);

// B0 = 2 mho1 log mho1 + 2 mho2 with the heights of the basis units
BoundLedger baker_B0(const GroupContext& ctx, const UnitSystem& units, const CuspFrame& frame);

// bits needed so that ||r delta|| is decided at r ~ T B
long reduction_precision(const BigReal& B, const BigReal& T_max);

struct ReductionOptions {
  double T0 = 10;
  int max_iterations = 6;
  double min_relative_gain = 0.01;
};

// Iterated reduction of `B_current` for every companion of the pivot; the
// smallest Xi is kept and clamped below by p log Theta and p log 2.
// The frame must carry enough precision (see reduction_precision).
void davenport_reduce(const CuspFrame& frame, const BigReal& B_current, BoundLedger& ledger,
                      const ReductionOptions& opt = {});

// the bound for log|q_c^{-1}| implied by |b_pivot| <= B alone
BigReal xi_from_b(const CuspFrame& frame, const BigReal& B);

}  // namespace cartan
