#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "cartan/jfunction.hpp"
#include "cartan/principal.hpp"

namespace cartan {

struct TInterval {
  BigReal lo;
  BigReal hi;
};

struct EnumDomain {
  int cusp = 0;
  std::vector<TInterval> t_intervals;  // negative piece first
  BigReal Upsilon;
};

// [-e^{-pi sqrt3/p}, -e^{-Upsilon/p}] u [e^{-Upsilon/p}, e^{-2 pi/p}]
EnumDomain enum_domain(const CuspFrame& f, const BigReal& Upsilon);

struct QuickResult {
  BigReal Upsilon_init;
  BigReal Upsilon;
  BigReal epsilon;
  long scanned = 0;
  bool hit = false;
  mpz_class hit_b1;
};

// Scans b_pivot in descending l_1 from Xi_hat down to Upsilon_init.
QuickResult quick_enumerate(const CuspFrame& f, const BigReal& Xi_hat,
                            const std::optional<BigReal>& Upsilon_init = {}, long denominator = 1);

struct Candidate {
  int cusp = 0;
  std::vector<mpz_class> b;  // numerators of b_0 .. b_{d-1} over `denominator`; b_0 = m
  long denominator = 1;
  BigReal t;
  BigReal q;
  BigReal j;
  Classification cls = Classification::rejected;
  int disc = 0;
  mpz_class j_int;
  std::string note;
};

struct MonotoneInterval {
  BigReal lo;
  BigReal hi;
  int direction = 0;     // +1 increasing, -1 decreasing
  bool flagged = false;  // an end is an uncertified critical point
};

struct SlowUnit {
  int cusp = 0;
  int interval = 0;
  // numerators of b_pivot, inclusive; scanned from b_first towards b_last
  long b_first = 0;
  long b_last = 0;
  long count() const { return (b_first > b_last ? b_first - b_last : b_last - b_first) + 1; }
};

struct SlowStats {
  long b_values = 0;
  long no_root = 0;         // b not attained on the interval
  long pruned_first = 0;    // some interval without an integer
  long pruned_refined = 0;  // after the epsilon_1 refinement
  long pruned_verify = 0;   // the direct product disagrees
  long candidates = 0;
  SlowStats& operator+=(const SlowStats& o);
};

struct UnitResult {
  SlowUnit unit;
  std::vector<Candidate> candidates;
  SlowStats stats;
  std::vector<std::string> notes;
};

struct SlowOptions {
  double eps_target = 1e-10;
  long denominator = 1;
  long chunk = 64;  // b values per work unit
};

class SlowEnumerator {
 public:
  // `frame` must be built with nu = choose_nu(ctx, Theta, eps_target)
  SlowEnumerator(const GroupContext& ctx, const UnitSystem& units, const CuspFrame& frame, const BigReal& Upsilon,
                 const SlowOptions& opt = {});

  const EnumDomain& domain() const { return domain_; }
  const std::vector<MonotoneInterval>& intervals() const { return intervals_; }
  const BigReal& epsilon() const { return eps_; }
  const FkFamily& family() const { return fk_; }

  std::vector<SlowUnit> plan() const;
  UnitResult run(const SlowUnit& u) const;
  // the unit's precision and thread are the caller's
  std::vector<UnitResult> run_all() const;

 private:
  struct Bracket {
    bool empty = false;
    BigReal lo, hi;
  };
  Bracket solve_window(const MonotoneInterval& I, const BigReal& b, const BigReal& eps) const;
  bool intervals_hold(const Bracket& br, const BigReal& eps) const;
  // nullopt: the direct product rules the b value out
  std::optional<Candidate> verify(const Bracket& br, const BigReal& b1, long b1_num, std::string& note) const;

  const GroupContext* ctx_;
  const CuspFrame* frame_;
  CuspFrame fine_;  // same cusp at 4x precision, no series
  long fine_bits_ = 0;
  SlowOptions opt_;
  FkFamily fk_;
  EnumDomain domain_;
  std::vector<MonotoneInterval> intervals_;
  BigReal eps_;
  int pivot_;
};

// Monotonicity intervals of f_pivot on [lo, hi].
std::vector<MonotoneInterval> monotone_intervals(const FkFamily& fk, int k, const BigReal& lo, const BigReal& hi);

}  // namespace cartan
