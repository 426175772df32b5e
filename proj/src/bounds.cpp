#include "cartan/bounds.hpp"

#include <cmath>
#include <optional>

namespace cartan {

namespace {

BigReal dec(const char* s) { return BigReal::from_string(s); }

struct Chain {
  std::vector<ReductionStep> steps;
  BigReal Xi;
  bool stalled = false;
};

// One companion: iterate until Xi stops shrinking.
Chain reduce_pair(const CuspFrame& f, int k2, const BigReal& B_start, const ReductionOptions& opt) {
  const int k1 = f.pivot;
  const BigReal& d1 = f.delta[k1];
  BigReal delta = f.delta[k2] / d1;
  BigReal lambda = (f.delta[k2] * f.theta[k1] - d1 * f.theta[k2]) / d1;
  BigReal abs_delta = abs(delta);
  BigReal p(f.p);
  Chain c;
  BigReal B = B_start;
  std::optional<BigReal> prev;
  const double T_max = 1e6 * opt.T0;
  const BigReal K = dec("3.2") * (BigReal(1) + abs_delta) * f.Theta;
  // lambda in Z + Z delta (up to eta) defeats the inhomogeneous lemma
  long n_rel = 0;
  BigReal eta;
  bool homogeneous = false;
  {
    BigReal thresh = pow_int(BigReal(2), -(working_precision() / 4));
    for (long n = -1000; n <= 1000 && !homogeneous; ++n) {
      BigReal dist = nearest_integer_distance(lambda + BigReal(n) * delta);
      if (certainly_lt(dist, thresh)) {
        homogeneous = true;
        n_rel = n;
        eta = dist.upper();
      }
    }
  }
  for (int it = 0; it < opt.max_iterations; ++it) {
    std::optional<ReductionStep> found;
    if (homogeneous) {
      // Lambda = X - delta Y with Y = b_k1 + n, |Y| <= B + |n|; for 0 < |Y| < q_{N+1},
      // ||Y delta|| >= ||q_N delta|| with q_N the last convergent below the limit
      BigReal lim = (B + BigReal(std::labs(n_rel))).upper();
      mpz_class limit;
      mpfr_get_z(limit.get_mpz_t(), lim.value(), MPFR_RNDD);
      ContinuedFraction cf = continued_fraction_expand(delta, limit);
      if (!cf.convergents.empty()) {
        const mpz_class& r = cf.convergents.back().q;
        BigReal nd = nearest_integer_distance(BigReal::from_mpz(r) * delta);
        BigReal gap = nd.lower() - eta;
        if (gap.certainly_positive()) {
          ReductionStep s;
          s.companion = k2;
          s.T = BigReal(1);
          s.r = r;
          s.r_delta = nd;
          s.r_lambda = eta;
          s.homogeneous = true;
          BigReal xi = p * log(K / gap);
          // Y = 0, X != 0: |Lambda| >= 1 - eta
          xi = max_value(xi, p * log(K / (BigReal(1) - eta)));
          // X = Y = 0 pins b_k1 = -n, so l_1 is fixed up to the error term
          xi = max_value(xi, (abs(BigReal(-n_rel) - f.theta[k1]) + dec("3.2") * f.Theta) / abs(d1));
          s.Xi = xi.upper();
          s.B = (abs(d1) * s.Xi + abs(f.theta[k1]) + dec("3.2")).upper();
          found = s;
        }
      }
    }
    for (double Td = opt.T0; !homogeneous && Td <= T_max; Td *= 10) {
      BigReal T = BigReal::from_double(Td);
      BigReal TB = (T * B).upper();
      mpz_class limit;
      mpfr_get_z(limit.get_mpz_t(), TB.value(), MPFR_RNDD);
      ContinuedFraction cf = continued_fraction_expand(delta, limit);
      if (cf.convergents.empty()) continue;
      const mpz_class& r = cf.convergents.back().q;
      BigReal R = BigReal::from_mpz(r);
      BigReal nd = nearest_integer_distance(R * delta);
      BigReal nl = nearest_integer_distance(R * lambda);
      if (!certainly_lt(nd, BigReal(1) / TB)) continue;
      if (value_lt(nl.lower(), BigReal(2) / T)) continue;
      BigReal gap = nl.lower() - BigReal(1) / T;
      if (!gap.certainly_positive()) continue;
      ReductionStep s;
      s.companion = k2;
      s.T = T;
      s.r = r;
      s.r_delta = nd;
      s.r_lambda = nl;
      s.Xi = (p * log(dec("3.2") * (BigReal(1) + abs_delta) * f.Theta * TB / gap)).upper();
      s.B = (abs(d1) * s.Xi + abs(f.theta[k1]) + dec("3.2")).upper();
      found = s;
      break;
    }
    if (!found) {
      c.stalled = true;
      break;
    }
    if (prev && !value_lt(found->Xi, *prev)) break;
    bool small_gain = prev && value_lt(*prev - found->Xi, *prev * BigReal::from_double(opt.min_relative_gain));
    c.steps.push_back(*found);
    prev = found->Xi;
    B = found->B;
    if (small_gain) break;
  }
  c.Xi = prev ? *prev : xi_from_b(f, B_start);
  return c;
}

}  // namespace

BigReal matveev_C(int n) {
  if (n < 1) fail(ErrorKind::invalid_argument, "matveev_C needs n >= 1");
  return BigReal(40000) * pow_int(BigReal(30), n) * pow(BigReal(n), dec("5.5"));
}

BoundLedger baker_B0(const GroupContext& ctx, const UnitSystem& units, const CuspFrame& frame) {
  const int d = ctx.d();
  if (d < 3) fail(ErrorKind::invalid_argument, "baker_B0 needs d >= 3");
  BoundLedger L;
  L.cusp = frame.cusp;
  BigReal p(ctx.p());
  BigReal hprod(1);
  for (const auto& u : units.etas) hprod *= height(u);
  L.mho1 = (BigReal(100000000) * frame.delta_max * pow_int(BigReal(9), d) * pow_int(BigReal(d), 6) *
            pow_int(p, 4L * d + 2) * hprod)
               .upper();
  L.mho2 = (L.mho1 + frame.theta_max + BigReal(4) * frame.kappa * pow_int(p, 3)).upper();
  L.B0 = (BigReal(2) * L.mho1 * log(L.mho1) + BigReal(2) * L.mho2).upper();
  return L;
}

long reduction_precision(const BigReal& B, const BigReal& T_max) {
  BigReal x = T_max * B * B;
  double l2 = log(x).to_double() / std::log(2.0);
  return 64 + 2 * static_cast<long>(std::ceil(l2));
}

BigReal xi_from_b(const CuspFrame& f, const BigReal& B) {
  const BigReal& d1 = f.delta[f.pivot];
  return ((B + abs(f.theta[f.pivot]) + dec("3.2")) / abs(d1)).upper();
}

void davenport_reduce(const CuspFrame& frame, const BigReal& B_current, BoundLedger& ledger,
                      const ReductionOptions& opt) {
  if (frame.pivot < 0) fail(ErrorKind::invalid_argument, "davenport_reduce: no nonzero delta");
  ledger.cusp = frame.cusp;
  ledger.precision = working_precision();
  std::optional<Chain> best;
  std::optional<BigReal> worst;
  bool any_stall = false;
  for (int k2 = 1; k2 < frame.d; ++k2) {
    if (k2 == frame.pivot || frame.delta[k2].sign() == 0) continue;
    Chain c = reduce_pair(frame, k2, B_current, opt);
    any_stall = any_stall || (c.stalled && c.steps.empty());
    if (c.steps.empty()) continue;
    if (!worst || value_lt(*worst, c.Xi)) worst = c.Xi;
    if (!best || value_lt(c.Xi, best->Xi)) best = std::move(c);
  }
  BigReal p(frame.p);
  BigReal floor = max_value(p * log(frame.Theta), p * BigReal::log2()).upper();
  if (best) {
    ledger.steps = best->steps;
    ledger.companion = best->steps.front().companion;
    ledger.Xi_hat = max_value(best->Xi, floor);
    ledger.Xi_hat_spread = (*worst / best->Xi).upper();
    ledger.stalled = false;
  } else {
    ledger.steps.clear();
    ledger.companion = 0;
    ledger.Xi_hat = max_value(xi_from_b(frame, B_current), floor);
    ledger.Xi_hat_spread = BigReal(1);
    ledger.stalled = any_stall || frame.d < 3;
  }
}

}  // namespace cartan
