#pragma once

#include <gmpxx.h>

#include <vector>

#include "cartan/cyclotomic.hpp"
#include "cartan/modp.hpp"
#include "cartan/precision.hpp"
#include "cartan/siegel.hpp"

namespace cartan {

struct UnitLogMatrix {
  BigMatrix M;       // M[k][l] = log|u_l^{sigma_k}|
  BigMatrix alpha;   // M^{-1}
  BigReal residual;  // max |M alpha - I|
  BigReal kappa;     // max_k sum_l |alpha_kl|

  static UnitLogMatrix build(const GroupContext& ctx, const UnitSystem& units);
};

enum class RelationMode { log_form, small_q, series, direct };

// Everything attached to one cusp: delta, theta, the error constant Theta and
// the per-orbit expansions the principal relation is built from.
struct CuspFrame {
  int cusp = 0;
  int p = 0;
  int d = 0;
  int m = 0;
  int nu = 0;
  BigMatrix alpha;
  std::vector<CuspSeries> series;  // index l = unit orbit
  std::vector<mpq_class> ord;      // ord_c U^{sigma_l}
  std::vector<BigReal> delta;      // delta_{c,k}
  std::vector<BigReal> theta;      // vartheta_{c,k}
  BigReal kappa;
  BigReal Theta;
  BigReal delta_max;
  BigReal theta_max;
  int pivot = -1;  // k >= 1 with the smallest nonzero |delta_k|; -1 if none

  // Theta (2.2 nu / p + 3.1) |t|^{nu + 1}
  BigReal series_error(const BigReal& abs_t) const;
};

CuspFrame build_cusp_frame(const GroupContext& ctx, const UnitLogMatrix& L, int cusp, int nu);

// nu large enough that the series error at |t| = e^{-pi sqrt3 / p} is <= target
int choose_nu(const GroupContext& ctx, const BigReal& Theta, double target);

// b_k = sum_l alpha_kl log|U^{sigma_l}(P)|, P with q_c^{1/p} = t (real)
std::vector<BigReal> bk_from_t(const CuspFrame& f, const BigReal& t, RelationMode mode);

// bound for max_k |b_k| at a point with log|q_c^{-1}| = log_q_inv
BigReal b_bound(const CuspFrame& f, const BigReal& log_q_inv);

// f_k(t) = -p delta_k log|t| + theta_k + Q_k(t) + sum over retained factors;
// agrees with b_k up to f.series_error(|t|).
class FkFamily {
 public:
  explicit FkFamily(const CuspFrame& f);

  int d() const { return d_; }
  BigReal eval(int k, const BigReal& t) const;
  BigReal deriv(int k, const BigReal& t) const;
  // upper bound for |f_k''| on [lo, hi], an interval not containing 0
  BigReal second_deriv_bound(int k, const BigReal& lo, const BigReal& hi) const;
  BigReal deriv2(int k, const BigReal& t) const;
  BigReal third_deriv_bound(int k, const BigReal& lo, const BigReal& hi) const;

 private:
  struct Term {
    long e = 0;
    long r = 0;
    std::vector<BigReal> w;  // per k
  };
  int p_ = 0;
  int d_ = 0;
  std::vector<BigReal> logc_;               // -p delta_k
  std::vector<BigReal> theta_;
  std::vector<std::vector<BigReal>> q_;     // q_[k][n], n = 0..nu
  std::vector<Term> terms_;
};

}  // namespace cartan
