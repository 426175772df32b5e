#include "cartan/principal.hpp"

#include <cmath>
#include <map>

namespace cartan {

namespace {

BigReal dec(const char* s) { return BigReal::from_string(s); }

}  // namespace

UnitLogMatrix UnitLogMatrix::build(const GroupContext& ctx, const UnitSystem& units) {
  UnitLogMatrix L;
  L.M = units.log_matrix(ctx);
  L.alpha = inverse(L.M);
  const size_t d = L.M.size();
  L.residual = BigReal();
  L.kappa = BigReal();
  for (size_t i = 0; i < d; ++i) {
    BigReal row;
    for (size_t j = 0; j < d; ++j) {
      BigReal s;
      for (size_t k = 0; k < d; ++k) s += L.M[i][k] * L.alpha[k][j];
      BigReal r = abs(s - BigReal(i == j ? 1 : 0)).upper();
      L.residual = max_value(L.residual, r);
      row += abs(L.alpha[i][j]);
    }
    L.kappa = max_value(L.kappa, row.upper());
  }
  return L;
}

BigReal CuspFrame::series_error(const BigReal& abs_t) const {
  return Theta * (dec("2.2") * BigReal(nu) / BigReal(p) + dec("3.1")) * pow_int(abs_t, nu + 1);
}

CuspFrame build_cusp_frame(const GroupContext& ctx, const UnitLogMatrix& L, int cusp, int nu) {
  CuspFrame f;
  f.cusp = cusp;
  f.p = ctx.p();
  f.d = ctx.d();
  f.m = ctx.m();
  f.nu = nu;
  f.alpha = L.alpha;
  f.kappa = L.kappa;
  f.Theta = L.kappa * BigReal(f.m * (f.p + 1) * ctx.h_order());
  for (int l = 0; l < f.d; ++l) {
    f.series.push_back(cusp_series(ctx, l, cusp, nu));
    f.ord.push_back(f.series.back().ord);
  }
  f.delta.assign(f.d, BigReal());
  f.theta.assign(f.d, BigReal());
  f.delta_max = BigReal();
  f.theta_max = BigReal();
  for (int k = 0; k < f.d; ++k) {
    for (int l = 0; l < f.d; ++l) {
      f.delta[k] += f.alpha[k][l] * BigReal::from_mpq(f.ord[l]);
      f.theta[k] += f.alpha[k][l] * f.series[l].log_gamma;
    }
    f.delta[k] = -f.delta[k] / BigReal(f.p);
    f.delta_max = max_value(f.delta_max, abs(f.delta[k]).upper());
    f.theta_max = max_value(f.theta_max, abs(f.theta[k]).upper());
  }
  for (int k = 1; k < f.d; ++k) {
    if (f.delta[k].sign() == 0) continue;
    if (f.pivot < 0 || value_lt(abs(f.delta[k]), abs(f.delta[f.pivot]))) f.pivot = k;
  }
  return f;
}

int choose_nu(const GroupContext& ctx, const BigReal& Theta, double target) {
  const double p = ctx.p();
  const double th = Theta.to_double() + Theta.err_double();
  const double r = std::exp(-M_PI * std::sqrt(3.0) / p);
  for (int nu = 1;; ++nu) {
    double eps = th * (2.2 * nu / p + 3.1) * std::pow(r, nu + 1);
    if (eps <= target * (1 - 1e-9)) return nu;
    if (nu > 100000) fail(ErrorKind::invalid_argument, "choose_nu: target unreachable");
  }
}

std::vector<BigReal> bk_from_t(const CuspFrame& f, const BigReal& t, RelationMode mode) {
  std::vector<BigReal> v(f.d);
  for (int l = 0; l < f.d; ++l) {
    switch (mode) {
      case RelationMode::log_form:
        v[l] = unit_log_abs(f.series[l], t, UnitLogMode::full_log);
        break;
      case RelationMode::small_q:
        v[l] = unit_log_abs(f.series[l], t, UnitLogMode::small_q);
        break;
      case RelationMode::series:
        v[l] = unit_log_abs(f.series[l], t, UnitLogMode::truncated);
        break;
      case RelationMode::direct:
        v[l] = unit_log_abs_direct(f.series[l], t);
        break;
    }
  }
  return mat_vec(f.alpha, v);
}

BigReal b_bound(const CuspFrame& f, const BigReal& log_q_inv) {
  BigReal base = f.delta_max * log_q_inv + f.theta_max;
  if (value_le(BigReal(f.p) * BigReal::log2(), log_q_inv)) return (base + dec("1.6") * f.Theta).upper();
  return (base + f.Theta * log(BigReal(f.p))).upper();
}

FkFamily::FkFamily(const CuspFrame& f) : p_(f.p), d_(f.d) {
  const int nu = f.nu;
  logc_.resize(d_);
  theta_ = f.theta;
  q_.assign(d_, std::vector<BigReal>(nu + 1));
  std::vector<std::vector<BigReal>> re(d_, std::vector<BigReal>(nu + 1));
  for (int l = 0; l < d_; ++l)
    for (int n = 1; n <= nu; ++n) re[l][n] = f.series[l].beta_prime[n].real_part();
  for (int k = 0; k < d_; ++k) {
    logc_[k] = -(BigReal(p_) * f.delta[k]);
    for (int n = 1; n <= nu; ++n)
      for (int l = 0; l < d_; ++l) q_[k][n] += f.alpha[k][l] * re[l][n];
  }
  // log|1 - t^e zeta^r| = log|1 - t^e zeta^{-r}| for real t
  std::map<std::pair<long, long>, std::vector<long>> count;
  for (int l = 0; l < d_; ++l)
    for (const auto& fac : f.series[l].retained) {
      long r = ((fac.r % p_) + p_) % p_;
      r = std::min(r, p_ - r);
      auto& c = count[{fac.e, r}];
      c.resize(d_);
      c[l] += f.m;
    }
  for (const auto& [key, c] : count) {
    Term t;
    t.e = key.first;
    t.r = key.second;
    t.w.assign(d_, BigReal());
    for (int k = 0; k < d_; ++k)
      for (int l = 0; l < d_; ++l)
        if (c[l] != 0) t.w[k] += f.alpha[k][l] * BigReal(c[l]);
    terms_.push_back(std::move(t));
  }
}

BigReal FkFamily::eval(int k, const BigReal& t) const {
  BigReal v = logc_[k] * log(abs(t)) + theta_[k];
  const auto& q = q_[k];
  BigReal acc;
  for (size_t n = q.size(); n-- > 1;) acc = (acc + q[n]) * t;
  v += acc;
  for (const auto& term : terms_) v += term.w[k] * log_abs_one_minus(pow_int(t, term.e), term.r, p_);
  return v;
}

BigReal FkFamily::deriv(int k, const BigReal& t) const {
  BigReal v = logc_[k] / t;
  const auto& q = q_[k];
  BigReal acc;
  for (size_t n = q.size() - 1; n >= 1; --n) {
    acc = acc * t + q[n] * BigReal(static_cast<long>(n));
    if (n == 1) break;
  }
  v += acc;
  const auto& c = cos_table(p_);
  for (const auto& term : terms_) {
    BigReal x = pow_int(t, term.e);
    BigReal dx = BigReal(term.e) * pow_int(t, term.e - 1);
    const BigReal& cr = c[term.r];
    BigReal den = BigReal(1) - BigReal(2) * x * cr + x * x;
    v += term.w[k] * (x - cr) / den * dx;
  }
  return v;
}

BigReal FkFamily::second_deriv_bound(int k, const BigReal& lo, const BigReal& hi) const {
  BigReal a = abs(lo), b = abs(hi);
  BigReal rmin = min_value(a, b).lower(), R = max_value(a, b).upper();
  if (!rmin.certainly_positive()) fail(ErrorKind::invalid_argument, "second_deriv_bound: interval meets 0");
  BigReal out = abs(logc_[k]) / (rmin * rmin);
  const auto& q = q_[k];
  for (size_t n = 2; n < q.size(); ++n)
    out += BigReal(static_cast<long>(n * (n - 1))) * abs(q[n]) * pow_int(R, static_cast<long>(n) - 2);
  for (const auto& term : terms_) {
    const long e = term.e;
    BigReal x = pow_int(R, e);
    BigReal scale = e >= 2 ? pow_int(R, e - 2) : BigReal(1) / rmin;
    BigReal one_minus = BigReal(1) - x;
    out += abs(term.w[k]) * BigReal(e) * scale * (BigReal(e - 1) + x) / (one_minus * one_minus);
  }
  return out.upper();
}

BigReal FkFamily::deriv2(int k, const BigReal& t) const {
  BigReal v = -(logc_[k] / (t * t));
  const auto& q = q_[k];
  BigReal acc;
  for (size_t n = q.size() - 1; n >= 2; --n) {
    acc = acc * t + q[n] * BigReal(static_cast<long>(n * (n - 1)));
    if (n == 2) break;
  }
  v += acc;
  const auto& c = cos_table(p_);
  for (const auto& term : terms_) {
    const long e = term.e;
    BigReal x = pow_int(t, e);
    BigReal dx = BigReal(e) * pow_int(t, e - 1);
    BigReal ddx = e >= 2 ? BigReal(e * (e - 1)) * pow_int(t, e - 2) : BigReal();
    const BigReal& cr = c[term.r];
    BigReal u = x - cr;
    BigReal s2 = BigReal(1) - cr * cr;
    BigReal den = u * u + s2;
    BigReal h1 = u / den, h2 = (s2 - u * u) / (den * den);
    v += term.w[k] * (h2 * dx * dx + h1 * ddx);
  }
  return v;
}

BigReal FkFamily::third_deriv_bound(int k, const BigReal& lo, const BigReal& hi) const {
  BigReal a = abs(lo), b = abs(hi);
  BigReal rmin = min_value(a, b).lower(), R = max_value(a, b).upper();
  if (!rmin.certainly_positive()) fail(ErrorKind::invalid_argument, "third_deriv_bound: interval meets 0");
  BigReal out = BigReal(2) * abs(logc_[k]) / (rmin * rmin * rmin);
  const auto& q = q_[k];
  for (size_t n = 3; n < q.size(); ++n)
    out += BigReal(static_cast<long>(n * (n - 1) * (n - 2))) * abs(q[n]) * pow_int(R, static_cast<long>(n) - 3);
  // log|1 - x zeta^r| = -Re sum_m (t^e zeta^r)^m / m, so |d^3/dt^3| <= e^3 sum_{em >= 3} m^2 R^{em-3}
  for (const auto& term : terms_) {
    const long e = term.e;
    const long m0 = (3 + e - 1) / e;
    BigReal y = pow_int(R, e);
    BigReal sum;
    long m = m0;
    BigReal tm = BigReal(m * m) * pow_int(R, e * m - 3);
    for (;; ++m) {
      sum += tm;
      BigReal ratio = BigReal((m + 2) * (m + 2)) / BigReal((m + 1) * (m + 1)) * y;
      if (m >= 8 && certainly_lt(ratio, BigReal::from_double(0.999))) {
        BigReal next = tm * BigReal((m + 1) * (m + 1)) / BigReal(m * m) * y;
        sum += next / (BigReal(1) - ratio);
        break;
      }
      tm = tm * BigReal((m + 1) * (m + 1)) / BigReal(m * m) * y;
      if (m > 100000) fail(ErrorKind::internal, "third_deriv_bound: series does not settle");
    }
    out += abs(term.w[k]) * BigReal(e * e * e) * sum;
  }
  return out.upper();
}

}  // namespace cartan
