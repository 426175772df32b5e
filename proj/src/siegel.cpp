#include "cartan/siegel.hpp"

#include <cmath>
#include <map>

#include "cartan/error.hpp"

namespace cartan {

RootSum& RootSum::operator+=(const RootSum& o) {
  if (c.empty()) c.resize(o.c.size());
  for (size_t j = 0; j < c.size(); ++j) c[j] += o.c[j];
  return *this;
}

RootSum& RootSum::scale(const mpq_class& r) {
  for (auto& x : c) x *= r;
  return *this;
}

mpq_class RootSum::l1() const {
  mpq_class s = 0;
  for (auto& x : c) s += abs(x);
  return s;
}

bool RootSum::times_integral(long k) const {
  for (auto& x : c) {
    mpq_class y = x * k;
    y.canonicalize();
    if (y.get_den() != 1) return false;
  }
  return true;
}

const std::vector<BigReal>& cos_table(int p) {
  thread_local std::map<std::pair<int, long>, std::vector<BigReal>> cache;
  auto key = std::make_pair(p, working_precision());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<BigReal> t;
  for (auto& z : roots_of_unity(p)) t.push_back(z.re());
  return cache.emplace(key, std::move(t)).first->second;
}

BigReal RootSum::real_part() const {
  const auto& ct = cos_table(p());
  BigReal s;
  for (int j = 0; j < p(); ++j)
    if (c[j] != 0) s += ct[j] * BigReal::from_mpq(c[j]);
  return s;
}

BigComplex RootSum::value() const {
  const auto& z = roots_of_unity(p());
  BigComplex s;
  for (int j = 0; j < p(); ++j)
    if (c[j] != 0) s += z[j] * BigReal::from_mpq(c[j]);
  return s;
}

mpq_class ell_of(const mpq_class& a1) {
  mpq_class b2 = a1 * a1 - a1 + mpq_class(1, 6);
  mpq_class r = b2 / 2;
  r.canonicalize();
  return r;
}

SiegelTerm SiegelTerm::make(const LiftedPoint& lp, int p) {
  SiegelTerm t;
  t.lp = lp;
  t.p = p;
  mpq_class k1 = lp.t1 * p, s = lp.t2 * p;
  t.k1 = mpz_class(k1).get_si();
  t.s = mpz_class(s).get_si();
  t.ell = ell_of(lp.t1);
  return t;
}

std::optional<Factor> SiegelTerm::retained() const {
  if (k1 == 0) return std::nullopt;
  if (2 * k1 < p) return Factor{k1, s};
  return Factor{p - k1, -s};
}

std::vector<Factor> SiegelTerm::factors(long max_e) const {
  std::vector<Factor> out;
  for (long n = 0;; ++n) {
    long ea = p * n + k1, eb = p * n + p - k1;
    if (ea > max_e && eb > max_e) break;
    if (ea <= max_e && !(n == 0 && k1 == 0)) out.push_back({ea, s});
    if (eb <= max_e) out.push_back({eb, -s});
  }
  return out;
}

namespace {

long mod_p(long r, int p) { return ((r % p) + p) % p; }

BigComplex zeta_power(int p, long r) { return roots_of_unity(p)[mod_p(r, p)]; }

BigReal two_pi() { return BigReal(2) * BigReal::pi(); }

// t = exp(2 pi i tau / p)
BigComplex t_of_tau(const BigComplex& tau, int p) {
  BigReal k = two_pi() / BigReal(p);
  return exp(BigComplex(-(tau.im() * k), tau.re() * k));
}

BigReal abs_q(const BigComplex& tau) { return exp(-(two_pi() * tau.im())); }

}  // namespace

BigComplex siegel_gamma(const SiegelTerm& a) {
  BigComplex g = BigComplex::expi(BigReal::pi() * BigReal::from_mpq(a.lp.t2 * (a.lp.t1 - 1)));
  g = -g;
  if (a.k1 == 0) g = g * (BigComplex(BigReal(1)) - zeta_power(a.p, a.s));
  return g;
}

BigComplex q_power(const BigComplex& tau, const mpq_class& x) {
  BigReal k = two_pi() * BigReal::from_mpq(x);
  return exp(BigComplex(-(tau.im() * k), tau.re() * k));
}

BigComplex siegel_direct(const SiegelTerm& a, const BigComplex& tau, int n_terms) {
  const int p = a.p;
  BigComplex t = t_of_tau(tau, p);
  BigComplex prod(BigReal(1));
  const BigComplex one(BigReal(1));
  for (const auto& f : a.factors(static_cast<long>(n_terms) * p - 1))
    prod = prod * (one - pow_int(t, f.e) * zeta_power(p, f.r));
  BigComplex g = siegel_gamma(a) * q_power(tau, a.ell) * prod;
  // |prod_{n >= N} (1 - x_n) - 1| <= exp(sum |x_n|) - 1
  BigReal q = abs_q(tau);
  BigReal t1 = BigReal::from_mpq(a.lp.t1);
  BigReal n = BigReal(n_terms);
  BigReal S = (pow(q, n + t1) + pow(q, n + BigReal(1) - t1)) / (BigReal(1) - q);
  BigReal bound = abs(g) * (exp(S) - BigReal(1));
  return widen(g, bound.upper());
}

std::vector<RootSum> beta_coefficients(const SiegelTerm& a, int nu, bool exclude_retained) {
  std::vector<RootSum> out(nu + 1, RootSum(a.p));
  auto keep = a.retained();
  for (const auto& f : a.factors(nu)) {
    if (exclude_retained && keep && keep->e == f.e && keep->r == f.r) continue;
    for (long j = 1; f.e * j <= nu; ++j) out[f.e * j].c[mod_p(f.r * j, a.p)] -= mpq_class(1, j);
  }
  for (auto& r : out)
    for (auto& x : r.c) x.canonicalize();
  return out;
}

BigComplex siegel_series(const SiegelTerm& a, const BigComplex& tau, SeriesMode mode, int nu) {
  const int p = a.p;
  BigReal q = abs_q(tau);
  if (!certainly_lt(q, BigReal::from_string("0.0044")))
    fail(ErrorKind::invalid_argument, "siegel_series needs |q| < 0.0044");
  BigComplex t = t_of_tau(tau, p);
  BigReal at = abs(t);
  const BigComplex one(BigReal(1));
  BigComplex val;
  BigReal err;
  auto keep = a.retained();
  auto add_series = [&](bool exclude) {
    auto beta = beta_coefficients(a, nu, exclude);
    BigComplex tk(BigReal(1));
    for (int k = 1; k <= nu; ++k) {
      tk = tk * t;
      val += beta[k].value() * tk;
    }
  };
  switch (mode) {
    case SeriesMode::log_only:
      if (keep) {
        val = log(one - pow_int(t, keep->e) * zeta_power(p, keep->r));
        err = BigReal::from_string("1.2") * sqrt(q);
      } else {
        err = BigReal::from_string("2.02") * q;
      }
      break;
    case SeriesMode::log_plus_series:
      if (keep) val = log(one - pow_int(t, keep->e) * zeta_power(p, keep->r));
      add_series(true);
      err = (BigReal::from_string("2.2") * BigReal(nu) / BigReal(p) + BigReal::from_string("3.1")) *
            pow_int(at, nu + 1);
      break;
    case SeriesMode::no_log:
      if (!value_le(at, BigReal::from_double(0.5)))
        fail(ErrorKind::invalid_argument, "no-log form needs |q| <= 2^-p");
      add_series(false);
      if (nu == 0)
        err = BigReal::from_string("3.2") * at;
      else
        err = (BigReal::from_string("2.2") * BigReal(nu) / BigReal(p) + BigReal::from_string("5.1")) *
              pow_int(at, nu + 1);
      break;
  }
  return widen(val, err.upper());
}

OrbitUnit build_orbit_unit(const GroupContext& ctx, const Orbit& orbit, const ModMat& sigma, bool alternate_lift) {
  OrbitUnit u;
  u.label = orbit.label;
  u.m = ctx.m();
  for (const auto& a : orbit.members) {
    Point b = act_right(ctx, a, sigma);
    LiftedPoint lp = alternate_lift ? lift_alternate(b, ctx.p()) : lift(b, ctx.p());
    u.terms.push_back(SiegelTerm::make(lp, ctx.p()));
  }
  return u;
}

BigReal orbit_unit_log_abs(const OrbitUnit& u, const BigComplex& tau, int n_terms) {
  BigReal s;
  for (const auto& a : u.terms) s += log(abs(siegel_direct(a, tau, n_terms)));
  return s * BigReal(u.m);
}

CuspSeries cusp_series(const GroupContext& ctx, int ell, int cusp, int nu) {
  const int p = ctx.p();
  auto orbits = unit_orbits(ctx);
  OrbitUnit u = build_orbit_unit(ctx, orbits.at(ell), sigma_c_mod_p(ctx, cusp));
  CuspSeries s;
  s.cusp = cusp;
  s.ell = ell;
  s.p = p;
  s.m = ctx.m();
  s.size = static_cast<int>(u.terms.size());
  s.nu = nu;
  s.terms = u.terms;
  s.beta_prime.assign(nu + 1, RootSum(p));
  s.beta.assign(nu + 1, RootSum(p));
  mpq_class ell_sum = 0;
  for (const auto& a : u.terms) {
    ell_sum += a.ell;
    if (a.k1 == 0) {
      BigReal v = abs(BigReal(2) * sin(BigReal::pi() * BigReal(a.s) / BigReal(p)));
      s.log_gamma += log(v);
    }
    if (auto f = a.retained()) s.retained.push_back(*f);
    auto bp = beta_coefficients(a, nu, true);
    auto b = beta_coefficients(a, nu, false);
    for (int k = 0; k <= nu; ++k) {
      s.beta_prime[k] += bp[k];
      s.beta[k] += b[k];
    }
  }
  s.ord = ell_sum * p * s.m;
  s.ord.canonicalize();
  s.log_gamma = s.log_gamma * BigReal(s.m);
  for (int k = 0; k <= nu; ++k) {
    s.beta_prime[k].scale(s.m);
    s.beta[k].scale(s.m);
  }
  return s;
}

BigReal log_abs_one_minus(const BigReal& x, long r, int p) {
  const BigReal& c = cos_table(p)[mod_p(r, p)];
  BigReal v = BigReal(1) - BigReal(2) * x * c + x * x;
  BigReal out = log(v);
  mpfr_div_2ui(out.raw_value(), out.value(), 1, MPFR_RNDN);
  mpfr_div_2ui(out.raw_err(), out.err(), 1, MPFR_RNDU);
  return out;
}

BigReal unit_log_abs(const CuspSeries& s, const BigReal& t, UnitLogMode mode) {
  BigReal at = abs(t);
  if (!at.certainly_positive() || !certainly_lt(at, BigReal(1)))
    fail(ErrorKind::invalid_argument, "unit_log_abs needs 0 < |t| < 1");
  const int p = s.p;
  BigReal q = pow_int(at, p);
  BigReal scale = BigReal(s.m * s.size);
  BigReal val = BigReal::from_mpq(s.ord) * log(at) + s.log_gamma;
  BigReal err;
  auto retained_sum = [&]() {
    BigReal r;
    for (const auto& f : s.retained) r += log_abs_one_minus(pow_int(t, f.e), f.r, p);
    return r * BigReal(s.m);
  };
  auto series_sum = [&](const std::vector<RootSum>& beta) {
    BigReal r, tk(1);
    for (int k = 1; k <= s.nu; ++k) {
      tk = tk * t;
      r += beta[k].real_part() * tk;
    }
    return r;
  };
  switch (mode) {
    case UnitLogMode::full_log:
    case UnitLogMode::truncated:
      if (!certainly_lt(q, BigReal::from_string("0.0044")))
        fail(ErrorKind::invalid_argument, "unit_log_abs needs |q_c| < 0.0044");
      val += retained_sum();
      if (mode == UnitLogMode::full_log) {
        err = BigReal::from_string("1.2") * scale * sqrt(q);
      } else {
        val += series_sum(s.beta_prime);
        err = scale * (BigReal::from_string("2.2") * BigReal(s.nu) / BigReal(p) + BigReal::from_string("3.1")) *
              pow_int(at, s.nu + 1);
      }
      break;
    case UnitLogMode::small_q:
    case UnitLogMode::small_q_series:
      if (!value_le(at, BigReal::from_double(0.5)))
        fail(ErrorKind::invalid_argument, "small-q mode needs |q_c| <= 2^-p");
      if (mode == UnitLogMode::small_q) {
        err = BigReal::from_string("3.2") * scale * at;
      } else {
        val += series_sum(s.beta);
        err = scale * (BigReal::from_string("2.2") * BigReal(s.nu) / BigReal(p) + BigReal::from_string("5.1")) *
              pow_int(at, s.nu + 1);
      }
      break;
  }
  return val.add_error(err.upper());
}

BigReal unit_log_abs_direct(const CuspSeries& s, const BigReal& t) {
  BigReal at = abs(t);
  if (!at.certainly_positive() || !certainly_lt(at, BigReal(1)))
    fail(ErrorKind::invalid_argument, "unit_log_abs_direct needs 0 < |t| < 1");
  const int p = s.p;
  BigReal lt = log(at);
  // cutoff E with |t|^E below the working precision
  double bits = static_cast<double>(working_precision()) + 20;
  long E = static_cast<long>(std::ceil(bits * std::log(2.0) / -lt.to_double())) + 1;
  // |1 - x zeta^r|^2 = 1 - 2x cos(2 pi r/p) + x^2; multiply those and take one log
  const auto& cs = cos_table(p);
  BigReal prod(1);
  auto mul = [&](const BigReal& x, long r) {
    BigReal two_c = BigReal(2) * cs[mod_p(r, p)];
    prod = prod * (BigReal(1) - x * (two_c - x));
  };
  for (const auto& a : s.terms) {
    BigReal x = a.k1 == 0 ? BigReal() : pow_int(t, a.k1);
    BigReal step = pow_int(t, p);
    // A-factors t^{pn + k1} and B-factors t^{pn + p - k1}
    BigReal xb = pow_int(t, p - a.k1);
    for (long n = 0; p * n + std::min<long>(a.k1, p - a.k1) <= E; ++n) {
      if (!(n == 0 && a.k1 == 0) && p * n + a.k1 <= E) mul(x, a.s);
      if (p * n + p - a.k1 <= E) mul(xb, -a.s);
      x = n == 0 && a.k1 == 0 ? step : x * step;
      xb = xb * step;
    }
  }
  BigReal sum = log(prod);
  mpfr_div_2ui(sum.raw_value(), sum.value(), 1, MPFR_RNDN);
  mpfr_div_2ui(sum.raw_err(), sum.err(), 1, MPFR_RNDU);
  BigReal val = BigReal::from_mpq(s.ord) * lt + s.log_gamma + sum * BigReal(s.m);
  // tail: each term contributes at most 2|t|^{E+1} / ((1 - |t|^p)(1 - |t|^E))
  BigReal tE = pow_int(at, E);
  BigReal tail = BigReal(2 * s.m * s.size) * tE * at /
                 ((BigReal(1) - pow_int(at, p)) * (BigReal(1) - tE));
  return val.add_error(tail.upper());
}

IdentityCheck product_identity_check(const GroupContext& ctx, const BigComplex& tau) {
  const int p = ctx.p();
  double y = tau.im().to_double();
  int n_terms = static_cast<int>(std::ceil((working_precision() + 20) * std::log(2.0) / (2 * M_PI * y))) + 2;
  BigComplex prod(BigReal(1));
  for (int x = 0; x < p; ++x)
    for (int yy = 0; yy < p; ++yy) {
      if (x == 0 && yy == 0) continue;
      prod = prod * siegel_direct(SiegelTerm::make(lift({x, yy}, p), p), tau, n_terms);
    }
  IdentityCheck r;
  BigComplex big = pow_int(prod, 12L * p);
  BigReal target = pow_int(BigReal(p), 12L * p);
  r.residual = abs(big - BigComplex(target)) / target;
  r.positive = big.re().certainly_positive();
  BigComplex pm = pow_int(prod, ctx.m());
  BigReal tm = pow_int(BigReal(p), ctx.m());
  BigReal r1 = abs(pm - BigComplex(tm)) / tm, r2 = abs(pm + BigComplex(tm)) / tm;
  r.orbit_residual = value_lt(r1, r2) ? r1 : r2;
  BigReal tol = BigReal::from_string("1e-20");
  r.ok = r.positive && certainly_lt(r.residual, tol) && certainly_lt(r.orbit_residual, tol);
  return r;
}

CycloElement gamma_element(const CuspSeries& s) {
  CycloElement g = CycloElement::rational(s.p, 1);
  for (const auto& a : s.terms)
    if (a.k1 == 0) {
      CycloElement f = CycloElement::rational(s.p, 1) - CycloElement::zeta_pow(s.p, a.s);
      for (int i = 0; i < s.m; ++i) g = g * f;
    }
  return g;
}

}  // namespace cartan
