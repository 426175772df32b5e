#include "cartan/enumeration.hpp"

#include <algorithm>
#include <cmath>

namespace cartan {

namespace {

BigReal dec(const char* s) { return BigReal::from_string(s); }

long floor_long(const BigReal& x) {
  mpz_class z;
  mpfr_get_z(z.get_mpz_t(), x.lower().value(), MPFR_RNDD);
  return z.get_si();
}

long ceil_long(const BigReal& x) {
  mpz_class z;
  mpfr_get_z(z.get_mpz_t(), x.upper().value(), MPFR_RNDU);
  return z.get_si();
}

BigReal lattice_value(long num, long den) { return BigReal(num) / BigReal(den); }

mpz_class nearest_mpz(const BigReal& x) {
  mpz_class z;
  mpfr_get_z(z.get_mpz_t(), nearest_integer(x).value(), MPFR_RNDN);
  return z;
}

// minimiser of a unimodal h on [a, b], to width tol
BigReal golden_min(const RealFn& h, BigReal a, BigReal b, const BigReal& tol) {
  const BigReal r = (sqrt(BigReal(5)) - BigReal(1)) / BigReal(2);
  BigReal x1 = (b - r * (b - a)).midpoint(), x2 = (a + r * (b - a)).midpoint();
  BigReal h1 = h(x1), h2 = h(x2);
  for (int it = 0; it < 4000 && value_lt(tol, abs(b - a)); ++it) {
    if (value_lt(h1, h2)) {
      b = x2;
      x2 = x1;
      h2 = h1;
      x1 = (b - r * (b - a)).midpoint();
      h1 = h(x1);
    } else {
      a = x1;
      x1 = x2;
      h1 = h2;
      x2 = (a + r * (b - a)).midpoint();
      h2 = h(x2);
    }
  }
  BigReal m = ((a + b) / BigReal(2)).midpoint();
  m.add_error(abs(b - a).upper());
  return m;
}

// bisection that stops at the first undecidable midpoint and keeps the last certified bracket
BigReal bisect_root(const RealFn& g, BigReal a, BigReal b, const BigReal& tol) {
  int sa = g(a).sign();
  if (sa == 0 || g(b).sign() == 0 || sa == g(b).sign()) throw PrecisionExhausted("bisect_root: no certified sign change");
  while (value_lt(tol, abs(b - a))) {
    BigReal m = ((a + b) / BigReal(2)).midpoint();
    int sm = g(m).sign();
    if (sm == 0) break;
    if (sm == sa) a = m; else b = m;
  }
  BigReal m = ((a + b) / BigReal(2)).midpoint();
  m.add_error(abs(b - a).upper());
  return m;
}

// Brent, falling back to bisection where the root is flat (a multiple root)
BigReal isolate_root(const RealFn& g, const BigReal& a, const BigReal& b, const BigReal& tol, bool& flat) {
  // a simple root takes Brent a few dozen steps; past that the root is multiple
  int calls = 0;
  RealFn capped = [&](const BigReal& x) {
    if (++calls > 80) throw PrecisionExhausted("isolate_root: evaluation budget");
    return g(x);
  };
  try {
    return brent_root(capped, a, b, tol);
  } catch (const PrecisionExhausted&) {
    flat = true;
    // a multiple root is flat: |t| 2^-80 is as far as it is worth chasing
    BigReal coarse = (max_value(abs(a), abs(b)) * pow_int(BigReal(2), -80)).upper();
    return bisect_root(g, a, b, max_value(tol, coarse));
  }
}

}  // namespace

SlowStats& SlowStats::operator+=(const SlowStats& o) {
  b_values += o.b_values;
  no_root += o.no_root;
  pruned_first += o.pruned_first;
  pruned_refined += o.pruned_refined;
  pruned_verify += o.pruned_verify;
  candidates += o.candidates;
  return *this;
}

EnumDomain enum_domain(const CuspFrame& f, const BigReal& Upsilon) {
  EnumDomain d;
  d.cusp = f.cusp;
  d.Upsilon = Upsilon;
  BigReal p(f.p);
  BigReal a = exp(-(BigReal::pi() * sqrt(BigReal(3)) / p));
  BigReal b = exp(-(BigReal(2) * BigReal::pi() / p));
  BigReal u = exp(-(Upsilon / p));
  if (value_lt(u, a)) d.t_intervals.push_back({(-a).lower(), (-u).upper()});
  if (value_lt(u, b)) d.t_intervals.push_back({u.lower(), b.upper()});
  return d;
}

QuickResult quick_enumerate(const CuspFrame& f, const BigReal& Xi_hat, const std::optional<BigReal>& Upsilon_init,
                            long den) {
  if (f.pivot < 0) fail(ErrorKind::invalid_argument, "quick_enumerate: no pivot");
  const int k1 = f.pivot;
  const BigReal& d1 = f.delta[k1];
  const BigReal& th1 = f.theta[k1];
  BigReal p(f.p);
  QuickResult r;
  BigReal ups = Upsilon_init ? *Upsilon_init : p * log(BigReal(50) * f.Theta / abs(d1));
  ups = max_value(ups, p * BigReal::log2());
  r.Upsilon_init = ups;
  if (!value_lt(ups, Xi_hat)) {
    r.Upsilon = Xi_hat;
    r.epsilon = BigReal();
    return r;
  }
  BigReal eps = (dec("3.2") * f.Theta * exp(-(ups / p)) / abs(d1)).upper();
  r.epsilon = eps;
  // b = d1 l + th1 for l in [ups - eps, Xi_hat + eps]
  BigReal e1 = d1 * (ups - eps) + th1, e2 = d1 * (Xi_hat + eps) + th1;
  BigReal lo = min_value(e1.lower(), e2.lower()), hi = max_value(e1.upper(), e2.upper());
  long n_lo = ceil_long(lo * BigReal(den)), n_hi = floor_long(hi * BigReal(den));
  // descending l_1
  const bool up = d1.sign() < 0;
  long n = up ? n_lo : n_hi;
  const long step = up ? 1 : -1;
  for (; up ? n <= n_hi : n >= n_lo; n += step) {
    ++r.scanned;
    BigReal b = lattice_value(n, den);
    BigReal l1 = (b - th1) / d1;
    BigReal eps1 = dec("3.2") * f.Theta * exp((eps - l1) / p);
    bool all = true;
    for (int k = 1; k < f.d && all; ++k) {
      if (k == k1) continue;
      BigReal c = f.delta[k] * l1 + f.theta[k];
      BigReal w = ((BigReal(1) + abs(f.delta[k] / d1)) * eps1).upper();
      all = contains_lattice_point(c - w, c + w, den);
    }
    if (all) {
      r.hit = true;
      r.hit_b1 = n;
      r.Upsilon = (l1 + eps).upper();
      return r;
    }
  }
  r.Upsilon = ups;
  return r;
}

std::vector<MonotoneInterval> monotone_intervals(const FkFamily& fk, int k, const BigReal& lo, const BigReal& hi) {
  RealFn df = [&](const BigReal& t) { return fk.deriv(k, t); };
  RealFn ddf = [&](const BigReal& t) { return fk.deriv2(k, t); };
  CurvatureBound d2 = [&](const BigReal& a, const BigReal& b) { return fk.second_deriv_bound(k, a, b); };
  CurvatureBound d3 = [&](const BigReal& a, const BigReal& b) { return fk.third_deriv_bound(k, a, b); };
  BigReal tol = (abs(hi - lo) * dec("1e-40")).upper();
  auto crit = find_roots_of_derivative(df, d2, ddf, d3, lo, hi, tol);
  std::vector<MonotoneInterval> out;
  std::vector<BigReal> cuts = {lo};
  std::vector<bool> flag = {false};
  BigReal gap = BigReal(4) * tol;
  bool hi_flag = false;
  for (const auto& c : crit) {
    BigReal t = c.t.midpoint();
    // a critical point at an end of the range only flags that end
    if (!value_lt(gap, abs(t - cuts.back()))) {
      flag.back() = flag.back() || !c.certified;
      continue;
    }
    if (!value_lt(gap, abs(hi - t))) {
      hi_flag = hi_flag || !c.certified;
      continue;
    }
    cuts.push_back(t);
    flag.push_back(!c.certified);
  }
  cuts.push_back(hi);
  flag.push_back(hi_flag);
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    MonotoneInterval m;
    m.lo = cuts[i];
    m.hi = cuts[i + 1];
    m.flagged = flag[i] || flag[i + 1];
    // direction from the derivative at interior sample points
    for (int j = 1; j < 8 && m.direction == 0; ++j) {
      BigReal t = m.lo + (m.hi - m.lo) * BigReal(j) / BigReal(8);
      m.direction = df(t.midpoint()).sign();
    }
    if (m.direction == 0) fail(ErrorKind::internal, "monotone_intervals: derivative sign undecidable");
    out.push_back(m);
  }
  return out;
}

SlowEnumerator::SlowEnumerator(const GroupContext& ctx, const UnitSystem& units, const CuspFrame& frame,
                               const BigReal& Upsilon, const SlowOptions& opt)
    : ctx_(&ctx), frame_(&frame), opt_(opt), fk_(frame), pivot_(frame.pivot) {
  if (pivot_ < 0) fail(ErrorKind::invalid_argument, "slow enumeration: no pivot");
  BigReal p(frame.p);
  eps_ = (frame.Theta * (dec("2.2") * BigReal(frame.nu) / p + dec("3.1")) *
          exp(-(BigReal(frame.nu + 1) * BigReal::pi() * sqrt(BigReal(3)) / p)))
             .upper();
  if (!value_le(eps_, BigReal::from_double(opt.eps_target)))
    fail(ErrorKind::invalid_argument, "slow enumeration: nu too small for the epsilon target");
  domain_ = enum_domain(frame, Upsilon);
  for (const auto& piece : domain_.t_intervals) {
    auto iv = monotone_intervals(fk_, pivot_, piece.lo, piece.hi);
    intervals_.insert(intervals_.end(), iv.begin(), iv.end());
  }
  fine_bits_ = 4 * working_precision();
  {
    PrecisionScope scope(fine_bits_);
    auto L = UnitLogMatrix::build(ctx, units);
    fine_ = build_cusp_frame(ctx, L, frame.cusp, 0);
  }
}

std::vector<SlowUnit> SlowEnumerator::plan() const {
  std::vector<SlowUnit> units;
  const long den = opt_.denominator;
  const bool up = frame_->delta[pivot_].sign() < 0;  // descending l_1
  for (size_t i = 0; i < intervals_.size(); ++i) {
    const auto& I = intervals_[i];
    BigReal a = fk_.eval(pivot_, I.lo), b = fk_.eval(pivot_, I.hi);
    BigReal slack = eps_ + dec("1e-30");
    BigReal lo = min_value(a.lower(), b.lower()) - slack, hi = max_value(a.upper(), b.upper()) + slack;
    long n_lo = ceil_long(lo * BigReal(den)), n_hi = floor_long(hi * BigReal(den));
    if (n_lo > n_hi) continue;
    long chunk = std::max<long>(1, opt_.chunk);
    if (up) {
      for (long s = n_lo; s <= n_hi; s += chunk)
        units.push_back({frame_->cusp, static_cast<int>(i), s, std::min(n_hi, s + chunk - 1)});
    } else {
      for (long s = n_hi; s >= n_lo; s -= chunk)
        units.push_back({frame_->cusp, static_cast<int>(i), s, std::max(n_lo, s - chunk + 1)});
    }
  }
  return units;
}

SlowEnumerator::Bracket SlowEnumerator::solve_window(const MonotoneInterval& I, const BigReal& b,
                                                     const BigReal& eps) const {
  const int s = I.direction;
  BigReal E = (eps * (BigReal(1) + pow_int(BigReal(2), -20))).upper();
  auto g = [&](const BigReal& t) { return (fk_.eval(pivot_, t) - b) * BigReal(s); };
  BigReal tol = (abs(I.hi - I.lo) * dec("1e-45")).upper();
  Bracket br;
  BigReal glo = g(I.lo), ghi = g(I.hi);
  // lower end: first t with g >= -E
  if (!(glo + E).certainly_negative()) {
    br.lo = I.lo;
  } else if ((ghi + E).certainly_negative()) {
    br.empty = true;
    return br;
  } else if ((ghi + E).sign() == 0) {
    br.lo = I.lo;
  } else {
    RealFn h = [&](const BigReal& t) { return g(t) + E; };
    br.lo = brent_root(h, I.lo, I.hi, tol).lower();
  }
  // upper end: last t with g <= E
  if (!(ghi - E).certainly_positive()) {
    br.hi = I.hi;
  } else if ((glo - E).certainly_positive()) {
    br.empty = true;
    return br;
  } else if ((glo - E).sign() == 0) {
    br.hi = I.hi;
  } else {
    RealFn h = [&](const BigReal& t) { return g(t) - E; };
    br.hi = brent_root(h, I.lo, I.hi, tol).upper();
  }
  if (value_lt(br.hi, br.lo)) br.empty = true;
  return br;
}

bool SlowEnumerator::intervals_hold(const Bracket& br, const BigReal& eps) const {
  BigReal w = (br.hi - br.lo).upper();
  for (int k = 1; k < frame_->d; ++k) {
    if (k == pivot_) continue;
    BigReal v1 = fk_.eval(k, br.lo), v2 = fk_.eval(k, br.hi);
    BigReal M2 = fk_.second_deriv_bound(k, br.lo, br.hi);
    BigReal slack = (M2 * w * w / BigReal(8) + eps).upper();
    BigReal lo = min_value(v1.lower(), v2.lower()) - slack;
    BigReal hi = max_value(v1.upper(), v2.upper()) + slack;
    if (!contains_lattice_point(lo, hi, opt_.denominator)) return false;
  }
  return true;
}

std::optional<Candidate> SlowEnumerator::verify(const Bracket& br, const BigReal& b1, long b1_num,
                                                std::string& note) const {
  const CuspFrame& f = *frame_;
  Candidate c;
  c.cusp = f.cusp;
  c.denominator = opt_.denominator;
  c.b.assign(f.d, 0);
  c.b[pivot_] = b1_num;
  const BigReal one_ish = dec("0.999");
  auto widen = [&](const BigReal& by, BigReal& lo, BigReal& hi) {
    lo = br.lo - by;
    hi = br.hi + by;
    if (lo.sign() != br.lo.sign() || br.lo.sign() == 0 || !certainly_lt(abs(lo), one_ish)) lo = br.lo;
    if (hi.sign() != br.hi.sign() || br.hi.sign() == 0 || !certainly_lt(abs(hi), one_ish)) hi = br.hi;
  };
  BigReal w = (br.hi - br.lo).upper() + abs(br.lo) * dec("1e-30");
  BigReal lo, hi;
  widen(w, lo, hi);
  auto F1 = [&](const CuspFrame& fr, const BigReal& target) {
    return RealFn([&fr, target, this](const BigReal& t) {
      return bk_from_t(fr, t, RelationMode::direct)[pivot_] - target;
    });
  };
  RealFn g = F1(f, b1);
  const long bits = working_precision();
  BigReal t;
  bool tangential = false;
  try {
    BigReal glo = g(lo), ghi = g(hi);
    if (glo.sign() != 0 && ghi.sign() != 0 && glo.sign() != ghi.sign()) {
      BigReal tol = (abs(hi) * pow_int(BigReal(2), -(bits - 40))).upper();
      t = isolate_root(g, lo, hi, tol, tangential);
      if (tangential) note = "multiple root";
    } else {
      // no sign change: the point can only be a tangency (an elliptic point); look at the extremum
      int s = glo.sign() != 0 ? glo.sign() : ghi.sign();
      if (s == 0) s = g(((lo + hi) / BigReal(2)).midpoint()).sign();
      if (s == 0) {
        note = "direct product undecided on the window";
        c.cls = Classification::unresolved;
        c.t = (lo + hi) / BigReal(2);
        return c;
      }
      widen(BigReal(4) * w, lo, hi);
      RealFn h = [&](const BigReal& x) { return g(x) * BigReal(s); };
      // F is flat to second order here, so |t| 2^-70 already pins every F_k to ~1e-20
      BigReal tol = (abs(hi) * pow_int(BigReal(2), -70)).upper();
      t = golden_min(h, lo, hi, tol);
      // the minimiser is only located to |t| 2^-70, so h there is judged at the integrality tolerance
      if (value_lt(dec("1e-20"), h(t.midpoint()).lower())) return std::nullopt;
      tangential = true;
    }
  } catch (const PrecisionExhausted& e) {
    note = std::string("root of the direct product not isolated: ") + e.what();
    c.cls = Classification::unresolved;
    c.t = (lo + hi) / BigReal(2);
    return c;
  }
  auto b = bk_from_t(f, t.midpoint(), RelationMode::direct);
  const BigReal den(opt_.denominator);
  for (int k = 0; k < f.d; ++k) {
    BigReal scaled = b[k] * den;
    if (!value_le(nearest_integer_distance(scaled).lower(), dec("1e-20"))) return std::nullopt;
    c.b[k] = nearest_mpz(scaled);
  }
  c.b[pivot_] = b1_num;
  if (tangential && note.empty()) note = "tangential root";
  // final t and j at the fine precision
  try {
    PrecisionScope scope(fine_bits_);
    BigReal tf = t;
    if (!tangential) {
      RealFn gf = F1(fine_, BigReal::from_mpz(c.b[pivot_]) / BigReal(opt_.denominator));
      BigReal a = t.lower(), bb = t.upper();
      BigReal ga = gf(a), gb = gf(bb);
      if (ga.sign() == 0 || gb.sign() == 0 || ga.sign() == gb.sign()) {
        a = lo;
        bb = hi;
      }
      BigReal ftol = (abs(t) * pow_int(BigReal(2), -(fine_bits_ - 60))).upper();
      tf = brent_root(gf, a, bb, ftol);
    }
    BigReal q = pow_int(tf, f.p);
    BigReal r0 = exp(-(BigReal::pi() * sqrt(BigReal(3))));
    BigReal j = value_le(abs(q).upper(), r0.lower()) ? evaluate_j(q) : j_modular(BigComplex(q)).re();
    JClass k = classify_j(j);
    c.t = tf;
    c.q = q;
    c.j = j;
    c.cls = k.cls;
    c.disc = k.disc;
    c.j_int = k.nearest;
  } catch (const PrecisionExhausted& e) {
    c.t = t;
    c.q = pow_int(t, f.p);
    c.cls = Classification::unresolved;
    note += std::string(note.empty() ? "" : "; ") + "j undetermined: " + e.what();
  }
  return c;
}

UnitResult SlowEnumerator::run(const SlowUnit& u) const {
  UnitResult out;
  out.unit = u;
  const auto& I = intervals_.at(u.interval);
  const long step = u.b_first <= u.b_last ? 1 : -1;
  BigReal p(frame_->p);
  BigReal factor = frame_->Theta * (dec("2.2") * BigReal(frame_->nu) / p + dec("3.1"));
  for (long n = u.b_first;; n += step) {
    ++out.stats.b_values;
    BigReal b = lattice_value(n, opt_.denominator);
    Bracket br = solve_window(I, b, eps_);
    if (br.empty) {
      ++out.stats.no_root;
    } else if (!intervals_hold(br, eps_)) {
      ++out.stats.pruned_first;
    } else {
      BigReal tmax = max_value(abs(br.lo), abs(br.hi)).upper();
      BigReal eps1 = min_value((factor * pow_int(tmax, frame_->nu + 1)).upper(), eps_);
      Bracket br2 = solve_window(I, b, eps1);
      if (br2.empty || !intervals_hold(br2, eps1)) {
        ++out.stats.pruned_refined;
      } else {
        std::string note;
        auto c = verify(br2, b, n, note);
        if (!c) {
          ++out.stats.pruned_verify;
        } else {
          ++out.stats.candidates;
          c->note = note;
          if (I.flagged) c->note += (c->note.empty() ? "" : "; ") + std::string("near an uncertified critical point");
          out.candidates.push_back(*c);
        }
      }
    }
    if (n == u.b_last) break;
  }
  if (I.flagged) out.notes.push_back("interval " + std::to_string(u.interval) + " ends at an uncertified critical point");
  return out;
}

std::vector<UnitResult> SlowEnumerator::run_all() const {
  std::vector<UnitResult> out;
  for (const auto& u : plan()) out.push_back(run(u));
  return out;
}

}  // namespace cartan
