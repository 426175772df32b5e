#include "cartan/cyclotomic.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "cartan/error.hpp"

namespace cartan {

CycloElement::CycloElement(int p) : p_(p), c_(p - 1) {}

CycloElement CycloElement::rational(int p, const mpq_class& r) {
  CycloElement x(p);
  for (auto& c : x.c_) c = -r;  // 1 = -(zeta + ... + zeta^(p-1))
  return x;
}

CycloElement CycloElement::zeta_pow(int p, long k) {
  long e = ((k % p) + p) % p;
  if (e == 0) return rational(p, 1);
  CycloElement x(p);
  x.c_[e - 1] = 1;
  return x;
}

CycloElement CycloElement::from_unreduced(int p, const std::vector<mpq_class>& c) {
  if (static_cast<int>(c.size()) != p) fail(ErrorKind::invalid_argument, "unreduced vector must have p entries");
  CycloElement x(p);
  for (int i = 1; i < p; ++i) x.c_[i - 1] = c[i] - c[0];
  return x;
}

bool CycloElement::is_zero() const {
  for (auto& c : c_)
    if (c != 0) return false;
  return true;
}

bool CycloElement::is_integral() const {
  for (auto& c : c_)
    if (c.get_den() != 1) return false;
  return true;
}

std::optional<mpq_class> CycloElement::as_rational() const {
  for (auto& c : c_)
    if (c != c_[0]) return std::nullopt;
  return -c_[0];
}

bool CycloElement::fixed_by(const std::vector<int>& H) const {
  for (int h : H)
    if (!(galois(h) == *this)) return false;
  return true;
}

CycloElement CycloElement::galois(long t) const {
  long tt = ((t % p_) + p_) % p_;
  if (tt == 0) fail(ErrorKind::invalid_argument, "galois: t must be a unit mod p");
  CycloElement r(p_);
  for (int i = 1; i < p_; ++i) r.c_[(i * tt) % p_ - 1] = c_[i - 1];
  return r;
}

CycloElement operator+(const CycloElement& x, const CycloElement& y) {
  std::vector<mpq_class> c(x.p());
  for (int i = 1; i < x.p(); ++i) c[i] = x.coeff(i) + y.coeff(i);
  return CycloElement::from_unreduced(x.p(), c);
}

CycloElement operator-(const CycloElement& x) { return x * mpq_class(-1); }
CycloElement operator-(const CycloElement& x, const CycloElement& y) { return x + (-y); }

CycloElement operator*(const CycloElement& x, const mpq_class& r) {
  std::vector<mpq_class> c(x.p());
  for (int i = 1; i < x.p(); ++i) c[i] = x.coeff(i) * r;
  return CycloElement::from_unreduced(x.p(), c);
}

CycloElement operator*(const CycloElement& x, const CycloElement& y) {
  const int p = x.p();
  std::vector<mpq_class> c(p);
  for (int i = 1; i < p; ++i) {
    if (x.c_[i - 1] == 0) continue;
    for (int j = 1; j < p; ++j) {
      if (y.c_[j - 1] == 0) continue;
      c[(i + j) % p] += x.c_[i - 1] * y.c_[j - 1];
    }
  }
  return CycloElement::from_unreduced(p, c);
}

CycloElement product_of_conjugates(const CycloElement& x, const std::vector<int>& ts) {
  CycloElement r = CycloElement::rational(x.p(), 1);
  for (int t : ts) r = r * x.galois(t);
  return r;
}

mpq_class norm(const CycloElement& x) {
  std::vector<int> all;
  for (int t = 1; t < x.p(); ++t) all.push_back(t);
  auto r = product_of_conjugates(x, all).as_rational();
  if (!r) fail(ErrorKind::internal, "norm is not rational");
  return *r;
}

CycloElement relative_norm(const CycloElement& x, const std::vector<int>& H) {
  return product_of_conjugates(x, H);
}

CycloElement CycloElement::inverse() const {
  if (is_zero()) fail(ErrorKind::invalid_argument, "inverse of zero");
  std::vector<int> others;
  for (int t = 2; t < p_; ++t) others.push_back(t);
  CycloElement rest = product_of_conjugates(*this, others);
  mpq_class n = norm(*this);
  return rest * mpq_class(1 / n);
}

const std::vector<BigComplex>& roots_of_unity(int p) {
  thread_local std::map<std::pair<int, long>, std::vector<BigComplex>> cache;
  auto key = std::make_pair(p, working_precision());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<BigComplex> z(p);
  BigReal two_pi_over_p = BigReal(2) * BigReal::pi() / BigReal(p);
  for (int j = 0; j < p; ++j) z[j] = BigComplex::expi(two_pi_over_p * BigReal(j));
  return cache.emplace(key, std::move(z)).first->second;
}

BigComplex CycloElement::embed(long k) const {
  const auto& z = roots_of_unity(p_);
  long kk = ((k % p_) + p_) % p_;
  if (kk == 0) fail(ErrorKind::invalid_argument, "embedding index must be a unit mod p");
  BigComplex s;
  for (int i = 1; i < p_; ++i) {
    if (c_[i - 1] == 0) continue;
    s += z[(i * kk) % p_] * BigReal::from_mpq(c_[i - 1]);
  }
  return s;
}

std::vector<mpq_class> char_poly(const CycloElement& x) {
  const int p = x.p();
  // prod_t (X - x^sigma_t) with coefficients in Q(zeta); the result is rational
  std::vector<CycloElement> poly = {CycloElement::rational(p, 1)};
  for (int t = 1; t < p; ++t) {
    CycloElement r = x.galois(t);
    std::vector<CycloElement> next(poly.size() + 1, CycloElement(p));
    for (size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] = next[i + 1] + poly[i];
      next[i] = next[i] - poly[i] * r;
    }
    poly = std::move(next);
  }
  std::vector<mpq_class> out;
  for (auto& c : poly) {
    auto q = c.as_rational();
    if (!q) fail(ErrorKind::internal, "characteristic polynomial not rational");
    out.push_back(*q);
  }
  return out;
}

BigReal height(const CycloElement& x) {
  if (x.is_zero()) fail(ErrorKind::invalid_argument, "height of zero");
  if (auto q = x.as_rational()) {
    mpz_class n = abs(q->get_num()), d = q->get_den();
    return log(BigReal::from_mpz(n > d ? n : d));
  }
  const int p = x.p();
  BigReal s;
  for (int t = 1; t < p; ++t) {
    BigReal a = abs(x.embed(t));
    if (certainly_lt(BigReal(1), a)) {
      s += log(a);
    } else if (!certainly_lt(a, BigReal(1))) {
      // |x^sigma| straddles 1: log+ lies in [0, log(upper)]
      BigReal u = log(a.upper());
      BigReal half = u / BigReal(2);
      s += half.midpoint().add_error(half);
    }
  }
  if (!x.is_integral()) {
    auto cp = char_poly(x);
    mpz_class den = 1;
    for (auto& c : cp) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.get_den_mpz_t());
    mpz_class g = 0;
    for (auto& c : cp) {
      mpz_class v = mpz_class(c * den);
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
    }
    mpz_class lead = mpz_class(cp.back() * den) / g;
    if (lead < 0) lead = -lead;
    s += log(BigReal::from_mpz(lead));
  }
  return s / BigReal(p - 1);
}

// ---------------------------------------------------------------- unit system

namespace {

// zeta^{(1-a)/2} (1 + zeta + ... + zeta^{a-1}), a real unit for a != 0 mod p
CycloElement xi_unit(int p, int a) {
  std::vector<mpq_class> c(p);
  long shift = ((1 - a) % p + p) % p * ((p + 1) / 2) % p;  // (1-a)/2 mod p
  for (int i = 0; i < a; ++i) c[(shift + i) % p] += 1;
  return CycloElement::from_unreduced(p, c);
}

std::vector<int> half_H(const GroupContext& ctx) {
  std::vector<int> out;
  for (int h : ctx.H())
    if (2 * h < ctx.p()) out.push_back(h);
  return out;
}

}  // namespace

UnitSystem UnitSystem::build(const GroupContext& ctx, const std::optional<std::string>& override_path) {
  const int p = ctx.p();
  UnitSystem u;
  u.eta0 = relative_norm(CycloElement::rational(p, 1) - CycloElement::zeta_pow(p, 1), ctx.H());
  if (override_path) {
    UnitSystem ext = read_unit_basis(ctx, *override_path);
    u.etas = ext.etas;
    u.source = Source::external_file;
  } else {
    for (int l = 1; l < ctx.d(); ++l)
      u.etas.push_back(product_of_conjugates(xi_unit(p, ctx.coset_rep(l)), half_H(ctx)));
  }
  verify_unit_system(ctx, u);
  return u;
}

BigMatrix UnitSystem::log_matrix(const GroupContext& ctx) const {
  const int d = ctx.d();
  BigMatrix m(d, std::vector<BigReal>(d));
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) m[k][l] = log(abs(unit(l).embed(ctx.coset_rep(k))));
  return m;
}

void verify_unit_system(const GroupContext& ctx, const UnitSystem& u) {
  const int p = ctx.p();
  auto bad = [](const std::string& why) { fail(ErrorKind::validation_failed, "unit basis: " + why); };
  if (static_cast<int>(u.etas.size()) != ctx.d() - 1) bad("expected d-1 units");
  std::vector<int> reps;
  for (int k = 0; k < ctx.d(); ++k) reps.push_back(ctx.coset_rep(k));
  if (!u.eta0.fixed_by(ctx.H())) bad("eta0 not in K");
  auto n0 = product_of_conjugates(u.eta0, reps).as_rational();
  if (!n0 || (*n0 != p && *n0 != -p)) bad("N_{K/Q}(eta0) != +-p");
  for (size_t i = 0; i < u.etas.size(); ++i) {
    const auto& e = u.etas[i];
    if (e.p() != p) bad("unit " + std::to_string(i + 1) + " has wrong p");
    if (!e.fixed_by(ctx.H())) bad("unit " + std::to_string(i + 1) + " not fixed by H");
    auto n = product_of_conjugates(e, reps).as_rational();
    if (!n || (*n != 1 && *n != -1)) bad("unit " + std::to_string(i + 1) + " has norm != +-1");
    if (!e.is_integral()) bad("unit " + std::to_string(i + 1) + " not integral");
  }
  BigMatrix m = u.log_matrix(ctx);
  BigMatrix minor(ctx.d() - 1, std::vector<BigReal>(ctx.d() - 1));
  for (int k = 0; k + 1 < ctx.d(); ++k)
    for (int l = 1; l < ctx.d(); ++l) minor[k][l - 1] = m[k][l];
  try {
    BigReal reg = determinant(minor);
    if (reg.sign() == 0) bad("log-embedding matrix is singular");
  } catch (const PrecisionExhausted&) {
    bad("log-embedding matrix is singular");
  }
  for (size_t i = 0; i < u.etas.size(); ++i) {
    BigReal h = height(u.etas[i]);
    if (certainly_lt(h, BigReal::from_string("0.24"))) bad("unit " + std::to_string(i + 1) + " has height < 0.24");
  }
}

UnitSystem read_unit_basis(const GroupContext& ctx, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open unit basis file " + path);
  int p = 0, d = 0;
  in >> p >> d;
  if (!in || p != ctx.p() || d != ctx.d())
    fail(ErrorKind::invalid_argument, "unit basis header must be \"" + std::to_string(ctx.p()) + " " +
                                          std::to_string(ctx.d()) + "\"");
  std::string line;
  std::getline(in, line);
  UnitSystem u;
  u.source = UnitSystem::Source::external_file;
  for (int k = 1; k < d; ++k) {
    if (!std::getline(in, line)) fail(ErrorKind::invalid_argument, "unit basis file truncated");
    std::stringstream ss(line);
    std::string tok;
    std::vector<mpq_class> c(p);
    int i = 1;
    while (std::getline(ss, tok, ',')) {
      if (i >= p) fail(ErrorKind::invalid_argument, "too many coordinates on a unit line");
      size_t a = tok.find_first_not_of(" \t"), b = tok.find_last_not_of(" \t\r");
      if (a == std::string::npos) fail(ErrorKind::invalid_argument, "empty coordinate");
      mpq_class q;
      if (q.set_str(tok.substr(a, b - a + 1), 10) != 0)
        fail(ErrorKind::invalid_argument, "bad rational '" + tok + "'");
      q.canonicalize();
      c[i++] = q;
    }
    if (i != p) fail(ErrorKind::invalid_argument, "a unit line needs p-1 coordinates");
    u.etas.push_back(CycloElement::from_unreduced(p, c));
  }
  return u;
}

void write_unit_basis(const UnitSystem& u, const GroupContext& ctx, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << ctx.p() << " " << ctx.d() << "\n";
  for (auto& e : u.etas) {
    for (int i = 1; i < ctx.p(); ++i) out << (i > 1 ? "," : "") << e.coeff(i).get_str();
    out << "\n";
  }
}

}  // namespace cartan
