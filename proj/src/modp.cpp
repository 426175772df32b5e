#include "cartan/modp.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "cartan/error.hpp"

namespace cartan {

bool is_prime(long long n) {
  if (n < 2) return false;
  for (long long k = 2; k * k <= n; ++k)
    if (n % k == 0) return false;
  return true;
}

namespace {

long long powmod(long long b, long long e, long long p) {
  long long r = 1;
  b %= p;
  if (b < 0) b += p;
  while (e > 0) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return r;
}

}  // namespace

int legendre(long long a, int p) {
  a %= p;
  if (a < 0) a += p;
  if (a == 0) return 0;
  return powmod(a, (p - 1) / 2, p) == 1 ? 1 : -1;
}

int primitive_root(int p) {
  std::vector<int> f;
  int n = p - 1;
  for (int k = 2; k * k <= n; ++k)
    if (n % k == 0) {
      f.push_back(k);
      while (n % k == 0) n /= k;
    }
  if (n > 1) f.push_back(n);
  for (int g = 2; g < p; ++g) {
    bool ok = true;
    for (int q : f)
      if (powmod(g, (p - 1) / q, p) == 1) {
        ok = false;
        break;
      }
    if (ok) return g;
  }
  fail(ErrorKind::internal, "no primitive root");
}

GroupContext GroupContext::build(int p, int h_generator) {
  if (p < 7 || !is_prime(p)) fail(ErrorKind::invalid_argument, "p must be a prime >= 7");
  GroupContext c;
  c.p_ = p;
  if (p % 4 == 3) {
    c.xi_ = p - 1;
  } else {
    for (int x = 2; x < p; ++x)
      if (legendre(x, p) == -1) {
        c.xi_ = x;
        break;
      }
  }
  std::set<int> h = {1, p - 1};
  if (h_generator != 0) {
    int gen = ((h_generator % p) + p) % p;
    if (gen == 0) fail(ErrorKind::invalid_argument, "H generator must be a unit mod p");
    h.clear();
    long long x = 1;
    do {
      h.insert(static_cast<int>(x));
      x = x * gen % p;
    } while (x != 1);
    if (!h.count(p - 1)) fail(ErrorKind::invalid_argument, "H must contain -1");
  }
  c.H_.assign(h.begin(), h.end());
  c.d_ = (p - 1) / static_cast<int>(c.H_.size());
  if (c.d_ < 3) fail(ErrorKind::invalid_argument, "index [F_p^x : H] must be >= 3");
  c.m_ = ((p + 1) * static_cast<long long>(c.H_.size())) % 3 == 0 ? 2 : 6;
  c.g_ = primitive_root(p);
  c.coset_.assign(p, -1);
  long long x = 1;
  for (int k = 0; k < p - 1; ++k) {
    c.coset_[x] = -2 - k;  // temporary: store discrete log
    x = x * c.g_ % p;
  }
  // H = <g^d>, so the coset of g^k is k mod d
  for (int t = 1; t < p; ++t) c.coset_[t] = (-2 - c.coset_[t]) % c.d_;
  return c;
}

int GroupContext::mod(long long v) const {
  long long r = v % p_;
  return static_cast<int>(r < 0 ? r + p_ : r);
}

int GroupContext::inv(int t) const {
  if (mod(t) == 0) fail(ErrorKind::invalid_argument, "inverse of 0 mod p");
  return static_cast<int>(powmod(t, p_ - 2, p_));
}

int GroupContext::pow(int b, long long e) const { return static_cast<int>(powmod(b, e, p_)); }

std::vector<Orbit> cusp_orbits(const GroupContext& ctx) {
  const int p = ctx.p();
  std::vector<Orbit> out((p - 1) / 2);
  for (int c = 1; c <= (p - 1) / 2; ++c) {
    out[c - 1].label = c;
    out[c - 1].at_infinity = c == 1;
  }
  for (int x = 0; x < p; ++x)
    for (int y = 0; y < p; ++y) {
      if (x == 0 && y == 0) continue;
      int n = ctx.mod(static_cast<long long>(x) * x - static_cast<long long>(ctx.xi()) * y * y);
      int c = std::min(n, p - n);
      out[c - 1].members.push_back({x, y});
    }
  return out;
}

std::vector<std::vector<int>> h_cusp_orbits(const GroupContext& ctx) {
  std::vector<std::vector<int>> out(ctx.d());
  for (int c = 1; c <= (ctx.p() - 1) / 2; ++c) out[ctx.coset_index(c)].push_back(c);
  return out;
}

std::vector<Orbit> unit_orbits(const GroupContext& ctx) {
  const int p = ctx.p();
  std::vector<Orbit> out(ctx.d());
  for (int l = 0; l < ctx.d(); ++l) out[l].label = l;
  for (int x = 0; x < p; ++x)
    for (int y = 0; y < p; ++y) {
      if (x == 0 && y == 0) continue;
      int n = ctx.mod(static_cast<long long>(ctx.xi()) * x * x - static_cast<long long>(y) * y);
      out[ctx.coset_index(n)].members.push_back({x, y});
    }
  return out;
}

std::pair<int, int> cusp_ab(const GroupContext& ctx, int c) {
  if (ctx.mod(c) == 1) return {1, 0};
  const int target = ctx.inv(ctx.mod(c));
  for (int a = 0; a < ctx.p(); ++a)
    for (int b = 0; b < ctx.p(); ++b)
      if (ctx.mod(static_cast<long long>(a) * a - static_cast<long long>(ctx.xi()) * b * b) == target)
        return {a, b};
  fail(ErrorKind::internal, "norm equation has no solution");
}

ModMat sigma_c_mod_p(const GroupContext& ctx, int c) {
  auto [a, b] = cusp_ab(ctx, c);
  c = ctx.mod(c);
  return {ctx.mod(static_cast<long long>(c) * a), ctx.mod(static_cast<long long>(b) * ctx.xi()),
          ctx.mod(static_cast<long long>(c) * b), a};
}

Mat2 sigma_c(const GroupContext& ctx, int c) {
  const ModMat m0 = sigma_c_mod_p(ctx, c);
  if (m0 == ModMat{1, 0, 0, 1}) return {1, 0, 0, 1};
  const mpz_class p = ctx.p();
  mpz_class C = m0[2] == 0 ? p : mpz_class(m0[2]);
  mpz_class D = m0[3];
  while (true) {
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), C.get_mpz_t(), D.get_mpz_t());
    if (g == 1) break;
    D += p;
  }
  // A1 D - B1 C = 1
  mpz_class g, s, t;
  mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), D.get_mpz_t(), C.get_mpz_t());
  mpz_class A1 = s, B1 = -t;
  mpz_class k;
  if (m0[2] != 0) {
    mpz_class ci;
    mpz_class cm = C % p;
    mpz_invert(ci.get_mpz_t(), cm.get_mpz_t(), p.get_mpz_t());
    k = ((mpz_class(m0[0]) - A1) * ci) % p;
  } else {
    mpz_class di;
    mpz_class dm = D % p;
    mpz_invert(di.get_mpz_t(), dm.get_mpz_t(), p.get_mpz_t());
    k = ((mpz_class(m0[1]) - B1) * di) % p;
  }
  Mat2 r{A1 + k * C, B1 + k * D, C, D};
  if (r.a * r.d - r.b * r.c != 1) fail(ErrorKind::internal, "sigma_c lift has determinant != 1");
  if (reduce(r, ctx.p()) != m0) fail(ErrorKind::internal, "sigma_c lift does not reduce correctly");
  return r;
}

ModMat reduce(const Mat2& m, int p) {
  auto red = [p](const mpz_class& v) {
    mpz_class r = v % p;
    if (r < 0) r += p;
    return static_cast<int>(r.get_si());
  };
  return {red(m.a), red(m.b), red(m.c), red(m.d)};
}

Point act_right(const GroupContext& ctx, Point v, const ModMat& g) {
  return {ctx.mod(static_cast<long long>(v.x) * g[0] + static_cast<long long>(v.y) * g[2]),
          ctx.mod(static_cast<long long>(v.x) * g[1] + static_cast<long long>(v.y) * g[3])};
}

Point act_left(const GroupContext& ctx, const ModMat& g, Point v) {
  return {ctx.mod(static_cast<long long>(g[0]) * v.x + static_cast<long long>(g[1]) * v.y),
          ctx.mod(static_cast<long long>(g[2]) * v.x + static_cast<long long>(g[3]) * v.y)};
}

LiftedPoint lift(Point a, int p) {
  LiftedPoint r;
  r.a = a;
  r.t1 = mpq_class(a.x, p);
  r.t1.canonicalize();
  if (a.y == 0)
    r.t2 = 0;
  else if (2 * a.y < p)
    r.t2 = mpq_class(a.y, p);
  else
    r.t2 = mpq_class(-(p - a.y), p);
  r.t2.canonicalize();
  return r;
}

LiftedPoint lift_alternate(Point a, int p) {
  LiftedPoint r = lift(a, p);
  if (r.t2 > 0)
    r.t2 += 1;
  else if (r.t2 < 0)
    r.t2 -= 1;
  else if (a.y == 0)
    r.t2 = 0;
  return r;
}

std::vector<ModMat> normalizer_elements(const GroupContext& ctx, bool det_in_H) {
  std::vector<ModMat> out;
  const int p = ctx.p();
  for (int al = 0; al < p; ++al)
    for (int be = 0; be < p; ++be) {
      int det = ctx.mod(static_cast<long long>(al) * al - static_cast<long long>(ctx.xi()) * be * be);
      if (det == 0) continue;
      if (det_in_H && !ctx.in_H(det)) continue;
      int xb = ctx.mod(static_cast<long long>(ctx.xi()) * be);
      out.push_back({al, xb, be, al});
      out.push_back({al, xb, ctx.mod(-be), ctx.mod(-al)});
    }
  return out;
}

}  // namespace cartan
