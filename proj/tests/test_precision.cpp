#include "doctest.h"

#include <random>

#include "cartan/precision.hpp"

using namespace cartan;

namespace {

BigReal pow2(long e) {
  BigReal r(1);
  mpfr_mul_2si(r.raw_value(), r.value(), e, MPFR_RNDN);
  return r;
}

// |x - y| <= bound, where y is a reference value
bool within(const BigReal& x, const BigReal& y, const BigReal& bound) {
  BigReal d = abs(x.midpoint() - y.midpoint());
  return value_le(d, bound);
}

}  // namespace

TEST_CASE("precision scope") {
  CHECK_THROWS_AS(PrecisionScope(32), Error);
  {
    PrecisionScope s(128);
    CHECK(working_precision() == 128);
    BigReal third = BigReal(1) / BigReal(3);
    CHECK(value_le(BigReal::from_mpz(0) + BigReal(third.err_double() > 0 ? 0 : 0), BigReal(1)));
    BigReal e;
    mpfr_set(e.raw_value(), third.err(), MPFR_RNDU);
    CHECK(value_le(e, pow2(-126)));
    CHECK(third.to_double() == doctest::Approx(1.0 / 3));
  }
  CHECK(working_precision() == kDefaultPrecision);
  {
    PrecisionScope s(64);
    CHECK(BigReal(7).is_exact());
  }
}

TEST_CASE("pi sqrt3 against a 1000-bit recomputation") {
  BigReal lo, hi;
  {
    PrecisionScope s(256);
    lo = BigReal::pi() * sqrt(BigReal(3));
    BigReal e;
    mpfr_set(e.raw_value(), lo.err(), MPFR_RNDU);
    CHECK(value_le(e, pow2(-250)));
  }
  {
    PrecisionScope s(1000);
    hi = BigReal::pi() * sqrt(BigReal(3));
    BigReal e;
    mpfr_set(e.raw_value(), lo.err(), MPFR_RNDU);
    CHECK(within(lo, hi, e));
  }
}

TEST_CASE("nearest integer distance") {
  CHECK(nearest_integer_distance(BigReal::from_double(2.25)).to_double() == 0.25);
  CHECK(nearest_integer_distance(BigReal::from_double(-0.4999)).to_double() == doctest::Approx(0.4999));
  BigReal z = nearest_integer_distance(BigReal(3));
  CHECK(z.to_double() == 0.0);
  CHECK(z.is_exact());
  BigReal fuzzy = BigReal::from_double(0.5);
  fuzzy.add_error_double(0.3);
  CHECK_THROWS_AS(nearest_integer_distance(fuzzy), PrecisionExhausted);
}

TEST_CASE("continued fractions") {
  BigReal phi = (BigReal(1) + sqrt(BigReal(5))) / BigReal(2);
  auto cf = continued_fraction_expand(phi, 13);
  // every convergent with q <= 13, including 21/13
  std::vector<std::pair<long, long>> want = {{1, 1}, {2, 1}, {3, 2}, {5, 3}, {8, 5}, {13, 8}, {21, 13}};
  REQUIRE(cf.convergents.size() == want.size());
  for (size_t i = 0; i < want.size(); ++i) {
    CHECK(cf.convergents[i].p == want[i].first);
    CHECK(cf.convergents[i].q == want[i].second);
  }
  auto seven = continued_fraction_expand(BigReal(7), 100);
  REQUIRE(seven.convergents.size() == 1);
  CHECK(seven.convergents[0].p == 7);
  CHECK(seven.convergents[0].q == 1);
  auto half = continued_fraction_expand(BigReal::from_double(0.5), 100);
  CHECK(half.convergents.back().p == 1);
  CHECK(half.convergents.back().q == 2);

  BigReal fuzzy = BigReal::from_double(0.5);
  fuzzy.add_error_double(1e-3);
  CHECK_THROWS_AS(continued_fraction_expand(fuzzy, 100000), PrecisionExhausted);
}

TEST_CASE("convergent property |xq - p| < 1/q_next") {
  BigReal x = BigReal::pi() * sqrt(BigReal(3));
  auto cf = continued_fraction_expand(x, mpz_class("1000000000000000000000"));
  REQUIRE(cf.convergents.size() > 10);
  for (size_t i = 1; i < cf.convergents.size(); ++i) {
    CHECK(cf.convergents[i].q > cf.convergents[i - 1].q);
    const auto& c = cf.convergents[i - 1];
    BigReal lhs = abs(x * BigReal::from_mpz(c.q) - BigReal::from_mpz(c.p));
    BigReal rhs = BigReal(1) / BigReal::from_mpz(cf.convergents[i].q);
    CHECK(certainly_lt(lhs, rhs));
  }
}

TEST_CASE("brent root") {
  RealFn f = [](const BigReal& t) { return t * t - BigReal(2); };
  BigReal tol = BigReal::from_string("1e-30");
  BigReal r = brent_root(f, BigReal(1), BigReal(2), tol);
  BigReal s2 = sqrt(BigReal(2));
  CHECK(within(r, s2, tol));
  CHECK(r.err_double() <= 1e-30);
  CHECK(value_le(BigReal(1), r));
  CHECK(value_le(r, BigReal(2)));

  RealFn g = [](const BigReal& t) { return t - BigReal::from_double(0.5); };
  BigReal h = brent_root(g, BigReal(0), BigReal(1), tol);
  CHECK(within(h, BigReal::from_double(0.5), tol));

  CHECK_THROWS_AS(brent_root(f, BigReal(2), BigReal(3), tol), NoSignChange);
  CHECK_THROWS_AS(brent_root(f, BigReal(1), BigReal(2), BigReal::from_string("1e-200")), PrecisionExhausted);
}

TEST_CASE("brent agrees with bisection on a random cubic") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    BigReal c0 = BigReal::from_double(u(rng)), c1 = BigReal::from_double(u(rng));
    RealFn f = [&](const BigReal& t) { return t * t * t + c1 * t + c0; };
    BigReal a(-4), b(4);
    BigReal tol = BigReal::from_string("1e-40");
    BigReal r = brent_root(f, a, b, tol);
    for (int i = 0; i < 200; ++i) {
      BigReal m = ((a + b) / BigReal(2)).midpoint();
      if (f(m).sign() == f(a).sign()) a = m; else b = m;
    }
    CHECK(within(r, a, BigReal::from_string("2e-40")));
  }
}

TEST_CASE("critical points") {
  RealFn df = [](const BigReal& t) { return BigReal(3) * t * t - BigReal(3); };
  CurvatureBound d2 = [](const BigReal& lo, const BigReal& hi) {
    return BigReal(6) * max_value(abs(lo), abs(hi));
  };
  auto cps = find_roots_of_derivative(df, d2, BigReal(-2), BigReal(2), BigReal::from_string("1e-30"));
  REQUIRE(cps.size() == 2);
  CHECK(cps[0].certified);
  CHECK(within(cps[0].t, BigReal(-1), BigReal::from_string("1e-29")));
  CHECK(within(cps[1].t, BigReal(1), BigReal::from_string("1e-29")));

  RealFn mono = [](const BigReal& t) { return exp(t); };
  CurvatureBound m2 = [](const BigReal&, const BigReal& hi) { return exp(hi.upper()); };
  CHECK(find_roots_of_derivative(mono, m2, BigReal(-2), BigReal(2), BigReal::from_string("1e-30")).empty());
}

TEST_CASE("error soundness at b versus 4b") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    double a = u(rng), b = u(rng), c = u(rng);
    auto expr = [&]() {
      BigReal x = BigReal::from_double(a), y = BigReal::from_double(b), z = BigReal::from_double(c);
      BigReal v = log(x * y + z) / sqrt(z) + exp(-x / y) * sin(z * x) - pow_int(y / z, 5);
      v = v * cos(v) + atan(x - y) - BigReal::pi() / (BigReal(7) + x);
      BigComplex w(x, y);
      w = exp(pow_int(w, 3) / BigComplex(z, x)) ;
      return v + abs(w) + arg(BigComplex(z, y - x));
    };
    for (long bits : {64L, 100L, 256L}) {
      BigReal lo, hi;
      {
        PrecisionScope s(bits);
        lo = expr();
      }
      {
        PrecisionScope s(4 * bits);
        hi = expr();
      }
      BigReal e;
      mpfr_set(e.raw_value(), lo.err(), MPFR_RNDU);
      CHECK(within(lo, hi, e));
    }
  }
}
