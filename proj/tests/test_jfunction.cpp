#include "doctest.h"

#include <cmath>
#include <random>

#include "cartan/jfunction.hpp"
#include "cartan/modp.hpp"

using namespace cartan;

namespace {

BigReal r0() { return exp(-(BigReal::pi() * sqrt(BigReal(3)))); }

}  // namespace

TEST_CASE("j coefficients") {
  auto c = j_coefficients(200);
  REQUIRE(c.size() == 201);
  CHECK(c[0] == 744);
  CHECK(c[1] == 196884);
  CHECK(c[2] == 21493760);
  CHECK(c[3] == 864299970);
  CHECK(c[4] == mpz_class("20245856256"));
  CHECK(c[5] == mpz_class("333202640600"));
  for (const auto& x : c) CHECK(x > 0);
  // asymptotics c_n ~ e^{4 pi sqrt n} / (sqrt2 n^{3/4})
  double n = 200;
  double pred = 4 * M_PI * std::sqrt(n) - 0.5 * std::log(2.0) - 0.75 * std::log(n);
  double got = std::log(c[200].get_d());
  CHECK(std::fabs(got - pred) < 0.05);
}

TEST_CASE("j near the cusp and at CM points") {
  auto scope = with_precision(256);
  BigReal q = BigReal::from_string("1e-12");
  BigReal j = evaluate_j(q);
  CHECK(std::fabs((j - BigReal(1) / q - BigReal(744)).to_double() - 196884e-12) < 1e-9);
  struct Case {
    int disc;
    const char* j;
  };
  for (Case cs : {Case{-163, "-262537412640768000"}, Case{-4, "1728"}, Case{-3, "0"}, Case{-67, "-147197952000"},
                  Case{-8, "8000"}, Case{-16, "287496"}}) {
    BigReal t = exp(-(BigReal::pi() * sqrt(BigReal(-cs.disc))));
    BigReal qq = (-cs.disc) % 4 == 0 ? t : -t;
    BigReal jj = evaluate_j(qq);
    JClass k = classify_j(jj);
    CHECK(k.cls == Classification::cm_match);
    CHECK(k.disc == cs.disc);
    CHECK(k.nearest == mpz_class(cs.j));
  }
}

TEST_CASE("j round trip") {
  auto scope = with_precision(256);
  BigReal target(-32768);
  RealFn f = [&](const BigReal& q) { return evaluate_j(q, 60) - target; };
  BigReal q = brent_root(f, -r0(), BigReal::from_string("-1e-6"), BigReal::from_string("1e-60"));
  BigReal want = -exp(-(BigReal::pi() * sqrt(BigReal(11))));
  CHECK(std::fabs((q - want).to_double()) < 1e-55);
  BigReal j = evaluate_j(q.midpoint());
  CHECK(value_le(abs(j.midpoint() - target), BigReal::from_double(j.err_double()) + BigReal::from_string("1e-40")));
  CHECK(j.err_double() < 0.25);
}

TEST_CASE("tail bound against the modular definition") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    double s = u(rng);
    double sign = u(rng) < 0.5 ? -1 : 1;
    BigReal oracle_j, q;
    {
      auto hi = with_precision(512);
      q = BigReal::from_double(sign * s) * r0();
      if (s < 1e-300) continue;
      oracle_j = j_modular(BigComplex(q)).re();
    }
    auto scope = with_precision(256);
    for (int N : {5, 10, 20}) {
      BigReal j = evaluate_j(q, N);
      BigReal diff = abs(j.midpoint() - oracle_j);
      BigReal bound = j_tail_bound(N) + BigReal::from_string("1e-50") * abs(oracle_j);
      CHECK(value_le(diff, bound));
      CHECK(value_le(diff, BigReal::from_double(j.err_double())));
    }
  }
}

TEST_CASE("series agrees with the modular definition at complex tau") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-0.5, 0.5), uy(0.9, 3.0);
  int done = 0;
  while (done < 20) {
    double x = ux(rng), y = uy(rng);
    if (x * x + y * y < 1 || y < std::sqrt(3.0) / 2) continue;
    BigComplex oracle;
    BigComplex q;
    {
      auto hi = with_precision(512);
      q = BigComplex::expi(BigReal(2) * BigReal::pi() * BigReal::from_double(x)) *
          exp(-(BigReal(2) * BigReal::pi() * BigReal::from_double(y)));
      oracle = j_modular(q);
    }
    auto scope = with_precision(256);
    BigComplex j = evaluate_j(q, 40);
    BigReal dr = abs(j.re().midpoint() - oracle.re()), di = abs(j.im().midpoint() - oracle.im());
    CHECK(value_le(dr, BigReal::from_double(j.re().err_double())));
    CHECK(value_le(di, BigReal::from_double(j.im().err_double())));
    ++done;
  }
}

TEST_CASE("classification") {
  auto scope = with_precision(128);
  CHECK(classify_j(BigReal(0)).cls == Classification::cm_match);
  CHECK(classify_j(BigReal(0)).disc == -3);
  BigReal big = BigReal::from_mpz(mpz_class("-262537412640768000"));
  CHECK(classify_j(big).disc == -163);
  BigReal x = BigReal(1729);
  x.add_error(BigReal::from_string("1e-12"));
  CHECK(classify_j(x).cls == Classification::integer_j_unverified);
  BigReal y = BigReal::from_string("1729.3");
  y.add_error(BigReal::from_string("1e-3"));
  CHECK(classify_j(y).cls == Classification::rejected);
  BigReal z = BigReal(8000);
  z.add_error(BigReal::from_string("0.6"));
  CHECK_THROWS_AS(classify_j(z), PrecisionExhausted);
  CHECK(cm_table().size() == 13);
}

TEST_CASE("Frobenius traces") {
  for (long ell : {5L, 7L, 11L, 13L, 101L, 499L}) {
    for (long j : {1L, 2L, 1000L, 1727L}) {
      if ((j * (1728 - j)) % ell == 0) continue;
      long a = frobenius_trace(j, ell);
      CHECK(a * a <= 4 * ell);
    }
  }
  // CM by Z[i]: a_ell = 0 for ell = 3 mod 4; CM by -7: a_ell = 0 for inert ell
  for (long ell = 5; ell < 300; ++ell) {
    if (!is_prime(ell)) continue;
    if (ell % 4 == 3 && 287496 % ell != 0 && (1728 - 287496) % ell != 0) CHECK(frobenius_trace(287496, ell) == 0);
    if (ell != 7 && legendre(-7, static_cast<int>(ell)) == -1 && 3375 % ell != 0 && (1728 + 3375) % ell != 0)
      CHECK(frobenius_trace(-3375, ell) == 0);
  }
}

TEST_CASE("small j filter for p = 11") {
  for (long j = 1; j <= 1727; ++j) {
    auto r = small_j_filter(11, j, 200);
    CHECK(r.excluded);
    if (r.excluded) {
      CHECK(r.a_ell % 11 != 0);
      long disc = ((r.a_ell * r.a_ell - 4 * r.witness_ell) % 11 + 11) % 11;
      CHECK(disc != 0);
      CHECK(legendre(disc, 11) == 1);
    }
  }
  CHECK_THROWS(small_j_filter(11, 1728, 200));
}
