#include "doctest.h"

#include <cstdio>
#include <random>

#include "cartan/cyclotomic.hpp"

using namespace cartan;

namespace {

CycloElement random_element(int p, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(-5, 5);
  std::vector<mpq_class> c(p);
  for (auto& x : c) {
    x = mpq_class(u(rng), 1 + (rng() % 3));
    x.canonicalize();
  }
  return CycloElement::from_unreduced(p, c);
}

bool close(const BigReal& x, double want, double tol) { return std::fabs(x.to_double() - want) < tol; }

}  // namespace

TEST_CASE("field arithmetic") {
  std::mt19937_64 rng(3);
  const int p = 11;
  for (int i = 0; i < 20; ++i) {
    auto a = random_element(p, rng), b = random_element(p, rng);
    CHECK((a + b) - b == a);
    CHECK(a * b == b * a);
    if (!a.is_zero()) CHECK(a * a.inverse() == CycloElement::rational(p, 1));
    for (int s : {2, 3, 7})
      for (int t : {4, 10}) CHECK(a.galois(s).galois(t) == a.galois(s * t));
    CHECK(a.galois(1) == a);
  }
  CHECK(CycloElement::zeta_pow(p, 1).galois(p - 1) == CycloElement::zeta_pow(p, -1));
  CHECK(*CycloElement::rational(p, mpq_class(3, 4)).as_rational() == mpq_class(3, 4));
  CHECK(norm(CycloElement::rational(p, 1) - CycloElement::zeta_pow(p, 1)) == p);
}

TEST_CASE("embeddings") {
  const int p = 11;
  auto r = CycloElement::rational(p, mpq_class(1, 3)).embed(1);
  CHECK(close(r.re(), 1.0 / 3, 1e-30));
  CHECK(r.re().err_double() < 1e-70);
  auto z = CycloElement::zeta_pow(p, 1) + CycloElement::zeta_pow(p, -1);
  BigReal want = BigReal(2) * cos(BigReal(2) * BigReal::pi() / BigReal(p));
  CHECK(std::fabs((z.embed(1).re() - want).to_double()) < 1e-60);
  // K is real: conjugate embeddings agree
  auto ctx = GroupContext::build(p);
  auto u = UnitSystem::build(ctx);
  for (auto& e : u.etas)
    for (int k = 1; k < p; ++k) {
      BigReal a = abs(e.embed(k)), b = abs(e.embed(p - k));
      CHECK(std::fabs((a - b).to_double()) <= (a.err_double() + b.err_double()) * 2 + 1e-70);
      CHECK(e.embed(k).im().to_double() == doctest::Approx(0).epsilon(1e-50));
    }
}

TEST_CASE("unit systems") {
  struct Want {
    int p;
    double h0;
    std::vector<double> hs;
  };
  std::vector<Want> wants = {
      {11, 0.70903899755001418698, {0.28837927414771812568, 0.31830425192978825717, 0.31830425192978825717, 0.28837927414771812568}},
      {7, 0.74319103796926794433, {0.26986230534823757085, 0.26986230534823757085}},
      {13, 0.69748850821542802685, {0.29437631906400007422, 0.33235811474161345713, 0.31763322907853717583, 0.33235811474161345713, 0.29437631906400007422}},
  };
  for (auto& w : wants) {
    auto ctx = GroupContext::build(w.p);
    auto u = UnitSystem::build(ctx);
    CHECK(u.etas.size() == static_cast<size_t>(ctx.d() - 1));
    BigReal h0 = height(u.eta0);
    CHECK(close(h0, w.h0, 1e-15));
    CHECK(value_le(h0, BigReal(ctx.h_order()) * BigReal::log2()));
    for (size_t i = 0; i < u.etas.size(); ++i) {
      BigReal h = height(u.etas[i]);
      CHECK(close(h, w.hs[i], 1e-15));
      CHECK(h.to_double() >= 0.24);
    }
    auto m = u.log_matrix(ctx);
    CHECK_NOTHROW(inverse(m));
  }
  CHECK(height(CycloElement::rational(11, 1)).to_double() == 0.0);
  CHECK(close(height(CycloElement::rational(11, mpq_class(3, 2))), std::log(3.0), 1e-15));
}

TEST_CASE("non-full-rank override basis is rejected") {
  auto ctx = GroupContext::build(11);
  auto u = UnitSystem::build(ctx);
  const char* path = "test_units_override.txt";
  write_unit_basis(u, ctx, path);
  CHECK_NOTHROW(UnitSystem::build(ctx, std::string(path)));
  UnitSystem bad = u;
  bad.etas[1] = bad.etas[0] * bad.etas[0];
  write_unit_basis(bad, ctx, path);
  CHECK_THROWS_AS(UnitSystem::build(ctx, std::string(path)), Error);
  bad = u;
  bad.etas[2] = bad.etas[2] * mpq_class(2);
  write_unit_basis(bad, ctx, path);
  CHECK_THROWS_AS(UnitSystem::build(ctx, std::string(path)), Error);
  std::remove(path);
}
