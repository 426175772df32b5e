#include "doctest.h"

#include <random>

#include "cartan/principal.hpp"
#include "cm_fixtures.hpp"

using namespace cartan;
using fixtures::cm_points;
using fixtures::cm_t;

namespace {

bool contains(const BigReal& x, long n) {
  BigReal d = abs(x.midpoint() - BigReal(n));
  return value_le(d, BigReal::from_string("1e-40") + BigReal::from_double(x.err_double()));
}

struct Setup {
  GroupContext ctx;
  UnitSystem units;
  UnitLogMatrix L;
  explicit Setup(int p) : ctx(GroupContext::build(p)), units(UnitSystem::build(ctx)), L(UnitLogMatrix::build(ctx, units)) {}
};

}  // namespace

TEST_CASE("unit log matrix") {
  auto scope = with_precision(256);
  for (int p : {7, 11, 13}) {
    Setup s(p);
    const int d = s.ctx.d();
    CHECK(certainly_lt(s.L.residual, pow_int(BigReal(2), -128)));
    for (int l = 0; l < d; ++l) {
      BigReal col;
      for (int k = 0; k < d; ++k) col += s.L.M[k][l];
      BigReal want = l == 0 ? log(BigReal(p)) : BigReal();
      CHECK(std::fabs((col - want).to_double()) < 1e-30);
    }
    CHECK(s.L.kappa.certainly_positive());
  }
}

TEST_CASE("cusp frame identities") {
  auto scope = with_precision(256);
  for (int p : {7, 11, 13}) {
    Setup s(p);
    const int d = s.ctx.d();
    for (const auto& o : cusp_orbits(s.ctx)) {
      CuspFrame f = build_cusp_frame(s.ctx, s.L, o.label, 4);
      CHECK(std::fabs(f.delta[0].to_double()) < 1e-20);
      CHECK(f.pivot >= 1);
      // M delta = -ord / p
      auto md = mat_vec(s.L.M, f.delta);
      for (int k = 0; k < d; ++k) {
        BigReal want = -BigReal::from_mpq(f.ord[k]) / BigReal(p);
        CHECK(std::fabs((md[k] - want).to_double()) < 1e-30);
      }
      mpq_class total = 0;
      for (const auto& x : f.ord) total += x;
      CHECK(total == 0);
    }
  }
}

TEST_CASE("CM exponent vectors in every relation mode") {
  auto scope = with_precision(256);
  for (int p : {7, 11, 13}) {
    Setup s(p);
    int nu = choose_nu(s.ctx, s.L.kappa * BigReal(s.ctx.m() * (p + 1) * s.ctx.h_order()), 1e-10);
    for (const auto& cm : cm_points(p)) {
      CAPTURE(cm.disc);
      CuspFrame f = build_cusp_frame(s.ctx, s.L, cm.cusp, nu);
      BigReal t = cm_t(cm);
      BigReal at = abs(t);
      auto direct = bk_from_t(f, t, RelationMode::direct);
      for (int k = 0; k < f.d; ++k) {
        CHECK(direct[k].err_double() < 1e-30);
        CHECK(nearest_integer(direct[k]).to_double() == doctest::Approx(cm.b[k]));
      }
      std::vector<RelationMode> modes = {RelationMode::log_form, RelationMode::series};
      if (value_le(at, BigReal::from_double(0.5))) modes.push_back(RelationMode::small_q);
      for (auto mode : modes) {
        auto b = bk_from_t(f, t, mode);
        for (int k = 0; k < f.d; ++k) CHECK(contains(b[k], cm.b[k]));
      }
      BigReal bb = b_bound(f, -(BigReal(p) * log(at)));
      for (long bk : cm.b) CHECK(value_le(BigReal(std::labs(bk)), bb));
      FkFamily fk(f);
      for (int k = 0; k < f.d; ++k) {
        BigReal v = fk.eval(k, t);
        CHECK(value_le(abs(v - BigReal(cm.b[k])), f.series_error(at) + BigReal::from_double(v.err_double())));
      }
    }
  }
}

TEST_CASE("FkFamily derivatives") {
  auto scope = with_precision(256);
  Setup s(11);
  CuspFrame f = build_cusp_frame(s.ctx, s.L, 3, 20);
  FkFamily fk(f);
  BigReal h = BigReal::from_string("1e-20");
  for (double tv : {-0.55, -0.3, 0.2, 0.5}) {
    BigReal t = BigReal::from_double(tv);
    for (int k = 0; k < f.d; ++k) {
      BigReal fd = (fk.eval(k, t + h) - fk.eval(k, t - h)) / (BigReal(2) * h);
      CHECK(std::fabs((fd - fk.deriv(k, t)).to_double()) < 1e-15);
      BigReal lo = t - BigReal::from_double(0.01), hi = t + BigReal::from_double(0.01);
      BigReal bound = fk.second_deriv_bound(k, lo, hi);
      for (double u : {-0.01, 0.0, 0.01}) {
        BigReal x = t + BigReal::from_double(u);
        BigReal d2 = (fk.deriv(k, x + h) - fk.deriv(k, x - h)) / (BigReal(2) * h);
        CHECK(value_le(abs(d2), bound));
      }
    }
  }
}

TEST_CASE("random exponent vectors are recovered") {
  auto scope = with_precision(256);
  std::mt19937_64 rng(11);
  for (int p : {11, 13}) {
    Setup s(p);
    const int d = s.ctx.d();
    std::uniform_int_distribution<long> u(-1000000, 1000000);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<long> b(d);
      std::vector<BigReal> bv(d);
      for (int k = 0; k < d; ++k) bv[k] = BigReal(b[k] = u(rng));
      auto logs = mat_vec(s.L.M, bv);
      auto back = mat_vec(s.L.alpha, logs);
      for (int k = 0; k < d; ++k) {
        CHECK(back[k].err_double() < 0.25);
        CHECK(contains(back[k], b[k]));
      }
    }
  }
}

TEST_CASE("b bound is monotone") {
  auto scope = with_precision(128);
  Setup s(11);
  CuspFrame f = build_cusp_frame(s.ctx, s.L, 2, 2);
  BigReal prev;
  for (int L = 10; L < 400; L += 7) {
    BigReal b = b_bound(f, BigReal(L));
    if (L > 10) CHECK(value_le(prev, b));
    prev = b;
  }
}
