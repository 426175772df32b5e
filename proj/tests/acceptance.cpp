// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero when a
// gating criterion fails. --no-stretch skips the p = 17, 19 runs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cartan/bounds.hpp"
#include "cartan/jfunction.hpp"
#include "cartan/pipeline.hpp"
#include "cm_fixtures.hpp"

using namespace cartan;

namespace {

int g_failed = 0;

void report(const char* id, bool ok, const std::string& what, bool gating = true) {
  std::printf("%s  %-3s %s\n", ok ? "PASS" : (gating ? "FAIL" : "MISS"), id, what.c_str());
  std::fflush(stdout);
  if (!ok && gating) ++g_failed;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::set<std::string> cm_strings() {
  std::set<std::string> s;
  for (const auto& c : cm_table()) s.insert(c.j.get_str());
  return s;
}

std::string cm_j_of(int disc) {
  for (const auto& c : cm_table())
    if (c.disc == disc) return c.j.get_str();
  return "?";
}

bool overlap(const BigReal& a, const BigReal& b) {
  BigReal d = abs(a.midpoint() - b.midpoint());
  BigReal bound;
  mpfr_add(bound.raw_value(), a.err(), b.err(), MPFR_RNDU);
  return value_le(d, bound);
}

struct Run {
  RunReport rep;
  double secs = 0;
  std::string error;
};

Run run_p(int p) {
  Run r;
  auto t = std::chrono::steady_clock::now();
  RunConfig c;
  c.p = p;
  try {
    r.rep = run_pipeline(c);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.secs = seconds_since(t);
  return r;
}

std::string j_list(const RunReport& r) {
  std::string s;
  for (const auto& pt : r.integral_points) s += (s.empty() ? "" : " ") + pt.j;
  return s;
}

// output is a subset of the rational CM values, every j determined, nothing unresolved
bool cm_subset(const Run& r, std::string& why) {
  if (!r.error.empty()) {
    why = r.error;
    return false;
  }
  const auto cm = cm_strings();
  for (const auto& pt : r.rep.integral_points)
    if (!cm.count(pt.j) || pt.classification != "cm-match") {
      why = "non-CM j " + pt.j;
      return false;
    }
  if (!r.rep.unresolved.empty()) {
    why = std::to_string(r.rep.unresolved.size()) + " unresolved candidates";
    return false;
  }
  if (!r.rep.complete) {
    why = "incomplete";
    return false;
  }
  return true;
}

void criterion_end_to_end(const char* id, int p, const Run& r, bool small_j) {
  std::string why;
  bool ok = cm_subset(r, why);
  std::ostringstream msg;
  msg << "p=" << p << " end to end in " << fmt("%.1f", r.secs) << " s: ";
  if (r.error.empty()) msg << r.rep.integral_points.size() << " integral j, all CM {" << j_list(r.rep) << "}";
  if (!ok) msg << " [" << why << "]";
  if (small_j && r.error.empty()) {
    bool all = r.rep.small_j.size() == 1727 && r.rep.small_j_undetermined.empty();
    msg << "; small j 1..1727: " << (1727 - r.rep.small_j_undetermined.size()) << "/1727 excluded";
    ok = ok && all;
  }
  report(id, ok, msg.str());
}

// Elkies' model of X_ns+(7) searched by height
const std::set<std::string> kOracle7 = {
    "0",          "1728",          "8000",           "-32768",   "287496", "-884736000", "-147197952000",
    "-262537412640768000", "16807000", "550731776", "66735540581252505802048", "6838755720062350457411072",
};

void criterion_cm_survival(const std::map<int, Run>& runs) {
  int checked = 0, lost = 0;
  std::string lost_list;
  for (const auto& c : fixtures::cm_points()) {
    const auto& r = runs.at(c.p);
    ++checked;
    bool found = false;
    for (const auto& pt : r.rep.integral_points)
      if (pt.classification == "cm-match" && pt.disc == c.disc && pt.j == cm_j_of(c.disc)) found = true;
    if (!found) {
      ++lost;
      lost_list += " p=" + std::to_string(c.p) + ",D=" + std::to_string(c.disc);
    }
  }
  std::set<std::string> got7;
  for (const auto& pt : runs.at(7).rep.integral_points) got7.insert(pt.j);
  bool oracle7 = got7 == kOracle7;
  std::ostringstream msg;
  msg << "CM survival p=7,11,13: " << (checked - lost) << "/" << checked << " injected CM points kept as cm-match";
  if (lost) msg << " (lost:" << lost_list << ")";
  msg << "; p=7 equals the 12-point model search: " << (oracle7 ? "yes" : "no");
  report("3", lost == 0 && oracle7, msg.str());
}

void criterion_product_identity() {
  PrecisionScope scope(512);
  std::mt19937_64 rng(20241);
  std::uniform_real_distribution<double> ux(0, 1), uy(1, 2);
  double worst = 0;
  bool ok = true;
  int n = 0;
  for (int p : {7, 11, 13}) {
    auto ctx = GroupContext::build(p);
    for (int i = 0; i < 10; ++i) {
      BigComplex tau(BigReal::from_double(ux(rng)), BigReal::from_double(uy(rng)));
      auto r = product_identity_check(ctx, tau);
      double res = r.residual.upper().to_double();
      worst = std::max(worst, res);
      ok = ok && r.positive && res < 1e-20;
      ++n;
    }
  }
  report("4", ok, "product identity, " + std::to_string(n) + " random tau at 512 bits: worst relative residual " +
                      fmt("%.3e", worst) + " < 1e-20, sign +");
}

void criterion_expansion() {
  PrecisionScope scope(256);
  std::mt19937_64 rng(4545);
  std::uniform_real_distribution<double> u01(0, 1);
  const double y_max_q = std::log(1 / 0.0044) / (2 * M_PI);  // |q| = 0.0044
  int pairs = 0, bad = 0;
  std::map<int, std::vector<SiegelTerm>> terms;
  for (int p : {7, 11, 13})
    for (int x = 0; x < p; ++x)
      for (int y = 0; y < p; ++y)
        if (x || y) terms[p].push_back(SiegelTerm::make(lift({x, y}, p), p));
  const int ps[] = {7, 11, 13};
  for (int trial = 0; trial < 200; ++trial) {
    int p = ps[trial % 3];
    const auto& a = terms[p][rng() % terms[p].size()];
    for (auto mode : {SeriesMode::log_only, SeriesMode::log_plus_series, SeriesMode::no_log}) {
      // the no-log form is stated for |q| <= 2^-p
      double y_lo = mode == SeriesMode::no_log ? std::max(y_max_q, p * std::log(2.0) / (2 * M_PI)) : y_max_q;
      BigComplex tau(BigReal::from_double(u01(rng)), BigReal::from_double(y_lo + u01(rng) * (2.5 - y_lo)));
      BigComplex g = siegel_direct(a, tau, 40);
      BigComplex norm = siegel_gamma(a) * q_power(tau, a.ell);
      int nu = static_cast<int>(rng() % 25);
      BigComplex s = siegel_series(a, tau, mode, nu);
      BigComplex e = exp(s) * norm;
      ++pairs;
      if (!(overlap(e.re(), g.re()) && overlap(e.im(), g.im()))) ++bad;
    }
  }
  int beta_bad = 0, beta_n = 0;
  for (int p : {7, 11, 13})
    for (const auto& a : terms[p]) {
      auto beta = beta_coefficients(a, 50, false);
      for (int k = 1; k <= 50; ++k) {
        ++beta_n;
        if (!(beta[k].l1() <= mpq_class(2 * k, p) + 2)) ++beta_bad;
      }
    }
  report("5", bad == 0 && beta_bad == 0,
         "expansion bounds: " + std::to_string(pairs - bad) + "/" + std::to_string(pairs) +
             " (term, q, mode) checks inside the combined error, |q| <= 0.0044; beta_k <= 2k/p + 2 for " +
             std::to_string(beta_n - beta_bad) + "/" + std::to_string(beta_n) + " (term, k <= 50)");
}

void criterion_linear_system() {
  const long bits = 256;
  PrecisionScope scope(bits);
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<long> ub(-1000000, 1000000);
  double worst_delta0 = 0, worst_res = 0;
  int recovered = 0, tried = 0;
  bool ok = true;
  for (int p : {7, 11, 13}) {
    auto ctx = GroupContext::build(p);
    auto units = UnitSystem::build(ctx);
    auto L = UnitLogMatrix::build(ctx, units);
    worst_res = std::max(worst_res, L.residual.upper().to_double());
    ok = ok && certainly_lt(L.residual, pow_int(BigReal(2), -static_cast<long>(bits / 2)));
    for (const auto& o : cusp_orbits(ctx)) {
      CuspFrame f = build_cusp_frame(ctx, L, o.label, 0);
      double d0 = abs(f.delta[0]).upper().to_double();
      worst_delta0 = std::max(worst_delta0, d0);
      ok = ok && d0 < 1e-20;
    }
    const int d = ctx.d();
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<long> b(d);
      std::vector<BigReal> bv(d);
      for (int k = 0; k < d; ++k) bv[k] = BigReal(b[k] = ub(rng));
      auto back = mat_vec(L.alpha, mat_vec(L.M, bv));
      bool good = true;
      for (int k = 0; k < d; ++k) {
        if (!(back[k].err_double() < 0.5)) good = false;
        long n = std::lround(back[k].to_double());
        if (n != b[k] || !overlap(back[k], BigReal(n))) good = false;
      }
      ++tried;
      recovered += good;
    }
  }
  ok = ok && recovered == tried;
  report("6", ok,
         "linear system, p=7,11,13: max |delta_0| " + fmt("%.2e", worst_delta0) + " < 1e-20; max |M alpha - I| " +
             fmt("%.2e", worst_res) + " < 2^-128; " + std::to_string(recovered) + "/" + std::to_string(tried) +
             " random exponent vectors recovered");
}

void criterion_reduction(const Run& r11) {
  if (!r11.error.empty()) {
    report("7", false, "reduction p=11: " + r11.error);
    return;
  }
  bool ok = true;
  std::string xs;
  double min_b0 = 1e300;
  size_t max_steps = 0;
  PrecisionScope scope(256);
  auto ctx = GroupContext::build(11);
  auto units = UnitSystem::build(ctx);
  auto L = UnitLogMatrix::build(ctx, units);
  for (const auto& c : r11.rep.cusps) {
    const auto& led = c.ledger;
    min_b0 = std::min(min_b0, led.B0.to_double());
    max_steps = std::max(max_steps, led.steps.size());
    ok = ok && led.B0.to_double() >= 1e30 && !led.steps.empty() && led.steps.size() <= 6 && !led.stalled;
    for (size_t i = 1; i < led.steps.size(); ++i) ok = ok && value_lt(led.steps[i].Xi, led.steps[i - 1].Xi);
    BigReal p(11);
    BigReal Theta = build_cusp_frame(ctx, L, c.cusp, 0).Theta;
    ok = ok && value_le(p * BigReal::log2(), led.Xi_hat) && value_le(p * log(Theta), led.Xi_hat);
    ok = ok && led.Xi_hat.to_double() <= 1e4;
    xs += (xs.empty() ? "" : ", ") + fmt("%.1f", led.Xi_hat.to_double());
  }
  report("7", ok,
         "reduction p=11: B0 >= " + fmt("%.2e", min_b0) + " cut to Xi_hat {" + xs + "} in <= " +
             std::to_string(max_steps) + " steps, decreasing, clamp max(p log Theta, p log 2) respected");
}

void criterion_j_tail() {
  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> u(0, 1);
  int n = 0, bad = 0;
  double worst_ratio = 0;
  for (int trial = 0; trial < 100; ++trial) {
    BigReal oracle, q;
    {
      PrecisionScope hi(768);
      BigReal r0 = exp(-(BigReal::pi() * sqrt(BigReal(3))));
      q = BigReal::from_double((u(rng) < 0.5 ? -1 : 1) * u(rng)) * r0;
      oracle = j_modular(BigComplex(q)).re();
    }
    PrecisionScope scope(256);
    for (int N : {5, 10, 20}) {
      BigReal j = evaluate_j(q, N);
      BigReal diff = abs(j.midpoint() - oracle);
      BigReal bound = j_tail_bound(N) + BigReal::from_string("1e-60") * abs(oracle);
      ++n;
      if (!value_le(diff, bound)) ++bad;
      worst_ratio = std::max(worst_ratio, (diff / j_tail_bound(N)).to_double());
    }
  }
  report("8", bad == 0,
         "j tail: " + std::to_string(n - bad) + "/" + std::to_string(n) +
             " (q, N) with |j_N(q) - j(q)| <= tail bound, |q| <= e^-pi sqrt3; worst ratio " + fmt("%.3f", worst_ratio));
}

}  // namespace

int main(int argc, char** argv) {
  bool stretch = true;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--no-stretch") == 0) stretch = false;

  std::map<int, Run> runs;
  for (int p : {7, 11, 13}) runs[p] = run_p(p);

  criterion_end_to_end("1", 11, runs[11], true);
  criterion_end_to_end("2", 13, runs[13], false);
  criterion_cm_survival(runs);
  criterion_product_identity();
  criterion_expansion();
  criterion_linear_system();
  criterion_reduction(runs[11]);
  criterion_j_tail();
  if (stretch) {
    for (int p : {17, 19}) {
      Run r = run_p(p);
      std::string why;
      bool ok = cm_subset(r, why);
      report("9", ok,
             "stretch p=" + std::to_string(p) + " in " + fmt("%.0f", r.secs) + " s: " +
                 (r.error.empty() ? "{" + j_list(r.rep) + "}" : "") + (ok ? "" : " [" + why + "]"),
             false);
    }
  } else {
    std::printf("SKIP  9   stretch p=17,19 (non-gating)\n");
  }
  std::printf("%s\n", g_failed ? "acceptance: FAILED" : "acceptance: all gating criteria pass");
  return g_failed ? 1 : 0;
}
