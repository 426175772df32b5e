// cartanpts: enumerate the integral points of X_ns+(p)

#include <csignal>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "cartan/cartan.h"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

int poll_stop(void*) { return g_stop ? 1 : 0; }

void print_line(const char* line, void* user) {
  if (*static_cast<bool*>(user)) std::fprintf(stderr, "%s\n", line);
}

int check(cartan_status s, const char* what) {
  if (s == CARTAN_OK) return 0;
  std::fprintf(stderr, "cartanpts: %s: %s: %s\n", what, cartan_status_string(s), cartan_last_error());
  return 10 + static_cast<int>(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integral points on the non-split Cartan modular curve X_ns+(p)"};
  int p = 11;
  std::string subgroup = "pm1";
  long bits = 256;
  double epsilon = 1e-10;
  double t0 = 10;
  long ell_budget = 500;
  long index = 1;
  int workers = 1;
  std::string checkpoint, report, unit_basis;
  bool validate_only = false, quiet = false, print_json = false;
  app.add_option("--p", p, "prime, at least 7")->required();
  app.add_option("--subgroup", subgroup, "generator of H, or pm1 for H = {+-1}")->capture_default_str();
  app.add_option("--bits", bits, "working precision in bits")->capture_default_str();
  app.add_option("--epsilon", epsilon, "target series error in the slow phase")->capture_default_str();
  app.add_option("--t0", t0, "first Davenport multiplier")->capture_default_str();
  app.add_option("--ell-budget", ell_budget, "largest prime tried by the small-j filter")->capture_default_str();
  app.add_option("--index", index, "exponent lattice denominator I")->capture_default_str();
  app.add_option("--workers", workers, "worker threads")->capture_default_str();
  app.add_option("--checkpoint", checkpoint, "checkpoint file, resumed when present");
  app.add_option("--report", report, "write the JSON report here");
  app.add_option("--unit-basis", unit_basis, "unit basis override file");
  app.add_flag("--validate-only", validate_only, "run the identity suite and exit");
  app.add_flag("--json", print_json, "print the report on stdout");
  app.add_flag("-q,--quiet", quiet, "no progress lines");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  int gen = 0;
  if (subgroup != "pm1") {
    try {
      gen = std::stoi(subgroup);
    } catch (const std::exception&) {
      std::fprintf(stderr, "cartanpts: --subgroup takes an integer or pm1\n");
      return 2;
    }
  }

  cartan_config* cfg = nullptr;
  if (int rc = check(cartan_config_create(&cfg), "config")) return rc;
  bool verbose = !quiet;
  int rc = 0;
  rc = rc ? rc : check(cartan_config_set_prime(cfg, p), "--p");
  rc = rc ? rc : check(cartan_config_set_subgroup(cfg, gen), "--subgroup");
  rc = rc ? rc : check(cartan_config_set_precision(cfg, bits), "--bits");
  rc = rc ? rc : check(cartan_config_set_epsilon(cfg, epsilon), "--epsilon");
  rc = rc ? rc : check(cartan_config_set_t0(cfg, t0), "--t0");
  rc = rc ? rc : check(cartan_config_set_ell_budget(cfg, ell_budget), "--ell-budget");
  rc = rc ? rc : check(cartan_config_set_denominator(cfg, index), "--index");
  rc = rc ? rc : check(cartan_config_set_workers(cfg, workers), "--workers");
  rc = rc ? rc : check(cartan_config_set_checkpoint(cfg, checkpoint.c_str()), "--checkpoint");
  rc = rc ? rc : check(cartan_config_set_report(cfg, report.c_str()), "--report");
  rc = rc ? rc : check(cartan_config_set_unit_basis(cfg, unit_basis.c_str()), "--unit-basis");
  rc = rc ? rc : check(cartan_config_set_validate_only(cfg, validate_only ? 1 : 0), "--validate-only");
  rc = rc ? rc : check(cartan_config_set_cancel(cfg, poll_stop, nullptr), "cancel");
  rc = rc ? rc : check(cartan_config_set_log(cfg, print_line, &verbose), "log");
  if (rc) {
    cartan_config_destroy(cfg);
    return rc;
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  cartan_report* rep = nullptr;
  rc = check(cartan_run(cfg, &rep), "run");
  cartan_config_destroy(cfg);
  if (rc) return rc;

  if (print_json) {
    const char* js = nullptr;
    if ((rc = check(cartan_report_json(rep, 1, &js), "report"))) {
      cartan_report_destroy(rep);
      return rc;
    }
    std::fputs(js, stdout);
  } else if (validate_only) {
    std::printf("validation %s\n", cartan_report_validation_ok(rep) ? "passed" : "FAILED");
  } else {
    size_t n = cartan_report_point_count(rep);
    std::printf("p = %d: %zu integral j-invariant%s\n", p, n, n == 1 ? "" : "s");
    for (size_t i = 0; i < n; ++i) {
      const char* j = nullptr;
      const char* cls = nullptr;
      int disc = 0;
      cartan_report_point(rep, i, &j, &cls, &disc);
      if (disc != 0)
        std::printf("  %s  %s D=%d\n", j, cls, disc);
      else
        std::printf("  %s  %s\n", j, cls);
    }
    if (size_t u = cartan_report_unresolved_count(rep)) std::printf("unresolved candidates: %zu\n", u);
    if (size_t u = cartan_report_small_j_undetermined_count(rep))
      std::printf("small j values left undetermined: %zu\n", u);
  }
  cartan_report_destroy(rep);
  return 0;
}
