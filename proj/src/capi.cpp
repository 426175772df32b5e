#include "cartan/cartan.h"

#include <new>
#include <string>

#include "cartan/pipeline.hpp"

struct cartan_config {
  cartan::RunConfig cfg;
  cartan_cancel_fn cancel = nullptr;
  void* cancel_user = nullptr;
  cartan_log_fn log = nullptr;
  void* log_user = nullptr;
};

struct cartan_report {
  cartan::RunReport report;
  std::string json;
};

namespace {

thread_local std::string g_last_error;

cartan_status set_error(cartan_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

cartan_status from_kind(cartan::ErrorKind k) {
  using cartan::ErrorKind;
  switch (k) {
    case ErrorKind::invalid_argument: return CARTAN_INVALID_ARGUMENT;
    case ErrorKind::precision_exhausted:
    case ErrorKind::no_sign_change: return CARTAN_PRECISION;
    case ErrorKind::validation_failed: return CARTAN_VALIDATION;
    case ErrorKind::checkpoint: return CARTAN_CHECKPOINT;
    case ErrorKind::io: return CARTAN_IO;
    case ErrorKind::interrupted: return CARTAN_INTERRUPTED;
    case ErrorKind::internal: return CARTAN_INTERNAL;
  }
  return CARTAN_INTERNAL;
}

template <class F>
cartan_status guarded(F f) {
  try {
    f();
    g_last_error.clear();
    return CARTAN_OK;
  } catch (const cartan::Error& e) {
    return set_error(from_kind(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(CARTAN_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(CARTAN_INTERNAL, e.what());
  } catch (...) {
    return set_error(CARTAN_INTERNAL, "unknown error");
  }
}

#define NEED(ptr)                                                          \
  do {                                                                     \
    if (!(ptr)) return set_error(CARTAN_INVALID_ARGUMENT, #ptr " is NULL"); \
  } while (0)

}  // namespace

extern "C" {

const char* cartan_version(void) { return "1.0.0"; }

const char* cartan_status_string(cartan_status s) {
  switch (s) {
    case CARTAN_OK: return "ok";
    case CARTAN_INVALID_ARGUMENT: return "invalid argument";
    case CARTAN_PRECISION: return "precision exhausted";
    case CARTAN_VALIDATION: return "validation failed";
    case CARTAN_CHECKPOINT: return "checkpoint error";
    case CARTAN_IO: return "i/o error";
    case CARTAN_INTERRUPTED: return "interrupted";
    case CARTAN_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* cartan_last_error(void) { return g_last_error.c_str(); }

cartan_status cartan_config_create(cartan_config** out) {
  NEED(out);
  *out = nullptr;
  return guarded([&] { *out = new cartan_config(); });
}

void cartan_config_destroy(cartan_config* cfg) { delete cfg; }

cartan_status cartan_config_set_prime(cartan_config* cfg, int p) {
  NEED(cfg);
  if (p < 7 || !cartan::is_prime(p)) return set_error(CARTAN_INVALID_ARGUMENT, "p must be a prime >= 7");
  cfg->cfg.p = p;
  return CARTAN_OK;
}

cartan_status cartan_config_set_subgroup(cartan_config* cfg, int generator) {
  NEED(cfg);
  if (generator < 0) return set_error(CARTAN_INVALID_ARGUMENT, "subgroup generator must be >= 0");
  cfg->cfg.h_generator = generator;
  return CARTAN_OK;
}

cartan_status cartan_config_set_precision(cartan_config* cfg, long bits) {
  NEED(cfg);
  if (bits < 64) return set_error(CARTAN_INVALID_ARGUMENT, "precision below 64 bits");
  cfg->cfg.precision_bits = bits;
  return CARTAN_OK;
}

cartan_status cartan_config_set_epsilon(cartan_config* cfg, double eps) {
  NEED(cfg);
  if (!(eps > 0 && eps < 1)) return set_error(CARTAN_INVALID_ARGUMENT, "epsilon must lie in (0, 1)");
  cfg->cfg.epsilon = eps;
  return CARTAN_OK;
}

cartan_status cartan_config_set_t0(cartan_config* cfg, double t0) {
  NEED(cfg);
  if (!(t0 > 1)) return set_error(CARTAN_INVALID_ARGUMENT, "T0 must exceed 1");
  cfg->cfg.T0 = t0;
  return CARTAN_OK;
}

cartan_status cartan_config_set_ell_budget(cartan_config* cfg, long ell) {
  NEED(cfg);
  if (ell < 2) return set_error(CARTAN_INVALID_ARGUMENT, "ell budget below 2");
  cfg->cfg.ell_budget = ell;
  return CARTAN_OK;
}

cartan_status cartan_config_set_denominator(cartan_config* cfg, long index) {
  NEED(cfg);
  if (index < 1) return set_error(CARTAN_INVALID_ARGUMENT, "exponent denominator must be positive");
  cfg->cfg.denominator = index;
  return CARTAN_OK;
}

cartan_status cartan_config_set_workers(cartan_config* cfg, int workers) {
  NEED(cfg);
  if (workers < 1) return set_error(CARTAN_INVALID_ARGUMENT, "need at least one worker");
  cfg->cfg.workers = workers;
  return CARTAN_OK;
}

cartan_status cartan_config_set_checkpoint(cartan_config* cfg, const char* path) {
  NEED(cfg);
  cfg->cfg.checkpoint_path = path ? path : "";
  return CARTAN_OK;
}

cartan_status cartan_config_set_report(cartan_config* cfg, const char* path) {
  NEED(cfg);
  cfg->cfg.report_path = path ? path : "";
  return CARTAN_OK;
}

cartan_status cartan_config_set_unit_basis(cartan_config* cfg, const char* path) {
  NEED(cfg);
  cfg->cfg.unit_basis_path = path ? path : "";
  return CARTAN_OK;
}

cartan_status cartan_config_set_validate_only(cartan_config* cfg, int on) {
  NEED(cfg);
  cfg->cfg.validate_only = on != 0;
  return CARTAN_OK;
}

cartan_status cartan_config_set_cancel(cartan_config* cfg, cartan_cancel_fn fn, void* user) {
  NEED(cfg);
  cfg->cancel = fn;
  cfg->cancel_user = user;
  return CARTAN_OK;
}

cartan_status cartan_config_set_log(cartan_config* cfg, cartan_log_fn fn, void* user) {
  NEED(cfg);
  cfg->log = fn;
  cfg->log_user = user;
  return CARTAN_OK;
}

cartan_status cartan_run(const cartan_config* cfg, cartan_report** out) {
  NEED(cfg);
  NEED(out);
  *out = nullptr;
  return guarded([&] {
    cartan::RunConfig rc = cfg->cfg;
    if (cfg->cancel) {
      auto fn = cfg->cancel;
      void* user = cfg->cancel_user;
      rc.cancel = [fn, user] { return fn(user) != 0; };
    }
    if (cfg->log) {
      auto fn = cfg->log;
      void* user = cfg->log_user;
      rc.log = [fn, user](const std::string& s) { fn(s.c_str(), user); };
    }
    auto* r = new cartan_report();
    try {
      r->report = cartan::run_pipeline(rc);
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
  });
}

void cartan_report_destroy(cartan_report* r) { delete r; }

int cartan_report_validation_ok(const cartan_report* r) { return r && r->report.validation_ok ? 1 : 0; }

size_t cartan_report_point_count(const cartan_report* r) { return r ? r->report.integral_points.size() : 0; }

cartan_status cartan_report_point(const cartan_report* r, size_t i, const char** j, const char** classification,
                                  int* disc) {
  NEED(r);
  if (i >= r->report.integral_points.size()) return set_error(CARTAN_INVALID_ARGUMENT, "point index out of range");
  const auto& pt = r->report.integral_points[i];
  if (j) *j = pt.j.c_str();
  if (classification) *classification = pt.classification.c_str();
  if (disc) *disc = pt.disc;
  return CARTAN_OK;
}

size_t cartan_report_unresolved_count(const cartan_report* r) { return r ? r->report.unresolved.size() : 0; }

size_t cartan_report_small_j_undetermined_count(const cartan_report* r) {
  return r ? r->report.small_j_undetermined.size() : 0;
}

cartan_status cartan_report_json(cartan_report* r, int include_timings, const char** json) {
  NEED(r);
  NEED(json);
  return guarded([&] {
    r->json = cartan::report_json(r->report, include_timings != 0);
    *json = r->json.c_str();
  });
}

}  // extern "C"
