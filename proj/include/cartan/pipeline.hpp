#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cartan/bounds.hpp"
#include "cartan/enumeration.hpp"

namespace cartan {

struct RunConfig {
  int p = 11;
  int h_generator = 0;  // 0: H = {+-1}
  long precision_bits = 256;
  double epsilon = 1e-10;
  double T0 = 10;
  long ell_budget = 500;
  long denominator = 1;  // exponent lattice (1/I) Z
  int workers = 1;
  std::string checkpoint_path;
  std::string report_path;
  std::string unit_basis_path;
  bool validate_only = false;
  // polled between work units; true stops the run with a checkpoint written
  std::function<bool()> cancel;
  std::function<void(const std::string&)> log;
};

struct ValidationItem {
  std::string name;
  std::string value;
  bool ok = false;
};

// decimal strings throughout, so reports and checkpoints round-trip exactly
struct CandidateRecord {
  int cusp = 0;
  std::vector<std::string> b;
  long denominator = 1;
  std::string t, t_err, q, j, j_err;
  std::string classification;
  int disc = 0;
  std::string j_int;
  std::string note;
};

struct UnitRecord {
  SlowUnit unit;
  SlowStats stats;
  std::vector<CandidateRecord> candidates;
  std::vector<std::string> notes;
};

struct CuspRecord {
  int cusp = 0;
  int pivot = 0;
  BoundLedger ledger;
  QuickResult quick;
  int nu = 0;
  std::string epsilon;
  std::vector<MonotoneInterval> intervals;
  SlowStats slow;
};

struct IntegralPoint {
  std::string j;
  std::string classification;
  int disc = 0;
  std::vector<CandidateRecord> derivations;
};

struct RunReport {
  RunConfig config;
  std::vector<ValidationItem> validation;
  bool validation_ok = false;
  std::vector<CuspRecord> cusps;
  std::vector<UnitRecord> units;  // plan order
  std::vector<IntegralPoint> integral_points;
  std::vector<CandidateRecord> unresolved;
  std::vector<SmallJResult> small_j;  // all of 1..1727
  std::vector<long> small_j_undetermined;
  long resumed_units = 0;
  bool complete = false;
  std::vector<std::pair<std::string, double>> timings;  // seconds
};

// throws Error(validation_failed) before any enumeration if an identity fails,
// Error(interrupted) when cancel() fires (after writing the checkpoint)
RunReport run_pipeline(const RunConfig& config);

std::vector<ValidationItem> validation_suite(const GroupContext& ctx, const UnitSystem& units, long bits);

// stable key order; timings omitted when include_timings is false
std::string report_json(const RunReport& r, bool include_timings = true);

// checkpoint file: "CARTANPTS v1", config fingerprint, one line per finished unit, FNV-1a trailer
std::string config_fingerprint(const RunConfig& c);
void write_checkpoint(const std::string& path, const RunConfig& c, const std::vector<UnitRecord>& done);
std::vector<UnitRecord> read_checkpoint(const std::string& path, const RunConfig& c);

}  // namespace cartan
