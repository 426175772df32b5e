#include "cartan/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "cartan/bounds.hpp"
#include "json.hpp"

namespace cartan {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "1.0.0";
constexpr const char* kCheckpointHeader = "CARTANPTS v1";

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void note(const RunConfig& c, const std::string& msg) {
  if (c.log) c.log(msg);
}

// fn(i) for i in [0, n) on up to `workers` threads; the first exception is rethrown
template <class F>
void parallel_for(size_t n, int workers, F fn) {
  if (n == 0) return;
  const size_t w = std::max<size_t>(1, std::min<size_t>(static_cast<size_t>(workers), n));
  std::atomic<size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto body = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= n) return;
      {
        std::lock_guard<std::mutex> g(mu);
        if (err) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  if (w == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (size_t k = 0; k < w; ++k) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json ball(const BigReal& x, int digits = 30) { return {{"value", x.str(digits)}, {"err", x.err_str()}}; }

CandidateRecord to_record(const Candidate& c) {
  CandidateRecord r;
  r.cusp = c.cusp;
  for (const auto& v : c.b) r.b.push_back(v.get_str());
  r.denominator = c.denominator;
  r.t = c.t.str(40);
  r.t_err = c.t.err_str();
  r.q = c.q.str(40);
  r.j = c.j.str(40);
  r.j_err = c.j.err_str();
  r.classification = to_string(c.cls);
  r.disc = c.disc;
  r.j_int = c.cls == Classification::unresolved ? "" : c.j_int.get_str();
  r.note = c.note;
  return r;
}

json stats_json(const SlowStats& s) {
  return {{"b_values", s.b_values},       {"no_root", s.no_root},
          {"pruned_first", s.pruned_first}, {"pruned_refined", s.pruned_refined},
          {"pruned_verify", s.pruned_verify}, {"candidates", s.candidates}};
}

SlowStats stats_from(const json& j) {
  SlowStats s;
  s.b_values = j.at("b_values").get<long>();
  s.no_root = j.at("no_root").get<long>();
  s.pruned_first = j.at("pruned_first").get<long>();
  s.pruned_refined = j.at("pruned_refined").get<long>();
  s.pruned_verify = j.at("pruned_verify").get<long>();
  s.candidates = j.at("candidates").get<long>();
  return s;
}

json cand_json(const CandidateRecord& c) {
  return {{"cusp", c.cusp},   {"b", c.b},
          {"denominator", c.denominator}, {"t", c.t},
          {"t_err", c.t_err}, {"q", c.q},
          {"j", c.j},         {"j_err", c.j_err},
          {"classification", c.classification}, {"disc", c.disc},
          {"j_int", c.j_int}, {"note", c.note}};
}

CandidateRecord cand_from(const json& j) {
  CandidateRecord c;
  c.cusp = j.at("cusp").get<int>();
  c.b = j.at("b").get<std::vector<std::string>>();
  c.denominator = j.at("denominator").get<long>();
  c.t = j.at("t").get<std::string>();
  c.t_err = j.at("t_err").get<std::string>();
  c.q = j.at("q").get<std::string>();
  c.j = j.at("j").get<std::string>();
  c.j_err = j.at("j_err").get<std::string>();
  c.classification = j.at("classification").get<std::string>();
  c.disc = j.at("disc").get<int>();
  c.j_int = j.at("j_int").get<std::string>();
  c.note = j.at("note").get<std::string>();
  return c;
}

json unit_json(const UnitRecord& u) {
  json c = json::array();
  for (const auto& x : u.candidates) c.push_back(cand_json(x));
  return {{"cusp", u.unit.cusp},       {"interval", u.unit.interval}, {"b_first", u.unit.b_first},
          {"b_last", u.unit.b_last},   {"stats", stats_json(u.stats)}, {"candidates", c},
          {"notes", u.notes}};
}

UnitRecord unit_from(const json& j) {
  UnitRecord u;
  u.unit.cusp = j.at("cusp").get<int>();
  u.unit.interval = j.at("interval").get<int>();
  u.unit.b_first = j.at("b_first").get<long>();
  u.unit.b_last = j.at("b_last").get<long>();
  u.stats = stats_from(j.at("stats"));
  for (const auto& c : j.at("candidates")) u.candidates.push_back(cand_from(c));
  u.notes = j.at("notes").get<std::vector<std::string>>();
  return u;
}

using UnitKey = std::tuple<int, int, long, long>;
UnitKey key_of(const SlowUnit& u) { return {u.cusp, u.interval, u.b_first, u.b_last}; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& body) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + tmp);
    out << body;
    out.flush();
    if (!out) fail(ErrorKind::io, "short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) fail(ErrorKind::io, "cannot rename " + tmp + " to " + path);
}

void check_config(const RunConfig& c) {
  if (c.p < 7 || !is_prime(c.p)) fail(ErrorKind::invalid_argument, "p must be a prime >= 7");
  if (c.precision_bits < 64) fail(ErrorKind::invalid_argument, "precision below 64 bits");
  if (!(c.epsilon > 0 && c.epsilon < 1)) fail(ErrorKind::invalid_argument, "epsilon must lie in (0, 1)");
  if (!(c.T0 > 1)) fail(ErrorKind::invalid_argument, "T0 must exceed 1");
  if (c.ell_budget < 2) fail(ErrorKind::invalid_argument, "ell budget below 2");
  if (c.denominator < 1) fail(ErrorKind::invalid_argument, "exponent denominator must be positive");
  if (c.workers < 1) fail(ErrorKind::invalid_argument, "need at least one worker");
}

struct CuspWork {
  CuspRecord rec;
  std::unique_ptr<CuspFrame> frame;
  std::unique_ptr<SlowEnumerator> slow;
  std::vector<SlowUnit> plan;
};

void prepare_cusp(const RunConfig& cfg, const GroupContext& ctx, const UnitSystem& units, int cusp, CuspWork& w) {
  PrecisionScope scope(cfg.precision_bits);
  auto L = UnitLogMatrix::build(ctx, units);
  CuspFrame f0 = build_cusp_frame(ctx, L, cusp, 0);
  BoundLedger led = baker_B0(ctx, units, f0);
  {
    PrecisionScope hi(std::max(cfg.precision_bits, reduction_precision(led.B0, BigReal::from_double(1e7))));
    auto L2 = UnitLogMatrix::build(ctx, units);
    CuspFrame f2 = build_cusp_frame(ctx, L2, cusp, 0);
    ReductionOptions opt;
    opt.T0 = cfg.T0;
    davenport_reduce(f2, led.B0, led, opt);
  }
  const int nu = choose_nu(ctx, f0.Theta, cfg.epsilon);
  w.frame = std::make_unique<CuspFrame>(build_cusp_frame(ctx, L, cusp, nu));
  QuickResult qr = quick_enumerate(*w.frame, led.Xi_hat, std::nullopt, cfg.denominator);
  SlowOptions so;
  so.eps_target = cfg.epsilon;
  so.denominator = cfg.denominator;
  w.slow = std::make_unique<SlowEnumerator>(ctx, units, *w.frame, qr.Upsilon, so);
  w.plan = w.slow->plan();
  w.rec.cusp = cusp;
  w.rec.pivot = w.frame->pivot;
  w.rec.ledger = led;
  w.rec.quick = qr;
  w.rec.nu = nu;
  w.rec.epsilon = w.slow->epsilon().str(6);
  w.rec.intervals = w.slow->intervals();
}

json ledger_json(const CuspRecord& c) {
  const BoundLedger& L = c.ledger;
  json steps = json::array();
  for (const auto& s : L.steps)
    steps.push_back({{"companion", s.companion},
                     {"homogeneous", s.homogeneous},
                     {"T", s.T.str(6)},
                     {"r", s.r.get_str()},
                     {"r_delta", ball(s.r_delta, 12)},
                     {"r_lambda", ball(s.r_lambda, 12)},
                     {"Xi", ball(s.Xi, 20)},
                     {"B", ball(s.B, 20)}});
  json iv = json::array();
  for (const auto& m : c.intervals)
    iv.push_back({{"lo", m.lo.str(25)}, {"hi", m.hi.str(25)}, {"direction", m.direction}, {"flagged", m.flagged}});
  const QuickResult& q = c.quick;
  return {{"cusp", c.cusp},
          {"pivot", c.pivot},
          {"mho1", ball(L.mho1, 20)},
          {"mho2", ball(L.mho2, 20)},
          {"B0", ball(L.B0, 20)},
          {"reduction", steps},
          {"companion", L.companion},
          {"Xi_hat", ball(L.Xi_hat, 20)},
          {"Xi_hat_spread", L.Xi_hat_spread.str(6)},
          {"stalled", L.stalled},
          {"quick",
           {{"Upsilon_init", ball(q.Upsilon_init, 20)},
            {"Upsilon", ball(q.Upsilon, 20)},
            {"epsilon", q.epsilon.str(6)},
            {"scanned", q.scanned},
            {"hit", q.hit},
            {"hit_b1", q.hit ? q.hit_b1.get_str() : ""}}},
          {"nu", c.nu},
          {"epsilon", c.epsilon},
          {"intervals", iv},
          {"slow", stats_json(c.slow)}};
}

}  // namespace

std::vector<ValidationItem> validation_suite(const GroupContext& ctx, const UnitSystem& units, long bits) {
  std::vector<ValidationItem> out;
  {
    PrecisionScope scope(std::max<long>(512, bits));
    const char* taus[][2] = {{"0", "1.1"}, {"0.31", "1.37"}, {"-0.2", "1.9"}};
    for (const auto& t : taus) {
      BigComplex tau(BigReal::from_string(t[0]), BigReal::from_string(t[1]));
      IdentityCheck ic = product_identity_check(ctx, tau);
      out.push_back({std::string("product identity at tau = ") + t[0] + " + " + t[1] + "i",
                     ic.residual.str(4) + " (orbit " + ic.orbit_residual.str(4) + ")", ic.ok});
    }
  }
  PrecisionScope scope(bits);
  auto L = UnitLogMatrix::build(ctx, units);
  BigReal lim = pow_int(BigReal(2), -(bits / 2));
  out.push_back({"unit log matrix residual", L.residual.str(4), certainly_lt(L.residual, lim)});
  BigReal tiny = BigReal::from_string("1e-20");
  for (const auto& o : cusp_orbits(ctx)) {
    CuspFrame f = build_cusp_frame(ctx, L, o.label, 0);
    BigReal d0 = abs(f.delta[0]).upper();
    out.push_back({"delta_0 at cusp " + std::to_string(o.label), d0.str(4), certainly_lt(d0, tiny)});
    out.push_back({"pivot at cusp " + std::to_string(o.label), std::to_string(f.pivot), f.pivot > 0});
  }
  return out;
}

std::string config_fingerprint(const RunConfig& c) {
  std::string basis;
  if (!c.unit_basis_path.empty()) basis = hex64(fnv1a(read_file(c.unit_basis_path)));
  json j = {{"version", kVersion},          {"p", c.p},
            {"h_generator", c.h_generator}, {"bits", c.precision_bits},
            {"epsilon", fmt_double(c.epsilon)}, {"T0", fmt_double(c.T0)},
            {"denominator", c.denominator}, {"unit_basis", basis}};
  return hex64(fnv1a(j.dump()));
}

void write_checkpoint(const std::string& path, const RunConfig& c, const std::vector<UnitRecord>& done) {
  std::string body = std::string(kCheckpointHeader) + "\n";
  body += "config " + config_fingerprint(c) + "\n";
  for (const auto& u : done) body += "unit " + unit_json(u).dump() + "\n";
  body += "fnv1a " + hex64(fnv1a(body)) + "\n";
  write_file_atomic(path, body);
}

std::vector<UnitRecord> read_checkpoint(const std::string& path, const RunConfig& c) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) return {};
  probe.close();
  const std::string body = read_file(path);
  if (body.empty()) return {};
  auto corrupt = [&](const std::string& why) {
    fail(ErrorKind::checkpoint, "checkpoint " + path + " is corrupt (" + why + "); nothing was applied");
  };
  const size_t eol = body.find('\n');
  if (eol == std::string::npos) corrupt("no header");
  const std::string header = body.substr(0, eol);
  if (header != kCheckpointHeader) {
    if (header.rfind("CARTANPTS ", 0) == 0)
      fail(ErrorKind::checkpoint, "checkpoint " + path + " has version '" + header.substr(10) +
                                      "', this build reads v1; delete it and re-run from scratch");
    corrupt("bad header");
  }
  if (body.back() != '\n') corrupt("truncated");
  const size_t last = body.rfind('\n', body.size() - 2);
  const std::string trailer = body.substr(last + 1, body.size() - last - 2);
  if (trailer.rfind("fnv1a ", 0) != 0) corrupt("missing trailer");
  if (trailer.substr(6) != hex64(fnv1a(body.substr(0, last + 1)))) corrupt("checksum mismatch");
  std::istringstream in(body.substr(eol + 1, last - eol));
  std::string line;
  std::getline(in, line);
  if (line.rfind("config ", 0) != 0) corrupt("missing config line");
  if (line.substr(7) != config_fingerprint(c))
    fail(ErrorKind::checkpoint, "checkpoint " + path + " was written for a different configuration; delete it to re-run");
  std::vector<UnitRecord> out;
  while (std::getline(in, line)) {
    if (line.rfind("unit ", 0) != 0) corrupt("unexpected line");
    try {
      out.push_back(unit_from(json::parse(line.substr(5))));
    } catch (const json::exception& e) {
      corrupt(e.what());
    }
  }
  return out;
}

RunReport run_pipeline(const RunConfig& cfg) {
  check_config(cfg);
  RunReport rep;
  rep.config = cfg;
  auto t_all = Clock::now();

  auto t0 = Clock::now();
  auto ctx = GroupContext::build(cfg.p, cfg.h_generator);
  if (ctx.d() < 3) fail(ErrorKind::invalid_argument, "the subgroup leaves d = " + std::to_string(ctx.d()) + " < 3");
  std::optional<std::string> basis;
  if (!cfg.unit_basis_path.empty()) basis = cfg.unit_basis_path;
  auto units = UnitSystem::build(ctx, basis);
  rep.timings.push_back({"setup", since(t0)});

  t0 = Clock::now();
  rep.validation = validation_suite(ctx, units, cfg.precision_bits);
  rep.validation_ok = std::all_of(rep.validation.begin(), rep.validation.end(), [](const auto& v) { return v.ok; });
  rep.timings.push_back({"validation", since(t0)});
  for (const auto& v : rep.validation) note(cfg, "validation: " + v.name + " = " + v.value + (v.ok ? "" : "  FAILED"));
  if (!rep.validation_ok) {
    std::string bad;
    for (const auto& v : rep.validation)
      if (!v.ok) bad += (bad.empty() ? "" : ", ") + v.name;
    fail(ErrorKind::validation_failed, "validation failed: " + bad);
  }
  if (cfg.validate_only) {
    rep.complete = true;
    if (!cfg.report_path.empty()) write_file_atomic(cfg.report_path, report_json(rep));
    return rep;
  }

  // bounds, reduction and quick phase per cusp
  t0 = Clock::now();
  auto orbits = cusp_orbits(ctx);
  std::vector<CuspWork> work(orbits.size());
  parallel_for(orbits.size(), cfg.workers, [&](size_t i) { prepare_cusp(cfg, ctx, units, orbits[i].label, work[i]); });
  for (const auto& w : work) {
    note(cfg, "cusp " + std::to_string(w.rec.cusp) + ": B0 " + w.rec.ledger.B0.str(4) + ", Xi_hat " +
                  w.rec.ledger.Xi_hat.str(6) + ", Upsilon " + w.rec.quick.Upsilon.str(6));
  }
  rep.timings.push_back({"bounds and quick phase", since(t0)});

  t0 = Clock::now();
  for (long j = 1; j <= 1727; ++j) {
    rep.small_j.push_back(small_j_filter(cfg.p, j, cfg.ell_budget));
    if (!rep.small_j.back().excluded) rep.small_j_undetermined.push_back(j);
  }
  rep.timings.push_back({"small j filter", since(t0)});

  // slow phase
  t0 = Clock::now();
  struct Job {
    size_t cusp_index;
    SlowUnit unit;
  };
  std::vector<Job> jobs;
  for (size_t i = 0; i < work.size(); ++i)
    for (const auto& u : work[i].plan) jobs.push_back({i, u});
  std::vector<std::optional<UnitRecord>> results(jobs.size());
  std::map<UnitKey, size_t> index;
  for (size_t i = 0; i < jobs.size(); ++i) index[key_of(jobs[i].unit)] = i;
  std::vector<UnitRecord> done;
  if (!cfg.checkpoint_path.empty()) {
    for (auto& r : read_checkpoint(cfg.checkpoint_path, cfg)) {
      auto it = index.find(key_of(r.unit));
      if (it == index.end())
        fail(ErrorKind::checkpoint, "checkpoint holds a work unit this configuration does not plan");
      results[it->second] = r;
      done.push_back(std::move(r));
    }
    rep.resumed_units = static_cast<long>(done.size());
    if (rep.resumed_units > 0) note(cfg, "resuming: " + std::to_string(rep.resumed_units) + " work units done");
  }
  std::vector<size_t> pending;
  for (size_t i = 0; i < jobs.size(); ++i)
    if (!results[i]) pending.push_back(i);
  std::mutex writer;
  std::atomic<bool> stopped{false};
  parallel_for(pending.size(), cfg.workers, [&](size_t k) {
    if (stopped.load()) return;
    if (cfg.cancel && cfg.cancel()) {
      stopped = true;
      return;
    }
    const Job& job = jobs[pending[k]];
    PrecisionScope scope(cfg.precision_bits);
    UnitResult r = work[job.cusp_index].slow->run(job.unit);
    UnitRecord rec;
    rec.unit = r.unit;
    rec.stats = r.stats;
    rec.notes = r.notes;
    for (const auto& c : r.candidates) rec.candidates.push_back(to_record(c));
    std::lock_guard<std::mutex> g(writer);
    results[pending[k]] = rec;
    done.push_back(rec);
    if (!cfg.checkpoint_path.empty()) write_checkpoint(cfg.checkpoint_path, cfg, done);
  });
  rep.timings.push_back({"slow phase", since(t0)});
  if (stopped) {
    if (!cfg.checkpoint_path.empty()) write_checkpoint(cfg.checkpoint_path, cfg, done);
    fail(ErrorKind::interrupted, "interrupted after " + std::to_string(done.size()) + " of " +
                                     std::to_string(jobs.size()) + " work units");
  }

  // deterministic assembly, plan order
  for (auto& w : work) rep.cusps.push_back(w.rec);
  for (size_t i = 0; i < jobs.size(); ++i) {
    rep.cusps[jobs[i].cusp_index].slow += results[i]->stats;
    rep.units.push_back(*results[i]);
  }
  std::map<std::string, size_t> by_j;
  std::vector<std::pair<int, std::vector<std::string>>> seen;
  for (const auto& u : rep.units)
    for (const auto& c : u.candidates) {
      if (c.classification == to_string(Classification::unresolved)) {
        rep.unresolved.push_back(c);
        continue;
      }
      if (c.classification == to_string(Classification::rejected)) continue;
      auto it = by_j.find(c.j_int);
      if (it == by_j.end()) {
        it = by_j.emplace(c.j_int, rep.integral_points.size()).first;
        rep.integral_points.push_back({c.j_int, c.classification, c.disc, {}});
      }
      auto& pt = rep.integral_points[it->second];
      bool dup = std::any_of(pt.derivations.begin(), pt.derivations.end(),
                             [&](const CandidateRecord& d) { return d.cusp == c.cusp && d.b == c.b; });
      if (!dup) pt.derivations.push_back(c);
    }
  std::sort(rep.integral_points.begin(), rep.integral_points.end(), [](const IntegralPoint& a, const IntegralPoint& b) {
    return mpz_class(a.j) < mpz_class(b.j);
  });
  rep.complete = true;
  rep.timings.push_back({"total", since(t_all)});
  if (!cfg.report_path.empty()) write_file_atomic(cfg.report_path, report_json(rep));
  return rep;
}

std::string report_json(const RunReport& r, bool include_timings) {
  const RunConfig& c = r.config;
  json out;
  out["program"] = "cartanpts";
  out["version"] = kVersion;
  out["config"] = {{"p", c.p},
                   {"subgroup", c.h_generator == 0 ? std::string("pm1") : std::to_string(c.h_generator)},
                   {"bits", c.precision_bits},
                   {"epsilon", fmt_double(c.epsilon)},
                   {"T0", fmt_double(c.T0)},
                   {"ell_budget", c.ell_budget},
                   {"denominator", c.denominator},
                   {"unit_basis", c.unit_basis_path.empty() ? "circular" : c.unit_basis_path}};
  json val = json::array();
  for (const auto& v : r.validation) val.push_back({{"name", v.name}, {"value", v.value}, {"ok", v.ok}});
  out["validation"] = {{"ok", r.validation_ok}, {"checks", val}};
  out["complete"] = r.complete;
  json cusps = json::array();
  for (const auto& cr : r.cusps) cusps.push_back(ledger_json(cr));
  out["cusps"] = cusps;
  json units = json::array();
  for (const auto& u : r.units) units.push_back(unit_json(u));
  out["units"] = units;
  json pts = json::array();
  for (const auto& p : r.integral_points) {
    json d = json::array();
    for (const auto& x : p.derivations) d.push_back(cand_json(x));
    pts.push_back({{"j", p.j}, {"classification", p.classification}, {"disc", p.disc}, {"derivations", d}});
  }
  out["integral_points"] = pts;
  json unres = json::array();
  for (const auto& x : r.unresolved) unres.push_back(cand_json(x));
  out["unresolved"] = unres;
  long excluded = 0;
  json witnesses = json::array();
  for (const auto& s : r.small_j) {
    if (s.excluded) ++excluded;
    witnesses.push_back({s.j, s.excluded ? s.witness_ell : 0, s.a_ell});
  }
  out["small_j"] = {{"range", {1, 1727}},
                    {"ell_budget", c.ell_budget},
                    {"excluded", excluded},
                    {"undetermined", r.small_j_undetermined},
                    {"witnesses", witnesses}};
  if (include_timings) {
    json t;
    for (const auto& [k, v] : r.timings) t[k] = v;
    out["run"] = {{"resumed_units", r.resumed_units}, {"timings", t}};
  }
  return out.dump(2) + "\n";
}

}  // namespace cartan
