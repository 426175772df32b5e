#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "cartan/pipeline.hpp"

using namespace cartan;

namespace {

// Elkies' model of X_ns+(7) searched by height: every integral j
const std::set<std::string> kOracle7 = {
    "0",
    "1728",
    "8000",
    "-32768",
    "287496",
    "-884736000",
    "-147197952000",
    "-262537412640768000",
    "16807000",
    "550731776",
    "66735540581252505802048",
    "6838755720062350457411072",
};

RunConfig base7() {
  RunConfig c;
  c.p = 7;
  return c;
}

std::string tmp_path(const char* name) { return std::string("/tmp/cartan_test_") + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& s) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << s;
}

ErrorKind kind_of(const RunConfig& c) {
  try {
    run_pipeline(c);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::internal;
}

const RunReport& reference7() {
  static const RunReport r = run_pipeline(base7());
  return r;
}

}  // namespace

TEST_CASE("p = 7 matches the model search") {
  const RunReport& r = reference7();
  CHECK(r.validation_ok);
  CHECK(r.complete);
  std::set<std::string> got;
  for (const auto& pt : r.integral_points) got.insert(pt.j);
  CHECK(got == kOracle7);
  CHECK(r.unresolved.empty());
  int cm = 0;
  for (const auto& pt : r.integral_points) {
    CHECK(!pt.derivations.empty());
    if (pt.classification == "cm-match") {
      ++cm;
      CHECK(pt.disc < 0);
    }
  }
  CHECK(cm == 8);
  CHECK(std::is_sorted(r.integral_points.begin(), r.integral_points.end(),
                       [](const IntegralPoint& a, const IntegralPoint& b) { return mpz_class(a.j) < mpz_class(b.j); }));
  CHECK(r.small_j.size() == 1727);
}

TEST_CASE("report is deterministic across runs and worker counts") {
  RunConfig c = base7();
  c.workers = 3;
  RunReport r = run_pipeline(c);
  // the worker count is not part of the deterministic report
  CHECK(report_json(r, false) == report_json(reference7(), false));
  CHECK(report_json(r, true) != report_json(r, false));
}

TEST_CASE("checkpoint resume reproduces the report") {
  const std::string ck = tmp_path("resume.ck");
  std::remove(ck.c_str());
  RunConfig c = base7();
  c.checkpoint_path = ck;
  int polls = 0;
  c.cancel = [&] { return ++polls > 2; };
  bool interrupted = false;
  try {
    run_pipeline(c);
  } catch (const Error& e) {
    interrupted = e.kind() == ErrorKind::interrupted;
  }
  REQUIRE(interrupted);
  auto partial = read_checkpoint(ck, c);
  CHECK(partial.size() == 2);

  c.cancel = nullptr;
  RunReport r = run_pipeline(c);
  CHECK(r.resumed_units == 2);
  CHECK(report_json(r, false) == report_json(reference7(), false));

  // a finished checkpoint resumes everything
  RunReport again = run_pipeline(c);
  CHECK(again.resumed_units == static_cast<long>(again.units.size()));
  CHECK(report_json(again, false) == report_json(reference7(), false));
  std::remove(ck.c_str());
}

TEST_CASE("empty checkpoint file means a full run") {
  const std::string ck = tmp_path("empty.ck");
  spit(ck, "");
  RunConfig c = base7();
  c.checkpoint_path = ck;
  RunReport r = run_pipeline(c);
  CHECK(r.resumed_units == 0);
  CHECK(report_json(r, false) == report_json(reference7(), false));
  std::remove(ck.c_str());
}

TEST_CASE("bad checkpoints are refused and left alone") {
  const std::string ck = tmp_path("bad.ck");
  RunConfig c = base7();
  c.checkpoint_path = ck;
  write_checkpoint(ck, c, reference7().units);
  const std::string good = slurp(ck);

  SUBCASE("flipped byte") {
    std::string s = good;
    s[s.size() / 2] ^= 1;
    spit(ck, s);
  }
  SUBCASE("truncated") { spit(ck, good.substr(0, good.size() / 2)); }
  SUBCASE("future version") {
    std::string s = good;
    s.replace(0, s.find('\n'), "CARTANPTS v9");
    spit(ck, s);
  }
  SUBCASE("other configuration") {
    RunConfig o = c;
    o.T0 = 20;
    write_checkpoint(ck, o, {});
  }
  const std::string before = slurp(ck);
  CHECK_THROWS_AS(read_checkpoint(ck, c), Error);
  CHECK(kind_of(c) == ErrorKind::checkpoint);
  CHECK(slurp(ck) == before);
  std::remove(ck.c_str());
}

TEST_CASE("version mismatch names both versions") {
  const std::string ck = tmp_path("ver.ck");
  spit(ck, "CARTANPTS v2\nconfig 0\nfnv1a 0\n");
  RunConfig c = base7();
  c.checkpoint_path = ck;
  try {
    read_checkpoint(ck, c);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::checkpoint);
    std::string msg = e.what();
    CHECK(msg.find("v2") != std::string::npos);
    CHECK(msg.find("v1") != std::string::npos);
  }
  std::remove(ck.c_str());
}

TEST_CASE("validate only") {
  RunConfig c = base7();
  c.validate_only = true;
  c.report_path = tmp_path("val.json");
  RunReport r = run_pipeline(c);
  CHECK(r.validation_ok);
  CHECK(r.integral_points.empty());
  CHECK(r.cusps.empty());
  CHECK(!r.validation.empty());
  for (const auto& v : r.validation) CHECK_MESSAGE(v.ok, v.name);
  CHECK(slurp(c.report_path).find("\"validation\"") != std::string::npos);
  std::remove(c.report_path.c_str());
}

TEST_CASE("report file matches report_json") {
  RunConfig c = base7();
  c.validate_only = true;
  c.report_path = tmp_path("rep.json");
  RunReport r = run_pipeline(c);
  CHECK(slurp(c.report_path) == report_json(r));
  std::remove(c.report_path.c_str());
}

TEST_CASE("invalid configurations") {
  auto bad = [](auto edit) {
    RunConfig c = base7();
    edit(c);
    return kind_of(c);
  };
  CHECK(bad([](RunConfig& c) { c.p = 5; }) == ErrorKind::invalid_argument);
  CHECK(bad([](RunConfig& c) { c.p = 9; }) == ErrorKind::invalid_argument);
  CHECK(bad([](RunConfig& c) { c.precision_bits = 16; }) == ErrorKind::invalid_argument);
  CHECK(bad([](RunConfig& c) { c.epsilon = 0; }) == ErrorKind::invalid_argument);
  CHECK(bad([](RunConfig& c) { c.workers = 0; }) == ErrorKind::invalid_argument);
  CHECK(bad([](RunConfig& c) { c.denominator = 0; }) == ErrorKind::invalid_argument);
  // a generator outside F_7^x, and one that leaves d < 3
  CHECK(bad([](RunConfig& c) { c.h_generator = 7; }) == ErrorKind::invalid_argument);
  CHECK(bad([](RunConfig& c) { c.h_generator = 3; }) == ErrorKind::invalid_argument);
  CHECK(bad([](RunConfig& c) { c.unit_basis_path = "/nonexistent/basis"; }) != ErrorKind::internal);
}
