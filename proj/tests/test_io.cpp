#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "merw/io.hpp"

using namespace merw;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}
}  // namespace

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.0, 5e-324,
                   std::numeric_limits<double>::max()}) {
    const auto s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(NAN) == "nan");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("csv layout") {
  CsvTable t({"n", "x"});
  t.row({cell(1), cell(0.5)}).row({cell(std::int64_t{-3}), cell(2.0)});
  CHECK(t.rows() == 2);
  CHECK(t.str() == "n,x\n1,0.5\n-3,2\n");
  CHECK_THROWS(t.row({"1"}));
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("output set and manifest") {
  const fs::path dir = fs::temp_directory_path() / "merw_io_test";
  fs::remove_all(dir);
  OutputSet out(dir);
  out.add("b.txt", "second\n");
  out.add("sub/a.txt", "first\n");
  out.add_json("c.json", json{{"k", 1}});
  out.write_manifest();
  CHECK(slurp(dir / "b.txt") == "second\n");
  CHECK(slurp(dir / "sub/a.txt") == "first\n");
  CHECK_FALSE(fs::exists(dir / "b.txt.tmp"));
  const auto m = json::parse(slurp(dir / "manifest.json"));
  REQUIRE(m["files"].size() == 3);
  CHECK(m["files"][0]["path"] == "b.txt");
  CHECK(m["files"][1]["path"] == "c.json");
  CHECK(m["files"][2]["path"] == "sub/a.txt");
  CHECK(m["files"][0]["sha256"] == sha256_hex("second\n"));
  CHECK(m["files"][0]["bytes"] == 7);

  OutputSet mem;
  mem.add("b.txt", "second\n");
  mem.add("sub/a.txt", "first\n");
  mem.add_json("c.json", json{{"k", 1}});
  CHECK(mem.manifest() == out.manifest());
  fs::remove_all(dir);
}

TEST_CASE("write_atomic replaces content") {
  const fs::path f = fs::temp_directory_path() / "merw_atomic.txt";
  write_atomic(f, "one");
  write_atomic(f, "two");
  CHECK(slurp(f) == "two");
  fs::remove(f);
}

TEST_CASE("trajectory csv and sidecar") {
  const auto t = simulate(WalkParams{2, Param::parse("0.7")}, 250, 3, 1, 100);
  const auto csv = trajectory_csv(t);
  CHECK(csv.rows() == t.times.size());
  CHECK(csv.str().rfind("n,x1,x2\n1,1,0\n", 0) == 0);
  const auto side = trajectory_sidecar(t);
  CHECK(side.contains("seed"));
  const auto v = verdict("stat", "regime", true, json{{"x", 1}});
  CHECK(v["pass"] == true);
  CHECK(v.dump() == R"({"statistic":"stat","regime":"regime","pass":true,"details":{"x":1}})");
}
