#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "valley/cli.hpp"

using valley::cli::run;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "valley_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(call({}).code == 2);
  CHECK(call({"nonsense"}).code == 2);
  CHECK(call({"simulate", "--weight", "delta"}).code == 2);
  CHECK(call({"moments", "--model", "bogus"}).code == 2);
}

TEST_CASE("help exits 0") { CHECK(call({"--help"}).code == 0); }

TEST_CASE("computation errors print one JSON line and exit 1") {
  const Result r = call({"moments", "--model", "laplace", "--sigma", "1", "--qmax", "2"});
  CHECK(r.code == 1);
  const auto l = lines(r.err);
  REQUIRE(l.size() == 1);
  const auto j = nlohmann::json::parse(l[0]);
  CHECK(j["error"] == "divergent_moment");
  CHECK(j["message"].is_string());
}

TEST_CASE("moments table has an exact q = 0 row") {
  const Result r = call({"moments", "--model", "uniform", "--delta", "2", "--qmin", "0",
                         "--qmax", "1", "--qstep", "0.5"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 4);
  CHECK(l[1] == "0,0");
}

TEST_CASE("simulate is deterministic") {
  const std::vector<std::string> args = {"simulate", "--weight", "laplace", "--sigma", "0.5",
                                         "--n", "500", "--seed", "9"};
  const Result a = call(args), b = call(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(lines(a.out).size() == 501);
  CHECK(lines(a.out)[0] == "dt");
}

TEST_CASE("ptd, estimate and fit pipeline through files") {
  const fs::path sim = scratch("sim.csv"), curve = scratch("curve.csv"), fit = scratch("fit.json");
  REQUIRE(call({"simulate", "--weight", "delta", "--tau0", "2", "--n", "20000", "--seed", "3",
                "-o", sim.string()})
              .code == 0);
  REQUIRE(call({"estimate", "--input", sim.string(), "--qmax", "4", "-o", curve.string()}).code ==
          0);
  REQUIRE(call({"fit", "--input", curve.string(), "--kind", "mono", "--qmin", "1", "--qmax", "4",
                "-o", fit.string()})
              .code == 0);
  std::ifstream in(fit);
  const auto j = nlohmann::json::parse(in);
  CHECK(j["params"]["ln_tau"]["estimate"].get<double>() == doctest::Approx(std::log(2.0)).epsilon(0.05));

  const Result p = call({"ptd", "--weight", "uniform", "--delta", "1", "--t", "1"});
  REQUIRE(p.code == 0);
  CHECK(lines(p.out)[0] == "t,psi,sojourn");
}

TEST_CASE("missing input file is a usage error") {
  CHECK(call({"estimate", "--input", "/nonexistent/file.csv"}).code == 2);
}

TEST_CASE("config file expands into flags") {
  const fs::path cfg = scratch("cfg.json");
  std::ofstream(cfg) << R"({"model": "delta", "qmax": 1, "qstep": 1})";
  const Result r = call({"moments", "--config", cfg.string()});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out).size() == 3);
}
