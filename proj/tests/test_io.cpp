#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "chent/errors.hpp"
#include "chent/io.hpp"

using namespace chent;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = CHENT_CLI_PATH;
const fs::path kData = CHENT_DATA_DIR;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "chent_test_io";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > " + scratch("stdout.txt").string() + " 2> " + scratch("stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string data(const char* name) { return (kData / name).string(); }

}  // namespace

TEST_CASE("channel JSON round trip") {
  std::mt19937_64 rng(4);
  const auto iso = random_isometry(8, 4, rng);
  std::vector<ComplexMatrix> ks(2, ComplexMatrix(4, 4));
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) ks[j](a, b) = iso(4 * j + a, b);
  const Channel ch(SystemDims({2, 2}), SystemDims({2, 2}), ks);
  const Channel back = io::channel_from_json(json::parse(io::channel_to_json(ch).dump()));
  CHECK(back.in_dims() == ch.in_dims());
  CHECK(max_abs_diff(back.choi_matrix(), ch.choi_matrix()) < 1e-11);

  const Channel named = io::load_channel(data("cnot.json"));
  CHECK(named.choi_matrix() == cnot().choi_matrix());
  const Channel h = io::load_channel(data("hadamard_kraus.json"));
  CHECK(h.is_isometry());
}

TEST_CASE("malformed inputs name the field") {
  auto field_of = [](const char* text) {
    try {
      io::channel_from_json(json::parse(text));
    } catch (const io::InputError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of(R"({"in_dims":[2],"out_dims":[2]})") == "kraus");
  CHECK(field_of(R"({"in_dims":[2],"kraus":[]})") == "out_dims");
  CHECK(field_of(R"({"in_dims":[1],"out_dims":[2],"kraus":[]})") == "in_dims");
  CHECK(field_of(R"({"in_dims":[2],"out_dims":[2],"kraus":[[[1,0],[0,1],[0,0]]]})") == "kraus[0]");
  CHECK(field_of(R"({"in_dims":[2],"out_dims":[2],"kraus":[[[2,0],[0,1]]]})") == "kraus");
  CHECK(field_of(R"({"name":"teleporter"})") == "name");
  CHECK(field_of(R"({"name":"depolarizing","params":{"p":3}})") == "params");
  CHECK(field_of(R"({"name":"cnot","params":{"x":"y"}})") == "params.x");
  CHECK(field_of("[1, 2]") == "<root>");
  CHECK_THROWS_AS(io::load_channel(scratch("does_not_exist.json")), io::InputError);

  const auto ghz = io::load_state(data("ghz3.json"));
  CHECK(ghz.is_pure());
  CHECK_THROWS_AS(io::state_from_json(json::parse(R"({"dims":[2],"vector":[1,1]})")), io::InputError);
  CHECK_NOTHROW(io::state_from_json(json::parse(R"({"dims":[2],"rho":[[0.5,0],[0,0.5]]})")));
}

TEST_CASE("sha256 and rounding") {
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(io::round12(1.0 / 3.0) == 0.333333333333);
  CHECK(io::round12(0.0) == 0.0);
}

TEST_CASE("report JSON round trip") {
  MeasureResult r;
  r.measure = "rc";
  r.value = 0.99999999996123;
  r.bound = Bound::lower;
  r.witness.kind = "product_state";
  r.witness.theta = {0.1, -2.0 / 3.0};
  r.witness.product_state = {{Complex(1, 0), Complex(0, 0)}, {Complex(0.6, 0), Complex(0, 0.8)}};
  r.telemetry = {32, 100, 2000, 1, 3};
  MeasureResult tiny = r;
  tiny.value = 3e-15;

  io::RunReport rep;
  rep.command = "compute --measure rc";
  rep.digest = "sha256:" + io::sha256_hex("x");
  rep.seed = 18446744073709551615ull;
  rep.results = {io::result_to_json(r), io::result_to_json(tiny)};
  rep.wall_ms = 12.345678901234567;
  const auto back = io::parse_report(io::serialize(rep));
  CHECK(back == rep);
  CHECK(back.results[0]["value"].get<double>() == 0.999999999961);
  CHECK(back.results[1]["value"].get<double>() == 0.0);
  CHECK(back.results[1]["value_raw"].get<double>() == 3e-15);
  CHECK_FALSE(back.results[0].contains("value_raw"));
}

TEST_CASE("cli exit codes") {
  const std::string out = scratch("r.json").string();
  CHECK(run("compute --measure rc --channel " + data("cnot.json") + " --starts 32 --seed 1 --out " + out) == 0);
  const auto rep = io::parse_report(io::read_file(out));
  REQUIRE(rep.results.size() == 1);
  CHECK(std::abs(rep.results[0]["value"].get<double>() - 1.0) < 1e-3);
  CHECK(rep.results[0]["bound"] == "lower");
  CHECK(rep.seed == 1);

  CHECK(run("compute --measure rc --channel " + data("cnot.json") + " --channel2 missing.json") == 3);
  CHECK(run("compute --measure sc --channel " + data("cnot.json")) == 3);
  CHECK(run("compute --measure rkme --k 3 --channel " + data("cnot.json")) == 3);
  CHECK(run("compute --measure rc --channel " + data("cyclic3.json")) == 3);

  const fs::path bad = scratch("bad.json");
  write(bad, R"({"in_dims":[2],"out_dims":[2]})");
  CHECK(run("compute --measure rc --channel " + bad.string()) == 2);
  CHECK(io::read_file(scratch("stderr.txt")).find("kraus") != std::string::npos);
  write(bad, "{not json");
  CHECK(run("compute --measure rc --channel " + bad.string()) == 2);
  CHECK(run("compute --measure rc --channel " + scratch("nope.json").string()) == 2);
  CHECK(run("compute --measure bogus --channel " + data("cnot.json")) == 2);
  CHECK(run("compute --measure rc") == 2);

  CHECK(run("oracle --kind grid-rc --channel " + data("cnot.json") + " --steps 4096") == 2);
  CHECK(run("oracle --kind grid-rc --steps 32") == 2);
  CHECK(run("oracle --kind partition --state " + data("ghz3.json") + " --k 2 --out " + out) == 0);
  CHECK(io::parse_report(io::read_file(out)).results[0]["nonseparable_everywhere"] == true);
  CHECK(run("oracle --kind grid-rc --channel " + data("cnot.json") + " --steps 32 --out " + out) == 0);
  CHECK(io::parse_report(io::read_file(out)).results[0]["value"].get<double>() >= 0.999);

  CHECK(run("check --suite nope") == 2);
  CHECK(run("check --suite rkme --trials 1 --seed 2 --out " + out) == 0);
  CHECK(run("check --suite rc --trials 1 --fault-sign-flip --out " + out) == 1);
  const auto failed = io::parse_report(io::read_file(out));
  bool named = false;
  for (const auto& p : failed.results) named |= p["property"] == "rc.nonnegativity" && p["passed"] == false;
  CHECK(named);
}

TEST_CASE("strength from the command line") {
  const std::string out = scratch("s.json").string();
  CHECK(run("compute --measure strength --channel " + data("cyclic3.json") + " --starts 8 --out " + out) == 0);
  const auto rep = io::parse_report(io::read_file(out));
  CHECK(rep.results[0]["value"].get<int>() == 4);
}

TEST_CASE("digest tracks file bytes") {
  const fs::path a = scratch("a.json"), b = scratch("b.json");
  write(a, R"({"name":"cnot"})");
  write(b, R"({"name": "cnot"})");
  const std::string out_a = scratch("ra.json").string(), out_b = scratch("rb.json").string();
  REQUIRE(run("compute --measure rc --starts 2 --channel " + a.string() + " --out " + out_a) == 0);
  REQUIRE(run("compute --measure rc --starts 2 --channel " + b.string() + " --out " + out_b) == 0);
  const auto ra = io::parse_report(io::read_file(out_a)), rb = io::parse_report(io::read_file(out_b));
  CHECK(ra.digest != rb.digest);
  CHECK(ra.results == rb.results);
  write(b, R"({"name":"cnot"})");
  REQUIRE(run("compute --measure rc --starts 2 --channel " + b.string() + " --out " + out_b) == 0);
  CHECK(io::parse_report(io::read_file(out_b)).digest == ra.digest);
}
