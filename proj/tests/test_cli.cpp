#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lcsampler/cli.hpp"
#include "lcsampler/errors.hpp"
#include "lcsampler/pool.hpp"

namespace fs = std::filesystem;
using namespace lcs;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lcsampler");
  std::ostringstream out, err;
  const int status = run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("lcsampler_cli_test_" + std::to_string(::getpid()) + "_" +
                                         std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }
  [[nodiscard]] std::string write(const std::string& name, const std::string& contents) const {
    std::ofstream(file(name), std::ios::binary) << contents;
    return file(name);
  }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

}  // namespace

TEST_CASE("cli: presets") {
  const auto r = cli({"presets"});
  CHECK(r.status == 0);
  CHECK(r.out.find("single-0.15-budget-0.6  kind=single_volume fractions=0.15 repeats=4") != std::string::npos);
  CHECK(r.out.find("four-appendix-wide") != std::string::npos);
  const auto j = cli({"presets", "--format", "json"});
  CHECK(j.status == 0);
  CHECK(nlohmann::json::parse(j.out).is_array());
}

TEST_CASE("cli: simulate-pool is deterministic per seed") {
  TempDir dir;
  const auto a = cli({"simulate-pool", "--seed", "7", "--out", dir.file("a.csv")});
  const auto b = cli({"simulate-pool", "--seed", "7", "--out", dir.file("b.csv")});
  const auto c = cli({"simulate-pool", "--seed", "8", "--out", dir.file("c.csv")});
  REQUIRE(a.status == 0);
  REQUIRE(b.status == 0);
  REQUIRE(c.status == 0);
  CHECK(a.out.find("entries: 1020") != std::string::npos);
  CHECK(a.out.find("crossings: ") != std::string::npos);
  CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));
  CHECK(a.out == b.out);
  CHECK(slurp(dir.file("a.csv")) != slurp(dir.file("c.csv")));

  std::ifstream in(dir.file("c.csv"));
  const auto pool = ingest_csv(in);
  CHECK(pool.entries().size() == 1020);
}

TEST_CASE("cli: simulate-pool with one curve and one volume") {
  TempDir dir;
  const auto specs = dir.write(
      "spec.json", R"([{"c": 0.05, "delta": 0.05, "theta1": -0.35, "theta2": 6.0, "v_star": 100000, "num_classes": 20}])");
  const auto r = cli({"simulate-pool", "--specs", specs, "--volumes", "1000", "--repeats", "1", "--seed", "1",
                      "--out", dir.file("p.csv")});
  REQUIRE(r.status == 0);
  CHECK(r.out.find("entries: 2") != std::string::npos);

  const auto bad = dir.write("bad.json", "[\n  {\"c\": 0.05,\n   \"delta\": }\n]");
  const auto e = cli({"simulate-pool", "--specs", bad, "--seed", "1", "--out", dir.file("q.csv")});
  CHECK(e.status != 0);
  CHECK(e.err.find("line 3") != std::string::npos);

  const auto unknown = dir.write(
      "unknown.json", R"([{"c": 0.05, "delta": 0.05, "theta1": -0.35, "theta2": 6.0, "v_star": 100000, "num_classes": 20, "sigma": 1}])");
  const auto u = cli({"simulate-pool", "--specs", unknown, "--seed", "1", "--out", dir.file("q.csv")});
  CHECK(u.status != 0);
  CHECK(u.err.find("sigma") != std::string::npos);
}

TEST_CASE("cli: evaluate writes a frontier and rejects oversized k") {
  TempDir dir;
  REQUIRE(cli({"simulate-pool", "--seed", "7", "--out", dir.file("pool.csv")}).status == 0);
  const auto r = cli({"evaluate", "--pool", dir.file("pool.csv"), "--preset", "two-0.01-0.14-budget-0.16", "--k",
                      "1..12", "--seed", "7", "--trials", "5", "--out", dir.file("f.csv")});
  REQUIRE(r.status == 0);
  const auto text = slurp(dir.file("f.csv"));
  CHECK(data_rows(text) == 12);
  CHECK(text.find("label,k,mean_x,mean_y,std_y,trials\n") != std::string::npos);
  CHECK(text.find("# lcsampler evaluate") == 0);

  const auto again = cli({"evaluate", "--pool", dir.file("pool.csv"), "--preset", "two-0.01-0.14-budget-0.16", "--k",
                          "1..12", "--seed", "7", "--trials", "5", "--out", dir.file("g.csv")});
  REQUIRE(again.status == 0);
  CHECK(slurp(dir.file("g.csv")) == text);

  const auto too_big = cli({"evaluate", "--pool", dir.file("pool.csv"), "--preset", "single-0.05-budget-0.15",
                            "--k", "13", "--seed", "7", "--out", dir.file("h.csv")});
  CHECK(too_big.status != 0);
  CHECK(too_big.err.find("m = 12") != std::string::npos);

  const auto unknown = cli({"evaluate", "--pool", dir.file("pool.csv"), "--preset", "no-such-preset", "--seed", "7",
                            "--out", dir.file("h.csv")});
  CHECK(unknown.status != 0);

  const auto infeasible = cli({"evaluate", "--pool", dir.file("pool.csv"), "--plan-json",
                               R"({"volume_fractions": [0.3], "budget_fraction": 0.2})", "--seed", "7", "--out",
                               dir.file("h.csv")});
  CHECK(infeasible.status != 0);
  CHECK(infeasible.err.find("budget") != std::string::npos);

  const auto json = cli({"evaluate", "--pool", dir.file("pool.csv"), "--plan-json",
                         R"({"volume_fractions": [0.01, 0.04, 0.08, 0.16], "repeats": 1})", "--k", "1,6,12",
                         "--seed", "3", "--trials", "4", "--format", "json", "--out", dir.file("f.json")});
  REQUIRE(json.status == 0);
  const auto doc = nlohmann::json::parse(slurp(dir.file("f.json")));
  CHECK(doc["series"][0]["points"].size() == 3);
  CHECK(doc["series"][0]["plan"]["kind"] == "multi_volume");
}

TEST_CASE("cli: evaluate output does not depend on LCSAMPLER_THREADS") {
  TempDir dir;
  REQUIRE(cli({"simulate-pool", "--seed", "3", "--out", dir.file("pool.csv")}).status == 0);
  auto run = [&](const char* threads, const std::string& out) {
    ::setenv("LCSAMPLER_THREADS", threads, 1);
    const auto r = cli({"evaluate", "--pool", dir.file("pool.csv"), "--preset", "four-appendix-wide", "--seed",
                        "9", "--out", out});
    ::unsetenv("LCSAMPLER_THREADS");
    return r.status;
  };
  REQUIRE(run("1", dir.file("one.csv")) == 0);
  REQUIRE(run("8", dir.file("eight.csv")) == 0);
  CHECK(slurp(dir.file("one.csv")) == slurp(dir.file("eight.csv")));
  CHECK(run("zero", dir.file("bad.csv")) != 0);
}

TEST_CASE("cli: fit") {
  TempDir dir;
  const auto pts = dir.write("pts.csv", "volume,loss\n1,2.0\n4,1.0\n");
  const auto r = cli({"fit", "--points", pts, "--target-volume", "16", "--format", "json"});
  REQUIRE(r.status == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["theta1"].get<double>() == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(doc["theta2"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(doc["prediction"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(doc["converged"] == true);

  const auto text = cli({"fit", "--points", pts, "--target-volume", "16"});
  CHECK(text.out.find("prediction: 0.5") != std::string::npos);

  const auto flat = dir.write("flat.csv", "volume,loss\n10,0.3\n20,0.3\n40,0.3\n40,0.3\n");
  const auto f = cli({"fit", "--points", flat, "--target-volume", "1000", "--format", "json"});
  REQUIRE(f.status == 0);
  CHECK(std::abs(nlohmann::json::parse(f.out)["theta1"].get<double>()) < 1e-9);

  const auto zero = dir.write("zero.csv", "volume,loss\n10,0.3\n20,0\n");
  const auto z = cli({"fit", "--points", zero, "--target-volume", "100"});
  CHECK(z.status != 0);
  CHECK(z.err.find("row 3") != std::string::npos);

  const auto one = dir.write("one.csv", "volume,loss\n10,0.3\n10,0.2\n");
  CHECK(cli({"fit", "--points", one, "--target-volume", "100"}).status != 0);
}

TEST_CASE("cli: ingest round-trips a pool file") {
  TempDir dir;
  const auto src = dir.write("in.csv",
                             "#target_volume=1000\nmodel_id,volume,repetition,loss,cost\n"
                             "b,100,0,0.5,100\na,100,0,0.6,100\na,1000,0,0.2,1000\nb,1000,0,0.25,1000\n");
  const auto r = cli({"ingest", "--pool", src, "--out", dir.file("out.csv")});
  REQUIRE(r.status == 0);
  CHECK(r.out.find("entries: 4") != std::string::npos);
  const auto again = cli({"ingest", "--pool", dir.file("out.csv"), "--out", dir.file("out2.csv")});
  REQUIRE(again.status == 0);
  CHECK(slurp(dir.file("out.csv")) == slurp(dir.file("out2.csv")));

  const auto bad = dir.write("bad.csv", "#target_volume=1000\nmodel_id,volume,repetition,loss,cost\nb,100,0,1.3,100\n");
  const auto e = cli({"ingest", "--pool", bad});
  CHECK(e.status != 0);
  CHECK(e.err.find("row 3") != std::string::npos);
}

TEST_CASE("k list parsing") {
  CHECK(parse_k_list("1..3") == std::vector<std::int64_t>{1, 2, 3});
  CHECK(parse_k_list("5,1..2") == std::vector<std::int64_t>{1, 2, 5});
  CHECK_THROWS_AS(parse_k_list("0"), InputError);
  CHECK_THROWS_AS(parse_k_list("3..1"), InputError);
  CHECK_THROWS_AS(parse_k_list("1,1"), InputError);
  CHECK_THROWS_AS(parse_k_list("x"), InputError);
}
