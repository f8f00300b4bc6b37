#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "ipid/cli.hpp"
#include "ipid/simulate.hpp"
#include "json.hpp"

using namespace ipid;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Sandbox {
  fs::path dir;
  Sandbox() {
    static int counter = 0;
    dir = fs::temp_directory_path() / ("ipid_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }
  std::string write_json(const std::string& name, const json& j) const { return write(name, j.dump()); }
};

struct Outcome {
  int code;
  std::string out;
  std::string err;
  json body() const { return json::parse(out); }
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

IpidLaw gaussian_law(std::vector<double> means) {
  std::vector<SlotDensity> s;
  for (double m : means) s.push_back(SlotDensity::gaussian(m, 1));
  return IpidLaw(s);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors are machine readable") {
  auto r = cli({});
  CHECK(r.code != 0);
  CHECK(json::parse(r.err).at("error") == "usage");
  r = cli({"detect", "--no-such-flag"});
  CHECK(r.code != 0);
  CHECK(json::parse(r.err).contains("message"));
  r = cli({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("evaluate") != std::string::npos);
}

TEST_CASE("detect on an empty observation file") {
  Sandbox box;
  const auto pre = box.write_json("pre.json", gaussian_law({0}));
  const auto post = box.write_json("post.json", gaussian_law({1}));
  const auto obs = box.write("obs.csv", "time,value\n");
  const auto r = cli({"detect", "--detector", "cusum", "--model", pre, "--model2", post, "--beta", "100", "--input", obs,
                      "--trajectory", box.path("traj.csv")});
  REQUIRE(r.code == 0);
  CHECK(r.body().at("status") == "no alarm");
  CHECK(r.body().at("samples") == 0);
  CHECK(slurp(box.path("traj.csv")) == "time_index,slot,observation,statistic,alarm,decided_class\n");
}

TEST_CASE("poisson traffic run") {
  Sandbox box;
  std::vector<SlotDensity> pre_slots, post_slots;
  for (int i = 0; i < 288; ++i) {
    const double rate = 20 + 15 * std::sin(2 * 3.141592653589793 * i / 288.0);
    pre_slots.push_back(SlotDensity::poisson(rate));
    post_slots.push_back(SlotDensity::poisson(rate * 1.5));
  }
  const IpidLaw pre(pre_slots), post(post_slots);
  const auto data = generate(single_stream_scenario(pre, post, ChangePoint::fixed(400), 600, 2024));
  std::string csv = "time,value\n";
  for (std::size_t n = 0; n < data.observations.size(); ++n) {
    csv += std::to_string(n + 1) + "," + std::to_string(static_cast<long long>(data.observations[n][0])) + "\n";
  }
  const auto obs = box.write("obs.csv", csv);
  const auto pre_path = box.write_json("pre.json", pre);
  const auto post_path = box.write_json("post.json", post);
  const std::vector<std::string> args{"detect", "--detector", "cusum", "--model", pre_path, "--model2", post_path,
                                      "--beta", "1000", "--input", obs, "--trajectory", box.path("t1.csv"),
                                      "--out", box.path("s1.json")};
  REQUIRE(cli(args).code == 0);
  const auto summary = json::parse(slurp(box.path("s1.json")));
  CHECK(summary.at("status") == "alarm");
  CHECK(summary.at("first_alarm").get<long long>() >= 400);
  CHECK(summary.at("threshold").get<double>() == doctest::Approx(std::log(1000.0)));
  CHECK(summary.at("config").at("beta") == 1000.0);

  auto again = args;
  again[again.size() - 3] = box.path("t2.csv");
  again.back() = box.path("s2.json");
  REQUIRE(cli(again).code == 0);
  CHECK(slurp(box.path("t1.csv")) == slurp(box.path("t2.csv")));
  auto s2 = json::parse(slurp(box.path("s2.json")));
  s2.erase("config");
  auto s1 = summary;
  s1.erase("config");
  CHECK(s1 == s2);
}

TEST_CASE("detect errors") {
  Sandbox box;
  const auto pre = box.write_json("pre.json", gaussian_law({0, 0}));
  const auto post = box.write_json("post.json", gaussian_law({1, 1}));
  const auto bad = box.write("bad.csv", "time,value\n1,0.5\n2,zz\n");
  auto r = cli({"detect", "--detector", "cusum", "--model", pre, "--model2", post, "--beta", "10", "--input", bad});
  CHECK(r.code != 0);
  const auto e = json::parse(r.err);
  CHECK(e.at("error") == "parse");
  CHECK(e.at("message").get<std::string>().find("line 3") != std::string::npos);

  const auto short_post = box.write_json("short.json", gaussian_law({1}));
  const auto good = box.write("good.csv", "time,value\n1,0.5\n");
  r = cli({"detect", "--detector", "cusum", "--model", pre, "--model2", short_post, "--beta", "10", "--input", good});
  CHECK(r.code != 0);
  CHECK(json::parse(r.err).at("error") == "period_mismatch");

  const auto two = box.write("two.csv", "time,value_0,value_1\n1,0.5,0.2\n");
  r = cli({"detect", "--detector", "cusum", "--model", pre, "--model2", post, "--beta", "10", "--input", two});
  CHECK(r.code != 0);
  CHECK(json::parse(r.err).at("error") == "period_mismatch");
}

TEST_CASE("config precedence") {
  Sandbox box;
  const auto pre = box.write_json("pre.json", gaussian_law({0}));
  const auto post = box.write_json("post.json", gaussian_law({1}));
  const auto obs = box.write("obs.csv", "time,value\n1,3\n2,3\n");
  const auto cfg = box.write_json("cfg.json", {{"detector", "cusum"}, {"model", pre}, {"model2", post},
                                               {"beta", 10}, {"input", obs}});
  auto r = cli({"detect", "--config", cfg});
  REQUIRE(r.code == 0);
  CHECK(r.body().at("threshold") == doctest::Approx(std::log(10.0)));
  r = cli({"detect", "--config", cfg, "--beta", "1000"});
  REQUIRE(r.code == 0);
  CHECK(r.body().at("threshold") == doctest::Approx(std::log(1000.0)));
  CHECK(r.body().at("config").at("beta") == 1000.0);
  CHECK(r.body().at("config").at("detector") == "cusum");
}

TEST_CASE("evaluate") {
  Sandbox box;
  const auto pre = box.write_json("pre.json", gaussian_law({0, 0.5}));
  const auto post = box.write_json("post.json", gaussian_law({0.5, 1.0}));
  const std::vector<std::string> base{"evaluate", "--detector", "shiryaev", "--model", pre, "--model2", post,
                                      "--prior-rho", "0.05", "--alpha", "0.05", "--horizon", "3000"};
  SUBCASE("zero trials") {
    auto args = base;
    args.insert(args.end(), {"--metric", "pfa", "--trials", "0"});
    const auto r = cli(args);
    CHECK(r.code != 0);
    CHECK(json::parse(r.err).at("error") == "invalid_argument");
  }
  SUBCASE("pfa within budget and round trip") {
    auto args = base;
    args.insert(args.end(), {"--metric", "pfa", "--trials", "3000", "--seed", "11"});
    const auto r = cli(args);
    REQUIRE(r.code == 0);
    const auto report = r.body().get<MonteCarloReport>();
    CHECK(report.pfa->value <= 0.05 + 3 * report.pfa->std_error);
    CHECK(json(report).get<MonteCarloReport>() == report);
  }
  SUBCASE("delay with prediction") {
    auto args = base;
    args.insert(args.end(), {"--metric", "add", "--trials", "500", "--nu", "3"});
    const auto r = cli(args);
    REQUIRE(r.code == 0);
    CHECK(r.body().at("predicted").get<double>() > 0);
    CHECK(r.body().at("add").at("value").get<double>() > 0);
  }
  SUBCASE("worker count does not change the report") {
    auto a = base;
    a.insert(a.end(), {"--metric", "add", "--trials", "300", "--workers", "1"});
    auto b = base;
    b.insert(b.end(), {"--metric", "add", "--trials", "300", "--workers", "8"});
    auto ra = cli(a).body(), rb = cli(b).body();
    ra.erase("config");
    rb.erase("config");
    CHECK(ra == rb);
  }
  SUBCASE("scenario file and misclassification") {
    const ClassBank bank({gaussian_law({0}), gaussian_law({1}), gaussian_law({-1})});
    const auto bank_path = box.write_json("bank.json", bank);
    const auto r = cli({"evaluate", "--detector", "classifier", "--bank", bank_path, "--beta", "100", "--metric",
                        "misclass", "--true-class", "2", "--trials", "500"});
    REQUIRE(r.code == 0);
    CHECK(r.body().at("misclass").at("value").get<double>() < 0.1);
    const auto scen = box.write_json(
        "scen.json", {{"bank", bank}, {"true_class", 1}, {"change_point", {{"type", "fixed"}, {"nu", 5}}},
                      {"horizon", 2000}});
    const auto r2 = cli({"evaluate", "--detector", "classifier", "--bank", bank_path, "--beta", "100", "--metric",
                         "add", "--scenario", scen, "--trials", "200"});
    REQUIRE(r2.code == 0);
    CHECK(r2.body().contains("add"));
  }
}

TEST_CASE("fit, info and lfl") {
  Sandbox box;
  const auto cycles = box.write("cycles.csv", "0,1\n2,3\n");
  auto r = cli({"fit", "--input", cycles});
  REQUIRE(r.code == 0);
  const auto fitted = r.body().at("model").get<IpidLaw>();
  CHECK(fitted.slot(0) == SlotDensity::gaussian(1, 2));
  const auto model_path = box.write("fitted.json", r.out);

  const auto counts = box.write("counts.csv", "timestamp,value\n0,2\n1,4\n2,4\n3,6\n");
  r = cli({"fit", "--input", counts, "--layout", "long", "--period", "2", "--distribution", "poisson"});
  REQUIRE(r.code == 0);
  CHECK(r.body().at("model").get<IpidLaw>().slot(1) == SlotDensity::poisson(5));

  const auto post = box.write_json("post.json", gaussian_law({2, 3}));
  r = cli({"info", "--model", model_path, "--model2", post});
  REQUIRE(r.code == 0);
  CHECK(r.body().at("aggregate").get<double>() > 0);

  const auto bank = box.write_json("bank.json", ClassBank({gaussian_law({0}), gaussian_law({1}), gaussian_law({-1})}));
  r = cli({"info", "--bank", bank, "--beta", "100"});
  REQUIRE(r.code == 0);
  CHECK(r.body().at("i_star").get<double>() == doctest::Approx(0.5));
  CHECK(r.body().at("threshold").get<double>() == doctest::Approx(std::log(800.0)));

  const auto pre = box.write_json("pre1.json", IpidLaw({SlotDensity::gaussian(0, 1)}));
  const auto fam = box.write(
      "fam.json", R"({"period":1,"slots":[{"kind":"interval","family":"gaussian","direction":"above","boundary":0.1,"variance":1}]})");
  r = cli({"lfl", "select", "--model", pre, "--family", fam});
  REQUIRE(r.code == 0);
  CHECK(r.body().at("model").get<IpidLaw>().slot(0) == SlotDensity::gaussian(0.1, 1));
  CHECK(r.body().at("report").at("valid") == true);
  const auto lfl = box.write("lfl.json", r.out);
  r = cli({"lfl", "validate", "--model", pre, "--model2", lfl, "--family", fam});
  REQUIRE(r.code == 0);
  CHECK(r.body().at("valid") == true);
  const auto outside = box.write_json("outside.json", IpidLaw({SlotDensity::gaussian(0.05, 1)}));
  r = cli({"lfl", "validate", "--model", pre, "--model2", outside, "--family", fam});
  CHECK(r.code != 0);
  CHECK(json::parse(r.err).at("error") == "membership");
}

TEST_CASE("simulate writes a replayable stream") {
  Sandbox box;
  const auto pre = box.write_json("pre.json", gaussian_law({0, 1}));
  const auto post = box.write_json("post.json", gaussian_law({3, 4}));
  auto r = cli({"simulate", "--model", pre, "--model2", post, "--nu", "5", "--horizon", "10", "--seed", "7",
                "--observations", box.path("a.csv")});
  REQUIRE(r.code == 0);
  CHECK(r.body().at("nu") == 5);
  cli({"simulate", "--model", pre, "--model2", post, "--nu", "5", "--horizon", "10", "--seed", "7",
       "--observations", box.path("b.csv")});
  CHECK(slurp(box.path("a.csv")) == slurp(box.path("b.csv")));
  std::istringstream in(slurp(box.path("a.csv")));
  std::string line;
  std::getline(in, line);
  CHECK(line == "time,value");
}

}
