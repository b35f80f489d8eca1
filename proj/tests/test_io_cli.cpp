#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "fiberlab/cli.hpp"
#include "fiberlab/error.hpp"
#include "fiberlab/io.hpp"
#include "fiberlab/sampling.hpp"

using namespace fiberlab;
namespace fs = std::filesystem;
using io::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "fiberlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  return {code, o.str(), e.str()};
}

std::string error_code(const Run& r) { return json::parse(r.err)["error"]["code"].get<std::string>(); }

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("fiberlab_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void put(const fs::path& p, const json& j) { io::write_text_file(p.string(), j.dump()); }

}  // namespace

TEST_CASE("json round trips") {
  sampling::Rng rng(41);
  const auto f = sampling::random_diffeo(rng, 64, 0.2);
  const auto f2 = io::diffeo_from_json(json::parse(io::to_json(f).dump()));
  CHECK(circle::sup_distance(f, f2) == 0.0);
  CHECK_THROWS_AS(io::diffeo_from_json(json{{"n", 3}, {"disp", {0.0, 0.1}}}), Error);

  const auto cover = cech::ModelCover::make(cech::Base::S2, 64);
  const auto tau = cech::Cocycle1::from_function(cover, [](int, int, const cech::CoverPoint& p) {
    return circle::wrap01(3 * p[0]);
  });
  const auto tau2 = io::cocycle_from_json(json::parse(io::to_json(tau).dump()));
  CHECK(cech::cocycle_distance(tau, tau2) == 0.0);
  CHECK(cech::euler_class(tau2) == 3);

  const auto m = geometry::FibrationModel::lens(3);
  const auto X = sampling::random_field(rng, m, 8, 8, 1.0);
  const auto X2 = io::field_from_json(json::parse(io::to_json(X).dump()));
  CHECK(fields::sup_norm(X - X2) == 0.0);

  const auto F = moduli::model_fibering(geometry::FibrationModel::hopf(), 8, 16);
  const auto F2 = io::fibering_from_json(json::parse(io::to_json(F).dump()));
  CHECK(moduli::sample_distance(F, F2) < 1e-15);  // points are renormalized on read
  CHECK(F2.model == F.model);

  const auto q = sampling::random_point(rng, m);
  CHECK((io::point_from_json(io::to_json(q, m), m).c - q.c).norm() == 0.0);
  CHECK_THROWS_AS(io::point_from_json(json{1.0, 2.0}, m), Error);
  CHECK_THROWS_AS(io::read_json_file((scratch() / "missing.json").string()), Error);
}

TEST_CASE("csv output") {
  std::ostringstream os;
  io::write_csv(os, {"a", "b"}, {{0.1, 2.0}, {1.0 / 3, -4e-300}});
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", -4e-300);
  CHECK(os.str() == "a,b\n0.10000000000000001,2\n0.33333333333333331," + std::string(buf) + "\n");
  CHECK(std::stod(buf) == -4e-300);
}

TEST_CASE("cli errors") {
  auto r = run({"frobnicate"});
  CHECK(r.code == 2);
  CHECK(error_code(r) == "UnknownSubcommand");
  r = run({"classify", "--base", "S2"});
  CHECK(r.code == 2);
  CHECK(error_code(r) == "BadConfig");
  r = run({"classify", "--base", "S2", "--euler", "two"});
  CHECK(error_code(r) == "BadConfig");
  r = run({});
  CHECK(r.code == 2);
  r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("heatflow") != std::string::npos);
  r = run({"csf", "--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("--kappa-tol") != std::string::npos);
  r = run({"csf", "--cfl", "0.7", "--points", "32"});
  CHECK(error_code(r) == "CFLViolation");
  r = run({"euler", "--cocycle", (scratch() / "nope.json").string()});
  CHECK(error_code(r) == "InvalidInput");
}

TEST_CASE("cli classify") {
  auto r = run({"classify", "--base", "S2", "--euler", "2"});
  CHECK(r.code == 0);
  CHECK(r.out.find("L(2,1)") != std::string::npos);
  CHECK(r.out.find("S2 ⊔ S2") != std::string::npos);
  r = run({"classify", "--base", "S1", "--euler", "1"});
  CHECK(r.code == 2);
  CHECK(error_code(r) == "InvalidEuler");
  r = run({"classify", "--base", "T2", "--euler", "0"});
  CHECK(r.out.find("Zprim3") != std::string::npos);
}

TEST_CASE("cli heatflow") {
  const auto a = run({"heatflow", "--grid", "64", "--seed", "3", "--t-samples", "5"});
  const auto b = run({"heatflow", "--grid", "64", "--seed", "3", "--t-samples", "5"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  std::istringstream is(a.out);
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,sup_disp,min_derivative");
  std::vector<std::string> rows;
  while (std::getline(is, line)) rows.push_back(line);
  REQUIRE(rows.size() == 5);
  double t = 0, sup = 1, dmin = 1;
  char c1 = 0, c2 = 0;
  std::istringstream last(rows.back());
  last >> t >> c1 >> sup >> c2 >> dmin;
  CHECK(t == 1.0);
  CHECK(sup < 1e-12);
  CHECK(std::abs(dmin) < 1e-12);

  const auto path = scratch() / "f.json";
  put(path, json{{"n", 16}, {"disp", std::vector<double>(16, 0.25)}});
  const auto out = scratch() / "trace.csv";
  const auto c = run({"heatflow", "--in", path.string(), "--t-samples", "2", "--out", out.string()});
  CHECK(c.code == 0);
  CHECK(c.out.empty());
  CHECK(slurp(out) == "t,sup_disp,min_derivative\n0,0,0\n1,0,0\n");
}

TEST_CASE("cli euler and transport") {
  const auto cover = cech::ModelCover::make(cech::Base::S2, 128);
  const auto tau = cech::Cocycle1::from_function(cover, [](int, int, const cech::CoverPoint& p) {
    return circle::wrap01(-2 * p[0] + 0.1 * std::sin(6.283185307179586 * p[0]));
  });
  const auto path = scratch() / "tau.json";
  put(path, io::to_json(tau));
  const auto r = run({"euler", "--cocycle", path.string()});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["euler_class"] == -2);

  const auto q = scratch() / "q.json", x = scratch() / "x.json";
  put(q, json{1.0, 0.0, 0.0, 0.0});
  put(x, json{0.0, 1.0, 0.0});
  const auto t = run({"transport", "--model", "hopf", "--from", q.string(), "--to", x.string()});
  REQUIRE(t.code == 0);
  const auto j = json::parse(t.out);
  const auto p = io::point_from_json(j["point"], geometry::FibrationModel::hopf());
  CHECK((geometry::project(geometry::FibrationModel::hopf(), p).c - Eigen::Vector3d(0, 1, 0)).norm() < 1e-9);
}

TEST_CASE("cli split-field") {
  const auto fair = scratch() / "fair.json";
  const auto r = run({"split-field", "--model", "hopf", "--nb", "16", "--nf", "16", "--report", "--fair-out",
                      fair.string()});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(std::abs(j["normalized_cross_fair_projectable"].get<double>()) < 1e-8);
  const auto F = io::field_from_json(io::read_json_file(fair.string()));
  CHECK(fields::sup_norm(fields::horizontal_average(F)) < 1e-10);
  const auto again = run({"split-field", "--in", fair.string()});
  CHECK(json::parse(again.out)["l2_norm"]["projectable"].get<double>() < 1e-10);
}

TEST_CASE("cli straighten, slope and karcher") {
  const auto rep = scratch() / "rep.csv", out = scratch() / "G.json";
  auto r = run({"straighten", "--model", "hopf", "--nb", "16", "--m", "32", "--eps", "0.02", "--passes", "3",
                "--report", rep.string(), "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(rep).rfind("pass,residual\n1,", 0) == 0);
  const auto G = io::fibering_from_json(io::read_json_file(out.string()));
  CHECK(moduli::core_membership(G).kind == moduli::CoreDescriptor::Kind::SphereDirection);
  r = run({"straighten", "--model", "hopf", "--in", out.string()});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["final_residual"].get<double>() < 1e-12);

  const auto fib = scratch() / "fiber.json";
  json samples = json::array();
  for (int k = 0; k < 64; ++k) samples.push_back({k / 64.0, 2.0 * k / 64.0});
  put(fib, json{{"model", "flat-t2"}, {"samples", samples}});
  r = run({"slope", "--in", fib.string()});
  CHECK(r.out == "(1,2)\n");

  json s2 = json::array();
  for (int k = 0; k < 64; ++k) s2.push_back({0.5 + 0.1 * std::cos(6.283185307179586 * k / 64), k / 64.0});
  put(fib, json{{"samples", s2}});
  r = run({"karcher", "--in", fib.string(), "--model", "flat-t2", "--brute", "101"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["center"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(j["brute"]["offset_cells"].get<double>() <= 1.0);
}

TEST_CASE("cli csf") {
  const auto a = scratch() / "a.csv", b = scratch() / "b.csv";
  const std::vector<std::string> base = {"csf", "--slope", "1,2", "--amp", "0.05", "--points", "64",
                                         "--fibers", "4", "--t-max", "2", "--seed", "5"};
  auto args = base;
  args.insert(args.end(), {"--out", a.string()});
  auto r = run(args);
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["core"] == "slope (1,2)");
  CHECK(j["max_kappa"].get<double>() < 1e-3);
  args = base;
  args.insert(args.end(), {"--out", b.string()});
  run(args);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).rfind("t,length,max_kappa,min_pair_dist\n", 0) == 0);
  r = run({"csf", "--slope", "2,4"});
  CHECK(error_code(r) == "NonPrimitive");
  r = run({"csf", "--slope", "1;2"});
  CHECK(error_code(r) == "BadConfig");
}

TEST_CASE("cli selftest") {
  const auto r = run({"selftest", "--only", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("PASS", 0) == 0);
  CHECK(r.out.find("1/1 criteria passed") != std::string::npos);
  CHECK(run({"selftest", "--only", "9"}).code == 2);
}
