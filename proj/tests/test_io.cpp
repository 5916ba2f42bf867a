#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "doctest.h"
#include "fracsphere/errors.hpp"
#include "fracsphere/io.hpp"

using namespace fracsphere;

TEST_SUITE("io") {
  TEST_CASE("spectral snapshot layout and round trip") {
    SpectralField c(2);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto& x : c.coeffs) x = g(rng);
    const Json j = to_json(c, FracOperatorSpec(2, 0.5));
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"n", "sigma", "lmax", "coeffs"});
    REQUIRE(j["coeffs"].size() == 9);
    CHECK(j["coeffs"][0] == Json::parse("[0, 0, " + format_double(c.coeffs[0]) + "]"));
    CHECK(j["coeffs"][1][0] == 1);
    CHECK(j["coeffs"][1][1] == -1);
    CHECK(j["coeffs"][8][1] == 2);
    const SpectralField back = spectral_from_json(Json::parse(j.dump()));
    CHECK(back.lmax == 2);
    CHECK(back.coeffs == c.coeffs);
  }

  TEST_CASE("malformed spectral snapshots are rejected") {
    CHECK_THROWS_AS(spectral_from_json(Json::parse(R"({"coeffs": []})")), DomainError);
    CHECK_THROWS_AS(spectral_from_json(Json::parse(R"({"n": 3, "lmax": 1, "coeffs": []})")), DomainError);
    CHECK_THROWS_AS(spectral_from_json(Json::parse(R"({"lmax": -1, "coeffs": []})")), DomainError);
    CHECK_THROWS_AS(spectral_from_json(Json::parse(R"({"lmax": 1, "coeffs": [[2, 0, 1.0]]})")), DomainError);
    CHECK_THROWS_AS(spectral_from_json(Json::parse(R"({"lmax": 1, "coeffs": [[1, 2, 1.0]]})")), DomainError);
    CHECK_THROWS_AS(spectral_from_json(Json::parse(R"({"lmax": 1, "coeffs": [[1, 0]]})")), DomainError);
  }

  TEST_CASE("grid snapshot round trip and validation") {
    const auto g = SphereGrid::build(2, {4, 8});
    GridField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.1 * static_cast<double>(i) - 1.0 / 3.0;
    const GridField back = grid_field_from_json(Json::parse(to_json(f).dump()));
    CHECK(back.grid->counts() == g->counts());
    CHECK(back.values == f.values);
    Json bad = to_json(f);
    bad["values"].erase(0);
    CHECK_THROWS_AS(grid_field_from_json(bad), DomainError);
    bad = to_json(f);
    bad["values"][0] = "x";
    CHECK_THROWS_AS(grid_field_from_json(bad), DomainError);
    CHECK_THROWS_AS(grid_field_from_json(Json::parse(R"({"values": []})")), DomainError);
  }

  TEST_CASE("conformal parameter round trip") {
    const ConformalParam p(normalized(Vec4{1.0, 2.0, 2.0, 0.0}), 3.5);
    const Json j = to_json(p, 2);
    CHECK(j["P"].size() == 3);
    const ConformalParam q = conformal_from_json(j);
    CHECK(q.t == p.t);
    CHECK(norm(q.P - p.P) < 1e-15);
    CHECK_THROWS_AS(conformal_from_json(Json::parse(R"({"P": [0, 0, 1]})")), DomainError);
    CHECK_THROWS_AS(conformal_from_json(Json::parse(R"({"P": [0, 0, 2], "t": 2})")), DomainError);
    CHECK_THROWS_AS(conformal_from_json(Json::parse(R"({"P": ["a"], "t": 2})")), DomainError);
  }

  TEST_CASE("model parsing") {
    const CriticalPointModel m = model_from_json(Json::parse(R"({"location": [0, 0, 2], "a": [-1, 2], "beta": 1.7})"), 2);
    CHECK(norm(m.location - Vec4{0.0, 0.0, 1.0, 0.0}) < 1e-15);
    CHECK(m.beta == 1.7);
    CHECK(m.index() == 1);
    CHECK(model_from_json(Json::parse(R"({"location": [1, 0, 0], "a": [1, 2]})"), 2).beta == 1.5);
    CHECK_THROWS_AS(model_from_json(Json::parse(R"({"location": [0, 0, 0], "a": [1, 2]})"), 2), DomainError);
    CHECK_THROWS_AS(model_from_json(Json::parse(R"({"location": [0, 0, 1], "a": [1]})"), 2), DomainError);
    CHECK_THROWS_AS(model_from_json(Json::parse(R"({"a": [1, 2]})"), 2), DomainError);
  }

  TEST_CASE("result records") {
    DegreeResult d;
    d.conclusive = false;
    d.degree = 0;
    CHECK(to_json(d, 2)["degree"].is_null());
    d.conclusive = true;
    d.degree = -1;
    CHECK(to_json(d, 2)["degree"] == -1);
    IndexCount ic;
    ic.sum = 2;
    ic.predicted_degree = 1;
    const Json j = to_json(ic);
    CHECK(j["sum"] == 2);
    CHECK(j["predicted_degree"] == 1);
  }

  TEST_CASE("shortest round-trip formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1e10, 1e10);
    for (int i = 0; i < 1000; ++i) {
      const double x = u(rng) / (1 + i);
      CHECK(std::stod(format_double(x)) == x);
    }
  }

  TEST_CASE("csv quoting and line ends") {
    CsvTable t({"name", "value"});
    t.add_row(std::vector<std::string>{"plain", "1"});
    t.add_row(std::vector<std::string>{"a,b", "say \"hi\""});
    t.add_row(std::vector<double>{0.5, -3.0});
    CHECK(t.rows() == 3);
    CHECK(t.str() == "name,value\r\nplain,1\r\n\"a,b\",\"say \"\"hi\"\"\"\r\n0.5,-3\r\n");
    CHECK_THROWS_AS(t.add_row(std::vector<double>{1.0}), DomainError);
  }

  TEST_CASE("text files") {
    const auto dir = std::filesystem::temp_directory_path() / "fracsphere_io_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "a.txt").string();
    write_text(path, "line\r\nnext");
    CHECK(read_text(path) == "line\r\nnext");
    CHECK_THROWS_AS(read_text((dir / "missing.txt").string()), DomainError);
    std::filesystem::remove_all(dir);
  }
}
