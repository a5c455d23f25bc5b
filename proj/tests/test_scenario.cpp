#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "uavplan/scenario.hpp"

using namespace uavplan;

namespace {

std::string temp_path(const std::string& name) {
  return std::string("/tmp/uavplan_test_") + name;
}

std::string read_all(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("paper-style layout: users in the ring, uavs in the cylinder") {
  SimParams p = SimParams::paper_defaults();
  GeometrySpec g;  // 500/1000 m ring, 50..100 m heights
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 17ull, 123456789ull}) {
    const Scenario s = generate_scenario(p, seed, g);
    CHECK(s.geometry.user_positions.size() == 4);
    CHECK(s.geometry.uav_start_positions.size() == 4);
    for (const auto& u : s.geometry.user_positions) {
      const double r = std::hypot(u.x(), u.y());
      CHECK(r >= 500.0);
      CHECK(r <= 1000.0);
      CHECK(u.z() == 0.0);
    }
    for (std::size_t i = 0; i < s.geometry.uav_start_positions.size(); ++i) {
      const Vec3& d = s.geometry.uav_start_positions[i];
      for (int c = 0; c < 3; ++c) {
        CHECK(d(c) >= s.geometry.nav_min(c));
        CHECK(d(c) <= s.geometry.nav_max(c));
      }
      for (std::size_t j = i + 1; j < s.geometry.uav_start_positions.size(); ++j)
        CHECK((d - s.geometry.uav_start_positions[j]).norm() >= p.d_min);
    }
    s.validate();
  }
}

TEST_CASE("generation is a pure function of (params, seed)") {
  SimParams p = SimParams::desk_defaults();
  const auto a = generate_scenario(p, 42, GeometrySpec::desk_defaults());
  const auto b = generate_scenario(p, 42, GeometrySpec::desk_defaults());
  CHECK(a == b);
  const auto c = generate_scenario(p, 43, GeometrySpec::desk_defaults());
  CHECK_FALSE(a == c);
}

TEST_CASE("user layout does not depend on the number of uavs") {
  SimParams p = SimParams::desk_defaults();
  const auto a = generate_scenario(p, 7, GeometrySpec::desk_defaults());
  p.num_uavs = 5;
  p.bs_antennas = 6;
  p.set_default_weights();
  const auto b = generate_scenario(p, 7, GeometrySpec::desk_defaults());
  REQUIRE(a.geometry.user_positions.size() == b.geometry.user_positions.size());
  for (std::size_t k = 0; k < a.geometry.user_positions.size(); ++k)
    CHECK(a.geometry.user_positions[k] == b.geometry.user_positions[k]);
}

TEST_CASE("impossible separation raises a placement error") {
  SimParams p = SimParams::desk_defaults();
  p.num_uavs = 2;
  p.bs_antennas = 2;
  p.set_default_weights();
  GeometrySpec g = GeometrySpec::desk_defaults();
  p.d_min = 10.0 * (2.0 * g.ring_outer + (g.height_max - g.height_min));
  CHECK_THROWS_AS(generate_scenario(p, 1, g), PlacementError);
}

TEST_CASE("invalid params raise a parameter error") {
  SimParams p = SimParams::desk_defaults();
  p.num_users = 100;  // violates L*M >= K
  CHECK_THROWS_AS(generate_scenario(p, 1), ParameterError);

  SimParams q = SimParams::desk_defaults();
  q.weights(0) = 0.9;  // sum != 1
  CHECK_THROWS_AS(q.validate(), ParameterError);
}

TEST_CASE("save/load round trip is the identity") {
  const auto s =
      generate_scenario(SimParams::desk_defaults(), 99, GeometrySpec::desk_defaults());
  const std::string path = temp_path("roundtrip.scn");
  save_scenario(s, path);
  const Scenario loaded = load_scenario(path);
  CHECK(s == loaded);
  // and saving again is byte-identical
  const std::string path2 = temp_path("roundtrip2.scn");
  save_scenario(loaded, path2);
  CHECK(read_all(path) == read_all(path2));
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("truncated file raises a parse error") {
  const auto s =
      generate_scenario(SimParams::desk_defaults(), 5, GeometrySpec::desk_defaults());
  const std::string path = temp_path("truncated.scn");
  save_scenario(s, path);
  const std::string full = read_all(path);
  std::ofstream out(path);
  out << full.substr(0, full.size() / 3);
  out.close();
  CHECK_THROWS_AS(load_scenario(path), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("file with weights that do not sum to one fails validation") {
  const auto s =
      generate_scenario(SimParams::desk_defaults(), 6, GeometrySpec::desk_defaults());
  const std::string path = temp_path("badweights.scn");
  save_scenario(s, path);
  std::string text = read_all(path);
  const auto pos = text.find("weights =");
  REQUIRE(pos != std::string::npos);
  const auto eol = text.find('\n', pos);
  text = text.substr(0, pos) + "weights = 0.9 0.9 0.9 0.9" + text.substr(eol);
  std::ofstream(path) << text;
  CHECK_THROWS_AS(load_scenario(path), ParameterError);
  std::remove(path.c_str());
}

TEST_CASE("parse error carries a line number") {
  const std::string path = temp_path("badline.scn");
  std::ofstream(path) << "[params]\nbandwidth_hz = not_a_number\n";
  try {
    load_scenario(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  std::remove(path.c_str());
}
