#include <cmath>

#include "doctest.h"
#include "uavplan/channel.hpp"

using namespace uavplan;

namespace {

Scenario small_scenario() {
  SimParams p = SimParams::desk_defaults();
  return generate_scenario(p, 11, GeometrySpec::desk_defaults());
}

}  // namespace

TEST_CASE("rician draws have unit mean power (monte carlo vs moment formula)") {
  // E|g|^2 = kappa/(kappa+1) + 1/(kappa+1) = 1 for every kappa
  SimParams p = SimParams::desk_defaults();
  p.num_uavs = 1;
  p.num_users = 1;
  p.uav_antennas = 1;
  p.bs_antennas = 1;
  p.set_default_weights();
  const Scenario s = generate_scenario(p, 3, GeometrySpec::desk_defaults());
  double acc = 0.0;
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) {
    const ChannelBlock b = draw_block(s, static_cast<std::uint64_t>(i));
    acc += std::norm(b.g_data[0][0](0));
  }
  const double mean = acc / draws;
  CHECK(std::abs(mean - 1.0) < 0.01);
}

TEST_CASE("huge rice factor gives unit-magnitude entries") {
  SimParams p = SimParams::desk_defaults();
  p.rice_factor = 1e18;
  p.set_default_weights();
  const Scenario s = generate_scenario(p, 4, GeometrySpec::desk_defaults());
  const ChannelBlock b = draw_block(s, 0);
  for (int l = 0; l < p.num_uavs; ++l)
    for (int k = 0; k < p.num_users; ++k)
      for (int m = 0; m < p.uav_antennas; ++m)
        CHECK(std::abs(std::abs(b.g_data[l][k](m)) - 1.0) < 1e-6);
}

TEST_CASE("blocks are deterministic per seed and distinct across seeds") {
  const Scenario s = small_scenario();
  const ChannelBlock a = draw_block(s, 1);
  const ChannelBlock b = draw_block(s, 1);
  const ChannelBlock c = draw_block(s, 2);
  CHECK(a.g_data[0][0] == b.g_data[0][0]);
  CHECK(a.g_fh_tx[0] == b.g_fh_tx[0]);
  CHECK(a.g_data[0][0] != c.g_data[0][0]);
}

TEST_CASE("data channel applies the path loss amplitude") {
  const Scenario s = small_scenario();
  const SimParams& p = s.params;
  const ChannelBlock b = draw_block(s, 1);

  SUBCASE("unit path loss returns the fading vector exactly") {
    // choose d so A * d^-alpha = 1: d = A^(1/alpha)
    const double d = std::pow(p.antenna_gain_data, 1.0 / p.pathloss_exponent_data);
    const Vec3 user(0, 0, 0), uav(0, 0, d);
    const LinkGain g = data_channel(b, 0, 0, uav, user, p);
    CHECK((g.h - b.g_data[0][0]).norm() <= 1e-12 * b.g_data[0][0].norm());
  }

  SUBCASE("doubling the distance with alpha=2 quarters the squared norm") {
    SimParams p2 = p;
    p2.pathloss_exponent_data = 2.0;
    const Vec3 user(0, 0, 0);
    const LinkGain g1 = data_channel(b, 0, 0, Vec3(0, 0, 100), user, p2);
    const LinkGain g2 = data_channel(b, 0, 0, Vec3(0, 0, 200), user, p2);
    CHECK(g2.h.squaredNorm() == doctest::Approx(g1.h.squaredNorm() / 4.0).epsilon(1e-12));
  }

  SUBCASE("euclidean distance matches the scalar oracle") {
    const Vec3 uav(0, 0, 100), user(300, 400, 0);
    const LinkGain g = data_channel(b, 0, 0, uav, user, p);
    const double expect = std::sqrt(300.0 * 300.0 + 400.0 * 400.0 + 100.0 * 100.0);
    CHECK(g.distance_m == doctest::Approx(expect).epsilon(1e-12));
    CHECK(g.distance_m == doctest::Approx(509.90195135927845).epsilon(1e-12));
  }

  SUBCASE("zero distance is a singularity error") {
    const Vec3 pos(1, 2, 3);
    CHECK_THROWS_AS(data_channel(b, 0, 0, pos, pos, p), SingularityError);
  }
}

TEST_CASE("fronthaul channel is a rank-1 outer product") {
  const Scenario s = small_scenario();
  const SimParams& p = s.params;
  const ChannelBlock b = draw_block(s, 7);
  const Vec3 uav(50, -20, 80);
  const FronthaulGain f = fronthaul_channel(b, 1, uav, s.geometry.bs_position, p);

  Eigen::JacobiSVD<MatC> svd(f.H);
  const auto& sv = svd.singularValues();
  CHECK(sv(1) <= 1e-12 * sv(0));

  // Frobenius norm oracle
  const double d = f.distance_m;
  const double expect = p.antenna_gain_fh * std::pow(d, -p.pathloss_exponent_fh) *
                        b.g_fh_tx[1].squaredNorm() * b.g_fh_rx[1].squaredNorm();
  CHECK(f.H.squaredNorm() == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("fronthaul at 1 m with unit gain") {
  SimParams p = SimParams::desk_defaults();
  p.antenna_gain_fh = 1.0;
  p.set_default_weights();
  const Scenario s = generate_scenario(p, 9, GeometrySpec::desk_defaults());
  const ChannelBlock b = draw_block(s, 0);
  const Vec3 bs(0, 0, 0), uav(0, 0, 1);
  const FronthaulGain f = fronthaul_channel(b, 0, uav, bs, p);
  CHECK(f.H.norm() ==
        doctest::Approx(b.g_fh_tx[0].norm() * b.g_fh_rx[0].norm()).epsilon(1e-12));
}

TEST_CASE("pathloss scaling property over random distances") {
  const Scenario s = small_scenario();
  const SimParams& p = s.params;
  const ChannelBlock b = draw_block(s, 3);
  Rng rng(77);
  for (int i = 0; i < 50; ++i) {
    const double d = rng.uniform(10.0, 500.0);
    const double c = rng.uniform(1.1, 5.0);
    const Vec3 user(0, 0, 0);
    const LinkGain g1 = data_channel(b, 0, 0, Vec3(0, 0, d), user, p);
    const LinkGain g2 = data_channel(b, 0, 0, Vec3(0, 0, c * d), user, p);
    const double ratio = g2.h.squaredNorm() / g1.h.squaredNorm();
    CHECK(ratio == doctest::Approx(std::pow(c, -p.pathloss_exponent_data)).epsilon(1e-9));
  }
}
