#include "uavplan/channel.hpp"

#include <cmath>

namespace uavplan {

ChannelBlock draw_block(const Scenario& s, std::uint64_t block_seed) {
  const SimParams& p = s.params;
  Rng rng(mix64(s.seed, mix64(block_seed, 0x626C6F636Bull)));  // "block"

  ChannelBlock b;
  b.block_index = static_cast<int>(block_seed);
  const double kappa = p.rice_factor;
  const double los_mag = std::sqrt(kappa / (kappa + 1.0));
  const double scatter_var = 1.0 / (kappa + 1.0);

  b.g_data.assign(p.num_uavs, std::vector<VecC>(p.num_users));
  for (int l = 0; l < p.num_uavs; ++l) {
    for (int k = 0; k < p.num_users; ++k) {
      VecC g(p.uav_antennas);
      for (int m = 0; m < p.uav_antennas; ++m) {
        const double phi = rng.phase();
        g(m) = los_mag * Complex(std::cos(phi), std::sin(phi)) + rng.cnormal(scatter_var);
      }
      b.g_data[l][k] = std::move(g);
    }
  }
  b.g_fh_tx.resize(p.num_uavs);
  b.g_fh_rx.resize(p.num_uavs);
  for (int l = 0; l < p.num_uavs; ++l) {
    VecC tx(p.bs_antennas), rx(p.uav_antennas);
    for (int n = 0; n < p.bs_antennas; ++n) {
      const double phi = rng.phase();
      tx(n) = Complex(std::cos(phi), std::sin(phi));
    }
    for (int m = 0; m < p.uav_antennas; ++m) {
      const double phi = rng.phase();
      rx(m) = Complex(std::cos(phi), std::sin(phi));
    }
    b.g_fh_tx[l] = std::move(tx);
    b.g_fh_rx[l] = std::move(rx);
  }
  return b;
}

LinkGain data_channel(const ChannelBlock& block, int l, int k, const Vec3& uav_pos,
                      const Vec3& user_pos, const SimParams& params) {
  const double d = (uav_pos - user_pos).norm();
  if (d <= 0.0) throw SingularityError("data_channel: zero distance between UAV and user");
  LinkGain out;
  out.distance_m = d;
  const double amp =
      std::sqrt(params.antenna_gain_data * std::pow(d, -params.pathloss_exponent_data));
  out.h = amp * block.g_data.at(l).at(k);
  return out;
}

FronthaulGain fronthaul_channel(const ChannelBlock& block, int l, const Vec3& uav_pos,
                                const Vec3& bs_pos, const SimParams& params) {
  const double d = (uav_pos - bs_pos).norm();
  if (d <= 0.0) throw SingularityError("fronthaul_channel: zero distance between UAV and BS");
  FronthaulGain out;
  out.distance_m = d;
  const double amp =
      std::sqrt(params.antenna_gain_fh * std::pow(d, -params.pathloss_exponent_fh));
  out.H = amp * block.g_fh_tx.at(l) * block.g_fh_rx.at(l).adjoint();
  return out;
}

}  // namespace uavplan
