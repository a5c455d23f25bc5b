// Block-fading small-scale channel draws and full link-gain evaluation.
//
// Data links are Rician: each entry is a unit-mean-power sum of a fixed-
// magnitude line-of-sight term with uniform random phase and a circular
// complex Gaussian scatter term. BS-to-UAV links are line-of-sight dominated
// and factor as a rank-1 outer product of unit-modulus phase vectors.
#pragma once

#include <vector>

#include "uavplan/scenario.hpp"
#include "uavplan/types.hpp"

namespace uavplan {

struct ChannelBlock {
  int block_index = 0;
  // g_data[l][k] in C^M, g_fh_tx[l] in C^N, g_fh_rx[l] in C^M
  std::vector<std::vector<VecC>> g_data;
  std::vector<VecC> g_fh_tx;
  std::vector<VecC> g_fh_rx;
};

struct LinkGain {
  VecC h;            // full data-link vector, length M
  double distance_m = 0.0;
};

struct FronthaulGain {
  MatC H;            // full N x M fronthaul matrix (numerically rank 1)
  double distance_m = 0.0;
};

// Deterministic in (s.seed, block_seed).
ChannelBlock draw_block(const Scenario& s, std::uint64_t block_seed);

// h = sqrt(A * d^-alpha) * g_{l,k}. Throws SingularityError for coincident
// positions.
LinkGain data_channel(const ChannelBlock& block, int l, int k, const Vec3& uav_pos,
                      const Vec3& user_pos, const SimParams& params);

// H = sqrt(A_F * d^-alpha_F) * g_tx * g_rx^H.
FronthaulGain fronthaul_channel(const ChannelBlock& block, int l, const Vec3& uav_pos,
                                const Vec3& bs_pos, const SimParams& params);

}  // namespace uavplan
