#pragma once

#include <vector>

#include "uavplan/types.hpp"

namespace uavplan::dcp {

// Auxiliary variables of the reformulated QoS constraints. tau_data bounds
// the inverse path gain per link and slot, tau_fh lower-bounds a UAV's
// fronthaul SINR over the whole block, and tau_q in [0,1) dominates the
// smooth cooperation indicator per link.
struct SlackVars {
  std::vector<MatX> tau_data;  // [l] is K x T, > 0 (units m^alpha / gain)
  VecX tau_fh;                 // length L, > 0 (linear SINR)
  MatX tau_q;                  // L x K, in [0,1)

  void resize(int L, int K, int T) {
    tau_data.assign(L, MatX::Zero(K, T));
    tau_fh = VecX::Zero(L);
    tau_q = MatX::Zero(L, K);
  }
  bool empty() const { return tau_data.empty(); }
};

}  // namespace uavplan::dcp
