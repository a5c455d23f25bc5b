#include "uavplan/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uavplan::baselines {

std::string baseline_name(BaselineId id) {
  switch (id) {
    case BaselineId::CoordinatedBeamforming: return "coordinated_beamforming";
    case BaselineId::FixedCooperation: return "fixed_cooperation";
    case BaselineId::Hovering: return "hovering";
    case BaselineId::FixedTrajectory: return "fixed_trajectory";
  }
  return "?";
}

BaselineId baseline_from_name(const std::string& name) {
  for (BaselineId id : {BaselineId::CoordinatedBeamforming, BaselineId::FixedCooperation,
                        BaselineId::Hovering, BaselineId::FixedTrajectory})
    if (baseline_name(id) == name) return id;
  throw ParameterError("unknown baseline scheme '" + name + "'");
}

Eigen::MatrixXi baseline1_assignment(const Scenario& s, std::uint64_t seed) {
  const SimParams& p = s.params;
  const int cap = std::min(p.uav_antennas, p.num_users);
  if (p.num_users > p.num_uavs * cap)
    throw AssignmentError("coordinated beamforming infeasible: users exceed total capacity");
  Rng rng(mix64(seed, 0xB1ull));
  Eigen::MatrixXi q = Eigen::MatrixXi::Zero(p.num_uavs, p.num_users);
  std::vector<int> load(p.num_uavs, 0);
  for (int k = 0; k < p.num_users; ++k) {
    std::vector<int> open;
    for (int l = 0; l < p.num_uavs; ++l)
      if (load[l] < cap) open.push_back(l);
    const int pick = open[static_cast<int>(rng.uniform01() * open.size()) % open.size()];
    q(pick, k) = 1;
    ++load[pick];
  }
  return q;
}

Eigen::MatrixXi baseline2_assignment(const Scenario& s, std::uint64_t seed) {
  const SimParams& p = s.params;
  const int L = p.num_uavs, K = p.num_users;
  const int quota = std::min(p.uav_antennas, K);
  Rng rng(mix64(seed, 0xB2ull));
  Eigen::MatrixXi q = Eigen::MatrixXi::Zero(L, K);
  // coverage first: every user gets one UAV with remaining quota
  std::vector<int> load(L, 0);
  for (int k = 0; k < K; ++k) {
    std::vector<int> open;
    for (int l = 0; l < L; ++l)
      if (load[l] < quota) open.push_back(l);
    if (open.empty())
      throw AssignmentError("fixed cooperation infeasible: quotas filled before coverage");
    const int pick = open[static_cast<int>(rng.uniform01() * open.size()) % open.size()];
    q(pick, k) = 1;
    ++load[pick];
  }
  // fill every row to exactly the quota with distinct users
  for (int l = 0; l < L; ++l) {
    while (load[l] < quota) {
      std::vector<int> open;
      for (int k = 0; k < K; ++k)
        if (!q(l, k)) open.push_back(k);
      const int pick = open[static_cast<int>(rng.uniform01() * open.size()) % open.size()];
      q(l, pick) = 1;
      ++load[l];
    }
  }
  return q;
}

std::vector<MatX> baseline4_trajectory(const Scenario& s) {
  const SimParams& p = s.params;
  const int total_slots = p.num_blocks * p.num_slots;
  std::vector<MatX> path(p.num_uavs);
  for (int l = 0; l < p.num_uavs; ++l) {
    const Vec3 start = s.geometry.uav_start_positions[l];
    const double radial = std::hypot(start.x(), start.y());
    Vec3 target = start;
    if (radial < 1e-9) {
      target.x() = s.geometry.ring_outer;  // center start: any radial direction
    } else {
      const double f = s.geometry.ring_outer / radial;
      target.x() = start.x() * f;
      target.y() = start.y() * f;
    }
    const double dist = (target - start).norm();
    const double step = dist / total_slots;
    if (step > p.d_max() + 1e-12)
      throw ParameterError("fixed trajectory needs per-slot step " + std::to_string(step) +
                           " m, above the bound " + std::to_string(p.d_max()) + " m");
    path[l].resize(3, total_slots + 1);
    for (int t = 0; t <= total_slots; ++t)
      path[l].col(t) = dist < 1e-12
                           ? start
                           : Vec3(start + (target - start) * (static_cast<double>(t) / total_slots));
  }
  return path;
}

ccp::RunResult run_baseline(BaselineId id, const Scenario& s, const ChannelBlock& block,
                            const QosSpec& qos, const ccp::CcpSettings& settings,
                            std::uint64_t assign_seed, int block_index) {
  const SimParams& p = s.params;
  dcp::FreezeSpec freeze;
  Scenario run_scenario = s;
  switch (id) {
    case BaselineId::CoordinatedBeamforming:
      freeze.coop = baseline1_assignment(s, assign_seed);
      break;
    case BaselineId::FixedCooperation:
      freeze.coop = baseline2_assignment(s, assign_seed);
      break;
    case BaselineId::Hovering: {
      std::vector<MatX> hover(p.num_uavs);
      for (int l = 0; l < p.num_uavs; ++l)
        hover[l] = s.geometry.uav_start_positions[l].replicate(1, p.num_slots + 1);
      freeze.trajectory = std::move(hover);
      break;
    }
    case BaselineId::FixedTrajectory: {
      const std::vector<MatX> path = baseline4_trajectory(s);
      std::vector<MatX> segment(p.num_uavs);
      for (int l = 0; l < p.num_uavs; ++l) {
        segment[l] = path[l].middleCols(block_index * p.num_slots, p.num_slots + 1);
        run_scenario.geometry.uav_start_positions[l] = segment[l].col(0);
      }
      freeze.trajectory = std::move(segment);
      break;
    }
  }
  return ccp::run(run_scenario, block, qos, settings, freeze);
}

}  // namespace uavplan::baselines
