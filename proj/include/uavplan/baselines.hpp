// Comparison schemes: the iterative driver with parts of the decision space
// frozen. Schemes 1/2 fix the cooperation pattern, schemes 3/4 fix the
// trajectories (hovering, or a straight horizontal run to the boundary).
#pragma once

#include <string>
#include <vector>

#include "uavplan/ccp.hpp"

namespace uavplan::baselines {

enum class BaselineId {
  CoordinatedBeamforming,  // each user served by one random UAV
  FixedCooperation,        // every UAV serves exactly min(M, K) users
  Hovering,                // trajectories pinned to the starts
  FixedTrajectory,         // straight horizontal run to the boundary over B*T
};

std::string baseline_name(BaselineId id);
BaselineId baseline_from_name(const std::string& name);

// Each user joins exactly one UAV, uniformly among those with remaining
// capacity min(M, K). Throws AssignmentError when K > L * min(M, K).
Eigen::MatrixXi baseline1_assignment(const Scenario& s, std::uint64_t seed);

// Every UAV serves exactly min(M, K) distinct users and every user is served
// at least once.
Eigen::MatrixXi baseline2_assignment(const Scenario& s, std::uint64_t seed);

// Full flight path over all blocks: 3 x (B*T + 1) per UAV, constant-speed
// horizontal ray from the start to the nearest point of the lateral
// cylinder boundary. Throws ParameterError if the required per-slot step
// exceeds d_max.
std::vector<MatX> baseline4_trajectory(const Scenario& s);

// Runs one baseline on one block. block_index selects the segment of the
// fixed-trajectory path; assign_seed fixes the random associations.
ccp::RunResult run_baseline(BaselineId id, const Scenario& s, const ChannelBlock& block,
                            const QosSpec& qos, const ccp::CcpSettings& settings,
                            std::uint64_t assign_seed, int block_index = 0);

}  // namespace uavplan::baselines
