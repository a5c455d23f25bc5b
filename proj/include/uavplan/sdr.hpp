// Feasible starting point construction: fix trajectories and cooperation,
// solve the per-slot semidefinite relaxation of the fixed-(d, q) power
// minimization (beamformer outer products with the rank constraint dropped),
// and extract rank-1 beamformers from its solution.
#pragma once

#include <string>
#include <vector>

#include "uavplan/solver.hpp"
#include "uavplan/dcp.hpp"
#include "uavplan/model.hpp"

namespace uavplan::sdr {

struct InitConfig {
  enum class TrajectoryMode { Hover };
  enum class CoopMode { NearestUav, FullCooperation };

  TrajectoryMode trajectory_mode = TrajectoryMode::Hover;
  CoopMode coop_mode = CoopMode::NearestUav;
  double rank1_tol = 1e-6;
  // fronthaul SINR assigned to UAVs that serve nobody; keeps their
  // quadratic-over-linear anchors strictly interior at negligible power
  double keepalive_sinr = 1e-6;
};

// Hover trajectories plus the configured cooperation pattern. NearestUav
// assigns each user to its closest UAV, capped at min(M, K) users per UAV
// with overflow spilling to the next closest; throws AssignmentError when
// K exceeds the total capacity.
std::pair<std::vector<MatX>, Eigen::MatrixXi> initial_trajectory_and_coop(const Scenario& s,
                                                                          const InitConfig& cfg);

// One per-slot relaxation. Variables are the Hermitian matrices W_F (one per
// UAV) and W_{l,k} for every active cooperation pair; the layout records
// where each matrix lives in the variable vector.
struct SdpSlot {
  cone::ConeProgram program;
  struct MatrixVar {
    int l = -1, k = -1;  // k = -1 marks a fronthaul matrix
    int n = 0;           // complex order
    int x_base = 0;      // real part, lower triangle column-major, n(n+1)/2
    int y_base = 0;      // imag part, strict lower triangle, n(n-1)/2
    double scale = 1.0;
  };
  std::vector<MatrixVar> vars;
};

SdpSlot build_init_sdp(const std::vector<MatX>& d0, const Eigen::MatrixXi& q0,
                       const ChannelBlock& block, const Scenario& s, const QosSpec& qos, int t);

// Reads one Hermitian matrix out of a solver point.
MatC extract_matrix(const SdpSlot::MatrixVar& mv, const VecX& primal);

struct Rank1Extraction {
  VecC w;
  double eig_ratio = 0.0;  // second / largest eigenvalue
};

// Principal-eigenpair extraction w = sqrt(lambda_1) v_1. Throws
// Rank1ViolationError when lambda_2 / lambda_1 exceeds tol.
Rank1Extraction extract_rank1(const MatC& W, double tol);

// Tight slack construction for a fixed plan: tau_data = d^alpha / A,
// tau_fh = min_t achieved fronthaul SINR, tau_q = indicator at the
// max-power slot. Throws InitializationError (naming the constraint) if the
// result violates the reformulated constraint set beyond 1e-6.
dcp::SlackVars construct_slacks(const Plan& plan, const ChannelBlock& block, const Scenario& s,
                                const QosSpec& qos, double beta);

struct InitResult {
  Plan plan;                 // beams + hover/frozen trajectory + q + slacks
  Eigen::MatrixXi q0;
  double beta_used = 0.0;    // possibly softened so the indicator stays in range
  double max_eig_ratio = 0.0;
  int rank1_fallbacks = 0;   // Gaussian-rounding events (0 in the normal regime)
  bool used_full_coop_fallback = false;
  std::vector<cone::Status> slot_statuses;
};

// Full initialization: assignment (or the frozen one), per-slot relaxations,
// rank-1 extraction with feasibility rescaling, keep-alive fronthaul beams
// for idle UAVs, and tight slacks. Falls back from NearestUav to full
// cooperation if any slot is infeasible; throws InitializationError when
// both fail.
InitResult initialize(const Scenario& s, const ChannelBlock& block, const QosSpec& qos,
                      const InitConfig& cfg, const dcp::FreezeSpec& freeze = {},
                      double beta_request = 0.0);

}  // namespace uavplan::sdr
