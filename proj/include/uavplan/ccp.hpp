// Iterative convex-concave driver: initialize from the relaxation, repeat
// linearize-and-solve with monotone descent, stop on small decrease, then
// extract binary cooperation flags and polish the beamformers.
#pragma once

#include <string>
#include <vector>

#include "uavplan/dcp.hpp"
#include "uavplan/sdr.hpp"

namespace uavplan::ccp {

struct CcpSettings {
  double epsilon = -1.0;      // absolute decrease tolerance (W); <= 0 selects
                              // 1e-3 * initial objective
  int max_iters = 50;
  double beta = 0.0;          // 0 selects the scenario default
  double q_threshold = -1.0;  // cooperation power threshold (W); <= 0 selects
                              // 1e-9 * p_uav_max
  bool polish = true;
  dcp::PathlossConeMode cone_mode = dcp::PathlossConeMode::Auto;
  cone::SolveSettings solver;
  sdr::InitConfig init;
};

struct CcpTraceRow {
  int iter = 0;               // 0 is the starting point
  double objective_w = 0.0;
  double max_dc_violation = 0.0;
  std::string status;
  double seconds = 0.0;
};

struct CcpTrace {
  std::vector<CcpTraceRow> rows;
  bool converged = false;
  std::string message;
};

std::string trace_to_csv(const CcpTrace& trace);

struct RunResult {
  Plan plan;
  CcpTrace trace;
  bool polished = false;
  bool polish_fallback = false;  // polish infeasible, raw iterate returned
  double beta_used = 0.0;
  sdr::InitResult init;
};

// Algorithm driver for one channel block. Propagates InitializationError;
// solver failures mid-run return the best iterate with converged = false.
RunResult run(const Scenario& s, const ChannelBlock& block, const QosSpec& qos,
              const CcpSettings& settings, const dcp::FreezeSpec& freeze = {});

// q_{l,k} = 1 iff max_t ||w_{l,k,t}||^2 > threshold; sub-threshold beams are
// zeroed in the returned plan.
Plan extract_coop(const Plan& plan, double q_threshold);

struct PolishResult {
  Plan plan;
  bool fallback = false;
};

// Re-solves the per-slot relaxation with the trajectory and binary
// cooperation fixed, restoring exact QoS feasibility. Falls back to the
// input plan when any slot is infeasible.
PolishResult polish(const Plan& plan, const Scenario& s, const ChannelBlock& block,
                    const QosSpec& qos, const CcpSettings& settings);

}  // namespace uavplan::ccp
