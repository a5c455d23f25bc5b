// Decision state and physical evaluations: distances, SINRs, rates,
// navigation power, the weighted power objective, and the feasibility
// checker for the transmit/navigation constraint set C1..C9.
//
// Slot indexing convention: arrays over slots are 0-based with slot s
// using trajectory position index s+1; index 0 is the block start position.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "uavplan/channel.hpp"
#include "uavplan/scenario.hpp"
#include "uavplan/slack_vars.hpp"
#include "uavplan/types.hpp"

namespace uavplan {

struct Plan {
  // w_data[l][k] is M x T (column per slot); w_fh[l] is N x T
  std::vector<std::vector<MatC>> w_data;
  std::vector<MatC> w_fh;
  // trajectory[l] is 3 x (T+1); column 0 is the block start position
  std::vector<MatX> trajectory;
  Eigen::MatrixXi q;  // L x K cooperation flags in {0,1}
  dcp::SlackVars slacks;

  static Plan zero(const Scenario& s);  // zero beams, hover, q = 0
  int num_uavs() const { return static_cast<int>(w_fh.size()); }
  int num_users() const { return w_data.empty() ? 0 : static_cast<int>(w_data[0].size()); }
  int num_slots() const { return w_fh.empty() ? 0 : static_cast<int>(w_fh[0].cols()); }
};

struct PowerReport {
  VecX per_slot_bs;     // T, W
  MatX per_slot_uav_tx; // L x T, W
  MatX per_slot_uav_nav;// L x T, W
  double weighted_total = 0.0;  // sum over slots of the weighted per-slot power
  double per_uav_avg = 0.0;     // mean over (l, t) of tx + nav, W
  double bs_total = 0.0;        // sum over slots of BS power, W
};

struct QosSpec {
  VecX gamma_min;    // per user, linear SINR floor
  VecX r_min_bpshz;  // per user, bit/s/Hz

  // gamma = 2^(2 r) - 1 (the data link gets half of each slot)
  static QosSpec from_rates(const VecX& r_min_bpshz);
  static QosSpec from_scenario(const Scenario& s);
  void validate() const;  // consistency of the two forms
};

// Distances from the slot-s trajectory points: d_data(l,k) and d_fh(l).
struct SlotDistances {
  MatX data;  // L x K, m
  VecX fh;    // L, m
};
SlotDistances distances(const Plan& plan, const Scenario& s, int slot);

// Received data SINR of user k in slot s (linear).
double sinr_data(const Plan& plan, const ChannelBlock& block, const Scenario& s, int k, int slot);

// Fronthaul SINR of UAV l in slot s (linear).
double sinr_fronthaul(const Plan& plan, const ChannelBlock& block, const Scenario& s, int l,
                      int slot);

// Achievable rate for a given SINR, bit/s/Hz (half-slot time division).
double rate(double gamma);

// c1 + c2 * step length for UAV l in slot s.
double nav_power(const Plan& plan, const Scenario& s, int l, int slot);

PowerReport objective(const Plan& plan, const Scenario& s);

// Fronthaul SINR target of UAV l given cooperation q and per-user rates:
// 2^(sum_k q_{l,k} r_k) - 1.
double fronthaul_sinr_target(const Eigen::MatrixXi& q, const QosSpec& qos, int l);

struct ConstraintReport {
  struct Item {
    double worst = 0.0;  // most positive violation measure (<= 0: satisfied)
    std::vector<std::string> violators;  // indices with violation > tol
  };
  std::map<std::string, Item> by_constraint;  // keys C1..C9
  double tol = 0.0;

  bool satisfied() const;
  double worst(const std::string& id) const { return by_constraint.at(id).worst; }
  std::string summary() const;
};

// Evaluates C1..C9. Power, distance and box constraints use absolute slack
// (W or m); SINR constraints C5/C6 use slack relative to their target.
ConstraintReport check_constraints(const Plan& plan, const ChannelBlock& block, const Scenario& s,
                                   const QosSpec& qos, double tol);

}  // namespace uavplan
