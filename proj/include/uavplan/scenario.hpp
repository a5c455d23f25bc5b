// Experiment scenarios: physical parameters, geometry, seeded generation and
// a human-readable on-disk format.
#pragma once

#include <string>
#include <vector>

#include "uavplan/types.hpp"

namespace uavplan {

// Physical / system parameters. Powers in W, distances in m, rates in bit/s.
struct SimParams {
  double bandwidth_hz = 2e6;
  double slot_duration_s = 0.2;
  int num_slots = 50;    // T
  int num_blocks = 30;   // B
  int num_uavs = 4;      // L
  int num_users = 4;     // K
  int bs_antennas = 12;  // N
  int uav_antennas = 2;  // M
  double p_bs_max = dbm_to_watt(46.0);
  double p_uav_max = dbm_to_watt(40.0);
  double nav_c1 = dbm_to_watt(0.0);   // hover power, W
  double nav_c2 = dbm_to_watt(20.0);  // movement power, W per m
  double noise_psd = dbm_to_watt(-174.0);  // W/Hz
  double max_speed = 10.0;                 // m/s
  double r_min_bps = 0.8e6;                // per-user minimum rate, bit/s
  double d_min = 10.0;                     // UAV separation, m
  double rice_factor = db_to_linear(-3.0);
  double pathloss_exponent_data = 2.5;  // UAV-to-user
  double pathloss_exponent_fh = 2.0;    // BS-to-UAV
  double antenna_gain_data = 1e-3;      // linear, at 1 m reference
  double antenna_gain_fh = 1e-3;
  double beta = 0.0;    // binary-relaxation sharpness; 0 selects 1e4/p_uav_max
  VecX weights;         // size L+1: [0] ground BS, [1..L] UAVs; sums to 1

  double d_max() const { return max_speed * slot_duration_s; }
  double noise_power_w() const { return noise_psd * bandwidth_hz; }
  double r_min_bpshz() const { return r_min_bps / bandwidth_hz; }
  double beta_effective() const { return beta > 0.0 ? beta : 1e4 / p_uav_max; }
  double weight_bs() const { return weights(0); }
  double weight_uav(int l) const { return weights(l + 1); }

  // equal weights 1/(L+1)
  void set_default_weights();

  // throws ParameterError listing every violated invariant
  void validate() const;

  // Full-size configuration used in the reference experiments.
  static SimParams paper_defaults();
  // Small configuration for fast runs: L=3, K=2, T=4, B=3, N=6, M=2,
  // 1 s slots (d_max = 10 m).
  static SimParams desk_defaults();
};

// Sampling region for generated scenarios. Users live on a ground annulus,
// UAVs in a cylinder of radius ring_outer above it.
struct GeometrySpec {
  double ring_inner = 500.0;
  double ring_outer = 1000.0;
  double height_min = 50.0;
  double height_max = 100.0;
  double bs_height = 25.0;
  double user_height = 0.0;

  // Compact region for desk-scale runs (keeps fixed-trajectory schemes within
  // the per-slot speed cap at small B*T).
  static GeometrySpec desk_defaults();
};

struct Geometry {
  Vec3 bs_position = Vec3::Zero();
  std::vector<Vec3> user_positions;
  std::vector<Vec3> uav_start_positions;
  Vec3 nav_min = Vec3::Zero();
  Vec3 nav_max = Vec3::Zero();
  double ring_inner = 0.0;
  double ring_outer = 0.0;
  double height_min = 0.0;
  double height_max = 0.0;
};

struct Scenario {
  SimParams params;
  Geometry geometry;
  std::uint64_t seed = 0;

  void validate() const;  // params + geometry invariants
};

// Deterministic in (params, spec, seed). Users uniform in the annulus at user
// height; UAV starts uniform in the cylinder, resampled until pairwise
// separation >= d_min (throws PlacementError after bounded retries).
Scenario generate_scenario(const SimParams& params, std::uint64_t seed,
                           const GeometrySpec& spec = GeometrySpec{});

void save_scenario(const Scenario& s, const std::string& path);
Scenario load_scenario(const std::string& path);

bool operator==(const Geometry& a, const Geometry& b);
bool operator==(const SimParams& a, const SimParams& b);
bool operator==(const Scenario& a, const Scenario& b);

}  // namespace uavplan
