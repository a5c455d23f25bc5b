// Difference-of-convex reformulation of the joint planning problem and the
// per-iteration convex subproblem.
//
// The binary cooperation flags are replaced by the smooth indicator
// Q(beta, w) = 1 - exp(-beta ||w||^2); the SINR constraints are decoupled by
// slack variables (tau_data for inverse path gain, tau_fh for the per-UAV
// fronthaul SINR floor, tau_q dominating the indicator); the concave sides
// are linearized at the previous iterate (quadratic-over-linear terms via
// their affine lower bound, -ln(1-tau_q) and the separation norm by
// tangents), leaving a conic program over second-order, rotated, power and
// exponential cones.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uavplan/cone.hpp"
#include "uavplan/model.hpp"

namespace uavplan::dcp {

// 1 - exp(-beta ||w||^2)
double coop_indicator(double beta, const VecC& w);
double coop_indicator_from_power(double beta, double w_norm2);

// Affine lower bound of f(w, tau) = ||G^H w||^2 / tau anchored at (w0, tau0):
//   bound(w, tau) = Re(grad_w^H w) + coef_tau * tau
// with grad_w = (2/tau0) G G^H w0 and coef_tau = -||G^H w0||^2 / tau0^2.
// The bound equals f at the anchor and minorizes f on tau > 0.
struct QolBound {
  VecC grad_w;
  double coef_tau = 0.0;
  double anchor_value = 0.0;

  double value_at(const VecC& w, double tau) const {
    return grad_w.dot(w).real() + coef_tau * tau;
  }
};
QolBound lemma1_bound(const MatC& G, const VecC& w0, double tau0);

struct DcViolations {
  // normalized violation (f1 - f2) / max(1, |f1|, |f2|); <= 0 is satisfied
  std::map<std::string, double> worst;   // keys C1,C2,C5a,C5b,C6a,C6b,C6c,C7,C8,C9
  double max_violation = 0.0;
  std::string worst_id;
};

// Fixed constraint catalog of the reformulated problem for one channel block.
struct DcConstraintSet {
  const Scenario* scenario = nullptr;
  const ChannelBlock* block = nullptr;
  QosSpec qos;
  double beta = 0.0;
  double sigma2 = 0.0;
  VecX gamma_coef;  // per user, 1 + 1/gamma_min

  int count(const std::string& id) const;  // DC family sizes: C5a,C6a,C6c,C8
  DcViolations evaluate(const Plan& plan) const;
};

DcConstraintSet build_dc_set(const Scenario& s, const ChannelBlock& block, const QosSpec& qos);

enum class PathlossConeMode {
  Auto,            // rotated second-order cone when the exponent is 2
  ForcePowerCone,  // always the three-point power cone
};

struct FreezeSpec {
  std::optional<Eigen::MatrixXi> coop;          // fix q; drops tau_q and its coupling
  std::optional<std::vector<MatX>> trajectory;  // fix d; drops position variables
};

struct AssembleOptions {
  PathlossConeMode cone_mode = PathlossConeMode::Auto;
  FreezeSpec freeze;
  double tau_q_cap = 1.0 - 1e-6;  // keeps the -ln(1-tau_q) tangent bounded
};

// Index map from solver coordinates back to plan fields; -1 marks frozen or
// structurally absent entries. Beamformer entries are stored re/im stacked.
class VariableLayout {
 public:
  int num_vars = 0;
  int L = 0, K = 0, T = 0, M = 0, N = 0;
  bool traj_frozen = false, q_frozen = false;

  int w_data(int l, int k, int t) const { return w_data_[(l * K + k) * T + t]; }
  int w_fh(int l, int t) const { return w_fh_[l * T + t]; }
  int pos(int l, int t) const { return pos_[l * T + t]; }  // t = 0..T-1 for slot positions
  int tau_data(int l, int k, int t) const { return tau_data_[(l * K + k) * T + t]; }
  int tau_fh(int l) const { return tau_fh_[l]; }
  int tau_q(int l, int k) const { return tau_q_[l * K + k]; }
  int p_data(int l, int k, int t) const { return p_data_[(l * K + k) * T + t]; }
  int p_fh(int l, int t) const { return p_fh_[l * T + t]; }
  int m_nav(int l, int t) const { return m_nav_[l * T + t]; }
  int s_dist(int l, int k, int t) const { return s_dist_[(l * K + k) * T + t]; }
  int s_fh(int l, int t) const { return s_fh_[l * T + t]; }
  int u_fh(int l, int t) const { return u_fh_[l * T + t]; }
  // receiver k's epigraph for the stream UAV l sends to user j
  int r_int(int l, int j, int k, int t) const {
    return r_int_[((static_cast<std::size_t>(l) * K + j) * K + k) * T + t];
  }
  int r_fh(int l, int j, int t) const {
    return r_fh_[(static_cast<std::size_t>(l) * L + j) * T + t];
  }

  std::vector<int> w_data_, w_fh_, pos_, tau_data_, tau_fh_, tau_q_, p_data_, p_fh_, m_nav_,
      s_dist_, s_fh_, u_fh_, r_int_, r_fh_;
};

struct Subproblem {
  cone::ConeProgram program;
  VariableLayout layout;
  VecX var_scale;  // physical value = scale * solver coordinate
};

// Builds the convex subproblem anchored at x_prev. Throws LinearizationError
// for non-positive anchor slacks. Coincident UAV positions are handled by a
// deterministic perturbation of the separation tangent.
Subproblem assemble_subproblem(const Plan& x_prev, const DcConstraintSet& dc, const Scenario& s,
                               const AssembleOptions& opt = AssembleOptions{});

// Maps a solver point back to a Plan (frozen fields copied from x_prev).
Plan plan_from_solution(const Subproblem& sp, const VecX& primal, const Plan& x_prev,
                        const Scenario& s);

// Embeds a plan into solver coordinates with tight auxiliary values; used to
// check that the anchor remains feasible for the assembled subproblem.
VecX embed_plan(const Subproblem& sp, const Plan& plan, const DcConstraintSet& dc);

}  // namespace uavplan::dcp
