#include "uavplan/model.hpp"

#include <cmath>
#include <sstream>

namespace uavplan {

Plan Plan::zero(const Scenario& s) {
  const SimParams& p = s.params;
  Plan plan;
  plan.w_data.assign(p.num_uavs, std::vector<MatC>(p.num_users, MatC::Zero(p.uav_antennas, p.num_slots)));
  plan.w_fh.assign(p.num_uavs, MatC::Zero(p.bs_antennas, p.num_slots));
  plan.trajectory.assign(p.num_uavs, MatX::Zero(3, p.num_slots + 1));
  for (int l = 0; l < p.num_uavs; ++l)
    plan.trajectory[l] = s.geometry.uav_start_positions[l].replicate(1, p.num_slots + 1);
  plan.q = Eigen::MatrixXi::Zero(p.num_uavs, p.num_users);
  plan.slacks.resize(p.num_uavs, p.num_users, p.num_slots);
  return plan;
}

QosSpec QosSpec::from_rates(const VecX& r) {
  QosSpec q;
  q.r_min_bpshz = r;
  q.gamma_min.resize(r.size());
  for (int k = 0; k < r.size(); ++k) q.gamma_min(k) = std::exp2(2.0 * r(k)) - 1.0;
  return q;
}

QosSpec QosSpec::from_scenario(const Scenario& s) {
  return from_rates(VecX::Constant(s.params.num_users, s.params.r_min_bpshz()));
}

void QosSpec::validate() const {
  if (gamma_min.size() != r_min_bpshz.size())
    throw ParameterError("QosSpec: size mismatch between gamma_min and r_min_bpshz");
  for (int k = 0; k < gamma_min.size(); ++k) {
    const double expect = std::exp2(2.0 * r_min_bpshz(k)) - 1.0;
    if (std::abs(gamma_min(k) - expect) > 1e-9 * std::max(1.0, expect))
      throw ParameterError("QosSpec: gamma_min inconsistent with r_min at user " + std::to_string(k));
  }
}

SlotDistances distances(const Plan& plan, const Scenario& s, int slot) {
  const SimParams& p = s.params;
  SlotDistances out;
  out.data.resize(p.num_uavs, p.num_users);
  out.fh.resize(p.num_uavs);
  for (int l = 0; l < p.num_uavs; ++l) {
    const Vec3 pos = plan.trajectory[l].col(slot + 1);
    for (int k = 0; k < p.num_users; ++k)
      out.data(l, k) = (pos - s.geometry.user_positions[k]).norm();
    out.fh(l) = (pos - s.geometry.bs_position).norm();
  }
  return out;
}

double sinr_data(const Plan& plan, const ChannelBlock& block, const Scenario& s, int k, int slot) {
  const SimParams& p = s.params;
  const double sigma2 = p.noise_power_w();
  const SlotDistances d = distances(plan, s, slot);
  double signal = 0.0, interference = 0.0;
  for (int l = 0; l < p.num_uavs; ++l) {
    const double gain =
        p.antenna_gain_data * std::pow(d.data(l, k), -p.pathloss_exponent_data);
    const VecC& g = block.g_data[l][k];
    for (int j = 0; j < p.num_users; ++j) {
      const double rx = gain * std::norm(g.dot(plan.w_data[l][j].col(slot)));
      if (j == k)
        signal += rx;
      else
        interference += rx;
    }
  }
  return signal / (sigma2 + interference);
}

double sinr_fronthaul(const Plan& plan, const ChannelBlock& block, const Scenario& s, int l,
                      int slot) {
  const SimParams& p = s.params;
  const double sigma2 = p.noise_power_w();
  const SlotDistances d = distances(plan, s, slot);
  const double gain = p.antenna_gain_fh * std::pow(d.fh(l), -p.pathloss_exponent_fh);
  // ||G^H w||^2 with G = g_tx g_rx^H reduces to ||g_rx||^2 |g_tx^H w|^2
  const double rx_norm2 = block.g_fh_rx[l].squaredNorm();
  double signal = 0.0, interference = 0.0;
  for (int j = 0; j < p.num_uavs; ++j) {
    const double rx = gain * rx_norm2 * std::norm(block.g_fh_tx[l].dot(plan.w_fh[j].col(slot)));
    if (j == l)
      signal += rx;
    else
      interference += rx;
  }
  return signal / (sigma2 + interference);
}

double rate(double gamma) { return 0.5 * std::log2(1.0 + gamma); }

double nav_power(const Plan& plan, const Scenario& s, int l, int slot) {
  const double step =
      (plan.trajectory[l].col(slot + 1) - plan.trajectory[l].col(slot)).norm();
  return s.params.nav_c1 + s.params.nav_c2 * step;
}

PowerReport objective(const Plan& plan, const Scenario& s) {
  const SimParams& p = s.params;
  PowerReport rep;
  rep.per_slot_bs = VecX::Zero(p.num_slots);
  rep.per_slot_uav_tx = MatX::Zero(p.num_uavs, p.num_slots);
  rep.per_slot_uav_nav = MatX::Zero(p.num_uavs, p.num_slots);
  for (int t = 0; t < p.num_slots; ++t) {
    for (int l = 0; l < p.num_uavs; ++l) {
      rep.per_slot_bs(t) += plan.w_fh[l].col(t).squaredNorm();
      double tx = 0.0;
      for (int k = 0; k < p.num_users; ++k) tx += plan.w_data[l][k].col(t).squaredNorm();
      rep.per_slot_uav_tx(l, t) = tx;
      rep.per_slot_uav_nav(l, t) = nav_power(plan, s, l, t);
    }
  }
  rep.weighted_total = 0.0;
  for (int t = 0; t < p.num_slots; ++t) {
    double ft = p.weight_bs() * rep.per_slot_bs(t);
    for (int l = 0; l < p.num_uavs; ++l)
      ft += p.weight_uav(l) * (rep.per_slot_uav_tx(l, t) + rep.per_slot_uav_nav(l, t));
    rep.weighted_total += ft;
  }
  rep.bs_total = rep.per_slot_bs.sum();
  rep.per_uav_avg =
      (rep.per_slot_uav_tx.sum() + rep.per_slot_uav_nav.sum()) / (p.num_uavs * p.num_slots);
  return rep;
}

double fronthaul_sinr_target(const Eigen::MatrixXi& q, const QosSpec& qos, int l) {
  double rate_sum = 0.0;
  for (int k = 0; k < q.cols(); ++k)
    if (q(l, k)) rate_sum += qos.r_min_bpshz(k);
  return std::exp2(rate_sum) - 1.0;
}

bool ConstraintReport::satisfied() const {
  for (const auto& [id, item] : by_constraint)
    if (item.worst > tol) return false;
  return true;
}

std::string ConstraintReport::summary() const {
  std::ostringstream os;
  for (const auto& [id, item] : by_constraint) {
    os << id << ": worst " << item.worst;
    if (!item.violators.empty()) os << " at " << item.violators.front();
    os << (item.worst > tol ? " VIOLATED" : " ok") << "\n";
  }
  return os.str();
}

namespace {

void record(ConstraintReport& rep, const std::string& id, double violation,
            const std::string& where) {
  auto& item = rep.by_constraint[id];
  if (violation > item.worst) item.worst = violation;
  if (violation > rep.tol) item.violators.push_back(where);
}

std::string idx(std::initializer_list<int> ids) {
  std::string out = "(";
  bool first = true;
  for (int i : ids) {
    if (!first) out += ",";
    out += std::to_string(i);
    first = false;
  }
  return out + ")";
}

}  // namespace

ConstraintReport check_constraints(const Plan& plan, const ChannelBlock& block, const Scenario& s,
                                   const QosSpec& qos, double tol) {
  const SimParams& p = s.params;
  ConstraintReport rep;
  rep.tol = tol;
  for (const char* id : {"C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9"})
    rep.by_constraint[id];

  for (int t = 0; t < p.num_slots; ++t) {
    double bs_power = 0.0;
    for (int l = 0; l < p.num_uavs; ++l) bs_power += plan.w_fh[l].col(t).squaredNorm();
    record(rep, "C1", bs_power - p.p_bs_max, idx({t}));

    for (int l = 0; l < p.num_uavs; ++l) {
      double tx = 0.0;
      for (int k = 0; k < p.num_users; ++k) tx += plan.w_data[l][k].col(t).squaredNorm();
      record(rep, "C2", tx + nav_power(plan, s, l, t) - p.p_uav_max, idx({l, t}));

      const double step =
          (plan.trajectory[l].col(t + 1) - plan.trajectory[l].col(t)).norm();
      record(rep, "C7", step - p.d_max(), idx({l, t}));

      const Vec3 pos = plan.trajectory[l].col(t + 1);
      double box = 0.0;
      for (int c = 0; c < 3; ++c)
        box = std::max({box, s.geometry.nav_min(c) - pos(c), pos(c) - s.geometry.nav_max(c)});
      record(rep, "C9", box, idx({l, t}));

      for (int j = l + 1; j < p.num_uavs; ++j) {
        const double sep = (pos - Vec3(plan.trajectory[j].col(t + 1))).norm();
        record(rep, "C8", p.d_min - sep, idx({l, j, t}));
      }
    }

    for (int k = 0; k < p.num_users; ++k) {
      const double gamma = sinr_data(plan, block, s, k, t);
      const double target = qos.gamma_min(k);
      record(rep, "C5", (target - gamma) / std::max(target, 1e-300), idx({k, t}));
    }
    for (int l = 0; l < p.num_uavs; ++l) {
      const double gamma = sinr_fronthaul(plan, block, s, l, t);
      const double target = fronthaul_sinr_target(plan.q, qos, l);
      record(rep, "C6", (target - gamma) / std::max(target, 1.0), idx({l, t}));
    }
  }

  for (int l = 0; l < p.num_uavs; ++l) {
    for (int k = 0; k < p.num_users; ++k) {
      const int q = plan.q(l, k);
      record(rep, "C3", q == 0 || q == 1 ? 0.0 : 1.0, idx({l, k}));
      double max_power = 0.0;
      for (int t = 0; t < p.num_slots; ++t)
        max_power = std::max(max_power, plan.w_data[l][k].col(t).squaredNorm());
      record(rep, "C4", max_power - p.p_uav_max * q, idx({l, k}));
    }
  }
  return rep;
}

}  // namespace uavplan
