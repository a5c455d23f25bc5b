#include "uavplan/dcp.hpp"

#include <algorithm>
#include <cmath>

namespace uavplan::dcp {

using cone::Kind;
using cone::LinExpr;

double coop_indicator_from_power(double beta, double w_norm2) {
  return -std::expm1(-beta * w_norm2);
}

double coop_indicator(double beta, const VecC& w) {
  return coop_indicator_from_power(beta, w.squaredNorm());
}

QolBound lemma1_bound(const MatC& G, const VecC& w0, double tau0) {
  if (!(tau0 > 0.0)) throw DomainError("lemma1_bound: anchor tau must be positive");
  QolBound b;
  const VecC Ghw0 = G.adjoint() * w0;
  b.anchor_value = Ghw0.squaredNorm() / tau0;
  b.grad_w = (2.0 / tau0) * (G * Ghw0);
  b.coef_tau = -Ghw0.squaredNorm() / (tau0 * tau0);
  return b;
}

int DcConstraintSet::count(const std::string& id) const {
  const SimParams& p = scenario->params;
  const int L = p.num_uavs, K = p.num_users, T = p.num_slots;
  if (id == "C5a") return K * T;
  if (id == "C5b") return L * K * T;
  if (id == "C6a") return L * T;
  if (id == "C6b") return L;
  if (id == "C6c") return L * K * T;
  if (id == "C8") return T * L * (L - 1) / 2;
  throw ParameterError("unknown DC constraint family " + id);
}

namespace {

double normalized(double f1, double f2) {
  return (f1 - f2) / std::max({1.0, std::abs(f1), std::abs(f2)});
}

}  // namespace

DcViolations DcConstraintSet::evaluate(const Plan& plan) const {
  const SimParams& p = scenario->params;
  const int L = p.num_uavs, K = p.num_users, T = p.num_slots, M = p.uav_antennas;
  (void)M;
  DcViolations out;
  auto record = [&](const std::string& id, double v) {
    auto it = out.worst.find(id);
    if (it == out.worst.end() || v > it->second) out.worst[id] = v;
    if (v > out.max_violation) {
      out.max_violation = v;
      out.worst_id = id;
    }
  };
  out.max_violation = -std::numeric_limits<double>::infinity();

  const double huge = 1e30;
  for (int t = 0; t < T; ++t) {
    const SlotDistances d = distances(plan, *scenario, t);

    double bs_power = 0.0;
    for (int l = 0; l < L; ++l) bs_power += plan.w_fh[l].col(t).squaredNorm();
    record("C1", normalized(bs_power, p.p_bs_max));

    for (int k = 0; k < K; ++k) {
      double f1 = 1.0, f2 = 0.0;
      for (int l = 0; l < L; ++l) {
        const double tau = plan.slacks.tau_data[l](k, t);
        if (!(tau > 0.0)) {
          record("C5a", huge);
          continue;
        }
        const VecC& g = block->g_data[l][k];
        for (int j = 0; j < K; ++j)
          f1 += std::norm(g.dot(plan.w_data[l][j].col(t))) / (sigma2 * tau);
        f2 += gamma_coef(k) * std::norm(g.dot(plan.w_data[l][k].col(t))) / (sigma2 * tau);
      }
      record("C5a", normalized(f1, f2));
    }

    for (int l = 0; l < L; ++l) {
      double tx = 0.0;
      for (int k = 0; k < K; ++k) tx += plan.w_data[l][k].col(t).squaredNorm();
      record("C2", normalized(tx + nav_power(plan, *scenario, l, t), p.p_uav_max));

      const double step = (plan.trajectory[l].col(t + 1) - plan.trajectory[l].col(t)).norm();
      record("C7", normalized(step, p.d_max()));

      for (int k = 0; k < K; ++k)
        record("C5b",
               normalized(std::pow(d.data(l, k), p.pathloss_exponent_data) / p.antenna_gain_data,
                          plan.slacks.tau_data[l](k, t)));

      // fronthaul split: f1 = inverse gain + interference, f2 = signal / tau
      const double tau_f = plan.slacks.tau_fh(l);
      const double inv_gain =
          std::pow(d.fh(l), p.pathloss_exponent_fh) / p.antenna_gain_fh;
      const double rx2 = block->g_fh_rx[l].squaredNorm();
      double interf = 0.0, signal = 0.0;
      for (int j = 0; j < L; ++j) {
        const double rx = rx2 * std::norm(block->g_fh_tx[l].dot(plan.w_fh[j].col(t)));
        if (j == l)
          signal = rx;
        else
          interf += rx;
      }
      if (!(tau_f > 0.0)) {
        // tau_fh = 0 encodes an idle fronthaul link; the constraint holds iff
        // the signal side is irrelevant
        record("C6a", normalized(0.0, 0.0));
      } else {
        record("C6a", normalized(inv_gain + interf / sigma2, signal / (sigma2 * tau_f)));
      }

      const Vec3 pos = plan.trajectory[l].col(t + 1);
      double box = 0.0;
      for (int c = 0; c < 3; ++c)
        box = std::max({box, scenario->geometry.nav_min(c) - pos(c),
                        pos(c) - scenario->geometry.nav_max(c)});
      record("C9", box / std::max(1.0, pos.cwiseAbs().maxCoeff()));

      for (int j = l + 1; j < L; ++j)
        record("C8", normalized(p.d_min, (pos - Vec3(plan.trajectory[j].col(t + 1))).norm()));
    }
  }

  for (int l = 0; l < L; ++l) {
    double rate_sum = 0.0;
    for (int k = 0; k < K; ++k) rate_sum += qos.r_min_bpshz(k) * plan.slacks.tau_q(l, k);
    record("C6b", normalized(rate_sum, std::log2(1.0 + plan.slacks.tau_fh(l))));

    for (int k = 0; k < K; ++k) {
      const double tq = plan.slacks.tau_q(l, k);
      if (tq < 0.0 || tq >= 1.0) {
        record("C6c", huge);
        continue;
      }
      const double f2 = -std::log1p(-tq);
      for (int t = 0; t < T; ++t)
        record("C6c", normalized(beta * plan.w_data[l][k].col(t).squaredNorm(), f2));
    }
  }
  return out;
}

DcConstraintSet build_dc_set(const Scenario& s, const ChannelBlock& block, const QosSpec& qos) {
  DcConstraintSet dc;
  dc.scenario = &s;
  dc.block = &block;
  dc.qos = qos;
  dc.beta = s.params.beta_effective();
  dc.sigma2 = s.params.noise_power_w();
  dc.gamma_coef = 1.0 + qos.gamma_min.array().inverse();
  return dc;
}

// ---------------------------------------------------------------------------
// subproblem assembly
// ---------------------------------------------------------------------------

namespace {

struct Builder {
  cone::ProgramBuilder pb;
  std::vector<double> scale;

  int new_var(const std::string& name, double anchor, double lo, double hi) {
    const double sc = std::clamp(std::abs(anchor), lo, hi);
    scale.push_back(sc);
    return pb.add_var(name);
  }

  // physical-coefficient term on a scaled variable
  void add(LinExpr& e, int var, double coef) { e.add(var, coef * scale[var]); }

  LinExpr expr(int var, double coef = 1.0) {
    LinExpr e;
    add(e, var, coef);
    return e;
  }
};

// unit direction for the separation tangent when the anchor positions
// coincide; deterministic in (l, j, t)
Vec3 tangent_fallback_dir(int l, int j, int t) {
  Rng rng(mix64(mix64(static_cast<std::uint64_t>(l) << 42, static_cast<std::uint64_t>(j) << 21),
                static_cast<std::uint64_t>(t)));
  Vec3 v;
  for (int c = 0; c < 3; ++c) v(c) = rng.uniform(-1.0, 1.0);
  const double n = v.norm();
  return n > 1e-12 ? Vec3(v / n) : Vec3(1, 0, 0);
}

}  // namespace

Subproblem assemble_subproblem(const Plan& x_prev, const DcConstraintSet& dc, const Scenario& s,
                               const AssembleOptions& opt) {
  const SimParams& p = s.params;
  const int L = p.num_uavs, K = p.num_users, T = p.num_slots, M = p.uav_antennas,
            N = p.bs_antennas;
  const double sigma2 = dc.sigma2;
  const double beta = dc.beta;
  const double alpha_d = p.pathloss_exponent_data, alpha_f = p.pathloss_exponent_fh;
  const double A_d = p.antenna_gain_data, A_f = p.antenna_gain_fh;
  const bool traj_frozen = opt.freeze.trajectory.has_value();
  const bool q_frozen = opt.freeze.coop.has_value();

  // anchor validation
  for (int l = 0; l < L; ++l) {
    if (!(x_prev.slacks.tau_fh(l) > 0.0))
      throw LinearizationError("non-positive fronthaul slack anchor at uav " + std::to_string(l));
    for (int k = 0; k < K; ++k) {
      if (!q_frozen) {
        const double tq = x_prev.slacks.tau_q(l, k);
        if (tq < 0.0 || tq > opt.tau_q_cap + 1e-12)
          throw LinearizationError("cooperation slack anchor outside [0, cap)");
      }
      for (int t = 0; t < T; ++t)
        if (!(x_prev.slacks.tau_data[l](k, t) > 0.0))
          throw LinearizationError("non-positive path-gain slack anchor");
    }
  }

  auto active = [&](int l, int k) {
    return q_frozen ? (*opt.freeze.coop)(l, k) != 0 : true;
  };
  auto pos_at = [&](int l, int t) -> Vec3 {
    // t = -1 is the block start
    const MatX& traj = traj_frozen ? (*opt.freeze.trajectory)[l] : x_prev.trajectory[l];
    return traj.col(t + 1);
  };

  Subproblem sp;
  VariableLayout& ly = sp.layout;
  ly.L = L;
  ly.K = K;
  ly.T = T;
  ly.M = M;
  ly.N = N;
  ly.traj_frozen = traj_frozen;
  ly.q_frozen = q_frozen;
  ly.w_data_.assign(L * K * T, -1);
  ly.w_fh_.assign(L * T, -1);
  ly.pos_.assign(L * T, -1);
  ly.tau_data_.assign(L * K * T, -1);
  ly.tau_fh_.assign(L, -1);
  ly.tau_q_.assign(L * K, -1);
  ly.p_data_.assign(L * K * T, -1);
  ly.p_fh_.assign(L * T, -1);
  ly.m_nav_.assign(L * T, -1);

  Builder b;
  const double w_lo = std::sqrt(1e-12 * p.p_uav_max), w_hi = std::sqrt(p.p_uav_max);
  const double wf_lo = std::sqrt(1e-12 * p.p_bs_max), wf_hi = std::sqrt(p.p_bs_max);

  // --- variables ---
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k)
      for (int t = 0; t < T; ++t) {
        if (!active(l, k)) continue;
        const std::string base =
            "w_data[" + std::to_string(l) + "][" + std::to_string(k) + "][" + std::to_string(t) + "]";
        int first = -1;
        for (int m = 0; m < M; ++m) {
          const int vr = b.new_var(base + ".re", x_prev.w_data[l][k](m, t).real(), w_lo, w_hi);
          if (m == 0) first = vr;
        }
        for (int m = 0; m < M; ++m)
          b.new_var(base + ".im", x_prev.w_data[l][k](m, t).imag(), w_lo, w_hi);
        ly.w_data_[(l * K + k) * T + t] = first;
      }
  for (int l = 0; l < L; ++l)
    for (int t = 0; t < T; ++t) {
      const std::string base = "w_fh[" + std::to_string(l) + "][" + std::to_string(t) + "]";
      int first = -1;
      for (int n = 0; n < N; ++n) {
        const int vr = b.new_var(base + ".re", x_prev.w_fh[l](n, t).real(), wf_lo, wf_hi);
        if (n == 0) first = vr;
      }
      for (int n = 0; n < N; ++n)
        b.new_var(base + ".im", x_prev.w_fh[l](n, t).imag(), wf_lo, wf_hi);
      ly.w_fh_[l * T + t] = first;
    }
  if (!traj_frozen)
    for (int l = 0; l < L; ++l)
      for (int t = 0; t < T; ++t) {
        const std::string base = "pos[" + std::to_string(l) + "][" + std::to_string(t) + "]";
        const Vec3 anchor = pos_at(l, t);
        const int first = b.new_var(base + ".x", anchor.x(), 1.0, 1e7);
        b.new_var(base + ".y", anchor.y(), 1.0, 1e7);
        b.new_var(base + ".z", anchor.z(), 1.0, 1e7);
        ly.pos_[l * T + t] = first;
      }
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k)
      for (int t = 0; t < T; ++t)
        ly.tau_data_[(l * K + k) * T + t] =
            b.new_var("tau_data[" + std::to_string(l) + "][" + std::to_string(k) + "][" +
                          std::to_string(t) + "]",
                      x_prev.slacks.tau_data[l](k, t), 1.0 / A_d, 1e30);
  for (int l = 0; l < L; ++l)
    ly.tau_fh_[l] = b.new_var("tau_fh[" + std::to_string(l) + "]", x_prev.slacks.tau_fh(l),
                              1e-12, 1e12);
  if (!q_frozen)
    for (int l = 0; l < L; ++l)
      for (int k = 0; k < K; ++k)
        ly.tau_q_[l * K + k] =
            b.new_var("tau_q[" + std::to_string(l) + "][" + std::to_string(k) + "]",
                      x_prev.slacks.tau_q(l, k), 1e-6, 1.0);
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k)
      for (int t = 0; t < T; ++t) {
        if (!active(l, k)) continue;
        ly.p_data_[(l * K + k) * T + t] =
            b.new_var("p_data[" + std::to_string(l) + "][" + std::to_string(k) + "][" +
                          std::to_string(t) + "]",
                      x_prev.w_data[l][k].col(t).squaredNorm(), 1e-12 * p.p_uav_max, p.p_uav_max);
      }
  for (int l = 0; l < L; ++l)
    for (int t = 0; t < T; ++t)
      ly.p_fh_[l * T + t] = b.new_var("p_fh[" + std::to_string(l) + "][" + std::to_string(t) + "]",
                                      x_prev.w_fh[l].col(t).squaredNorm(),
                                      1e-12 * p.p_bs_max, p.p_bs_max);
  if (!traj_frozen)
    for (int l = 0; l < L; ++l)
      for (int t = 0; t < T; ++t)
        ly.m_nav_[l * T + t] =
            b.new_var("m_nav[" + std::to_string(l) + "][" + std::to_string(t) + "]",
                      (pos_at(l, t) - pos_at(l, t - 1)).norm(), 1e-3 * p.d_max(), p.d_max());

  // distance epigraphs (only with free trajectories)
  ly.s_dist_.assign(L * K * T, -1);
  ly.s_fh_.assign(L * T, -1);
  ly.u_fh_.assign(L * T, -1);
  if (!traj_frozen) {
    for (int l = 0; l < L; ++l)
      for (int t = 0; t < T; ++t) {
        for (int k = 0; k < K; ++k) {
          const double d0 = (pos_at(l, t) - s.geometry.user_positions[k]).norm();
          ly.s_dist_[(l * K + k) * T + t] =
              b.new_var("s_dist[" + std::to_string(l) + "][" + std::to_string(k) + "][" +
                            std::to_string(t) + "]",
                        d0, 1.0, 1e7);
        }
        const double df0 = (pos_at(l, t) - s.geometry.bs_position).norm();
        ly.s_fh_[l * T + t] = b.new_var(
            "s_fh[" + std::to_string(l) + "][" + std::to_string(t) + "]", df0, 1.0, 1e7);
        ly.u_fh_[l * T + t] =
            b.new_var("u_fh[" + std::to_string(l) + "][" + std::to_string(t) + "]",
                      std::pow(df0, alpha_f) / A_f, 1.0 / A_f, 1e30);
      }
  }

  // interference epigraphs
  ly.r_int_.assign(static_cast<std::size_t>(L) * K * K * T, -1);
  ly.r_fh_.assign(static_cast<std::size_t>(L) * L * T, -1);
  for (int l = 0; l < L; ++l)
    for (int j = 0; j < K; ++j) {
      if (!active(l, j)) continue;
      for (int k = 0; k < K; ++k)
        for (int t = 0; t < T; ++t) {
          const double anchor =
              std::norm(dc.block->g_data[l][k].dot(x_prev.w_data[l][j].col(t))) /
              x_prev.slacks.tau_data[l](k, t);
          ly.r_int_[((static_cast<std::size_t>(l) * K + j) * K + k) * T + t] =
              b.new_var("r_int[" + std::to_string(l) + "][" + std::to_string(j) + "][" +
                            std::to_string(k) + "][" + std::to_string(t) + "]",
                        anchor, 1e-6 * sigma2, 1e12 * sigma2);
        }
    }
  for (int l = 0; l < L; ++l)
    for (int j = 0; j < L; ++j) {
      if (j == l) continue;
      for (int t = 0; t < T; ++t) {
        const double anchor = dc.block->g_fh_rx[l].squaredNorm() *
                              std::norm(dc.block->g_fh_tx[l].dot(x_prev.w_fh[j].col(t)));
        ly.r_fh_[(static_cast<std::size_t>(l) * L + j) * T + t] =
            b.new_var("r_fh[" + std::to_string(l) + "][" + std::to_string(j) + "][" +
                          std::to_string(t) + "]",
                      anchor, 1e-6 * sigma2, 1e12 * sigma2);
      }
    }

  // --- helper expressions ---
  // Re/Im of g^H w as affine rows over the re/im stacked beamformer block
  auto inner_re = [&](const VecC& g, int wbase, int len) {
    LinExpr e;
    for (int i = 0; i < len; ++i) {
      b.add(e, wbase + i, g(i).real());
      b.add(e, wbase + len + i, g(i).imag());
    }
    return e;
  };
  auto inner_im = [&](const VecC& g, int wbase, int len) {
    LinExpr e;
    for (int i = 0; i < len; ++i) {
      b.add(e, wbase + i, -g(i).imag());
      b.add(e, wbase + len + i, g(i).real());
    }
    return e;
  };
  // affine value of a quadratic-over-linear lower bound
  auto qol_expr = [&](const QolBound& q, int wbase, int len, int tau_var, double scale_out) {
    LinExpr e;
    for (int i = 0; i < len; ++i) {
      b.add(e, wbase + i, scale_out * q.grad_w(i).real());
      b.add(e, wbase + len + i, scale_out * q.grad_w(i).imag());
    }
    b.add(e, tau_var, scale_out * q.coef_tau);
    return e;
  };
  auto pos_expr = [&](int l, int t, int c) {  // position coordinate (affine or constant)
    if (traj_frozen) return LinExpr(pos_at(l, t)(c));
    return b.expr(ly.pos(l, t) + c);
  };

  // --- objective ---
  double obj_const = 0.0;
  for (int t = 0; t < T; ++t)
    for (int l = 0; l < L; ++l) {
      b.pb.add_objective(ly.p_fh(l, t), p.weight_bs() * b.scale[ly.p_fh(l, t)]);
      for (int k = 0; k < K; ++k)
        if (active(l, k))
          b.pb.add_objective(ly.p_data(l, k, t), p.weight_uav(l) * b.scale[ly.p_data(l, k, t)]);
      if (traj_frozen) {
        obj_const += p.weight_uav(l) *
                     (p.nav_c1 + p.nav_c2 * (pos_at(l, t) - pos_at(l, t - 1)).norm());
      } else {
        obj_const += p.weight_uav(l) * p.nav_c1;
        b.pb.add_objective(ly.m_nav(l, t), p.weight_uav(l) * p.nav_c2 * b.scale[ly.m_nav(l, t)]);
      }
    }
  b.pb.add_objective_constant(obj_const);

  // --- power epigraphs ---
  for (int l = 0; l < L; ++l)
    for (int t = 0; t < T; ++t) {
      for (int k = 0; k < K; ++k) {
        if (!active(l, k)) continue;
        std::vector<LinExpr> rows{b.expr(ly.p_data(l, k, t)), LinExpr(0.5)};
        for (int i = 0; i < 2 * M; ++i) rows.push_back(b.expr(ly.w_data(l, k, t) + i));
        b.pb.add_cone(Kind::RotatedSecondOrder, rows);
      }
      std::vector<LinExpr> rows{b.expr(ly.p_fh(l, t)), LinExpr(0.5)};
      for (int i = 0; i < 2 * N; ++i) rows.push_back(b.expr(ly.w_fh(l, t) + i));
      b.pb.add_cone(Kind::RotatedSecondOrder, rows);
    }

  // --- per-slot power budgets (C1, C2) ---
  for (int t = 0; t < T; ++t) {
    LinExpr c1(p.p_bs_max);
    for (int l = 0; l < L; ++l) b.add(c1, ly.p_fh(l, t), -1.0);
    b.pb.add_cone(Kind::NonNegative, {c1});

    for (int l = 0; l < L; ++l) {
      LinExpr c2(p.p_uav_max - p.nav_c1);
      for (int k = 0; k < K; ++k)
        if (active(l, k)) b.add(c2, ly.p_data(l, k, t), -1.0);
      if (traj_frozen)
        c2 += LinExpr(-p.nav_c2 * (pos_at(l, t) - pos_at(l, t - 1)).norm());
      else
        b.add(c2, ly.m_nav(l, t), -p.nav_c2);
      b.pb.add_cone(Kind::NonNegative, {c2});
    }
  }

  // --- navigation geometry (C7, C8, C9) ---
  if (!traj_frozen) {
    for (int l = 0; l < L; ++l)
      for (int t = 0; t < T; ++t) {
        std::vector<LinExpr> rows{b.expr(ly.m_nav(l, t))};
        for (int c = 0; c < 3; ++c) {
          LinExpr step = pos_expr(l, t, c);
          if (t == 0)
            step += LinExpr(-pos_at(l, -1)(c));
          else
            step = step - pos_expr(l, t - 1, c);
          rows.push_back(step);
        }
        b.pb.add_cone(Kind::SecondOrder, rows);
        b.pb.add_cone(Kind::NonNegative, {LinExpr(p.d_max()) - b.expr(ly.m_nav(l, t))});

        std::vector<LinExpr> box;
        for (int c = 0; c < 3; ++c) {
          box.push_back(pos_expr(l, t, c) - LinExpr(s.geometry.nav_min(c)));
          box.push_back(LinExpr(s.geometry.nav_max(c)) - pos_expr(l, t, c));
        }
        b.pb.add_cone(Kind::NonNegative, box);
      }

    for (int t = 0; t < T; ++t)
      for (int l = 0; l < L; ++l)
        for (int j = l + 1; j < L; ++j) {
          Vec3 delta0 = pos_at(l, t) - pos_at(j, t);
          if (delta0.norm() < 1e-9 * p.d_min)
            delta0 = 1e-3 * p.d_min * tangent_fallback_dir(l, j, t);
          const Vec3 dir = delta0 / delta0.norm();
          LinExpr e(-p.d_min);
          for (int c = 0; c < 3; ++c)
            e += dir(c) * (pos_expr(l, t, c) - pos_expr(j, t, c));
          b.pb.add_cone(Kind::NonNegative, {e});
        }
  } else {
    // frozen trajectories must honor the navigation constraints themselves
    for (int l = 0; l < L; ++l)
      for (int t = 0; t < T; ++t) {
        if ((pos_at(l, t) - pos_at(l, t - 1)).norm() > p.d_max() + 1e-9)
          throw ParameterError("frozen trajectory exceeds the per-slot step bound");
        for (int j = l + 1; j < L; ++j)
          if ((pos_at(l, t) - pos_at(j, t)).norm() < p.d_min - 1e-9)
            throw ParameterError("frozen trajectories violate the separation bound");
      }
  }

  // --- inverse path gain epigraphs (C5b and the fronthaul term of C6a) ---
  const bool rsoc_ok_data = opt.cone_mode == PathlossConeMode::Auto && alpha_d == 2.0;
  const bool rsoc_ok_fh = opt.cone_mode == PathlossConeMode::Auto && alpha_f == 2.0;
  for (int l = 0; l < L; ++l)
    for (int t = 0; t < T; ++t) {
      for (int k = 0; k < K; ++k) {
        const int tau = ly.tau_data(l, k, t);
        if (traj_frozen) {
          const double d0 = (pos_at(l, t) - s.geometry.user_positions[k]).norm();
          b.pb.add_cone(Kind::NonNegative,
                        {b.expr(tau) + LinExpr(-std::pow(d0, alpha_d) / A_d)});
        } else {
          const int sv = ly.s_dist(l, k, t);
          std::vector<LinExpr> soc{b.expr(sv)};
          for (int c = 0; c < 3; ++c)
            soc.push_back(pos_expr(l, t, c) + LinExpr(-s.geometry.user_positions[k](c)));
          b.pb.add_cone(Kind::SecondOrder, soc);
          if (rsoc_ok_data)
            b.pb.add_cone(Kind::RotatedSecondOrder,
                          {b.expr(tau), LinExpr(0.5 * A_d), b.expr(sv)});
          else
            b.pb.add_cone(Kind::Power, {b.expr(tau, A_d), LinExpr(1.0), b.expr(sv)},
                          1.0 / alpha_d);
        }
      }
      if (!traj_frozen) {
        const int sv = ly.s_fh(l, t), uv = ly.u_fh(l, t);
        std::vector<LinExpr> soc{b.expr(sv)};
        for (int c = 0; c < 3; ++c)
          soc.push_back(pos_expr(l, t, c) + LinExpr(-s.geometry.bs_position(c)));
        b.pb.add_cone(Kind::SecondOrder, soc);
        if (rsoc_ok_fh)
          b.pb.add_cone(Kind::RotatedSecondOrder,
                        {b.expr(uv), LinExpr(0.5 * A_f), b.expr(sv)});
        else
          b.pb.add_cone(Kind::Power, {b.expr(uv, A_f), LinExpr(1.0), b.expr(sv)},
                        1.0 / alpha_f);
      }
    }

  // --- interference epigraphs ---
  for (int l = 0; l < L; ++l)
    for (int j = 0; j < K; ++j) {
      if (!active(l, j)) continue;
      for (int k = 0; k < K; ++k)
        for (int t = 0; t < T; ++t) {
          const int rv = ly.r_int(l, j, k, t);
          const VecC& g = dc.block->g_data[l][k];
          b.pb.add_cone(Kind::RotatedSecondOrder,
                        {b.expr(rv), b.expr(ly.tau_data(l, k, t), 0.5),
                         inner_re(g, ly.w_data(l, j, t), M), inner_im(g, ly.w_data(l, j, t), M)});
        }
    }
  for (int l = 0; l < L; ++l)
    for (int j = 0; j < L; ++j) {
      if (j == l) continue;
      const double rx = dc.block->g_fh_rx[l].norm();
      const VecC g_sc = rx * dc.block->g_fh_tx[l];
      for (int t = 0; t < T; ++t) {
        const int rv = ly.r_fh(l, j, t);
        b.pb.add_cone(Kind::RotatedSecondOrder,
                      {b.expr(rv), LinExpr(0.5), inner_re(g_sc, ly.w_fh(j, t), N),
                       inner_im(g_sc, ly.w_fh(j, t), N)});
      }
    }

  // --- linearized data QoS (C5a) ---
  for (int k = 0; k < K; ++k)
    for (int t = 0; t < T; ++t) {
      LinExpr row(-1.0);
      for (int l = 0; l < L; ++l) {
        if (active(l, k)) {
          const QolBound q = lemma1_bound(dc.block->g_data[l][k], x_prev.w_data[l][k].col(t),
                                          x_prev.slacks.tau_data[l](k, t));
          row += qol_expr(q, ly.w_data(l, k, t), M, ly.tau_data(l, k, t),
                          dc.gamma_coef(k) / sigma2);
        }
        for (int j = 0; j < K; ++j) {
          if (!active(l, j)) continue;
          b.add(row, ly.r_int(l, j, k, t), -1.0 / sigma2);
        }
      }
      b.pb.add_cone(Kind::NonNegative, {row});
    }

  // --- linearized fronthaul QoS (C6a) ---
  for (int l = 0; l < L; ++l) {
    const MatC G_f = dc.block->g_fh_tx[l] * dc.block->g_fh_rx[l].adjoint();
    for (int t = 0; t < T; ++t) {
      const QolBound q = lemma1_bound(G_f, x_prev.w_fh[l].col(t), x_prev.slacks.tau_fh(l));
      LinExpr row = qol_expr(q, ly.w_fh(l, t), N, ly.tau_fh(l), 1.0 / sigma2);
      if (traj_frozen)
        row += LinExpr(-std::pow((pos_at(l, t) - s.geometry.bs_position).norm(), alpha_f) / A_f);
      else
        b.add(row, ly.u_fh(l, t), -1.0);
      for (int j = 0; j < L; ++j) {
        if (j == l) continue;
        b.add(row, ly.r_fh(l, j, t), -1.0 / sigma2);
      }
      b.pb.add_cone(Kind::NonNegative, {row});
    }
  }

  // --- fronthaul rate coupling (C6b), exponential cone ---
  const double ln2 = std::log(2.0);
  for (int l = 0; l < L; ++l) {
    LinExpr x_row;
    if (q_frozen) {
      double rate_sum = 0.0;
      for (int k = 0; k < K; ++k)
        if (active(l, k)) rate_sum += dc.qos.r_min_bpshz(k);
      x_row = LinExpr(ln2 * rate_sum);
    } else {
      for (int k = 0; k < K; ++k) b.add(x_row, ly.tau_q(l, k), ln2 * dc.qos.r_min_bpshz(k));
    }
    b.pb.add_cone(Kind::Exponential,
                  {x_row, LinExpr(1.0), b.expr(ly.tau_fh(l)) + LinExpr(1.0)});
  }

  // --- linearized cooperation indicator (C6c) and slack boxes ---
  if (!q_frozen) {
    for (int l = 0; l < L; ++l)
      for (int k = 0; k < K; ++k) {
        const double tq0 = std::min(x_prev.slacks.tau_q(l, k), opt.tau_q_cap);
        const double tangent_const = -std::log1p(-tq0) - tq0 / (1.0 - tq0);
        for (int t = 0; t < T; ++t) {
          LinExpr row(tangent_const);
          b.add(row, ly.tau_q(l, k), 1.0 / (1.0 - tq0));
          b.add(row, ly.p_data(l, k, t), -beta);
          b.pb.add_cone(Kind::NonNegative, {row});
        }
        b.pb.add_cone(Kind::NonNegative,
                      {b.expr(ly.tau_q(l, k)),
                       LinExpr(opt.tau_q_cap) - b.expr(ly.tau_q(l, k))});
      }
  }

  // slack floors keep the next linearization anchors strictly positive
  for (int l = 0; l < L; ++l) {
    b.pb.add_cone(Kind::NonNegative,
                  {b.expr(ly.tau_fh(l)) + LinExpr(-1e-3 * std::min(x_prev.slacks.tau_fh(l), 1.0))});
    for (int k = 0; k < K; ++k)
      for (int t = 0; t < T; ++t)
        b.pb.add_cone(Kind::NonNegative,
                      {b.expr(ly.tau_data(l, k, t)) +
                       LinExpr(-1e-3 * x_prev.slacks.tau_data[l](k, t))});
  }

  sp.program = b.pb.finalize();
  sp.var_scale = Eigen::Map<const VecX>(b.scale.data(), static_cast<int>(b.scale.size()));
  ly.num_vars = sp.program.num_vars;
  return sp;
}

Plan plan_from_solution(const Subproblem& sp, const VecX& primal, const Plan& x_prev,
                        const Scenario& s) {
  const VariableLayout& ly = sp.layout;
  Plan plan = x_prev;
  auto val = [&](int var) { return primal(var) * sp.var_scale(var); };

  for (int l = 0; l < ly.L; ++l) {
    for (int k = 0; k < ly.K; ++k)
      for (int t = 0; t < ly.T; ++t) {
        const int base = ly.w_data(l, k, t);
        if (base < 0) {
          plan.w_data[l][k].col(t).setZero();
          continue;
        }
        for (int m = 0; m < ly.M; ++m)
          plan.w_data[l][k](m, t) = Complex(val(base + m), val(base + ly.M + m));
      }
    for (int t = 0; t < ly.T; ++t) {
      const int base = ly.w_fh(l, t);
      for (int n = 0; n < ly.N; ++n)
        plan.w_fh[l](n, t) = Complex(val(base + n), val(base + ly.N + n));
    }
    if (!ly.traj_frozen)
      for (int t = 0; t < ly.T; ++t) {
        const int base = ly.pos(l, t);
        plan.trajectory[l].col(t + 1) = Vec3(val(base), val(base + 1), val(base + 2));
      }
    plan.slacks.tau_fh(l) = val(ly.tau_fh(l));
    for (int k = 0; k < ly.K; ++k) {
      for (int t = 0; t < ly.T; ++t)
        plan.slacks.tau_data[l](k, t) = val(ly.tau_data(l, k, t));
      if (!ly.q_frozen)
        plan.slacks.tau_q(l, k) = val(ly.tau_q(l, k));
      else
        plan.slacks.tau_q(l, k) = coop_indicator_from_power(
            s.params.beta_effective(), plan.w_data[l][k].colwise().squaredNorm().maxCoeff());
    }
  }
  return plan;
}

VecX embed_plan(const Subproblem& sp, const Plan& plan, const DcConstraintSet& dc) {
  const Scenario& s = *dc.scenario;
  const VariableLayout& ly = sp.layout;
  VecX x = VecX::Zero(sp.program.num_vars);
  auto put = [&](int var, double value) { x(var) = value / sp.var_scale(var); };

  for (int l = 0; l < ly.L; ++l) {
    for (int k = 0; k < ly.K; ++k)
      for (int t = 0; t < ly.T; ++t) {
        const int base = ly.w_data(l, k, t);
        if (base < 0) continue;
        for (int m = 0; m < ly.M; ++m) {
          put(base + m, plan.w_data[l][k](m, t).real());
          put(base + ly.M + m, plan.w_data[l][k](m, t).imag());
        }
        put(ly.p_data(l, k, t), plan.w_data[l][k].col(t).squaredNorm());
      }
    for (int t = 0; t < ly.T; ++t) {
      const int base = ly.w_fh(l, t);
      for (int n = 0; n < ly.N; ++n) {
        put(base + n, plan.w_fh[l](n, t).real());
        put(base + ly.N + n, plan.w_fh[l](n, t).imag());
      }
      put(ly.p_fh(l, t), plan.w_fh[l].col(t).squaredNorm());
      if (!ly.traj_frozen) {
        const Vec3 pos = plan.trajectory[l].col(t + 1);
        const int pbase = ly.pos(l, t);
        for (int c = 0; c < 3; ++c) put(pbase + c, pos(c));
        put(ly.m_nav(l, t), (pos - Vec3(plan.trajectory[l].col(t))).norm());
      }
    }
    put(ly.tau_fh(l), plan.slacks.tau_fh(l));
    for (int k = 0; k < ly.K; ++k) {
      if (!ly.q_frozen) put(ly.tau_q(l, k), plan.slacks.tau_q(l, k));
      for (int t = 0; t < ly.T; ++t) put(ly.tau_data(l, k, t), plan.slacks.tau_data[l](k, t));
    }
  }

  // auxiliary epigraph variables, set tight
  const SimParams& p = s.params;
  for (int l = 0; l < ly.L; ++l)
    for (int t = 0; t < ly.T; ++t) {
      if (!ly.traj_frozen) {
        const Vec3 pos = plan.trajectory[l].col(t + 1);
        for (int k = 0; k < ly.K; ++k)
          put(ly.s_dist(l, k, t), (pos - s.geometry.user_positions[k]).norm());
        const double df = (pos - s.geometry.bs_position).norm();
        put(ly.s_fh(l, t), df);
        put(ly.u_fh(l, t), std::pow(df, p.pathloss_exponent_fh) / p.antenna_gain_fh);
      }
      for (int j = 0; j < ly.K; ++j) {
        if (ly.w_data(l, j, t) < 0) continue;
        for (int k = 0; k < ly.K; ++k)
          put(ly.r_int(l, j, k, t),
              std::norm(dc.block->g_data[l][k].dot(plan.w_data[l][j].col(t))) /
                  plan.slacks.tau_data[l](k, t));
      }
      for (int j = 0; j < ly.L; ++j) {
        if (j == l) continue;
        put(ly.r_fh(l, j, t),
            dc.block->g_fh_rx[l].squaredNorm() *
                std::norm(dc.block->g_fh_tx[l].dot(plan.w_fh[j].col(t))));
      }
    }
  return x;
}

}  // namespace uavplan::dcp
