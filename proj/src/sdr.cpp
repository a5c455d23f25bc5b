#include "uavplan/sdr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "uavplan/solver.hpp"

namespace uavplan::sdr {

using cone::Kind;
using cone::LinExpr;

std::pair<std::vector<MatX>, Eigen::MatrixXi> initial_trajectory_and_coop(const Scenario& s,
                                                                          const InitConfig& cfg) {
  const SimParams& p = s.params;
  std::vector<MatX> d0(p.num_uavs);
  for (int l = 0; l < p.num_uavs; ++l)
    d0[l] = s.geometry.uav_start_positions[l].replicate(1, p.num_slots + 1);

  Eigen::MatrixXi q0 = Eigen::MatrixXi::Zero(p.num_uavs, p.num_users);
  if (cfg.coop_mode == InitConfig::CoopMode::FullCooperation) {
    q0.setOnes();
    return {d0, q0};
  }

  const int cap = std::min(p.uav_antennas, p.num_users);
  if (p.num_users > p.num_uavs * cap)
    throw AssignmentError("nearest-uav assignment infeasible: " + std::to_string(p.num_users) +
                          " users exceed total capacity " + std::to_string(p.num_uavs * cap));
  std::vector<int> load(p.num_uavs, 0);
  for (int k = 0; k < p.num_users; ++k) {
    std::vector<int> order(p.num_uavs);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double da = (s.geometry.uav_start_positions[a] - s.geometry.user_positions[k]).norm();
      const double db = (s.geometry.uav_start_positions[b] - s.geometry.user_positions[k]).norm();
      return da < db;
    });
    for (int l : order) {
      if (load[l] < cap) {
        q0(l, k) = 1;
        ++load[l];
        break;
      }
    }
  }
  return {d0, q0};
}

// ---------------------------------------------------------------------------
// Hermitian matrix variables over a real PSD embedding
// ---------------------------------------------------------------------------

namespace {

// Adds the PSD cone rows of R = [[X, -Y], [Y, X]] (order 2n) as affine
// functions of the X/Y entries of one Hermitian matrix variable.
void add_hermitian_psd(cone::ProgramBuilder& pb, const SdpSlot::MatrixVar& mv) {
  const int n = mv.n;
  const int order = 2 * n;
  const double s2 = std::sqrt(2.0);
  auto x_var = [&](int i, int j) {  // i >= j
    return mv.x_base + j * n - j * (j - 1) / 2 + (i - j);
  };
  auto y_entry = [&](int i, int j, int* var, double* sign) {  // value of Y(i,j)
    *var = -1;
    *sign = 0.0;
    if (i > j) {
      *var = mv.y_base + j * (n - 1) - j * (j - 1) / 2 + (i - j - 1);
      *sign = 1.0;
    } else if (i < j) {
      *var = mv.y_base + i * (n - 1) - i * (i - 1) / 2 + (j - i - 1);
      *sign = -1.0;
    }
  };
  std::vector<LinExpr> rows;
  rows.reserve(order * (order + 1) / 2);
  for (int J = 0; J < order; ++J)
    for (int I = J; I < order; ++I) {
      const double coef = (I == J) ? 1.0 : s2;
      LinExpr e;
      if (I < n && J < n) {
        e.add(x_var(I, J), coef * mv.scale);
      } else if (I >= n && J < n) {
        int var = 0;
        double sign = 0.0;
        y_entry(I - n, J, &var, &sign);
        if (var >= 0) e.add(var, sign * coef * mv.scale);
      } else {
        e.add(x_var(I - n, J - n), coef * mv.scale);
      }
      rows.push_back(std::move(e));
    }
  pb.add_cone(Kind::PositiveSemidefinite, rows, 0.0, order);
}

// tr(W H) as an affine expression for Hermitian H.
LinExpr trace_term(const SdpSlot::MatrixVar& mv, const MatC& H, double coef) {
  const int n = mv.n;
  LinExpr e;
  auto x_var = [&](int i, int j) { return mv.x_base + j * n - j * (j - 1) / 2 + (i - j); };
  auto y_var = [&](int i, int j) { return mv.y_base + j * (n - 1) - j * (j - 1) / 2 + (i - j - 1); };
  for (int j = 0; j < n; ++j) {
    e.add(x_var(j, j), coef * mv.scale * H(j, j).real());
    for (int i = j + 1; i < n; ++i) {
      e.add(x_var(i, j), coef * mv.scale * 2.0 * H(i, j).real());
      e.add(y_var(i, j), coef * mv.scale * 2.0 * H(i, j).imag());
    }
  }
  return e;
}

LinExpr trace_of(const SdpSlot::MatrixVar& mv, double coef) {
  const int n = mv.n;
  LinExpr e;
  auto x_var = [&](int i, int j) { return mv.x_base + j * n - j * (j - 1) / 2 + (i - j); };
  for (int j = 0; j < n; ++j) e.add(x_var(j, j), coef * mv.scale);
  return e;
}

double rate_load(const Eigen::MatrixXi& q, const QosSpec& qos, int l) {
  double sum = 0.0;
  for (int k = 0; k < q.cols(); ++k)
    if (q(l, k)) sum += qos.r_min_bpshz(k);
  return sum;
}

}  // namespace

SdpSlot build_init_sdp(const std::vector<MatX>& d0, const Eigen::MatrixXi& q0,
                       const ChannelBlock& block, const Scenario& s, const QosSpec& qos, int t) {
  const SimParams& p = s.params;
  const int L = p.num_uavs, K = p.num_users, M = p.uav_antennas, N = p.bs_antennas;
  const double sigma2 = p.noise_power_w();

  SdpSlot slot;
  cone::ProgramBuilder pb;

  // typical single-link powers used as variable scales
  auto data_scale = [&](int l, int k) {
    const double d = (Vec3(d0[l].col(t + 1)) - s.geometry.user_positions[k]).norm();
    const double gain = p.antenna_gain_data * std::pow(d, -p.pathloss_exponent_data);
    return std::clamp(qos.gamma_min(k) * sigma2 / (gain * M), 1e-15, p.p_uav_max);
  };
  auto fh_scale = [&](int l) {
    const double d = (Vec3(d0[l].col(t + 1)) - s.geometry.bs_position).norm();
    const double gain = p.antenna_gain_fh * std::pow(d, -p.pathloss_exponent_fh);
    const double target = std::max(std::exp2(rate_load(q0, qos, l)) - 1.0, 1e-6);
    return std::clamp(target * sigma2 / (gain * M * N), 1e-15, p.p_bs_max);
  };

  auto add_matrix = [&](int l, int k, int n, double scale) {
    SdpSlot::MatrixVar mv;
    mv.l = l;
    mv.k = k;
    mv.n = n;
    mv.scale = scale;
    const std::string tag = k < 0 ? "W_fh[" + std::to_string(l) + "]"
                                  : "W[" + std::to_string(l) + "][" + std::to_string(k) + "]";
    mv.x_base = pb.add_vars(n * (n + 1) / 2, tag + ".x");
    mv.y_base = pb.add_vars(n * (n - 1) / 2, tag + ".y");
    slot.vars.push_back(mv);
    return slot.vars.size() - 1;
  };

  std::vector<int> fh_idx(L);
  std::vector<std::vector<int>> data_idx(L, std::vector<int>(K, -1));
  for (int l = 0; l < L; ++l) fh_idx[l] = static_cast<int>(add_matrix(l, -1, N, fh_scale(l)));
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k)
      if (q0(l, k)) data_idx[l][k] = static_cast<int>(add_matrix(l, k, M, data_scale(l, k)));

  // objective
  for (int l = 0; l < L; ++l) {
    const LinExpr fh_tr = trace_of(slot.vars[fh_idx[l]], p.weight_bs());
    for (const auto& [var, c] : fh_tr.terms) pb.add_objective(var, c);
    for (int k = 0; k < K; ++k)
      if (data_idx[l][k] >= 0) {
        const LinExpr tr = trace_of(slot.vars[data_idx[l][k]], p.weight_uav(l));
        for (const auto& [var, c] : tr.terms) pb.add_objective(var, c);
      }
  }

  // C1
  LinExpr c1(p.p_bs_max);
  for (int l = 0; l < L; ++l) c1 += trace_of(slot.vars[fh_idx[l]], -1.0);
  pb.add_cone(Kind::NonNegative, {c1});

  // C2 and C4
  for (int l = 0; l < L; ++l) {
    const double nav =
        p.nav_c1 + p.nav_c2 * (Vec3(d0[l].col(t + 1)) - Vec3(d0[l].col(t))).norm();
    LinExpr c2(p.p_uav_max - nav);
    for (int k = 0; k < K; ++k)
      if (data_idx[l][k] >= 0) {
        c2 += trace_of(slot.vars[data_idx[l][k]], -1.0);
        pb.add_cone(Kind::NonNegative,
                    {LinExpr(p.p_uav_max) + trace_of(slot.vars[data_idx[l][k]], -1.0)});
      }
    pb.add_cone(Kind::NonNegative, {c2});
  }

  // C5 per user
  for (int k = 0; k < K; ++k) {
    LinExpr row(-sigma2);
    for (int l = 0; l < L; ++l) {
      const double d = (Vec3(d0[l].col(t + 1)) - s.geometry.user_positions[k]).norm();
      const double gain = p.antenna_gain_data * std::pow(d, -p.pathloss_exponent_data);
      const MatC G = block.g_data[l][k] * block.g_data[l][k].adjoint();
      const double gamma_k = 1.0 + 1.0 / qos.gamma_min(k);
      for (int j = 0; j < K; ++j) {
        if (data_idx[l][j] < 0) continue;
        const double coef = (j == k) ? gamma_k - 1.0 : -1.0;
        row += trace_term(slot.vars[data_idx[l][j]], G, gain * coef);
      }
    }
    pb.add_cone(Kind::NonNegative, {row});
  }

  // C6 per uav with assigned users
  for (int l = 0; l < L; ++l) {
    const double target = std::exp2(rate_load(q0, qos, l)) - 1.0;
    if (target <= 0.0) continue;
    const double d = (Vec3(d0[l].col(t + 1)) - s.geometry.bs_position).norm();
    const double gain = p.antenna_gain_fh * std::pow(d, -p.pathloss_exponent_fh);
    const MatC G = block.g_fh_rx[l].squaredNorm() * block.g_fh_tx[l] * block.g_fh_tx[l].adjoint();
    const double gamma_f = 1.0 + 1.0 / target;
    LinExpr row(-sigma2);
    for (int j = 0; j < L; ++j) {
      const double coef = (j == l) ? gamma_f - 1.0 : -1.0;
      row += trace_term(slot.vars[fh_idx[j]], G, gain * coef);
    }
    pb.add_cone(Kind::NonNegative, {row});
  }

  // C10: one PSD block per matrix
  for (const auto& mv : slot.vars) add_hermitian_psd(pb, mv);

  slot.program = pb.finalize();
  return slot;
}

MatC extract_matrix(const SdpSlot::MatrixVar& mv, const VecX& primal) {
  const int n = mv.n;
  MatC W = MatC::Zero(n, n);
  int xi = mv.x_base;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i, ++xi) {
      W(i, j) += mv.scale * primal(xi);
      if (i != j) W(j, i) += mv.scale * primal(xi);
    }
  int yi = mv.y_base;
  for (int j = 0; j < n; ++j)
    for (int i = j + 1; i < n; ++i, ++yi) {
      W(i, j) += Complex(0.0, mv.scale * primal(yi));
      W(j, i) -= Complex(0.0, mv.scale * primal(yi));
    }
  return W;
}

Rank1Extraction extract_rank1(const MatC& W, double tol) {
  Eigen::SelfAdjointEigenSolver<MatC> eig(W);
  const VecX& ev = eig.eigenvalues();
  const int n = static_cast<int>(ev.size());
  Rank1Extraction out;
  const double lmax = std::max(ev(n - 1), 0.0);
  if (lmax <= 0.0) {
    out.w = VecC::Zero(n);
    return out;
  }
  out.eig_ratio = n > 1 ? std::max(ev(n - 2), 0.0) / lmax : 0.0;
  out.w = std::sqrt(lmax) * eig.eigenvectors().col(n - 1);
  if (out.eig_ratio > tol)
    throw Rank1ViolationError("relaxation output is not rank-1: eigenvalue ratio " +
                                  std::to_string(out.eig_ratio),
                              out.eig_ratio);
  return out;
}

// ---------------------------------------------------------------------------
// slacks and full initialization
// ---------------------------------------------------------------------------

dcp::SlackVars construct_slacks(const Plan& plan, const ChannelBlock& block, const Scenario& s,
                                const QosSpec& qos, double beta) {
  const SimParams& p = s.params;
  dcp::SlackVars slacks;
  slacks.resize(p.num_uavs, p.num_users, p.num_slots);
  for (int l = 0; l < p.num_uavs; ++l) {
    double min_f = std::numeric_limits<double>::infinity();
    for (int t = 0; t < p.num_slots; ++t) {
      const SlotDistances d = distances(plan, s, t);
      for (int k = 0; k < p.num_users; ++k)
        slacks.tau_data[l](k, t) =
            std::pow(d.data(l, k), p.pathloss_exponent_data) / p.antenna_gain_data;
      min_f = std::min(min_f, sinr_fronthaul(plan, block, s, l, t));
    }
    slacks.tau_fh(l) = min_f;
    for (int k = 0; k < p.num_users; ++k) {
      double max_power = 0.0;
      for (int t = 0; t < p.num_slots; ++t)
        max_power = std::max(max_power, plan.w_data[l][k].col(t).squaredNorm());
      slacks.tau_q(l, k) = dcp::coop_indicator_from_power(beta, max_power);
    }
  }

  Plan staged = plan;
  staged.slacks = slacks;
  dcp::DcConstraintSet dc = dcp::build_dc_set(s, block, qos);
  dc.beta = beta;
  const dcp::DcViolations v = dc.evaluate(staged);
  if (v.max_violation > 1e-6)
    throw InitializationError("constructed starting point violates " + v.worst_id + " by " +
                              std::to_string(v.max_violation));
  return slacks;
}

namespace {

// Smallest factor c >= 1 such that scaling the given beams by sqrt(c)
// restores every listed SINR above its target with a tiny margin. SINRs of
// the form c*S / (sigma^2 + c*I) are increasing in c.
double restore_factor(const std::function<double(double)>& worst_margin) {
  if (worst_margin(1.0) >= 0.0) return 1.0;
  double hi = 1.0;
  for (int i = 0; i < 60 && worst_margin(hi) < 0.0; ++i) hi *= 2.0;
  double lo = 1.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (worst_margin(mid) >= 0.0 ? hi : lo) = mid;
  }
  return hi;
}

struct SlotBeams {
  std::vector<VecC> w_fh;                  // per uav
  std::vector<std::vector<VecC>> w_data;   // per uav, user
};

// Solve one slot's relaxation and extract beams. Returns the solver status;
// fills ratios/fallbacks.
cone::Status solve_slot(const std::vector<MatX>& d0, const Eigen::MatrixXi& q0,
                        const ChannelBlock& block, const Scenario& s, const QosSpec& qos, int t,
                        const InitConfig& cfg, SlotBeams& beams, double* max_ratio,
                        int* fallbacks, std::uint64_t round_seed) {
  const SimParams& p = s.params;
  const SdpSlot slot = build_init_sdp(d0, q0, block, s, qos, t);
  cone::SolveSettings st;
  const cone::ConeSolution sol = cone::solve(slot.program, st);
  if (sol.status != cone::Status::Optimal) return sol.status;

  beams.w_fh.assign(p.num_uavs, VecC::Zero(p.bs_antennas));
  beams.w_data.assign(p.num_uavs, std::vector<VecC>(p.num_users, VecC::Zero(p.uav_antennas)));
  for (const auto& mv : slot.vars) {
    const MatC W = extract_matrix(mv, sol.primal);
    VecC w;
    if (W.trace().real() <= 1e-8 * mv.scale * mv.n) {
      // numerically zero matrix (an unused beam) carries no rank information
      w = VecC::Zero(mv.n);
      if (mv.k < 0) beams.w_fh[mv.l] = w; else beams.w_data[mv.l][mv.k] = w;
      continue;
    }
    try {
      const Rank1Extraction ex = extract_rank1(W, cfg.rank1_tol);
      *max_ratio = std::max(*max_ratio, ex.eig_ratio);
      w = ex.w;
    } catch (const Rank1ViolationError& e) {
      // Gaussian rounding fallback, kept deterministic per (slot, matrix)
      *max_ratio = std::max(*max_ratio, e.eig_ratio);
      ++*fallbacks;
      Eigen::SelfAdjointEigenSolver<MatC> eig(W);
      const MatC root = eig.eigenvectors() *
                        eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                        eig.eigenvectors().adjoint();
      Rng rng(mix64(round_seed, (static_cast<std::uint64_t>(mv.l) << 8) ^
                                    static_cast<std::uint64_t>(mv.k + 1)));
      double best_power = std::numeric_limits<double>::infinity();
      for (int draw = 0; draw < 50; ++draw) {
        VecC xi(mv.n);
        for (int i = 0; i < mv.n; ++i) xi(i) = rng.cnormal(1.0);
        VecC cand = root * xi;
        if (cand.squaredNorm() <= 0.0) continue;
        // scale to the relaxation's power budget for this matrix
        cand *= std::sqrt(std::max(W.trace().real(), 0.0) / cand.squaredNorm());
        if (cand.squaredNorm() < best_power) {
          best_power = cand.squaredNorm();
          w = cand;
        }
      }
    }
    if (mv.k < 0)
      beams.w_fh[mv.l] = w;
    else
      beams.w_data[mv.l][mv.k] = w;
  }
  return cone::Status::Optimal;
}

}  // namespace

InitResult initialize(const Scenario& s, const ChannelBlock& block, const QosSpec& qos,
                      const InitConfig& cfg, const dcp::FreezeSpec& freeze,
                      double beta_request) {
  const SimParams& p = s.params;
  const int L = p.num_uavs, K = p.num_users, T = p.num_slots;
  const double sigma2 = p.noise_power_w();

  InitResult res;

  // trajectory: frozen one if provided, else hover
  std::vector<MatX> d0;
  if (freeze.trajectory)
    d0 = *freeze.trajectory;
  else
    d0 = initial_trajectory_and_coop(s, cfg).first;

  auto attempt = [&](const Eigen::MatrixXi& q0) -> bool {
    res.plan = Plan::zero(s);
    res.plan.trajectory = d0;
    res.plan.q = q0;
    res.q0 = q0;
    res.max_eig_ratio = 0.0;
    res.rank1_fallbacks = 0;
    res.slot_statuses.assign(T, cone::Status::NumericalLimit);

    SlotBeams beams;
    for (int t = 0; t < T; ++t) {
      // hover slots repeat; reuse the previous solution when nothing changed
      bool same = t > 0;
      if (same)
        for (int l = 0; l < L; ++l)
          same = same && d0[l].col(t + 1) == d0[l].col(t) && d0[l].col(t) == d0[l].col(t - 1);
      if (!same) {
        const cone::Status st = solve_slot(d0, q0, block, s, qos, t, cfg, beams,
                                           &res.max_eig_ratio, &res.rank1_fallbacks,
                                           mix64(s.seed, static_cast<std::uint64_t>(t)));
        res.slot_statuses[t] = st;
        if (st != cone::Status::Optimal) return false;
      } else {
        res.slot_statuses[t] = res.slot_statuses[t - 1];
      }
      for (int l = 0; l < L; ++l) {
        res.plan.w_fh[l].col(t) = beams.w_fh[l];
        for (int k = 0; k < K; ++k) res.plan.w_data[l][k].col(t) = beams.w_data[l][k];
      }
    }
    return true;
  };

  Eigen::MatrixXi q0;
  if (freeze.coop) {
    q0 = *freeze.coop;
    if (!attempt(q0))
      throw InitializationError("initial relaxation infeasible under the frozen cooperation");
  } else {
    q0 = initial_trajectory_and_coop(s, cfg).second;
    if (!attempt(q0)) {
      res.used_full_coop_fallback = true;
      q0.setOnes();
      if (!attempt(q0))
        throw InitializationError(
            "initial relaxation infeasible for both nearest-uav and full cooperation");
    }
  }

  // keep-alive fronthaul beams for idle UAVs
  for (int l = 0; l < L; ++l) {
    if (rate_load(res.plan.q, qos, l) > 0.0) continue;
    for (int t = 0; t < T; ++t) {
      const SlotDistances d = distances(res.plan, s, t);
      const double gain = p.antenna_gain_fh * std::pow(d.fh(l), -p.pathloss_exponent_fh);
      const VecC& gt = block.g_fh_tx[l];
      const double power = cfg.keepalive_sinr * sigma2 /
                           (gain * gt.squaredNorm() * block.g_fh_rx[l].squaredNorm());
      res.plan.w_fh[l].col(t) = std::sqrt(power / gt.squaredNorm()) * gt;
    }
  }

  // restore the extraction and keep-alive interference losses with a common
  // scaling of each beam family
  {
    Plan& plan = res.plan;
    auto data_margin = [&](double c) {
      double worst = std::numeric_limits<double>::infinity();
      Plan scaled = plan;
      const double sc = std::sqrt(c);
      for (int l = 0; l < L; ++l)
        for (int k = 0; k < K; ++k) scaled.w_data[l][k] *= sc;
      for (int t = 0; t < T; ++t)
        for (int k = 0; k < K; ++k)
          worst = std::min(worst, sinr_data(scaled, block, s, k, t) -
                                      qos.gamma_min(k) * (1.0 + 1e-8));
      return worst;
    };
    const double c_data = restore_factor(data_margin);
    for (int l = 0; l < L; ++l)
      for (int k = 0; k < K; ++k) plan.w_data[l][k] *= std::sqrt(c_data);

    auto fh_margin = [&](double c) {
      double worst = std::numeric_limits<double>::infinity();
      Plan scaled = plan;
      const double sc = std::sqrt(c);
      for (int l = 0; l < L; ++l) scaled.w_fh[l] *= sc;
      for (int t = 0; t < T; ++t)
        for (int l = 0; l < L; ++l) {
          const double target = std::exp2(rate_load(plan.q, qos, l)) - 1.0;
          if (target <= 0.0) continue;
          worst = std::min(worst, sinr_fronthaul(scaled, block, s, l, t) -
                                      target * (1.0 + 1e-8));
        }
      return worst;
    };
    const double c_fh = restore_factor(fh_margin);
    for (int l = 0; l < L; ++l) plan.w_fh[l] *= std::sqrt(c_fh);
  }

  // soften beta if the extracted link powers would saturate the indicator
  double beta = beta_request > 0.0 ? beta_request : p.beta_effective();
  double max_link_power = 0.0;
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k)
      for (int t = 0; t < T; ++t)
        max_link_power =
            std::max(max_link_power, res.plan.w_data[l][k].col(t).squaredNorm());
  if (max_link_power > 0.0 && beta * max_link_power > 12.0)
    beta = 12.0 / max_link_power;
  res.beta_used = beta;

  res.plan.slacks = construct_slacks(res.plan, block, s, qos, beta);
  return res;
}

}  // namespace uavplan::sdr
