#include "uavplan/ccp.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "uavplan/solver.hpp"

namespace uavplan::ccp {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string trace_to_csv(const CcpTrace& trace) {
  std::string out = "iter,objective_w,max_dc_violation,status,seconds\n";
  for (const auto& row : trace.rows) {
    out += std::to_string(row.iter) + "," + fmt_g(row.objective_w) + "," +
           fmt_g(row.max_dc_violation) + "," + row.status + "," + fmt_g(row.seconds) + "\n";
  }
  return out;
}

Plan extract_coop(const Plan& plan, double q_threshold) {
  Plan out = plan;
  const int L = plan.num_uavs(), K = plan.num_users(), T = plan.num_slots();
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k) {
      double max_power = 0.0;
      for (int t = 0; t < T; ++t)
        max_power = std::max(max_power, plan.w_data[l][k].col(t).squaredNorm());
      out.q(l, k) = max_power > q_threshold ? 1 : 0;
      if (!out.q(l, k)) out.w_data[l][k].setZero();
    }
  return out;
}

PolishResult polish(const Plan& plan, const Scenario& s, const ChannelBlock& block,
                    const QosSpec& qos, const CcpSettings& settings) {
  PolishResult res;
  res.plan = plan;
  dcp::FreezeSpec freeze;
  freeze.trajectory = plan.trajectory;
  freeze.coop = plan.q;
  try {
    sdr::InitResult init =
        sdr::initialize(s, block, qos, settings.init, freeze, settings.beta);
    res.plan = init.plan;
    res.plan.q = plan.q;
    // polished plans are final: idle fronthaul links carry no keep-alive beam
    for (int l = 0; l < plan.num_uavs(); ++l) {
      bool idle = true;
      for (int k = 0; k < plan.num_users(); ++k) idle = idle && !plan.q(l, k);
      if (idle) {
        res.plan.w_fh[l].setZero();
        res.plan.slacks.tau_fh(l) = 0.0;
      }
    }
  } catch (const InitializationError&) {
    res.fallback = true;
  } catch (const cone::ValidationError&) {
    res.fallback = true;
  }
  return res;
}

RunResult run(const Scenario& s, const ChannelBlock& block, const QosSpec& qos,
              const CcpSettings& settings, const dcp::FreezeSpec& freeze) {
  RunResult res;
  const double t_start = now_seconds();

  res.init = sdr::initialize(s, block, qos, settings.init, freeze, settings.beta);
  res.beta_used = res.init.beta_used;

  dcp::DcConstraintSet dc = dcp::build_dc_set(s, block, qos);
  dc.beta = res.beta_used;

  Plan current = res.init.plan;
  double f_prev = objective(current, s).weighted_total;
  res.trace.rows.push_back(
      {0, f_prev, dc.evaluate(current).max_violation, "init", now_seconds() - t_start});

  const double epsilon = settings.epsilon > 0.0 ? settings.epsilon : 1e-3 * f_prev;

  Plan best = current;
  double f_best = f_prev;
  res.trace.converged = false;

  dcp::AssembleOptions opt;
  opt.cone_mode = settings.cone_mode;
  opt.freeze = freeze;

  for (int m = 1; m <= settings.max_iters; ++m) {
    const double t_iter = now_seconds();
    dcp::Subproblem sp;
    cone::ConeSolution sol;
    try {
      sp = dcp::assemble_subproblem(current, dc, s, opt);
      cone::SolveSettings st = settings.solver;
      st.initial_point = dcp::embed_plan(sp, current, dc);
      sol = cone::solve(sp.program, st);
    } catch (const Error& e) {
      res.trace.message = std::string("iteration ") + std::to_string(m) + ": " + e.what();
      break;
    }
    if (sol.status != cone::Status::Optimal) {
      res.trace.message =
          "iteration " + std::to_string(m) + ": solver " + cone::status_name(sol.status);
      break;
    }
    current = dcp::plan_from_solution(sp, sol.primal, current, s);
    const double f_m = objective(current, s).weighted_total;
    res.trace.rows.push_back({m, f_m, dc.evaluate(current).max_violation,
                              cone::status_name(sol.status), now_seconds() - t_iter});
    if (f_m < f_best) {
      f_best = f_m;
      best = current;
    }
    const double error = f_prev - f_m;
    f_prev = f_m;
    if (error <= epsilon) {
      res.trace.converged = true;
      break;
    }
  }
  if (!res.trace.converged && res.trace.message.empty())
    res.trace.message = "iteration limit reached";

  res.plan = best;

  // frozen cooperation stays exactly as given; otherwise read the binary
  // flags off the beam powers
  const double q_threshold =
      settings.q_threshold > 0.0 ? settings.q_threshold : 1e-9 * s.params.p_uav_max;
  Plan extracted = freeze.coop ? res.plan : extract_coop(res.plan, q_threshold);
  if (settings.polish) {
    PolishResult pol = polish(extracted, s, block, qos, settings);
    res.polish_fallback = pol.fallback;
    if (!pol.fallback) {
      res.plan = pol.plan;
      res.polished = true;
    } else if (!freeze.coop) {
      // keep the raw iterate; flag cooperation from any remaining power
      res.plan = extract_coop(res.plan, 0.0);
    }
  } else {
    res.plan = extracted;
  }
  return res;
}

}  // namespace uavplan::ccp
