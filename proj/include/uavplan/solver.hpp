// Interior-point solve of a ConeProgram.
//
// Path-following barrier method: a feasibility phase locates a strictly
// interior point (or certifies infeasibility), then Newton centering steps
// follow the central path until the duality gap meets the tolerances. Dual
// variables are read off the barrier gradient at the final center, so an
// Optimal status comes with residual and gap certificates.
#pragma once

#include "uavplan/cone.hpp"

namespace uavplan::cone {

enum class Status { Optimal, Infeasible, Unbounded, NumericalLimit, IterationLimit };

std::string status_name(Status s);

struct SolveSettings {
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  int max_iters = 200;  // outer path-following updates
  bool verbose = false;
  // optional warm start; used as the feasibility-phase initial point
  VecX initial_point;
};

struct ConeSolution {
  Status status = Status::NumericalLimit;
  VecX primal;
  double objective_value = 0.0;
  double dual_residual = 0.0;
  double primal_residual = 0.0;
  double gap = 0.0;
  int newton_steps = 0;
  std::string message;
};

// Throws ValidationError for malformed programs.
ConeSolution solve(const ConeProgram& p, const SolveSettings& settings = SolveSettings{});

}  // namespace uavplan::cone
