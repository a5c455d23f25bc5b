#include "uavplan/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <cstdio>

namespace uavplan::cone {

std::string status_name(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::NumericalLimit: return "NumericalLimit";
    case Status::IterationLimit: return "IterationLimit";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2 = std::sqrt(2.0);

MatX smat(const VecX& s, int p) {
  MatX S(p, p);
  int m = 0;
  for (int j = 0; j < p; ++j)
    for (int i = j; i < p; ++i, ++m) {
      if (i == j)
        S(i, j) = s(m);
      else
        S(i, j) = S(j, i) = s(m) / kSqrt2;
    }
  return S;
}

VecX svec(const MatX& S) {
  const int p = static_cast<int>(S.rows());
  VecX s(p * (p + 1) / 2);
  int m = 0;
  for (int j = 0; j < p; ++j)
    for (int i = j; i < p; ++i, ++m) s(m) = (i == j) ? S(i, j) : kSqrt2 * 0.5 * (S(i, j) + S(j, i));
  return s;
}

// One canonicalized cone block: rows s = Ad * x(cols) + b, s in K.
struct Block {
  Kind kind = Kind::NonNegative;
  int dim = 0;
  double exponent = 0.0;
  int order = 0;
  double nu = 0.0;
  std::vector<int> cols;
  MatX Ad;  // dim x cols.size()
  VecX b;
};

double block_nu(const Block& blk) {
  switch (blk.kind) {
    case Kind::NonNegative: return blk.dim;
    case Kind::SecondOrder: return 2.0;
    case Kind::RotatedSecondOrder: return 2.0;
    case Kind::Exponential: return 3.0;
    case Kind::Power: return 3.0;
    case Kind::PositiveSemidefinite: return blk.order;
    default: return 0.0;
  }
}

bool interior(const Block& blk, const VecX& s) {
  if (!s.allFinite()) return false;
  switch (blk.kind) {
    case Kind::NonNegative:
      return (s.array() > 0.0).all();
    case Kind::SecondOrder: {
      if (s(0) <= 0.0) return false;
      const double r = s(0) * s(0) - s.tail(s.size() - 1).squaredNorm();
      return r > 0.0;
    }
    case Kind::RotatedSecondOrder: {
      if (s(0) <= 0.0 || s(1) <= 0.0) return false;
      const double q = s.size() > 2 ? s.tail(s.size() - 2).squaredNorm() : 0.0;
      return 2.0 * s(0) * s(1) - q > 0.0;
    }
    case Kind::Exponential: {
      const double x = s(0), y = s(1), z = s(2);
      if (y <= 0.0 || z <= 0.0) return false;
      return y * std::log(z / y) - x > 0.0;
    }
    case Kind::Power: {
      const double x = s(0), y = s(1), z = s(2), a = blk.exponent;
      if (x <= 0.0 || y <= 0.0) return false;
      return std::pow(x, 2.0 * a) * std::pow(y, 2.0 - 2.0 * a) - z * z > 0.0;
    }
    case Kind::PositiveSemidefinite: {
      Eigen::LLT<MatX> llt(smat(s, blk.order));
      return llt.info() == Eigen::Success;
    }
    default:
      return true;
  }
}

// Barrier value; +inf outside the interior.
double barrier_value(const Block& blk, const VecX& s) {
  if (!interior(blk, s)) return kInf;
  switch (blk.kind) {
    case Kind::NonNegative:
      return -s.array().log().sum();
    case Kind::SecondOrder:
      return -std::log(s(0) * s(0) - s.tail(s.size() - 1).squaredNorm());
    case Kind::RotatedSecondOrder: {
      const double q = s.size() > 2 ? s.tail(s.size() - 2).squaredNorm() : 0.0;
      return -std::log(2.0 * s(0) * s(1) - q);
    }
    case Kind::Exponential: {
      const double x = s(0), y = s(1), z = s(2);
      return -std::log(y * std::log(z / y) - x) - std::log(y) - std::log(z);
    }
    case Kind::Power: {
      const double x = s(0), y = s(1), z = s(2), a = blk.exponent;
      return -std::log(std::pow(x, 2.0 * a) * std::pow(y, 2.0 - 2.0 * a) - z * z) -
             (1.0 - a) * std::log(x) - a * std::log(y);
    }
    case Kind::PositiveSemidefinite: {
      Eigen::LLT<MatX> llt(smat(s, blk.order));
      double logdet = 0.0;
      for (int i = 0; i < blk.order; ++i) logdet += std::log(llt.matrixL()(i, i));
      return -2.0 * logdet;
    }
    default:
      return 0.0;
  }
}

// Gradient and Hessian of the barrier at an interior point.
void barrier_grad_hess(const Block& blk, const VecX& s, VecX& g, MatX& H) {
  const int d = blk.dim;
  g.resize(d);
  H.resize(d, d);
  switch (blk.kind) {
    case Kind::NonNegative: {
      g = -s.cwiseInverse();
      H = s.array().square().inverse().matrix().asDiagonal();
      break;
    }
    case Kind::SecondOrder: {
      const double r = s(0) * s(0) - s.tail(d - 1).squaredNorm();
      VecX dr(d);
      dr(0) = 2.0 * s(0);
      dr.tail(d - 1) = -2.0 * s.tail(d - 1);
      g = -dr / r;
      H = dr * dr.transpose() / (r * r);
      H(0, 0) -= 2.0 / r;
      for (int i = 1; i < d; ++i) H(i, i) += 2.0 / r;
      break;
    }
    case Kind::RotatedSecondOrder: {
      const double q = d > 2 ? s.tail(d - 2).squaredNorm() : 0.0;
      const double r = 2.0 * s(0) * s(1) - q;
      VecX dr(d);
      dr(0) = 2.0 * s(1);
      dr(1) = 2.0 * s(0);
      if (d > 2) dr.tail(d - 2) = -2.0 * s.tail(d - 2);
      g = -dr / r;
      H = dr * dr.transpose() / (r * r);
      H(0, 1) -= 2.0 / r;
      H(1, 0) -= 2.0 / r;
      for (int i = 2; i < d; ++i) H(i, i) += 2.0 / r;
      break;
    }
    case Kind::Exponential: {
      const double x = s(0), y = s(1), z = s(2);
      const double lg = std::log(z / y);
      const double u = y * lg - x;
      Eigen::Vector3d du(-1.0, lg - 1.0, y / z);
      Eigen::Matrix3d d2u = Eigen::Matrix3d::Zero();
      d2u(1, 1) = -1.0 / y;
      d2u(1, 2) = d2u(2, 1) = 1.0 / z;
      d2u(2, 2) = -y / (z * z);
      g = -du / u;
      g(1) -= 1.0 / y;
      g(2) -= 1.0 / z;
      H = du * du.transpose() / (u * u) - d2u / u;
      H(1, 1) += 1.0 / (y * y);
      H(2, 2) += 1.0 / (z * z);
      break;
    }
    case Kind::Power: {
      const double x = s(0), y = s(1), z = s(2), a = blk.exponent;
      const double xa = std::pow(x, 2.0 * a), yb = std::pow(y, 2.0 - 2.0 * a);
      const double u = xa * yb - z * z;
      Eigen::Vector3d du(2.0 * a * xa / x * yb, (2.0 - 2.0 * a) * xa * yb / y, -2.0 * z);
      Eigen::Matrix3d d2u = Eigen::Matrix3d::Zero();
      d2u(0, 0) = 2.0 * a * (2.0 * a - 1.0) * xa / (x * x) * yb;
      d2u(0, 1) = d2u(1, 0) = 2.0 * a * (2.0 - 2.0 * a) * xa / x * yb / y;
      d2u(1, 1) = (2.0 - 2.0 * a) * (1.0 - 2.0 * a) * xa * yb / (y * y);
      d2u(2, 2) = -2.0;
      g = -du / u;
      g(0) -= (1.0 - a) / x;
      g(1) -= a / y;
      H = du * du.transpose() / (u * u) - d2u / u;
      H(0, 0) += (1.0 - a) / (x * x);
      H(1, 1) += a / (y * y);
      break;
    }
    case Kind::PositiveSemidefinite: {
      const int p = blk.order;
      const MatX S = smat(s, p);
      const MatX Q = S.llt().solve(MatX::Identity(p, p));
      g = -svec(Q);
      // H column m = svec(Q E_m Q) over the svec basis
      int m = 0;
      for (int j = 0; j < p; ++j) {
        for (int i = j; i < p; ++i, ++m) {
          MatX Em;
          if (i == j)
            Em = Q.col(i) * Q.row(i);
          else
            Em = (Q.col(i) * Q.row(j) + Q.col(j) * Q.row(i)) * (1.0 / kSqrt2);
          H.col(m) = svec(Em);
        }
      }
      H = 0.5 * (H + H.transpose());
      break;
    }
    default:
      g.setZero();
      H.setZero();
  }
}

// Canonical strictly interior direction of each cone.
VecX interior_ray(const Block& blk) {
  VecX e = VecX::Zero(blk.dim);
  switch (blk.kind) {
    case Kind::NonNegative:
      e.setOnes();
      break;
    case Kind::SecondOrder:
      e(0) = 1.0;
      break;
    case Kind::RotatedSecondOrder:
      e(0) = 1.0;
      e(1) = 1.0;
      break;
    case Kind::Exponential:
      e = Eigen::Vector3d(-1.0, 1.0, 2.0);
      break;
    case Kind::Power:
      e = Eigen::Vector3d(1.0, 1.0, 0.0);
      break;
    case Kind::PositiveSemidefinite: {
      int m = 0;
      for (int j = 0; j < blk.order; ++j)
        for (int i = j; i < blk.order; ++i, ++m) e(m) = (i == j) ? 1.0 : 0.0;
      break;
    }
    default:
      break;
  }
  return e;
}

struct Internal {
  int n = 0;                     // variable count (without phase-1 extras)
  VecX c;                        // normalized objective
  double c_norm = 1.0;
  std::vector<Block> blocks;
  Eigen::SparseMatrix<double> E;  // equality rows (scaled)
  VecX e;
  bool has_eq = false;
  double nu = 0.0;
};

// Split cones, canonicalize rotated cones, apply per-block scaling.
Internal build_internal(const ConeProgram& p) {
  Internal in;
  in.n = p.num_vars;
  in.c_norm = std::max(p.c.size() ? p.c.cwiseAbs().maxCoeff() : 0.0, 1e-30);
  in.c = p.c / in.c_norm;

  std::vector<Eigen::Triplet<double>> eq_trips;
  std::vector<double> eq_b;

  int row = 0;
  for (const auto& cone : p.cones) {
    if (cone.kind == Kind::Zero) {
      row += cone.dim;  // handled in a second pass
      continue;
    }
    Block blk;
    blk.kind = cone.kind;
    blk.dim = cone.dim;
    blk.exponent = cone.exponent;
    blk.order = cone.order;

    // collect active columns of this row range
    std::vector<int> cols;
    {
      std::vector<char> seen(p.num_vars, 0);
      for (int col = 0; col < p.A.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(p.A, col); it; ++it)
          if (it.row() >= row && it.row() < row + cone.dim && it.value() != 0.0 && !seen[col]) {
            seen[col] = 1;
            cols.push_back(col);
          }
      std::sort(cols.begin(), cols.end());
    }
    blk.cols = cols;
    blk.Ad = MatX::Zero(cone.dim, static_cast<int>(cols.size()));
    blk.b = p.b.segment(row, cone.dim);
    for (std::size_t ci = 0; ci < cols.size(); ++ci)
      for (Eigen::SparseMatrix<double>::InnerIterator it(p.A, cols[ci]); it; ++it)
        if (it.row() >= row && it.row() < row + cone.dim)
          blk.Ad(it.row() - row, static_cast<int>(ci)) += it.value();

    if (cone.kind == Kind::RotatedSecondOrder) {
      // anisotropic equilibration (u/a, v/b, x/sqrt(ab)) preserves the cone
      // and avoids the catastrophic u/v imbalance these blocks carry
      auto row_mag = [&](int r) {
        double m = std::abs(blk.b(r));
        if (blk.Ad.cols() > 0) m = std::max(m, blk.Ad.row(r).cwiseAbs().maxCoeff());
        return std::isfinite(m) && m > 0.0 ? m : 1.0;
      };
      const double a = row_mag(0), bb = row_mag(1), sx = std::sqrt(a * bb);
      blk.Ad.row(0) /= a;
      blk.b(0) /= a;
      blk.Ad.row(1) /= bb;
      blk.b(1) /= bb;
      if (blk.dim > 2) {
        blk.Ad.bottomRows(blk.dim - 2) /= sx;
        blk.b.tail(blk.dim - 2) /= sx;
      }
    } else {
      double scale = std::max(blk.b.cwiseAbs().maxCoeff(),
                              blk.Ad.size() ? blk.Ad.cwiseAbs().maxCoeff() : 0.0);
      if (scale <= 0.0 || !std::isfinite(scale)) scale = 1.0;
      blk.Ad /= scale;
      blk.b /= scale;
    }

    blk.nu = block_nu(blk);
    in.nu += blk.nu;
    in.blocks.push_back(std::move(blk));
    row += cone.dim;
  }

  // second pass: equality rows
  row = 0;
  for (const auto& cone : p.cones) {
    if (cone.kind != Kind::Zero) {
      row += cone.dim;
      continue;
    }
    // gather the rows densely via column iteration
    MatX rows = MatX::Zero(cone.dim, p.num_vars);
    for (int col = 0; col < p.A.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(p.A, col); it; ++it)
        if (it.row() >= row && it.row() < row + cone.dim) rows(it.row() - row, col) += it.value();
    for (int r = 0; r < cone.dim; ++r) {
      double scale = std::max(rows.row(r).cwiseAbs().maxCoeff(), std::abs(p.b(row + r)));
      if (scale <= 0.0 || !std::isfinite(scale)) scale = 1.0;
      const int er = static_cast<int>(eq_b.size());
      for (int col = 0; col < p.num_vars; ++col)
        if (rows(r, col) != 0.0) eq_trips.emplace_back(er, col, rows(r, col) / scale);
      eq_b.push_back(p.b(row + r) / scale);
    }
    row += cone.dim;
  }
  if (!eq_b.empty()) {
    in.has_eq = true;
    in.E.resize(static_cast<int>(eq_b.size()), p.num_vars);
    in.E.setFromTriplets(eq_trips.begin(), eq_trips.end());
    in.e = Eigen::Map<const VecX>(eq_b.data(), static_cast<int>(eq_b.size()));
  }
  return in;
}

class BarrierSolver {
 public:
  BarrierSolver(const ConeProgram& p, const SolveSettings& st)
      : prog_(p), st_(st), in_(build_internal(p)) {}

  ConeSolution run();

 private:
  struct CenterResult {
    bool converged = false;
    bool line_search_failed = false;
    bool factor_failed = false;
  };

  VecX slack(const Block& blk, const VecX& x) const {
    VecX loc(blk.cols.size());
    for (std::size_t i = 0; i < blk.cols.size(); ++i) loc(static_cast<int>(i)) = x(blk.cols[i]);
    return blk.Ad * loc + blk.b;
  }

  bool all_interior(const std::vector<Block>& blocks, const VecX& x) const {
    for (const auto& blk : blocks)
      if (!interior(blk, slack(blk, x))) return false;
    return true;
  }

  double merit(const std::vector<Block>& blocks, const VecX& cvec, double t,
               const VecX& x) const {
    double val = t * cvec.dot(x);
    for (const auto& blk : blocks) {
      const double phi = barrier_value(blk, slack(blk, x));
      if (!std::isfinite(phi)) return kInf;
      val += phi;
    }
    return val;
  }

  // One Newton centering pass for min t*c'x + sum phi(s(x)) s.t. E x + e = 0.
  CenterResult center(const std::vector<Block>& blocks, const VecX& cvec, double t, VecX& x,
                      double newton_tol, int max_steps,
                      const std::function<bool(const VecX&)>& early_stop);

  ConeSolution finish(VecX x, Status status, const std::string& message, int newton_steps);

  const ConeProgram& prog_;
  SolveSettings st_;
  Internal in_;
  int total_newton_ = 0;
};

BarrierSolver::CenterResult BarrierSolver::center(
    const std::vector<Block>& blocks, const VecX& cvec, double t, VecX& x, double newton_tol,
    int max_steps, const std::function<bool(const VecX&)>& early_stop) {
  CenterResult res;
  const int n = static_cast<int>(x.size());
  const int ne = in_.has_eq ? static_cast<int>(in_.e.size()) : 0;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;

  for (int step = 0; step < max_steps; ++step) {
    if (early_stop && early_stop(x)) {
      res.converged = true;
      return res;
    }
    // gradient and Hessian
    VecX g = t * cvec;
    std::vector<Eigen::Triplet<double>> ht;
    for (const auto& blk : blocks) {
      const VecX s = slack(blk, x);
      VecX gb;
      MatX Hb;
      barrier_grad_hess(blk, s, gb, Hb);
      const VecX gl = blk.Ad.transpose() * gb;
      const MatX Hl = blk.Ad.transpose() * Hb * blk.Ad;
      const int nc = static_cast<int>(blk.cols.size());
      for (int i = 0; i < nc; ++i) {
        g(blk.cols[i]) += gl(i);
        // keep the structural pattern fixed across Newton steps (exact zeros
        // included) so the symbolic factorization can be reused
        for (int j = 0; j < nc; ++j) ht.emplace_back(blk.cols[i], blk.cols[j], Hl(i, j));
      }
    }

    double reg = 1e-12;
    VecX dx;
    bool solved = false;
    for (int attempt = 0; attempt < 8 && !solved; ++attempt, reg *= 100.0) {
      if (!in_.has_eq) {
        Eigen::SparseMatrix<double> H(n, n);
        H.setFromTriplets(ht.begin(), ht.end());
        // symmetric Jacobi equilibration tames the barrier blow-up near the
        // boundary (diagonal spread ~ 1/gap^2 otherwise)
        const VecX d = H.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
        Eigen::SparseMatrix<double> Hs = d.asDiagonal() * H * d.asDiagonal();
        for (int i = 0; i < n; ++i) Hs.coeffRef(i, i) += reg;
        if (!analyzed) {
          ldlt.analyzePattern(Hs);
          analyzed = true;
        }
        ldlt.factorize(Hs);
        if (ldlt.info() != Eigen::Success) continue;
        const VecX rhs = -(d.asDiagonal() * g);
        VecX y = ldlt.solve(rhs);
        for (int refine = 0; refine < 2; ++refine) y += ldlt.solve(rhs - Hs * y);
        dx = d.asDiagonal() * y;
        solved = dx.allFinite();
      } else {
        // factorize [[H, E'], [E, -reg I]] (scaled), then refine against the
        // unregularized KKT so the equality rows stay exact as t grows
        Eigen::SparseMatrix<double> H(n, n);
        H.setFromTriplets(ht.begin(), ht.end());
        VecX d(n + ne);
        d.head(n) = H.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
        d.tail(ne).setOnes();
        std::vector<Eigen::Triplet<double>> kt;
        for (int col = 0; col < H.outerSize(); ++col)
          for (Eigen::SparseMatrix<double>::InnerIterator it(H, col); it; ++it)
            kt.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                            it.value() * d(it.row()) * d(it.col()));
        for (int col = 0; col < in_.E.outerSize(); ++col)
          for (Eigen::SparseMatrix<double>::InnerIterator it(in_.E, col); it; ++it) {
            const double v = it.value() * d(it.col());
            kt.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()), v);
            kt.emplace_back(static_cast<int>(it.col()), n + static_cast<int>(it.row()), v);
          }
        std::vector<Eigen::Triplet<double>> kt0 = kt;
        for (int i = 0; i < n + ne; ++i) kt.emplace_back(i, i, i < n ? reg : -reg);
        Eigen::SparseMatrix<double> K(n + ne, n + ne), K0(n + ne, n + ne);
        K.setFromTriplets(kt.begin(), kt.end());
        K0.setFromTriplets(kt0.begin(), kt0.end());
        VecX rhs(n + ne);
        rhs.head(n) = -(d.head(n).asDiagonal() * g);
        rhs.tail(ne) = -(in_.E * x + in_.e);
        lu.compute(K);
        if (lu.info() != Eigen::Success) continue;
        VecX z = lu.solve(rhs);
        for (int refine = 0; refine < 3; ++refine) {
          const VecX r = rhs - K0 * z;
          if (r.cwiseAbs().maxCoeff() <= 1e-14 * rhs.cwiseAbs().maxCoeff()) break;
          z += lu.solve(r);
        }
        dx = d.head(n).asDiagonal() * z.head(n);
        solved = dx.allFinite();
      }
    }
    ++total_newton_;
    if (!solved) {
      res.factor_failed = true;
      return res;
    }

    const double decrement2 = std::max(-g.dot(dx), 0.0);
    if (0.5 * decrement2 <= newton_tol) {
      res.converged = true;
      return res;
    }

    // Backtrack into the interior. Outside the quadratic-convergence region
    // also require Armijo decrease; near the center the merit difference
    // drowns in roundoff at large t, where a noise-tolerant check must do.
    double alpha = 1.0;
    int guard = 0;
    while (guard++ < 120 && !all_interior(blocks, x + alpha * dx)) alpha *= 0.5;
    const double psi0 = merit(blocks, cvec, t, x);
    const double noise = 1e-9 * (1.0 + std::abs(psi0));
    while (guard++ < 240) {
      const double psi1 = merit(blocks, cvec, t, x + alpha * dx);
      const double required =
          decrement2 > 0.0625 ? psi0 + 0.01 * alpha * g.dot(dx) : psi0 + noise;
      if (psi1 <= required) break;
      alpha *= 0.5;
      if (alpha < 1e-15) break;
    }
    if (alpha < 1e-15 || !all_interior(blocks, x + alpha * dx)) {
      res.line_search_failed = true;
      return res;
    }
    if (st_.verbose)
      std::fprintf(stderr, "  [newton] step %d t %.2e dec2 %.3e alpha %.3e |dx| %.3e\n", step, t,
                   decrement2, alpha, dx.norm());
    x += alpha * dx;
  }
  return res;  // hit max_steps; treat as converged-enough
}

ConeSolution BarrierSolver::finish(VecX x, Status status, const std::string& message,
                                   int newton_steps) {
  ConeSolution sol;
  sol.status = status;
  sol.primal = x;
  sol.newton_steps = newton_steps;
  sol.message = message;
  if (x.size() == prog_.num_vars && prog_.num_vars >= 0) {
    sol.objective_value = (prog_.c.size() ? prog_.c.dot(x) : 0.0) + prog_.c0;
  }
  return sol;
}

ConeSolution BarrierSolver::run() {
  const int n = in_.n;

  // trivial programs
  if (in_.blocks.empty() && !in_.has_eq) {
    VecX x = VecX::Zero(n);
    if (n > 0 && in_.c.cwiseAbs().maxCoeff() > 0.0)
      return finish(x, Status::Unbounded, "unconstrained with nonzero objective", 0);
    return finish(x, Status::Optimal, "", 0);
  }

  // ---------------- phase 1: strictly interior point ----------------
  VecX x = VecX::Zero(n);
  if (st_.initial_point.size() == n) x = st_.initial_point;
  if (in_.has_eq && st_.initial_point.size() != n) {
    // least-squares equality solution as the starting guess
    Eigen::SparseMatrix<double> EEt = (in_.E * in_.E.transpose()).pruned();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(EEt);
    if (ldlt.info() == Eigen::Success) x = -in_.E.transpose() * ldlt.solve(in_.e);
  }

  bool strictly_feasible = all_interior(in_.blocks, x);
  if (st_.verbose && !strictly_feasible && st_.initial_point.size() == n) {
    for (std::size_t bi = 0; bi < in_.blocks.size(); ++bi)
      if (!interior(in_.blocks[bi], slack(in_.blocks[bi], x)))
        std::fprintf(stderr, "[solver] initial point not interior in block %zu (%s dim %d)\n", bi,
                     kind_name(in_.blocks[bi].kind).c_str(), in_.blocks[bi].dim);
  }
  if (!strictly_feasible) {
    // extended problem over (x, theta): s_b(x) + theta * u_b in K_b
    std::vector<Block> ext = in_.blocks;
    for (auto& blk : ext) {
      const VecX u = interior_ray(blk);
      MatX Ad(blk.dim, blk.cols.size() + 1);
      Ad.leftCols(blk.cols.size()) = blk.Ad;
      Ad.col(blk.cols.size()) = u;
      blk.Ad = std::move(Ad);
      blk.cols.push_back(n);
    }
    // find theta0 by doubling
    double theta0 = 1.0;
    VecX xe(n + 1);
    xe.head(n) = x;
    bool found = false;
    for (int i = 0; i < 64; ++i) {
      xe(n) = theta0;
      if (all_interior(ext, xe)) {
        found = true;
        break;
      }
      theta0 *= 2.0;
    }
    if (!found) return finish(VecX::Zero(n), Status::NumericalLimit, "no interior start", total_newton_);

    const double margin = 1e-6 * std::max(1.0, theta0);
    const double theta_lo = -(10.0 * margin + 1e-3);
    {
      Block bound;
      bound.kind = Kind::NonNegative;
      bound.dim = 1;
      bound.cols = {n};
      bound.Ad = MatX::Ones(1, 1);
      bound.b = VecX::Constant(1, -theta_lo);
      bound.nu = 1.0;
      ext.push_back(std::move(bound));
    }
    // The pure feasibility objective leaves x free to run off inside
    // unbounded cones; a generous per-variable box keeps the barrier
    // subproblems bounded without affecting any solution of interest.
    const double box_r = 1e8 * std::max({1.0, xe.head(n).cwiseAbs().maxCoeff(), theta0});
    for (int i = 0; i <= n; ++i) {
      Block box;
      box.kind = Kind::NonNegative;
      box.dim = 2;
      box.cols = {i};
      box.Ad = MatX::Zero(2, 1);
      box.Ad(0, 0) = 1.0;
      box.Ad(1, 0) = -1.0;
      box.b = VecX::Constant(2, box_r);
      box.nu = 2.0;
      ext.push_back(std::move(box));
    }
    double nu1 = 0.0;
    for (const auto& blk : ext) nu1 += blk.nu;

    VecX c1 = VecX::Zero(n + 1);
    c1(n) = 1.0;
    xe(n) = theta0;

    auto stop = [&](const VecX& xc) { return xc(n) <= -margin; };
    double t = 1.0;
    bool done = false;
    std::string p1_message;
    for (int outer = 0; outer < 120 && !done; ++outer) {
      // equality handling piggybacks on member E over n vars; extend if present
      CenterResult cr;
      if (in_.has_eq) {
        // temporarily widen E with a zero column for theta
        Eigen::SparseMatrix<double> Ewide(in_.E.rows(), n + 1);
        std::vector<Eigen::Triplet<double>> trips;
        for (int col = 0; col < in_.E.outerSize(); ++col)
          for (Eigen::SparseMatrix<double>::InnerIterator it(in_.E, col); it; ++it)
            trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        Ewide.setFromTriplets(trips.begin(), trips.end());
        std::swap(in_.E, Ewide);
        cr = center(ext, c1, t, xe, 1e-10, 80, stop);
        std::swap(in_.E, Ewide);
      } else {
        cr = center(ext, c1, t, xe, 1e-10, 80, stop);
      }
      if (st_.verbose)
        std::fprintf(stderr, "[solver] phase1 outer %d t %.2e theta %.6e margin %.2e fail %d/%d\n",
                     outer, t, xe(n), margin, cr.factor_failed ? 1 : 0,
                     cr.line_search_failed ? 1 : 0);
      if (stop(xe)) {
        done = true;
        break;
      }
      if (cr.factor_failed || cr.line_search_failed) {
        p1_message = "feasibility phase stalled";
        if (st_.verbose) {
          // report the blocks with the least interior depth along their ray
          for (std::size_t bi = 0; bi + n + 2 < ext.size() + 1 && bi < in_.blocks.size(); ++bi) {
            const Block& blk = in_.blocks[bi];
            VecX loc(blk.cols.size());
            for (std::size_t i = 0; i < blk.cols.size(); ++i)
              loc(static_cast<int>(i)) = xe(blk.cols[i]);
            const VecX sb = blk.Ad * loc + blk.b;
            const VecX u = interior_ray(blk);
            double lo = 0.0, hi = 1.0;
            if (!interior(blk, sb - hi * u)) {
              for (int it = 0; it < 40; ++it) {
                const double mid = 0.5 * (lo + hi);
                (interior(blk, sb - mid * u) ? lo : hi) = mid;
              }
            } else {
              lo = 1.0;
            }
            if (lo < 1e-4)
              std::fprintf(stderr, "  [phase1] block %zu %s dim %d depth %.3e\n", bi,
                           kind_name(blk.kind).c_str(), blk.dim, lo);
          }
        }
        break;
      }
      const double gap = nu1 / t;
      const double theta = xe(n);
      if (gap <= std::max(0.02 * margin, 1e-14)) {
        // converged without reaching the margin
        if (theta - gap > 10.0 * st_.abs_tol)
          return finish(VecX::Zero(n), Status::Infeasible,
                        "feasibility phase lower bound " + std::to_string(theta - gap),
                        total_newton_);
        break;
      }
      t *= 10.0;
    }
    if (!done) {
      // maybe weakly feasible: accept if the plain slacks are interior
      x = xe.head(n);
      if (!all_interior(in_.blocks, x))
        return finish(VecX::Zero(n), Status::Infeasible,
                      p1_message.empty() ? "no strictly interior point found" : p1_message,
                      total_newton_);
    } else {
      x = xe.head(n);
    }
    if (!all_interior(in_.blocks, x))
      return finish(VecX::Zero(n), Status::NumericalLimit, "interior recovery failed",
                    total_newton_);
  }

  // ---------------- phase 2: follow the central path ----------------
  const double nu = std::max(in_.nu, 1.0);
  auto objective_of = [&](const VecX& xc) { return in_.c_norm * in_.c.dot(xc) + prog_.c0; };

  double t = std::max(1e-3, nu / (0.5 * std::max(1.0, std::abs(in_.c.dot(x)))));
  Status status = Status::IterationLimit;
  std::string message;
  for (int outer = 0; outer < st_.max_iters; ++outer) {
    CenterResult cr = center(in_.blocks, in_.c, t, x, 1e-12, 100, nullptr);
    if (cr.factor_failed || cr.line_search_failed) {
      status = Status::NumericalLimit;
      message = cr.factor_failed ? "factorization failed" : "line search failed";
      break;
    }
    const double obj = objective_of(x);
    if (obj < -1e25 * std::max(1.0, std::abs(prog_.c0))) {
      status = Status::Unbounded;
      message = "objective diverging";
      break;
    }
    const double gap = in_.c_norm * nu / t;
    const double tol = st_.abs_tol + st_.rel_tol * std::abs(obj);
    if (st_.verbose) {
      const double eq = in_.has_eq ? (in_.E * x + in_.e).cwiseAbs().maxCoeff() : 0.0;
      std::fprintf(stderr, "[solver] outer %d t %.3e obj %.12e gap %.3e eq %.3e conv %d\n", outer,
                   t, obj, gap, eq, cr.converged ? 1 : 0);
    }
    if (gap <= tol) {
      CenterResult polish = center(in_.blocks, in_.c, t, x, 1e-16, 20, nullptr);
      (void)polish;
      status = Status::Optimal;
      break;
    }
    t *= 10.0;
  }

  // ---------------- certificates ----------------
  ConeSolution sol = finish(x, status, message, total_newton_);
  VecX dual_res = in_.c_norm * in_.c;
  double gap = 0.0;
  for (const auto& blk : in_.blocks) {
    const VecX s = slack(blk, x);
    if (!interior(blk, s)) continue;
    VecX gb;
    MatX Hb;
    barrier_grad_hess(blk, s, gb, Hb);
    const VecX z = -(in_.c_norm / t) * gb;
    gap += s.dot(z);
    VecX contrib = blk.Ad.transpose() * z;
    for (std::size_t i = 0; i < blk.cols.size(); ++i)
      dual_res(blk.cols[i]) -= contrib(static_cast<int>(i));
  }
  if (in_.has_eq) {
    // least-squares multiplier for the equality rows
    const VecX rhs = in_.E * dual_res;
    Eigen::SparseMatrix<double> EEt = (in_.E * in_.E.transpose()).pruned();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(EEt);
    if (ldlt.info() == Eigen::Success) dual_res -= in_.E.transpose() * ldlt.solve(rhs);
    sol.primal_residual = (in_.E * x + in_.e).cwiseAbs().maxCoeff();
  }
  sol.gap = std::abs(gap);
  sol.dual_residual = dual_res.cwiseAbs().maxCoeff();

  if (sol.status == Status::Optimal) {
    const double tol = st_.abs_tol + st_.rel_tol * std::abs(sol.objective_value);
    const double rtol = std::max({st_.abs_tol, st_.rel_tol * in_.c_norm, 1e-30});
    if (sol.gap > 10.0 * tol || sol.dual_residual > 1e4 * rtol || sol.primal_residual > 10.0 * tol) {
      sol.status = Status::NumericalLimit;
      sol.message = "certificate check failed";
    }
  }
  return sol;
}

}  // namespace

ConeSolution solve(const ConeProgram& p, const SolveSettings& settings) {
  const ValidationReport rep = validate(p);
  if (!rep.ok()) throw ValidationError("malformed cone program:\n" + rep.to_string());
  BarrierSolver solver(p, settings);
  return solver.run();
}

}  // namespace uavplan::cone
