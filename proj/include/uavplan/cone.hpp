// Solver-agnostic conic program representation.
//
// A program is  min c'x + c0  s.t.  A_i x + b_i in K_i  for a list of cone
// blocks K_i. Supported cones:
//   Zero                 A x + b = 0
//   NonNegative          entrywise >= 0
//   SecondOrder(d)       s0 >= ||s_1..d-1||
//   RotatedSecondOrder(d) 2 s0 s1 >= ||s_2..d-1||^2, s0, s1 >= 0
//   Exponential          (x,y,z): y > 0, y*exp(x/y) <= z
//   Power(a)             (x,y,z): x,y >= 0, x^a y^(1-a) >= |z|, a in (0,1)
//   PositiveSemidefinite(p)  svec(S) of a symmetric p x p matrix, S >= 0;
//                            svec stacks the lower triangle column-major with
//                            off-diagonal entries scaled by sqrt(2)
#pragma once

#include <Eigen/Sparse>

#include <string>
#include <vector>

#include "uavplan/types.hpp"

namespace uavplan::cone {

class ValidationError : public Error {
 public:
  using Error::Error;
};

enum class Kind {
  Zero,
  NonNegative,
  SecondOrder,
  RotatedSecondOrder,
  Exponential,
  Power,
  PositiveSemidefinite,
};

std::string kind_name(Kind k);

struct Cone {
  Kind kind;
  int dim = 0;          // number of rows
  double exponent = 0;  // Power only, in (0,1)
  int order = 0;        // PositiveSemidefinite only; dim == order*(order+1)/2
};

// Sparse linear expression used while building programs.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;  // (var index, coefficient)
  double constant = 0.0;

  LinExpr() = default;
  /*implicit*/ LinExpr(double c) : constant(c) {}
  static LinExpr var(int index, double coef = 1.0) {
    LinExpr e;
    e.terms.emplace_back(index, coef);
    return e;
  }
  LinExpr& add(int index, double coef) {
    terms.emplace_back(index, coef);
    return *this;
  }
  LinExpr& operator+=(const LinExpr& other);
  LinExpr& operator*=(double s);
};

inline LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
inline LinExpr operator*(double s, LinExpr e) { return e *= s; }
inline LinExpr operator-(LinExpr a, const LinExpr& b) {
  LinExpr nb = b;
  nb *= -1.0;
  return a += nb;
}

struct ConeProgram {
  int num_vars = 0;
  VecX c;                             // linear objective coefficients
  double c0 = 0.0;                    // objective constant
  Eigen::SparseMatrix<double> A;      // total_rows x num_vars
  VecX b;
  std::vector<Cone> cones;            // row partition, in order
  std::vector<std::string> var_names; // bookkeeping back to model coordinates

  int total_rows() const { return static_cast<int>(b.size()); }
};

// Incremental builder; finalize() compresses into a ConeProgram.
class ProgramBuilder {
 public:
  int add_var(const std::string& name);
  int add_vars(int count, const std::string& prefix);
  void add_objective(int var, double coef);
  void add_objective_constant(double c);
  // rows.size() must match the cone arity (3 for Exponential/Power,
  // order*(order+1)/2 for PSD, arbitrary >= 1 otherwise)
  void add_cone(Kind kind, const std::vector<LinExpr>& rows, double exponent = 0.0,
                int order = 0);
  ConeProgram finalize();

  int num_vars() const { return num_vars_; }

 private:
  int num_vars_ = 0;
  int num_rows_ = 0;
  std::vector<std::string> names_;
  std::vector<std::pair<int, double>> obj_;
  double c0_ = 0.0;
  std::vector<Eigen::Triplet<double>> trips_;
  std::vector<double> b_;
  std::vector<Cone> cones_;
};

struct ValidationReport {
  std::vector<std::string> issues;
  std::vector<int> dangling_vars;  // referenced by no row and no objective
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

ValidationReport validate(const ConeProgram& p);

// Text dump (sparse triplets + cone list) for external cross-checking.
void dump_program(const ConeProgram& p, std::ostream& os);

// Worst cone-membership violation of A x + b over all blocks, each normalized
// by its slack magnitude. <= 0 means x is feasible (boundary included).
double max_cone_violation(const ConeProgram& p, const VecX& x);

}  // namespace uavplan::cone
