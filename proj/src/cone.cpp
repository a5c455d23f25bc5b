#include "uavplan/cone.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <ostream>

namespace uavplan::cone {

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::Zero: return "Zero";
    case Kind::NonNegative: return "NonNegative";
    case Kind::SecondOrder: return "SecondOrder";
    case Kind::RotatedSecondOrder: return "RotatedSecondOrder";
    case Kind::Exponential: return "Exponential";
    case Kind::Power: return "Power";
    case Kind::PositiveSemidefinite: return "PositiveSemidefinite";
  }
  return "?";
}

LinExpr& LinExpr::operator+=(const LinExpr& other) {
  terms.insert(terms.end(), other.terms.begin(), other.terms.end());
  constant += other.constant;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (auto& [i, v] : terms) v *= s;
  constant *= s;
  return *this;
}

int ProgramBuilder::add_var(const std::string& name) {
  names_.push_back(name);
  return num_vars_++;
}

int ProgramBuilder::add_vars(int count, const std::string& prefix) {
  const int first = num_vars_;
  for (int i = 0; i < count; ++i) names_.push_back(prefix + "[" + std::to_string(i) + "]");
  num_vars_ += count;
  return first;
}

void ProgramBuilder::add_objective(int var, double coef) { obj_.emplace_back(var, coef); }

void ProgramBuilder::add_objective_constant(double c) { c0_ += c; }

void ProgramBuilder::add_cone(Kind kind, const std::vector<LinExpr>& rows, double exponent,
                              int order) {
  Cone cone;
  cone.kind = kind;
  cone.dim = static_cast<int>(rows.size());
  cone.exponent = exponent;
  cone.order = order;
  for (const auto& row : rows) {
    for (const auto& [idx, val] : row.terms)
      if (val != 0.0) trips_.emplace_back(num_rows_, idx, val);
    b_.push_back(row.constant);
    ++num_rows_;
  }
  cones_.push_back(cone);
}

ConeProgram ProgramBuilder::finalize() {
  ConeProgram p;
  p.num_vars = num_vars_;
  p.var_names = names_;
  p.c = VecX::Zero(num_vars_);
  for (const auto& [idx, val] : obj_) p.c(idx) += val;
  p.c0 = c0_;
  p.A.resize(num_rows_, num_vars_);
  p.A.setFromTriplets(trips_.begin(), trips_.end());
  p.A.makeCompressed();
  p.b = Eigen::Map<const VecX>(b_.data(), static_cast<int>(b_.size()));
  p.cones = cones_;
  return p;
}

ValidationReport validate(const ConeProgram& p) {
  ValidationReport rep;
  auto issue = [&](const std::string& s) { rep.issues.push_back(s); };

  if (p.num_vars < 0) issue("negative num_vars");
  if (p.c.size() != p.num_vars) issue("objective vector length != num_vars");
  if (p.A.cols() != p.num_vars) issue("A has wrong column count");
  if (p.A.rows() != p.b.size()) issue("A row count != b length");

  long cone_rows = 0;
  for (std::size_t i = 0; i < p.cones.size(); ++i) {
    const Cone& c = p.cones[i];
    const std::string tag = "cone " + std::to_string(i) + " (" + kind_name(c.kind) + ")";
    if (c.dim <= 0) issue(tag + ": non-positive dimension");
    cone_rows += c.dim;
    switch (c.kind) {
      case Kind::SecondOrder:
        if (c.dim < 1) issue(tag + ": needs dim >= 1");
        break;
      case Kind::RotatedSecondOrder:
        if (c.dim < 2) issue(tag + ": needs dim >= 2");
        break;
      case Kind::Exponential:
        if (c.dim != 3) issue(tag + ": must have exactly 3 rows");
        break;
      case Kind::Power:
        if (c.dim != 3) issue(tag + ": must have exactly 3 rows");
        if (!(c.exponent > 0.0 && c.exponent < 1.0)) issue(tag + ": exponent must be in (0,1)");
        break;
      case Kind::PositiveSemidefinite:
        if (c.order <= 0 || c.dim != c.order * (c.order + 1) / 2)
          issue(tag + ": dim must equal order*(order+1)/2");
        break;
      default:
        break;
    }
  }
  if (cone_rows != p.A.rows()) issue("cone dimensions do not add up to A row count");

  std::vector<bool> used(std::max(p.num_vars, 0), false);
  for (int col = 0; col < p.A.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(p.A, col); it; ++it) {
      if (it.col() >= p.num_vars || it.col() < 0) issue("A references variable out of range");
      else if (it.value() != 0.0) used[it.col()] = true;
    }
  for (int i = 0; i < p.c.size() && i < p.num_vars; ++i)
    if (p.c(i) != 0.0) used[i] = true;
  for (int i = 0; i < p.num_vars; ++i)
    if (!used[i]) rep.dangling_vars.push_back(i);
  return rep;
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& s : issues) out += s + "\n";
  if (!dangling_vars.empty()) {
    out += "dangling variables:";
    for (int v : dangling_vars) out += " " + std::to_string(v);
    out += "\n";
  }
  return out;
}

double max_cone_violation(const ConeProgram& p, const VecX& x) {
  const VecX s_all = p.A * x + p.b;
  double worst = -std::numeric_limits<double>::infinity();
  int row = 0;
  for (const auto& c : p.cones) {
    const VecX s = s_all.segment(row, c.dim);
    row += c.dim;
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    double v = 0.0;
    switch (c.kind) {
      case Kind::Zero:
        v = s.cwiseAbs().maxCoeff();
        break;
      case Kind::NonNegative:
        v = -s.minCoeff();
        break;
      case Kind::SecondOrder:
        v = s.tail(c.dim - 1).norm() - s(0);
        break;
      case Kind::RotatedSecondOrder: {
        const double q = s.size() > 2 ? s.tail(c.dim - 2).squaredNorm() : 0.0;
        v = std::max({q - 2.0 * s(0) * s(1), -s(0), -s(1)});
        break;
      }
      case Kind::Exponential: {
        // y*exp(x/y) <= z in log form to avoid overflow
        const double xx = s(0), y = s(1), z = s(2);
        if (y <= 0.0 || z <= 0.0)
          v = std::max(-y, -z);
        else
          v = xx - y * std::log(z / y);
        break;
      }
      case Kind::Power: {
        const double a = c.exponent;
        if (s(0) < 0.0 || s(1) < 0.0)
          v = std::max(-s(0), -s(1));
        else
          v = std::abs(s(2)) - std::pow(s(0), a) * std::pow(s(1), 1.0 - a);
        break;
      }
      case Kind::PositiveSemidefinite: {
        MatX S(c.order, c.order);
        int m = 0;
        const double inv_sqrt2 = std::sqrt(0.5);
        for (int j = 0; j < c.order; ++j)
          for (int i = j; i < c.order; ++i, ++m)
            S(i, j) = S(j, i) = (i == j) ? s(m) : s(m) * inv_sqrt2;
        Eigen::SelfAdjointEigenSolver<MatX> eig(S, Eigen::EigenvaluesOnly);
        v = -eig.eigenvalues().minCoeff();
        break;
      }
    }
    worst = std::max(worst, v / scale);
  }
  return worst;
}

void dump_program(const ConeProgram& p, std::ostream& os) {
  os << "vars " << p.num_vars << "\n";
  os << "objective_constant " << p.c0 << "\n";
  os << "c";
  for (int i = 0; i < p.c.size(); ++i)
    if (p.c(i) != 0.0) os << " " << i << ":" << p.c(i);
  os << "\n";
  os << "cones";
  for (const auto& c : p.cones) {
    os << " " << kind_name(c.kind) << ":" << c.dim;
    if (c.kind == Kind::Power) os << ":" << c.exponent;
    if (c.kind == Kind::PositiveSemidefinite) os << ":" << c.order;
  }
  os << "\n";
  os << "A_triplets\n";
  for (int col = 0; col < p.A.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(p.A, col); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
  os << "b\n";
  for (int i = 0; i < p.b.size(); ++i) os << p.b(i) << "\n";
}

}  // namespace uavplan::cone
