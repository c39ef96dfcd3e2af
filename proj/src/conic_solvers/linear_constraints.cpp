#include <algorithm>
#include <cmath>

#include "shield/conic_solvers.hpp"

namespace shield {

LinearConstraintSet::LinearConstraintSet(int dim)
    : dim_(dim), g_(0, dim), h_(0), e_(0, dim), erhs_(0) {
  require(dim >= 0, ErrorCode::InvalidArgument, "negative constraint dimension");
}

void LinearConstraintSet::add_leq(const Vector& row, double rhs) {
  require(row.size() == dim_, ErrorCode::DimMismatch, "constraint row has wrong length");
  require(row.allFinite() && std::isfinite(rhs), ErrorCode::NonFinite, "non-finite constraint row");
  require(row.cwiseAbs().maxCoeff() > 0.0, ErrorCode::InvalidArgument, "zero constraint row");
  g_.conservativeResize(g_.rows() + 1, dim_);
  h_.conservativeResize(h_.size() + 1);
  g_.row(g_.rows() - 1) = row.transpose();
  h_(h_.size() - 1) = rhs;
}

void LinearConstraintSet::add_eq(const Vector& row, double rhs) {
  require(row.size() == dim_, ErrorCode::DimMismatch, "equality row has wrong length");
  require(row.allFinite() && std::isfinite(rhs), ErrorCode::NonFinite, "non-finite equality row");
  require(row.cwiseAbs().maxCoeff() > 0.0, ErrorCode::InvalidArgument, "zero equality row");
  e_.conservativeResize(e_.rows() + 1, dim_);
  erhs_.conservativeResize(erhs_.size() + 1);
  e_.row(e_.rows() - 1) = row.transpose();
  erhs_(erhs_.size() - 1) = rhs;
}

void LinearConstraintSet::append(const LinearConstraintSet& other) {
  require(other.dim_ == dim_, ErrorCode::DimMismatch, "appending constraints of other dimension");
  for (int i = 0; i < other.inequality_count(); ++i) add_leq(other.g_.row(i).transpose(), other.h_(i));
  for (int i = 0; i < other.equality_count(); ++i) add_eq(other.e_.row(i).transpose(), other.erhs_(i));
}

double LinearConstraintSet::max_violation(const Vector& u) const {
  require(u.size() == dim_, ErrorCode::DimMismatch, "point has wrong dimension");
  double v = 0.0;
  if (g_.rows() > 0) v = std::max(v, (g_ * u - h_).maxCoeff());
  if (e_.rows() > 0) v = std::max(v, (e_ * u - erhs_).cwiseAbs().maxCoeff());
  return v;
}

LinearConstraintSet LinearConstraintSet::deduplicated(double tol) const {
  LinearConstraintSet out(dim_);
  for (int i = 0; i < inequality_count(); ++i) {
    bool dup = false;
    for (int j = 0; j < out.inequality_count() && !dup; ++j) {
      dup = (out.g_.row(j) - g_.row(i)).cwiseAbs().maxCoeff() <= tol &&
            std::abs(out.h_(j) - h_(i)) <= tol;
    }
    if (!dup) out.add_leq(g_.row(i).transpose(), h_(i));
  }
  for (int i = 0; i < equality_count(); ++i) out.add_eq(e_.row(i).transpose(), erhs_(i));
  return out;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
    case SolveStatus::EmptySet: return "EmptySet";
  }
  return "Unknown";
}

SymmetricMatrix affine_pencil(const SymmetricMatrix& f0, std::span<const SymmetricMatrix> f,
                              const Vector& u) {
  require(static_cast<Eigen::Index>(f.size()) == u.size(), ErrorCode::DimMismatch,
          "pencil coefficient count differs from point dimension");
  Matrix acc = f0.matrix();
  for (std::size_t i = 0; i < f.size(); ++i) {
    require(f[i].dim() == f0.dim(), ErrorCode::DimMismatch, "pencil matrices differ in size");
    acc += u(static_cast<Eigen::Index>(i)) * f[i].matrix();
  }
  return SymmetricMatrix(acc);
}

}  // namespace shield
