#pragma once

#include <map>
#include <utility>
#include <vector>

#include "leakscope/rational.hpp"
#include "leakscope/value_domain.hpp"

namespace leakscope {

using CellMass = std::map<std::pair<Value, Value>, double>;

/// One component's contribution to the joint distribution. Total mass equals
/// the component's execution probability (theta_i for sampled components,
/// xi_j for precisely analyzed ones).
struct SubDistribution {
  ValueDomain domain;
  double weight = 0.0;
  CellMass mass;

  SubDistribution() = default;
  SubDistribution(ValueDomain dom, double w, CellMass m);
};

/// Full joint distribution of secret and observable with marginals and
/// support sets. Immutable after construction.
class JointDistribution {
 public:
  JointDistribution(ValueDomain domain, std::vector<double> pxy);

  const ValueDomain& domain() const { return domain_; }
  std::size_t nx() const { return domain_.nx(); }
  std::size_t ny() const { return domain_.ny(); }

  double pxy(std::size_t ix, std::size_t iy) const {
    return pxy_[ix * domain_.ny() + iy];
  }
  const std::vector<double>& px() const { return px_; }
  const std::vector<double>& py() const { return py_; }

  /// Index pairs of cells with strictly positive probability.
  const std::vector<std::pair<std::size_t, std::size_t>>& support() const {
    return support_;
  }
  const std::vector<std::size_t>& support_x() const { return support_x_; }
  const std::vector<std::size_t>& support_y() const { return support_y_; }
  /// Positive columns of row ix.
  const std::vector<std::size_t>& row_support(std::size_t ix) const {
    return row_support_[ix];
  }
  /// Positive rows of column iy.
  const std::vector<std::size_t>& col_support(std::size_t iy) const {
    return col_support_[iy];
  }

 private:
  ValueDomain domain_;
  std::vector<double> pxy_;
  std::vector<double> px_, py_;
  std::vector<std::pair<std::size_t, std::size_t>> support_;
  std::vector<std::size_t> support_x_, support_y_;
  std::vector<std::vector<std::size_t>> row_support_, col_support_;
};

/// Exact joint distribution produced by the precise engine.
class ExactJoint {
 public:
  ExactJoint(ValueDomain domain, std::vector<Rational> pxy);

  const ValueDomain& domain() const { return domain_; }
  const Rational& pxy(std::size_t ix, std::size_t iy) const {
    return pxy_[ix * domain_.ny() + iy];
  }
  const std::vector<Rational>& cells() const { return pxy_; }
  std::vector<Rational> px() const;

  /// Rounds every entry once; measures computed on the result are therefore
  /// bit-reproducible for exactly equal rational joints.
  JointDistribution to_joint() const;

  bool operator==(const ExactJoint& o) const {
    return domain_ == o.domain_ && pxy_ == o.pxy_;
  }

 private:
  ValueDomain domain_;
  std::vector<Rational> pxy_;
};

/// Entrywise sum of the parts over the union of their domains, missing cells
/// padded with zero. Weights must sum to 1 within 1e-9.
JointDistribution compose_joint(const std::vector<SubDistribution>& parts);

}  // namespace leakscope
