#include "leakscope/joint_distribution.hpp"

#include <cmath>
#include <cstdlib>

#include "leakscope/errors.hpp"

namespace leakscope {

SubDistribution::SubDistribution(ValueDomain dom, double w, CellMass m)
    : domain(std::move(dom)), weight(w), mass(std::move(m)) {
  if (weight < 0.0 || weight > 1.0 + 1e-12)
    throw InvalidDistribution("sub-distribution weight outside [0,1]");
  double total = 0.0;
  for (const auto& [cell, p] : mass) {
    if (p < 0.0) throw NegativeMass("negative sub-distribution entry");
    if (!domain.has_secret(cell.first) || !domain.has_observable(cell.second))
      throw InvalidDistribution("sub-distribution cell outside its domain");
    total += p;
  }
  if (std::abs(total - weight) > 1e-12)
    throw InvalidDistribution("sub-distribution mass does not sum to weight");
}

JointDistribution::JointDistribution(ValueDomain domain,
                                     std::vector<double> pxy)
    : domain_(std::move(domain)), pxy_(std::move(pxy)) {
  const std::size_t nx = domain_.nx(), ny = domain_.ny();
  if (pxy_.size() != nx * ny)
    throw InvalidDistribution("joint matrix shape mismatch");
  px_.assign(nx, 0.0);
  py_.assign(ny, 0.0);
  row_support_.resize(nx);
  col_support_.resize(ny);
  double total = 0.0;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const double p = pxy_[ix * ny + iy];
      if (p < 0.0) throw NegativeMass("negative joint entry");
      px_[ix] += p;
      py_[iy] += p;
      total += p;
      if (p > 0.0) {
        support_.emplace_back(ix, iy);
        row_support_[ix].push_back(iy);
        col_support_[iy].push_back(ix);
      }
    }
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidDistribution("joint mass does not sum to 1");
  for (std::size_t ix = 0; ix < nx; ++ix)
    if (px_[ix] > 0.0) support_x_.push_back(ix);
  for (std::size_t iy = 0; iy < ny; ++iy)
    if (py_[iy] > 0.0) support_y_.push_back(iy);
}

ExactJoint::ExactJoint(ValueDomain domain, std::vector<Rational> pxy)
    : domain_(std::move(domain)), pxy_(std::move(pxy)) {
  if (pxy_.size() != domain_.nx() * domain_.ny())
    throw InvalidDistribution("joint matrix shape mismatch");
  Rational total = 0;
  for (const auto& p : pxy_) {
    if (p < 0) throw NegativeMass("negative joint entry");
    total += p;
  }
  if (total != 1) throw InvalidDistribution("exact joint mass is not 1");
}

std::vector<Rational> ExactJoint::px() const {
  std::vector<Rational> out(domain_.nx(), Rational(0));
  for (std::size_t ix = 0; ix < domain_.nx(); ++ix)
    for (std::size_t iy = 0; iy < domain_.ny(); ++iy)
      out[ix] += pxy(ix, iy);
  return out;
}

JointDistribution ExactJoint::to_joint() const {
  std::vector<double> cells(pxy_.size());
  for (std::size_t i = 0; i < pxy_.size(); ++i) cells[i] = to_double(pxy_[i]);
  return JointDistribution(domain_, std::move(cells));
}

JointDistribution compose_joint(const std::vector<SubDistribution>& parts) {
  if (parts.empty()) throw InvalidDistribution("no parts to compose");
  double wsum = 0.0;
  ValueDomain dom = parts.front().domain;
  for (std::size_t i = 1; i < parts.size(); ++i)
    dom = ValueDomain::merged(dom, parts[i].domain);
  for (const auto& part : parts) wsum += part.weight;
  if (std::abs(wsum - 1.0) > 1e-9)
    throw WeightSumMismatch("component weights sum to " + std::to_string(wsum));

  std::vector<double> cells(dom.nx() * dom.ny(), 0.0);
  for (const auto& part : parts) {
    for (const auto& [cell, p] : part.mass) {
      if (p < 0.0) throw NegativeMass("negative sub-distribution entry");
      cells[dom.secret_index(cell.first) * dom.ny() +
            dom.observable_index(cell.second)] += p;
    }
  }
  return JointDistribution(std::move(dom), std::move(cells));
}

}  // namespace leakscope
