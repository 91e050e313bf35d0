#include "leakscope/measures.hpp"

#include <cmath>

#include "leakscope/errors.hpp"

namespace leakscope {

double mutual_information(const JointDistribution& j) {
  double mi = 0.0;
  for (const auto& [ix, iy] : j.support()) {
    const double p = j.pxy(ix, iy);
    mi += p * std::log2(p / (j.px()[ix] * j.py()[iy]));
  }
  return mi;
}

double shannon_entropy(std::span<const double> p) {
  double total = 0.0, h = 0.0;
  for (double v : p) {
    if (v < 0.0) throw InvalidDistribution("negative probability");
    total += v;
    if (v > 0.0) h -= v * std::log2(v);
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidDistribution("probabilities do not sum to 1");
  return h;
}

double conditional_entropy(const JointDistribution& j) {
  double h = 0.0;
  for (std::size_t iy : j.support_y()) {
    const double py = j.py()[iy];
    for (std::size_t ix : j.col_support(iy)) {
      const double c = j.pxy(ix, iy) / py;
      h -= j.pxy(ix, iy) * std::log2(c);
    }
  }
  return h;
}

double joint_entropy(const JointDistribution& j) {
  double h = 0.0;
  for (const auto& [ix, iy] : j.support()) {
    const double p = j.pxy(ix, iy);
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace leakscope
