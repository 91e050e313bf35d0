#include "leakscope/value_domain.hpp"

#include <algorithm>
#include <stdexcept>

#include "leakscope/errors.hpp"

namespace leakscope {

namespace {
void check_axis(const std::vector<Value>& v, const char* name) {
  if (v.empty()) throw InvalidDistribution(std::string(name) + " axis is empty");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i - 1] >= v[i])
      throw InvalidDistribution(std::string(name) +
                                " axis must be strictly ascending");
  }
}
}  // namespace

ValueDomain::ValueDomain(std::vector<Value> secrets,
                         std::vector<Value> observables)
    : secrets_(std::move(secrets)), observables_(std::move(observables)) {
  check_axis(secrets_, "secret");
  check_axis(observables_, "observable");
  for (std::size_t i = 0; i < secrets_.size(); ++i) sx_[secrets_[i]] = i;
  for (std::size_t i = 0; i < observables_.size(); ++i) sy_[observables_[i]] = i;
}

std::size_t ValueDomain::secret_index(Value x) const {
  auto it = sx_.find(x);
  if (it == sx_.end()) throw std::out_of_range("secret value not in domain");
  return it->second;
}

std::size_t ValueDomain::observable_index(Value y) const {
  auto it = sy_.find(y);
  if (it == sy_.end()) throw std::out_of_range("observable value not in domain");
  return it->second;
}

ValueDomain ValueDomain::merged(const ValueDomain& a, const ValueDomain& b) {
  auto merge_axis = [](const std::vector<Value>& u, const std::vector<Value>& v) {
    std::vector<Value> out;
    out.reserve(u.size() + v.size());
    std::set_union(u.begin(), u.end(), v.begin(), v.end(),
                   std::back_inserter(out));
    return out;
  };
  return ValueDomain(merge_axis(a.secrets(), b.secrets()),
                     merge_axis(a.observables(), b.observables()));
}

}  // namespace leakscope
