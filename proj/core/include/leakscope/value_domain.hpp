#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace leakscope {

using Value = std::int64_t;

/// Ordered finite sets of secret and observable values. Axis labels for every
/// joint-distribution matrix; rows are secrets, columns observables.
class ValueDomain {
 public:
  ValueDomain() = default;
  ValueDomain(std::vector<Value> secrets, std::vector<Value> observables);

  const std::vector<Value>& secrets() const { return secrets_; }
  const std::vector<Value>& observables() const { return observables_; }
  std::size_t nx() const { return secrets_.size(); }
  std::size_t ny() const { return observables_.size(); }

  std::size_t secret_index(Value x) const;
  std::size_t observable_index(Value y) const;
  bool has_secret(Value x) const { return sx_.count(x) != 0; }
  bool has_observable(Value y) const { return sy_.count(y) != 0; }

  bool operator==(const ValueDomain& o) const {
    return secrets_ == o.secrets_ && observables_ == o.observables_;
  }

  /// Union of both axes; sorted ascending, duplicates collapsed.
  static ValueDomain merged(const ValueDomain& a, const ValueDomain& b);

 private:
  std::vector<Value> secrets_;
  std::vector<Value> observables_;
  std::unordered_map<Value, std::size_t> sx_;
  std::unordered_map<Value, std::size_t> sy_;
};

}  // namespace leakscope
