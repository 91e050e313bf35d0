#include "leakscope/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "leakscope/errors.hpp"
#include "leakscope/measures.hpp"

namespace leakscope {

namespace {

double safe_log2(double v) { return std::log2(v); }

// theta^2 (sum D g^2 - (sum D g)^2) for g = 1 + log2(Px Py / Pxy) over the
// component's empirical joint.
double standard_weight(const ComponentResult& c, const JointDistribution& f) {
  const double n = static_cast<double>(c.sample_size);
  double m1 = 0.0, m2 = 0.0;
  auto add = [&](std::size_t ix, std::size_t iy, double d) {
    const double g = 1.0 + safe_log2(f.px()[ix] * f.py()[iy] / f.pxy(ix, iy));
    m1 += d * g;
    m2 += d * g * g;
  };
  if (c.kind == ComponentResult::Kind::Sampled) {
    for (const auto& [cell, k] : c.counts) {
      if (k == 0) continue;
      add(f.domain().secret_index(cell.first),
          f.domain().observable_index(cell.second),
          static_cast<double>(k) / n);
    }
  } else {  // AbstractSampled treated with the plain kernel
    for (const auto& [y, k] : c.output_counts) {
      if (k == 0) continue;
      const std::size_t iy = f.domain().observable_index(y);
      for (const auto& [x, pi] : c.input_prior) {
        if (pi <= 0.0) continue;
        add(f.domain().secret_index(x), iy, pi * static_cast<double>(k) / n);
      }
    }
  }
  return c.weight * c.weight * (m2 - m1 * m1);
}

double ats_weight(const ComponentResult& c, const JointDistribution& f) {
  const double n = static_cast<double>(c.sample_size);
  double m1 = 0.0, m2 = 0.0;
  for (const auto& [y, k] : c.output_counts) {
    if (k == 0) continue;
    const std::size_t iy = f.domain().observable_index(y);
    double gamma = safe_log2(f.py()[iy]);
    for (const auto& [x, pi] : c.input_prior) {
      if (pi <= 0.0) continue;
      const double pxy = f.pxy(f.domain().secret_index(x), iy);
      if (pxy > 0.0) gamma -= pi * safe_log2(pxy);
    }
    const double d = static_cast<double>(k) / n;
    m1 += d * gamma;
    m2 += d * gamma * gamma;
  }
  return c.weight * c.weight * (m2 - m1 * m1);
}

double entropy_weight(const ComponentResult& c, const JointDistribution& f) {
  if (c.kind != ComponentResult::Kind::Sampled) return 0.0;
  const double n = static_cast<double>(c.sample_size);
  std::map<Value, double> dx;
  for (const auto& [cell, k] : c.counts)
    if (k > 0) dx[cell.first] += static_cast<double>(k) / n;
  double m1 = 0.0, m2 = 0.0;
  for (const auto& [x, d] : dx) {
    const double g = 1.0 + safe_log2(f.px()[f.domain().secret_index(x)]);
    m1 += d * g;
    m2 += d * g * g;
  }
  return c.weight * c.weight * (m2 - m1 * m1);
}

std::map<Value, double> known_prior_weights(const ComponentResult& c,
                                            const JointDistribution& f) {
  std::map<Value, std::pair<double, double>> moments;
  for (const auto& [cell, k] : c.counts) {
    if (k == 0) continue;
    const auto [x, y] = cell;
    const double runs = static_cast<double>(c.per_input_runs.at(x));
    const double d = static_cast<double>(k) / runs;
    const std::size_t ix = f.domain().secret_index(x);
    const std::size_t iy = f.domain().observable_index(y);
    const double g = safe_log2(f.py()[iy] / f.pxy(ix, iy));
    moments[x].first += d * g;
    moments[x].second += d * g * g;
  }
  std::map<Value, double> out;
  for (const auto& [x, w] : c.per_input_weight) {
    if (w <= 0.0) continue;
    auto it = moments.find(x);
    const double var =
        it == moments.end()
            ? 0.0
            : it->second.second - it->second.first * it->second.first;
    out[x] = w * w * var;
  }
  return out;
}

}  // namespace

AllocationWeights compute_weights(const std::vector<ComponentResult>& pilot,
                                  const JointDistribution& fused,
                                  AllocationMode mode) {
  if (pilot.empty()) throw EmptyPilot("no pilot results");
  AllocationWeights w;
  w.mode = mode;
  for (const auto& c : pilot) {
    if (mode == AllocationMode::KnownPrior) {
      if (c.kind == ComponentResult::Kind::SampledKnownPrior)
        w.per_input.push_back(known_prior_weights(c, fused));
      else
        w.per_input.emplace_back();
      continue;
    }
    double v = 0.0;
    if (c.kind == ComponentResult::Kind::Exact) {
      v = 0.0;
    } else if (mode == AllocationMode::Entropy) {
      v = entropy_weight(c, fused);
    } else if (mode == AllocationMode::ATS &&
               c.kind == ComponentResult::Kind::AbstractSampled) {
      v = ats_weight(c, fused);
    } else {
      v = standard_weight(c, fused);
    }
    if (!std::isfinite(v) || v < 0.0) v = 0.0;
    w.per_component.push_back(v);
  }
  return w;
}

std::vector<double> allocate_budget_real(const std::vector<double>& weights,
                                         Count n) {
  double sum = 0.0;
  for (double v : weights) sum += std::sqrt(std::max(0.0, v));
  std::vector<double> shares(weights.size(), 0.0);
  if (sum == 0.0) {
    for (auto& s : shares)
      s = static_cast<double>(n) / static_cast<double>(weights.size());
    return shares;
  }
  for (std::size_t i = 0; i < weights.size(); ++i)
    shares[i] = std::sqrt(std::max(0.0, weights[i])) * static_cast<double>(n) / sum;
  return shares;
}

std::vector<Count> allocate_budget(const std::vector<double>& weights, Count n,
                                   Count floor) {
  const std::size_t m = weights.size();
  if (m == 0) throw EmptyPilot("no allocation slots");
  if (n < static_cast<Count>(m) * floor)
    throw BudgetTooSmall("budget below " + std::to_string(m) + " x floor");

  // Water-filling: slots whose proportional share falls below the floor are
  // pinned to it and the rest of the budget is re-split.
  std::vector<bool> pinned(m, false);
  std::vector<double> shares(m, 0.0);
  while (true) {
    Count pinned_total = 0;
    double sqrt_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (pinned[i])
        pinned_total += floor;
      else
        sqrt_sum += std::sqrt(std::max(0.0, weights[i]));
    }
    const double rest = static_cast<double>(n - pinned_total);
    bool changed = false;
    std::size_t free_slots = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (!pinned[i]) ++free_slots;
    for (std::size_t i = 0; i < m; ++i) {
      if (pinned[i]) {
        shares[i] = static_cast<double>(floor);
        continue;
      }
      shares[i] = sqrt_sum == 0.0
                      ? rest / static_cast<double>(free_slots)
                      : std::sqrt(std::max(0.0, weights[i])) * rest / sqrt_sum;
      if (shares[i] < static_cast<double>(floor)) {
        pinned[i] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }

  // Largest-remainder rounding of the free slots; pinned slots stay at floor.
  std::vector<Count> out(m, 0);
  Count assigned = 0;
  std::vector<std::pair<double, std::size_t>> remainders;
  for (std::size_t i = 0; i < m; ++i) {
    if (pinned[i]) {
      out[i] = floor;
    } else {
      out[i] = static_cast<Count>(std::floor(shares[i]));
      remainders.emplace_back(shares[i] - std::floor(shares[i]), i);
    }
    assigned += out[i];
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k) {
    out[remainders[k % remainders.size()].second] += 1;
    ++assigned;
  }
  return out;
}

AllocationPlan optimal_allocation(const AllocationWeights& w, Count n,
                                  Count floor) {
  AllocationPlan plan;
  plan.total = n;
  if (w.mode == AllocationMode::KnownPrior) {
    // Flatten (component, input) slots; each slot gets n_i lambda_i[x].
    std::vector<double> flat;
    std::vector<std::pair<std::size_t, Value>> back;
    for (std::size_t i = 0; i < w.per_input.size(); ++i)
      for (const auto& [x, v] : w.per_input[i]) {
        flat.push_back(v);
        back.emplace_back(i, x);
      }
    const std::vector<Count> slots = allocate_budget(flat, n, floor);
    plan.per_input.resize(w.per_input.size());
    plan.per_component.assign(w.per_input.size(), 0);
    for (std::size_t k = 0; k < slots.size(); ++k) {
      plan.per_input[back[k].first][back[k].second] = slots[k];
      plan.per_component[back[k].first] += slots[k];
    }
    return plan;
  }
  plan.per_component = allocate_budget(w.per_component, n, floor);
  return plan;
}

std::vector<Count> batch_schedule(Count total, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw AnalysisError("re-allocation fraction outside (0,1]");
  if (total < 1) throw AnalysisError("empty sample budget");
  const auto batches =
      static_cast<Count>(std::ceil(1.0 / fraction - 1e-12));
  const Count per = std::max<Count>(
      1, static_cast<Count>(std::floor(static_cast<double>(total) * fraction)));
  std::vector<Count> out;
  Count used = 0;
  for (Count b = 0; b + 1 < batches && used + per < total; ++b) {
    out.push_back(per);
    used += per;
  }
  out.push_back(total - used);
  return out;
}

}  // namespace leakscope
