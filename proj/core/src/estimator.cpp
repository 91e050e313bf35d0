#include "leakscope/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "leakscope/errors.hpp"
#include "leakscope/measures.hpp"
#include "leakscope/stats.hpp"

namespace leakscope {

// ---------------------------------------------------------------- components

ComponentResult ComponentResult::exact(
    double xi, std::map<std::pair<Value, Value>, Rational> mass) {
  ComponentResult c;
  c.kind = Kind::Exact;
  c.weight = xi;
  c.exact_mass = std::move(mass);
  c.check();
  return c;
}

ComponentResult ComponentResult::sampled(double theta, CellCounts counts,
                                         Count n) {
  ComponentResult c;
  c.kind = Kind::Sampled;
  c.weight = theta;
  c.counts = std::move(counts);
  c.sample_size = n;
  c.check();
  return c;
}

ComponentResult ComponentResult::abstract_sampled(
    double theta, std::map<Value, Count> output_counts,
    std::map<Value, double> input_prior, Count n) {
  ComponentResult c;
  c.kind = Kind::AbstractSampled;
  c.weight = theta;
  c.output_counts = std::move(output_counts);
  c.input_prior = std::move(input_prior);
  c.sample_size = n;
  c.check();
  return c;
}

ComponentResult ComponentResult::sampled_known_prior(
    std::map<Value, double> per_input_weight,
    std::map<Value, Count> per_input_runs, CellCounts counts) {
  ComponentResult c;
  c.kind = Kind::SampledKnownPrior;
  c.per_input_weight = std::move(per_input_weight);
  c.per_input_runs = std::move(per_input_runs);
  c.counts = std::move(counts);
  for (const auto& [x, w] : c.per_input_weight) c.weight += w;
  for (const auto& [x, n] : c.per_input_runs) c.sample_size += n;
  c.check();
  return c;
}

void ComponentResult::check() const {
  switch (kind) {
    case Kind::Exact:
      for (const auto& [cell, p] : exact_mass)
        if (p < 0) throw NegativeMass("negative exact sub-distribution entry");
      break;
    case Kind::Sampled: {
      if (sample_size <= 0) throw ZeroSampleSize("sampled component with n=0");
      Count total = 0;
      for (const auto& [cell, k] : counts) total += k;
      if (total != sample_size)
        throw AnalysisError("sampled counts do not sum to the sample size");
      break;
    }
    case Kind::AbstractSampled: {
      if (sample_size <= 0) throw ZeroSampleSize("sampled component with n=0");
      Count total = 0;
      for (const auto& [y, k] : output_counts) total += k;
      if (total != sample_size)
        throw AnalysisError("output counts do not sum to the sample size");
      double pi_sum = 0.0;
      for (const auto& [x, p] : input_prior) pi_sum += p;
      if (std::abs(pi_sum - 1.0) > 1e-9)
        throw InvalidDistribution("component input prior does not sum to 1");
      break;
    }
    case Kind::SampledKnownPrior: {
      for (const auto& [x, w] : per_input_weight) {
        if (w > 0.0) {
          auto it = per_input_runs.find(x);
          if (it == per_input_runs.end() || it->second == 0)
            throw ZeroImportanceMass(
                "input with positive prior mass received zero runs");
        }
      }
      if (sample_size <= 0) throw ZeroSampleSize("sampled component with n=0");
      std::map<Value, Count> per_x;
      for (const auto& [cell, k] : counts) per_x[cell.first] += k;
      for (const auto& [x, k] : per_x) {
        auto it = per_input_runs.find(x);
        if (it == per_input_runs.end())
          throw MissingPrior("counts for an input without a declared weight");
        if (it->second != k)
          throw AnalysisError("per-input counts do not sum to the run count");
      }
      break;
    }
  }
}

// ------------------------------------------------------------------- fusion

namespace {

ValueDomain domain_of(const ComponentResult& c) {
  std::set<Value> xs, ys;
  switch (c.kind) {
    case ComponentResult::Kind::Exact:
      for (const auto& [cell, p] : c.exact_mass) {
        xs.insert(cell.first);
        ys.insert(cell.second);
      }
      break;
    case ComponentResult::Kind::Sampled:
    case ComponentResult::Kind::SampledKnownPrior:
      for (const auto& [cell, k] : c.counts) {
        xs.insert(cell.first);
        ys.insert(cell.second);
      }
      if (c.kind == ComponentResult::Kind::SampledKnownPrior)
        for (const auto& [x, w] : c.per_input_weight)
          if (w > 0.0) xs.insert(x);
      break;
    case ComponentResult::Kind::AbstractSampled:
      for (const auto& [x, p] : c.input_prior)
        if (p > 0.0) xs.insert(x);
      for (const auto& [y, k] : c.output_counts)
        if (k > 0) ys.insert(y);
      break;
  }
  if (xs.empty() || ys.empty())
    throw EmptySupport("component with empty support");
  return ValueDomain({xs.begin(), xs.end()}, {ys.begin(), ys.end()});
}

}  // namespace

SubDistribution empirical_subdist(const ComponentResult& c) {
  if (c.kind == ComponentResult::Kind::Exact)
    throw AnalysisError("empirical_subdist on an exact component");
  if (c.sample_size <= 0) throw ZeroSampleSize("sample size must be positive");
  CellMass mass;
  const double n = static_cast<double>(c.sample_size);
  switch (c.kind) {
    case ComponentResult::Kind::Sampled:
      for (const auto& [cell, k] : c.counts)
        if (k > 0) mass[cell] = c.weight * (static_cast<double>(k) / n);
      break;
    case ComponentResult::Kind::AbstractSampled:
      for (const auto& [x, pi] : c.input_prior) {
        if (pi <= 0.0) continue;
        for (const auto& [y, k] : c.output_counts)
          if (k > 0) mass[{x, y}] = c.weight * pi * (static_cast<double>(k) / n);
      }
      break;
    case ComponentResult::Kind::SampledKnownPrior:
      for (const auto& [cell, k] : c.counts) {
        if (k == 0) continue;
        const double runs =
            static_cast<double>(c.per_input_runs.at(cell.first));
        mass[cell] = c.per_input_weight.at(cell.first) *
                     (static_cast<double>(k) / runs);
      }
      break;
    default:
      break;
  }
  return SubDistribution(domain_of(c), c.weight, std::move(mass));
}

SubDistribution exact_subdist(const ComponentResult& c) {
  if (c.kind != ComponentResult::Kind::Exact)
    throw AnalysisError("exact_subdist on a sampled component");
  CellMass mass;
  Rational total = 0;
  for (const auto& [cell, p] : c.exact_mass) {
    if (p > 0) mass[cell] = to_double(p);
    total += p;
  }
  // Weight is re-derived from the exact mass so the float invariant holds.
  return SubDistribution(domain_of(c), to_double(total), std::move(mass));
}

JointDistribution fuse(const std::vector<ComponentResult>& results) {
  if (results.empty()) throw AnalysisError("no component results");
  std::vector<SubDistribution> parts;
  parts.reserve(results.size());
  for (const auto& c : results)
    parts.push_back(c.kind == ComponentResult::Kind::Exact
                        ? exact_subdist(c)
                        : empirical_subdist(c));
  JointDistribution fused = compose_joint(parts);
  if (fused.support().empty()) throw EmptySupport("fused joint has no mass");
  return fused;
}

// ---------------------------------------------------------------- estimators

namespace {

double safe_log2(double v) { return std::log2(v); }

struct KernelAccumulator {
  const JointDistribution& fused;

  // Sampled component: phi sums and the delta-method variance, all on
  // empirical quantities, sums restricted to the fused (empirical) support.
  EstimatorIntermediates standard(const ComponentResult& c) const {
    EstimatorIntermediates out;
    out.sample_size = c.sample_size;
    const double n = static_cast<double>(c.sample_size);
    const auto& dom = fused.domain();
    std::map<Value, double> dx, dy;
    double var_m1 = 0.0, var_m2 = 0.0;
    for (const auto& [cell, k] : c.counts) {
      if (k == 0) continue;
      const double d = static_cast<double>(k) / n;
      const std::size_t ix = dom.secret_index(cell.first);
      const std::size_t iy = dom.observable_index(cell.second);
      const double pxy = fused.pxy(ix, iy);
      out.phi_xy_sum += (d - d * d) / pxy;
      dx[cell.first] += d;
      dy[cell.second] += d;
      const double g =
          1.0 + safe_log2(fused.px()[ix] * fused.py()[iy] / pxy);
      var_m1 += d * g;
      var_m2 += d * g * g;
    }
    for (const auto& [x, d] : dx)
      out.phi_x_sum += (d - d * d) / fused.px()[dom.secret_index(x)];
    for (const auto& [y, d] : dy)
      out.phi_y_sum += (d - d * d) / fused.py()[dom.observable_index(y)];
    const double w2 = c.weight * c.weight;
    out.bias = w2 / (2.0 * n) * (out.phi_xy_sum - out.phi_x_sum - out.phi_y_sum);
    out.variance = std::max(0.0, w2 / n * (var_m2 - var_m1 * var_m1));
    return out;
  }

  // Abstraction-then-sampling component: psi kernel for the joint part,
  // no input-marginal term (the prior pi_i is known), gamma-based variance.
  EstimatorIntermediates abstracted(const ComponentResult& c) const {
    EstimatorIntermediates out;
    out.sample_size = c.sample_size;
    const double n = static_cast<double>(c.sample_size);
    const auto& dom = fused.domain();
    double var_m1 = 0.0, var_m2 = 0.0;
    for (const auto& [y, k] : c.output_counts) {
      if (k == 0) continue;
      const double dYy = static_cast<double>(k) / n;
      const std::size_t iy = dom.observable_index(y);
      double gamma = safe_log2(fused.py()[iy]);
      for (const auto& [x, pi] : c.input_prior) {
        if (pi <= 0.0) continue;
        const std::size_t ix = dom.secret_index(x);
        const double pxy = fused.pxy(ix, iy);
        const double d = pi * dYy;
        out.phi_xy_sum += (d * pi - d * d) / pxy;
        gamma -= pi * safe_log2(pxy);
      }
      out.phi_y_sum += (dYy - dYy * dYy) / fused.py()[iy];
      var_m1 += dYy * gamma;
      var_m2 += dYy * gamma * gamma;
    }
    const double w2 = c.weight * c.weight;
    // Exact input prior: the input-marginal term is genuinely zero.
    out.bias = w2 / (2.0 * n) * (out.phi_xy_sum - out.phi_y_sum);
    out.variance = std::max(0.0, w2 / n * (var_m2 - var_m1 * var_m1));
    return out;
  }

  // Known-prior component: M kernel grouped per output, importance-weighted
  // variance per input row.
  EstimatorIntermediates known_prior(const ComponentResult& c) const {
    EstimatorIntermediates out;
    out.sample_size = c.sample_size;
    const double n = static_cast<double>(c.sample_size);
    const auto& dom = fused.domain();
    struct PerY {
      double m_over_pxy = 0.0;
      double m_sum = 0.0;
    };
    std::map<Value, PerY> per_y;
    std::map<Value, std::pair<double, double>> var_moments;  // x -> (m1, m2)
    for (const auto& [cell, k] : c.counts) {
      if (k == 0) continue;
      const auto [x, y] = cell;
      const double runs = static_cast<double>(c.per_input_runs.at(x));
      const double lambda = runs / n;
      const double theta_x = c.per_input_weight.at(x);
      const double d = static_cast<double>(k) / runs;  // D_i[y|x]
      const double m = theta_x * theta_x / lambda * d * (1.0 - d);
      const std::size_t ix = dom.secret_index(x);
      const std::size_t iy = dom.observable_index(y);
      const double pxy = fused.pxy(ix, iy);
      per_y[y].m_over_pxy += m / pxy;
      per_y[y].m_sum += m;
      const double g = safe_log2(fused.py()[iy] / pxy);
      var_moments[x].first += d * g;
      var_moments[x].second += d * g * g;
    }
    double bias_sum = 0.0;
    for (const auto& [y, acc] : per_y) {
      bias_sum += acc.m_over_pxy - acc.m_sum / fused.py()[dom.observable_index(y)];
      out.phi_xy_sum += acc.m_over_pxy;
      out.phi_y_sum += acc.m_sum / fused.py()[dom.observable_index(y)];
    }
    out.bias = bias_sum / (2.0 * n);
    for (const auto& [x, mom] : var_moments) {
      const double runs = static_cast<double>(c.per_input_runs.at(x));
      const double theta_x = c.per_input_weight.at(x);
      out.variance += std::max(
          0.0, theta_x * theta_x / runs * (mom.second - mom.first * mom.first));
    }
    return out;
  }
};

double weight_of(const ComponentResult& c) { return c.weight; }

void check_weights(const std::vector<ComponentResult>& results) {
  double sum = 0.0;
  for (const auto& c : results) sum += weight_of(c);
  if (std::abs(sum - 1.0) > 1e-9)
    throw WeightSumMismatch("component weights sum to " + std::to_string(sum));
}

Count total_samples(const std::vector<ComponentResult>& results) {
  Count n = 0;
  for (const auto& c : results)
    if (c.kind != ComponentResult::Kind::Exact) n += c.sample_size;
  return n;
}

EstimateReport finish(EstimateReport rep, double alpha) {
  rep.alpha = alpha;
  rep.clamped_estimate = std::max(0.0, rep.corrected_estimate);
  std::tie(rep.ci_lower, rep.ci_upper) =
      confidence_interval(rep.corrected_estimate, rep.variance, alpha);
  return rep;
}

}  // namespace

EstimateReport estimate_mi(const std::vector<ComponentResult>& results,
                           double alpha, BiasMode mode) {
  if (results.empty()) throw AnalysisError("no component results");
  for (const auto& c : results)
    if (c.kind == ComponentResult::Kind::SampledKnownPrior)
      throw AnalysisError("known-prior components need estimate_mi_known_prior");
  check_weights(results);
  const JointDistribution fused = fuse(results);

  EstimateReport rep;
  rep.raw_estimate = mutual_information(fused);
  KernelAccumulator acc{fused};
  double bias = 0.0;
  for (const auto& c : results) {
    EstimatorIntermediates ki;
    switch (c.kind) {
      case ComponentResult::Kind::Exact:
        break;
      case ComponentResult::Kind::Sampled:
        ki = acc.standard(c);
        break;
      case ComponentResult::Kind::AbstractSampled:
        ki = acc.abstracted(c);
        break;
      default:
        break;
    }
    bias += ki.bias;
    rep.variance += ki.variance;
    rep.per_component.push_back(ki);
  }
  if (mode == BiasMode::Corollary)
    bias = corollary_bias(static_cast<std::int64_t>(fused.support_x().size()),
                          static_cast<std::int64_t>(fused.support_y().size()),
                          total_samples(results));
  rep.corrected_estimate = rep.raw_estimate - bias;
  rep.sample_adequate =
      total_samples(results) >=
      static_cast<Count>(4 * fused.nx() * fused.ny());
  return finish(std::move(rep), alpha);
}

EstimateReport estimate_entropy(const std::vector<ComponentResult>& results,
                                double alpha) {
  if (results.empty()) throw AnalysisError("no component results");
  for (const auto& c : results)
    if (c.kind == ComponentResult::Kind::SampledKnownPrior)
      throw AnalysisError("known-prior components need estimate_mi_known_prior");
  check_weights(results);
  const JointDistribution fused = fuse(results);

  EstimateReport rep;
  rep.raw_estimate = shannon_entropy(fused.px());
  double bias = 0.0;  // negative: E[H^] = H - sum(...), so we add it back
  for (const auto& c : results) {
    EstimatorIntermediates ki;
    ki.sample_size = c.sample_size;
    // Abstraction-then-sampling components carry an exact input prior and
    // contribute neither bias nor variance to the input entropy.
    if (c.kind == ComponentResult::Kind::Sampled) {
      const double n = static_cast<double>(c.sample_size);
      std::map<Value, double> dx;
      for (const auto& [cell, k] : c.counts)
        if (k > 0) dx[cell.first] += static_cast<double>(k) / n;
      double var_m1 = 0.0, var_m2 = 0.0;
      for (const auto& [x, d] : dx) {
        const double px = fused.px()[fused.domain().secret_index(x)];
        ki.phi_x_sum += d * (1.0 - d) / px;
        const double g = 1.0 + safe_log2(px);
        var_m1 += d * g;
        var_m2 += d * g * g;
      }
      const double w2 = c.weight * c.weight;
      ki.bias = -w2 / (2.0 * n) * ki.phi_x_sum;
      ki.variance = std::max(0.0, w2 / n * (var_m2 - var_m1 * var_m1));
    }
    bias += ki.bias;
    rep.variance += ki.variance;
    rep.per_component.push_back(ki);
  }
  rep.corrected_estimate = rep.raw_estimate - bias;
  rep.sample_adequate =
      total_samples(results) >=
      static_cast<Count>(4 * fused.nx() * fused.ny());
  return finish(std::move(rep), alpha);
}

EstimateReport estimate_mi_known_prior(
    const std::vector<ComponentResult>& results, double alpha, BiasMode mode) {
  if (results.empty()) throw AnalysisError("no component results");
  for (const auto& c : results)
    if (c.kind != ComponentResult::Kind::Exact &&
        c.kind != ComponentResult::Kind::SampledKnownPrior)
      throw AnalysisError(
          "estimate_mi_known_prior accepts Exact and SampledKnownPrior only");
  check_weights(results);
  const JointDistribution fused = fuse(results);

  EstimateReport rep;
  rep.raw_estimate = mutual_information(fused);
  KernelAccumulator acc{fused};
  double bias = 0.0;
  for (const auto& c : results) {
    EstimatorIntermediates ki;
    ki.sample_size = c.sample_size;
    if (c.kind == ComponentResult::Kind::SampledKnownPrior)
      ki = acc.known_prior(c);
    bias += ki.bias;
    rep.variance += ki.variance;
    rep.per_component.push_back(ki);
  }
  if (mode == BiasMode::Corollary)
    bias = corollary_bias(static_cast<std::int64_t>(fused.support_x().size()),
                          static_cast<std::int64_t>(fused.support_y().size()),
                          total_samples(results));
  rep.corrected_estimate = rep.raw_estimate - bias;
  rep.sample_adequate =
      total_samples(results) >=
      static_cast<Count>(4 * fused.nx() * fused.ny());
  return finish(std::move(rep), alpha);
}

EstimateReport estimate_cond_entropy_known_prior(
    const std::vector<ComponentResult>& results, double alpha) {
  EstimateReport mi = estimate_mi_known_prior(results, alpha);
  const JointDistribution fused = fuse(results);
  const double hx = shannon_entropy(fused.px());
  EstimateReport rep;
  rep.raw_estimate = hx - mi.raw_estimate;
  rep.corrected_estimate = hx - mi.corrected_estimate;
  rep.variance = mi.variance;
  rep.sample_adequate = mi.sample_adequate;
  rep.per_component = std::move(mi.per_component);
  return finish(std::move(rep), alpha);
}

double corollary_bias(std::int64_t nx, std::int64_t ny, std::int64_t n) {
  if (nx < 1 || ny < 1 || n < 1)
    throw AnalysisError("corollary_bias needs nx, ny, n >= 1");
  return static_cast<double>((nx - 1) * (ny - 1)) / (2.0 * static_cast<double>(n));
}

std::pair<double, double> confidence_interval(double pe, double v,
                                              double alpha) {
  if (v < 0.0) throw AnalysisError("negative variance");
  const double z = z_score(alpha);
  const double half = z * std::sqrt(v);
  return {std::max(0.0, pe - half), pe + half};
}

std::string EstimateReport::to_json() const {
  nlohmann::json j;
  j["rawEstimate"] = raw_estimate;
  j["correctedEstimate"] = corrected_estimate;
  j["clampedEstimate"] = clamped_estimate;
  j["variance"] = variance;
  j["confidence"] = {ci_lower, ci_upper};
  j["alpha"] = alpha;
  j["sampleAdequate"] = sample_adequate;
  auto& pc = j["perComponentVariance"] = nlohmann::json::array();
  for (const auto& k : per_component) pc.push_back(k.variance);
  return j.dump(2);
}

}  // namespace leakscope
