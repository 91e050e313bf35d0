#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <future>
#include <set>
#include <sstream>

#include "leakscope/allocator.hpp"
#include "leakscope/errors.hpp"
#include "leakscope/matrix_io.hpp"
#include "leakscope/measures.hpp"
#include "leakscope/pipeline.hpp"
#include "leakscope/parser.hpp"

namespace leakscope {

namespace {

void strip_simulates(Block& b) {
  Block out;
  for (auto& s : b) {
    if (s->kind == Stmt::Kind::Simulate || s->kind == Stmt::Kind::SimulateAbs)
      continue;
    strip_simulates(s->then_block);
    for (auto& [c, blk] : s->elifs) strip_simulates(blk);
    strip_simulates(s->else_block);
    strip_simulates(s->body);
    out.push_back(std::move(s));
  }
  b = std::move(out);
}

/// Observable tuples are flattened to a single integer: the raw value for a
/// single observable variable, the rank in lexicographic order otherwise.
class ObsEncoder {
 public:
  ObsEncoder(const std::set<ObsTuple>& tuples, bool single) : single_(single) {
    Value id = 0;
    for (const auto& t : tuples) ids_[t] = single_ ? t[0] : id++;
  }

  Value encode(const ObsTuple& t) const { return ids_.at(t); }

 private:
  bool single_;
  std::map<ObsTuple, Value> ids_;
};

double declared_prior_entropy(const SecretSpace& secrets) {
  double h = 0.0;
  for (const auto& v : secrets.vars())
    h += std::log2(static_cast<double>(v.hi - v.lo + 1));
  return h;
}

// Sample-count bookkeeping for one statistical component across batches.
struct ComponentAccumulator {
  const SavedComponent* saved = nullptr;
  AnalysisMethod method = AnalysisMethod::Sample;
  Count samples = 0;
  std::map<std::pair<Value, ObsTuple>, Count> counts;     // Sample
  std::map<ObsTuple, Count> output_counts;                // SampleAbs
  std::vector<Count> batch_allocation;
};

std::map<Value, double> component_pi(const SavedComponent& c,
                                     const SecretSpace& secrets) {
  std::map<Value, double> pi;
  if (c.pre_init) {
    if (!secrets.materializable())
      throw AnalysisError(
          "abstraction-then-sampling needs an enumerable secret domain");
    const double p = 1.0 / secrets.count();
    for (Value x : secrets.all_values()) pi[x] = p;
    return pi;
  }
  const double total = to_double(c.weight);
  double acc = 0.0;
  for (const auto& [x, entry] : c.states) {
    pi[x] = to_double(entry.first) / total;
    acc += pi[x];
  }
  // renormalize the rounding residue onto the last value
  if (!pi.empty()) pi.rbegin()->second += 1.0 - acc;
  return pi;
}

struct Pipeline {
  const AnalysisConfig& config;
  std::string name;
  RunReport report;
  EngineLimits limits;

  RunReport finalize_exact(const Cfg& cfg, const EnumerationResult& enumd,
                           const SecretSpace& secrets) {
    if (enumd.exact_weight != 1)
      throw AnalysisError("precise analysis lost probability mass");
    std::set<Value> xs;
    std::set<ObsTuple> ys;
    for (const auto& o : enumd.outcomes) {
      xs.insert(o.secret);
      ys.insert(o.observable);
    }
    std::size_t obs_vars = 0;
    for (const auto& d : cfg.program->decls)
      if (d.cls == VarClass::Observable) ++obs_vars;
    const ObsEncoder enc(ys, obs_vars == 1);
    std::vector<Value> obs_ids;
    for (const auto& t : ys) obs_ids.push_back(enc.encode(t));
    std::sort(obs_ids.begin(), obs_ids.end());
    ValueDomain dom({xs.begin(), xs.end()}, std::move(obs_ids));
    std::vector<Rational> cells(dom.nx() * dom.ny(), Rational(0));
    for (const auto& o : enumd.outcomes)
      cells[dom.secret_index(o.secret) * dom.ny() +
            dom.observable_index(enc.encode(o.observable))] += o.probability;
    const ExactJoint exact(std::move(dom), std::move(cells));
    const JointDistribution joint = exact.to_joint();

    report.exact = true;
    report.leakage_raw = mutual_information(joint);
    report.leakage_corrected = report.leakage_raw;
    report.leakage_clamped = std::max(0.0, report.leakage_corrected);
    report.variance = 0.0;
    report.ci_lower = report.leakage_clamped;
    report.ci_upper = report.leakage_corrected;
    report.prior_entropy = declared_prior_entropy(secrets);
    report.posterior_entropy = report.prior_entropy - report.leakage_corrected;
    ComponentDiagnostic diag;
    diag.id = 0;
    diag.method = "precise";
    diag.weight = 1.0;
    report.components.push_back(std::move(diag));
    if (config.emit_matrix) report.matrix = joint;
    return std::move(report);
  }

  // ------------------------------------------------------------ statistical

  std::vector<Count> plan_batches(Count total, std::size_t slots) {
    std::vector<Count> schedule =
        batch_schedule(total, config.realloc_fraction);
    // Re-allocation needs at least one sample per slot per batch; fold the
    // small ones together.
    std::vector<Count> out;
    Count carry = 0;
    for (Count b : schedule) {
      const Count t = b + carry;
      if (t < static_cast<Count>(slots)) {
        carry = t;
        continue;
      }
      out.push_back(t);
      carry = 0;
    }
    if (carry > 0) {
      if (out.empty())
        throw BudgetTooSmall("sample budget below the component count");
      out.back() += carry;
    }
    return out;
  }

  void check_deadline() {
    if (limits.deadline && std::chrono::steady_clock::now() > *limits.deadline)
      throw TimeoutExceeded("analysis wall-clock limit exceeded");
  }

  RunReport finalize_sampled(const Cfg& cfg, const EnumerationResult& enumd,
                             const SecretSpace& secrets,
                             std::vector<SavedComponent> components) {
    const std::size_t m = components.size();
    if (m == 0) throw AnalysisError("no statistical components");
    if (config.total_samples < static_cast<Count>(m))
      throw BudgetTooSmall("sample budget below the component count");

    std::vector<ComponentAccumulator> acc(m);
    for (std::size_t i = 0; i < m; ++i) {
      acc[i].saved = &components[i];
      acc[i].method = config.use_ats ? components[i].method
                                     : AnalysisMethod::Sample;
    }

    const std::vector<Count> batches = plan_batches(config.total_samples, m);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      check_deadline();
      std::vector<Count> alloc;
      if (b == 0) {
        alloc = allocate_budget(std::vector<double>(m, 1.0), batches[b], 1);
      } else {
        auto [results, enc] = assemble_results(cfg, enumd, secrets, acc);
        (void)enc;
        const JointDistribution fused = fuse(results);
        bool any_abs = false;
        for (const auto& a : acc)
          if (a.method == AnalysisMethod::SampleAbs) any_abs = true;
        AllocationWeights w = compute_weights(
            results, fused, any_abs ? AllocationMode::ATS : AllocationMode::MI);
        // the leading Exact result (if any) is not an allocation slot
        if (w.per_component.size() == m + 1)
          w.per_component.erase(w.per_component.begin());
        alloc = allocate_budget(w.per_component, batches[b], 1);
      }

      // Components own independent RNG streams; sample them concurrently.
      std::vector<std::future<void>> tasks;
      for (std::size_t i = 0; i < m; ++i) {
        if (alloc[i] <= 0) {
          acc[i].batch_allocation.push_back(0);
          continue;
        }
        acc[i].batch_allocation.push_back(alloc[i]);
        tasks.push_back(std::async(std::launch::async, [&, i, b] {
          Rng rng = Rng::derive(config.seed, i, b);
          if (acc[i].method == AnalysisMethod::SampleAbs) {
            auto counts = sample_component_abs(cfg, secrets, components[i],
                                               alloc[i], rng, limits);
            for (const auto& [y, k] : counts) acc[i].output_counts[y] += k;
          } else {
            auto counts = sample_component(cfg, secrets, components[i],
                                           alloc[i], rng, limits);
            for (const auto& [xy, k] : counts) acc[i].counts[xy] += k;
          }
          acc[i].samples += alloc[i];
        }));
      }
      for (auto& t : tasks) t.get();
    }

    auto [results, enc] = assemble_results(cfg, enumd, secrets, acc);
    const EstimateReport est =
        estimate_mi(results, config.alpha, config.bias_mode);
    fill_report(est, enumd, acc);
    if (config.emit_matrix) report.matrix = fuse(results);
    return std::move(report);
  }

  std::pair<std::vector<ComponentResult>, std::shared_ptr<ObsEncoder>>
  assemble_results(const Cfg& cfg, const EnumerationResult& enumd,
                   const SecretSpace& secrets,
                   const std::vector<ComponentAccumulator>& acc) {
    std::set<ObsTuple> tuples;
    for (const auto& o : enumd.outcomes) tuples.insert(o.observable);
    for (const auto& a : acc) {
      for (const auto& [xy, k] : a.counts) tuples.insert(xy.second);
      for (const auto& [y, k] : a.output_counts) tuples.insert(y);
    }
    std::size_t obs_vars = 0;
    for (const auto& d : cfg.program->decls)
      if (d.cls == VarClass::Observable) ++obs_vars;
    auto enc = std::make_shared<ObsEncoder>(tuples, obs_vars == 1);

    std::vector<ComponentResult> results;
    if (enumd.exact_weight > 0) {
      std::map<std::pair<Value, Value>, Rational> mass;
      for (const auto& o : enumd.outcomes)
        mass[{o.secret, enc->encode(o.observable)}] += o.probability;
      results.push_back(
          ComponentResult::exact(to_double(enumd.exact_weight), std::move(mass)));
    }
    for (const auto& a : acc) {
      if (a.method == AnalysisMethod::SampleAbs) {
        std::map<Value, Count> counts;
        for (const auto& [y, k] : a.output_counts)
          counts[enc->encode(y)] += k;
        results.push_back(ComponentResult::abstract_sampled(
            to_double(a.saved->weight), std::move(counts),
            component_pi(*a.saved, secrets), a.samples));
      } else {
        CellCounts counts;
        for (const auto& [xy, k] : a.counts)
          counts[{xy.first, enc->encode(xy.second)}] += k;
        results.push_back(ComponentResult::sampled(
            to_double(a.saved->weight), std::move(counts), a.samples));
      }
    }
    return {std::move(results), std::move(enc)};
  }

  void fill_report(const EstimateReport& est, const EnumerationResult& enumd,
                   const std::vector<ComponentAccumulator>& acc) {
    report.leakage_raw = est.raw_estimate;
    report.leakage_corrected = est.corrected_estimate;
    report.leakage_clamped = est.clamped_estimate;
    report.variance = est.variance;
    report.ci_lower = est.ci_lower;
    report.ci_upper = est.ci_upper;
    report.sample_adequate = est.sample_adequate;
    report.total_samples = 0;
    for (const auto& a : acc) report.total_samples += a.samples;

    std::size_t id = 0;
    std::size_t est_index = 0;
    if (enumd.exact_weight > 0) {
      ComponentDiagnostic diag;
      diag.id = id++;
      diag.method = "precise";
      diag.weight = to_double(enumd.exact_weight);
      report.components.push_back(std::move(diag));
      ++est_index;
    }
    for (const auto& a : acc) {
      ComponentDiagnostic diag;
      diag.id = id++;
      diag.method =
          a.method == AnalysisMethod::SampleAbs ? "sample-abs" : "sample";
      diag.weight = to_double(a.saved->weight);
      diag.samples = a.samples;
      diag.batch_allocation = a.batch_allocation;
      if (est_index < est.per_component.size()) {
        diag.bias_contribution = est.per_component[est_index].bias;
        diag.variance_contribution = est.per_component[est_index].variance;
      }
      ++est_index;
      report.components.push_back(std::move(diag));
    }
  }

  // Statistical mode with the declared prior: one component per secret value,
  // sample sizes driven by the importance priors.
  RunReport finalize_known_prior(const Cfg& cfg, const SecretSpace& secrets,
                                 const SavedComponent& component) {
    const std::vector<Value> xs = secrets.all_values();
    const std::size_t mx = xs.size();
    if (config.total_samples < static_cast<Count>(mx))
      throw BudgetTooSmall("sample budget below the secret-value count");

    std::map<Value, Count> runs;
    std::map<std::pair<Value, ObsTuple>, Count> counts;
    std::vector<Count> batch_totals;

    const std::vector<Count> batches =
        plan_batches(config.total_samples, mx);
    const double theta_x = to_double(secrets.prior_mass());
    for (std::size_t b = 0; b < batches.size(); ++b) {
      check_deadline();
      std::vector<Count> alloc;
      if (b == 0) {
        alloc = allocate_budget(std::vector<double>(mx, 1.0), batches[b], 1);
      } else {
        auto [results, enc] = assemble_known_prior(cfg, runs, counts, theta_x);
        (void)enc;
        const JointDistribution fused = fuse(results);
        AllocationWeights w =
            compute_weights(results, fused, AllocationMode::KnownPrior);
        std::vector<double> flat;
        flat.reserve(mx);
        for (Value x : xs) {
          const auto& per_input = w.per_input.back();
          auto it = per_input.find(x);
          flat.push_back(it == per_input.end() ? 0.0 : it->second);
        }
        alloc = allocate_budget(flat, batches[b], 1);
      }
      std::map<Value, Count> batch_runs;
      for (std::size_t i = 0; i < mx; ++i)
        if (alloc[i] > 0) batch_runs[xs[i]] = alloc[i];
      Rng rng = Rng::derive(config.seed, 0, b);
      for (const auto& [xy, k] :
           sample_per_secret(cfg, secrets, component, batch_runs, rng, limits))
        counts[xy] += k;
      for (const auto& [x, k] : batch_runs) runs[x] += k;
      batch_totals.push_back(batches[b]);
    }

    auto [results, enc] = assemble_known_prior(cfg, runs, counts, theta_x);
    const EstimateReport est =
        estimate_mi_known_prior(results, config.alpha, config.bias_mode);
    report.leakage_raw = est.raw_estimate;
    report.leakage_corrected = est.corrected_estimate;
    report.leakage_clamped = est.clamped_estimate;
    report.variance = est.variance;
    report.ci_lower = est.ci_lower;
    report.ci_upper = est.ci_upper;
    report.sample_adequate = est.sample_adequate;
    report.total_samples = config.total_samples;
    ComponentDiagnostic diag;
    diag.id = 0;
    diag.method = "known-prior";
    diag.weight = 1.0;
    diag.samples = config.total_samples;
    diag.batch_allocation = batch_totals;
    if (!est.per_component.empty()) {
      diag.bias_contribution = est.per_component.front().bias;
      diag.variance_contribution = est.per_component.front().variance;
    }
    report.components.push_back(std::move(diag));
    if (config.emit_matrix) report.matrix = fuse(results);
    return std::move(report);
  }

  std::pair<std::vector<ComponentResult>, std::shared_ptr<ObsEncoder>>
  assemble_known_prior(const Cfg& cfg, const std::map<Value, Count>& runs,
                       const std::map<std::pair<Value, ObsTuple>, Count>& counts,
                       double theta_x) {
    std::set<ObsTuple> tuples;
    for (const auto& [xy, k] : counts) tuples.insert(xy.second);
    std::size_t obs_vars = 0;
    for (const auto& d : cfg.program->decls)
      if (d.cls == VarClass::Observable) ++obs_vars;
    auto enc = std::make_shared<ObsEncoder>(tuples, obs_vars == 1);

    std::map<Value, double> weights;
    for (const auto& [x, k] : runs) weights[x] = theta_x;
    CellCounts encoded;
    for (const auto& [xy, k] : counts)
      encoded[{xy.first, enc->encode(xy.second)}] += k;
    std::vector<ComponentResult> results;
    results.push_back(ComponentResult::sampled_known_prior(
        std::move(weights), runs, std::move(encoded)));
    return {std::move(results), std::move(enc)};
  }
};

}  // namespace

RunReport run_source(const std::string& source, const std::string& name,
                     const AnalysisConfig& config) {
  Pipeline pipe{config, name, {}, {}};
  pipe.report.file = name;
  pipe.report.mode = mode_name(config.mode);
  pipe.report.seed = config.seed;
  pipe.report.alpha = config.alpha;
  pipe.limits.trace_cap = config.trace_cap;
  pipe.limits.step_cap = config.step_cap;
  if (config.timeout_seconds > 0)
    pipe.limits.deadline =
        std::chrono::steady_clock::now() +
        std::chrono::milliseconds(
            static_cast<std::int64_t>(config.timeout_seconds * 1000));

  const Program ast = parse_source(source, name);
  PreparedProgram prep = preprocess(ast, name);

  if (config.mode != Mode::Hybrid) strip_simulates(prep.body);

  // Decomposition (hybrid); precise and statistical modes force their method.
  Decomposition decomp;
  if (config.mode == Mode::Hybrid) {
    const Cfg pre_cfg = build_cfg(prep);
    const RangeAnnotation ranges = estimate_ranges(pre_cfg);
    decomp = decompose(prep, pre_cfg, ranges);
  } else {
    decomp.program = preprocess(prep);
    decomp.plan.has_cut = config.mode == Mode::Statistical;
    decomp.plan.cut_statement = 0;
    decomp.plan.method = AnalysisMethod::Sample;
  }

  const Cfg cfg = build_cfg(decomp.program);
  const SecretSpace secrets = SecretSpace::from(cfg);
  pipe.report.prior_entropy = declared_prior_entropy(secrets);

  if (!config.cfg_dot_path.empty()) {
    std::ofstream os(config.cfg_dot_path);
    if (!os) throw AnalysisError("cannot write " + config.cfg_dot_path);
    write_cfg_dot(os, cfg);
  }
  if (!config.pp_path.empty()) {
    std::ofstream os(config.pp_path);
    if (!os) throw AnalysisError("cannot write " + config.pp_path);
    os << "// " << pipe.report.mode << " analysis of " << name << "\n";
    os << "// " << decomp.plan.rationale << "\n";
    os << print_program(decomp.program.to_program());
  }

  std::optional<std::ofstream> trace_csv;
  if (!config.trace_csv_path.empty()) {
    trace_csv.emplace(config.trace_csv_path);
    if (!*trace_csv)
      throw AnalysisError("cannot write " + config.trace_csv_path);
    *trace_csv << "secret,observable,probability\n";
  }
  auto dump_traces = [&](const EnumerationResult& enumd) {
    if (!trace_csv) return;
    *trace_csv << std::setprecision(17);
    for (const auto& o : enumd.outcomes) {
      *trace_csv << o.secret << ",\"";
      for (std::size_t i = 0; i < o.observable.size(); ++i) {
        if (i) *trace_csv << ' ';
        *trace_csv << o.observable[i];
      }
      *trace_csv << "\"," << to_double(o.probability) << "\n";
    }
  };

  RunReport out;
  if (config.mode == Mode::Statistical) {
    const SavedComponent whole =
        whole_program_component(cfg, AnalysisMethod::Sample);
    if (config.known_prior && secrets.materializable()) {
      out = pipe.finalize_known_prior(cfg, secrets, whole);
    } else {
      EnumerationResult none;
      out = pipe.finalize_sampled(cfg, none, secrets, {whole});
    }
  } else if (config.mode == Mode::Precise || !decomp.plan.has_cut) {
    const EnumerationResult enumd = enumerate_traces(cfg, pipe.limits);
    dump_traces(enumd);
    out = pipe.finalize_exact(cfg, enumd, secrets);
  } else if (decomp.plan.has_cut && !decomp.plan.honored_existing &&
             decomp.plan.cut_statement == 0) {
    // Whole-program statistical component: initialization happens per run.
    EnumerationResult none;
    AnalysisMethod method = decomp.plan.method;
    if (method == AnalysisMethod::SampleAbs && !config.use_ats)
      method = AnalysisMethod::Sample;
    if (method == AnalysisMethod::SampleAbs && !secrets.materializable()) {
      method = AnalysisMethod::Sample;
      pipe.report.warnings.push_back(
          "secret domain too large for abstraction-then-sampling; "
          "falling back to plain sampling");
    }
    out = pipe.finalize_sampled(cfg, none, secrets,
                                {whole_program_component(cfg, method)});
  } else {
    EnumerationResult enumd = enumerate_traces(cfg, pipe.limits);
    dump_traces(enumd);
    if (enumd.components.empty()) {
      out = pipe.finalize_exact(cfg, enumd, secrets);
    } else {
      out = pipe.finalize_sampled(cfg, enumd, secrets,
                                  std::move(enumd.components));
    }
  }

  out.posterior_entropy = out.prior_entropy - out.leakage_corrected;
  if (!config.json_path.empty()) {
    std::ofstream os(config.json_path);
    if (!os) throw AnalysisError("cannot write " + config.json_path);
    os << out.to_json() << "\n";
  }
  return out;
}

RunReport run(const std::string& path, const AnalysisConfig& config) {
  std::ifstream is(path);
  if (!is) throw AnalysisError(path + ": cannot open file");
  std::stringstream ss;
  ss << is.rdbuf();
  return run_source(ss.str(), path, config);
}

}  // namespace leakscope
