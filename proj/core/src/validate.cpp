#include "leakscope/validate.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "leakscope/errors.hpp"

namespace leakscope {

namespace {

// Reference leakage values for the fixture corpus, computed by exhaustive
// summation over each program's full randomness (independent of the engines).
constexpr double kReservoir4 = 0.7317116550296339;
constexpr double kReservoir6 = 0.9184579085721051;
constexpr double kReservoir8 = 1.0982029338230357;
constexpr double kRandomWalk = 2.167007571286998;
constexpr double kRandomWalk500 = 1.9240480521916636;
constexpr double kRandomWalk500Prior = 8.965784284662087;
constexpr double kWindow20 = 0.01511043492437987;
constexpr double kWindow32 = 0.013847100124195329;
constexpr double kLyingCrypto = 0.5032583347756456;
constexpr double kSmartGrid1 = 0.06014497089854919;
constexpr double kDining3 = 0.8112781244591329;

struct Harness {
  std::string dir;
  AnalysisConfig base;
  ValidationSummary summary;

  std::string path(const std::string& file) const {
    const std::string p = dir + "/" + file;
    if (!std::filesystem::exists(p))
      throw FixtureMissing("fixture not found: " + p);
    return p;
  }

  RunReport run_fixture(const std::string& file, Mode mode,
                        Count samples = 0) {
    AnalysisConfig cfg = base;
    cfg.mode = mode;
    if (samples > 0) cfg.total_samples = samples;
    return run(path(file), cfg);
  }

  void check_value(const std::string& name, double got, double expected,
                   double tol) {
    ValidationCheck c;
    c.name = name;
    c.expected = expected;
    c.got = got;
    c.pass = std::abs(got - expected) <= tol;
    std::ostringstream os;
    os << "|" << got << " - " << expected << "| "
       << (c.pass ? "<= " : "> ") << tol;
    c.detail = os.str();
    summary.checks.push_back(std::move(c));
  }

  void check_flag(const std::string& name, bool pass,
                  const std::string& detail) {
    summary.checks.push_back({name, pass, 0.0, 0.0, detail});
  }
};

}  // namespace

bool ValidationSummary::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string ValidationSummary::to_text() const {
  std::ostringstream os;
  os << std::setprecision(10);
  for (const auto& c : checks)
    os << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << c.detail
       << ")\n";
  os << (all_pass() ? "all checks passed" : "some checks FAILED") << "\n";
  return os.str();
}

ValidationSummary validate(const std::string& fixtures_dir,
                           const AnalysisConfig& base) {
  Harness h{fixtures_dir, base, {}};

  // Reservoir sampling, precise analysis against the exhaustive oracle.
  h.check_value("reservoir n4 precise",
                h.run_fixture("reservoir_n4.hyleak", Mode::Precise)
                    .leakage_corrected,
                kReservoir4, 5e-4);
  h.check_value("reservoir n6 precise",
                h.run_fixture("reservoir_n6.hyleak", Mode::Precise)
                    .leakage_corrected,
                kReservoir6, 5e-4);
  h.check_value("reservoir n8 precise",
                h.run_fixture("reservoir_n8.hyleak", Mode::Precise)
                    .leakage_corrected,
                kReservoir8, 5e-4);

  // Random walk: precise truth, and hybrid agreement with it.
  {
    const RunReport precise =
        h.run_fixture("random_walk.hyleak", Mode::Precise);
    h.check_value("random walk precise", precise.leakage_corrected,
                  kRandomWalk, 5e-3);
    const RunReport hybrid = h.run_fixture("random_walk.hyleak", Mode::Hybrid);
    h.check_flag("random walk hybrid CI contains precise",
                 precise.leakage_corrected >= hybrid.ci_lower - 1e-9 &&
                     precise.leakage_corrected <= hybrid.ci_upper + 1e-9,
                 "precise value inside the hybrid confidence interval");
    h.check_flag("random walk hybrid uses abstraction",
                 !hybrid.components.empty() &&
                     hybrid.components.front().method == "sample-abs",
                 "first component method = " +
                     (hybrid.components.empty()
                          ? std::string("none")
                          : hybrid.components.front().method));
  }

  // Short walk (no overlap between location buckets): the hybrid estimator
  // is nearly exact there.
  {
    const RunReport precise =
        h.run_fixture("random_walk_small.hyleak", Mode::Precise);
    const RunReport hybrid =
        h.run_fixture("random_walk_small.hyleak", Mode::Hybrid);
    h.check_value("random walk small hybrid vs precise",
                  hybrid.leakage_corrected, precise.leakage_corrected, 1e-3);
  }

  // 500-location fair-step walk: prior entropy and hybrid estimate.
  {
    const RunReport hybrid =
        h.run_fixture("random_walk_500.hyleak", Mode::Hybrid);
    h.check_value("random walk 500 prior entropy", hybrid.prior_entropy,
                  kRandomWalk500Prior, 1e-6);
    h.check_value("random walk 500 hybrid", hybrid.leakage_corrected,
                  kRandomWalk500, 5e-3);
  }

  // Lying cryptographers: precise truth, statistical with the known prior,
  // then hybrid.
  h.check_value("lying crypto precise",
                h.run_fixture("lying_crypto.hyleak", Mode::Precise)
                    .leakage_corrected,
                kLyingCrypto, 1e-9);
  h.check_value("lying crypto statistical (known prior)",
                h.run_fixture("lying_crypto.hyleak", Mode::Statistical)
                    .leakage_corrected,
                kLyingCrypto, 1e-3);
  {
    const RunReport hybrid = h.run_fixture("lying_crypto.hyleak", Mode::Hybrid);
    h.check_value("lying crypto hybrid", hybrid.leakage_corrected, kLyingCrypto,
                  5e-3);
    h.check_flag("lying crypto hybrid CI contains the exact value",
                 kLyingCrypto >= hybrid.ci_lower - 1e-9 &&
                     kLyingCrypto <= hybrid.ci_upper + 1e-9,
                 "exact leakage inside the hybrid confidence interval");
  }

  // Shifting window: precise truth and hybrid agreement.
  {
    const RunReport precise =
        h.run_fixture("shifting_window_n20.hyleak", Mode::Precise);
    h.check_value("shifting window n20 precise", precise.leakage_corrected,
                  kWindow20, 5e-4);
    const RunReport hybrid =
        h.run_fixture("shifting_window_n20.hyleak", Mode::Hybrid);
    h.check_flag("shifting window n20 hybrid CI contains precise",
                 precise.leakage_corrected >= hybrid.ci_lower - 1e-9 &&
                     precise.leakage_corrected <= hybrid.ci_upper + 1e-9,
                 "precise value inside the hybrid confidence interval");
  }
  h.check_value("shifting window n32 precise",
                h.run_fixture("shifting_window_n32.hyleak", Mode::Precise)
                    .leakage_corrected,
                kWindow32, 5e-4);

  // Probabilistically terminating loop: sampling completes, precise cannot.
  {
    const RunReport stat =
        h.run_fixture("prob_terminating.hyleak", Mode::Statistical, 20000);
    const RunReport hyb =
        h.run_fixture("prob_terminating.hyleak", Mode::Hybrid, 20000);
    h.check_flag("probabilistic termination statistical/hybrid complete",
                 stat.leakage_corrected >= 0.0 || hyb.leakage_corrected >= 0.0,
                 "statistical and hybrid analyses returned reports");
    bool trace_budget = false;
    try {
      h.run_fixture("prob_terminating.hyleak", Mode::Precise);
    } catch (const TraceBudgetExceeded&) {
      trace_budget = true;
    }
    h.check_flag("probabilistic termination precise hits the trace budget",
                 trace_budget, trace_budget ? "TraceBudgetExceeded" : "no error");
  }

  // Smart grid: precise truth and hybrid agreement.
  {
    const RunReport precise =
        h.run_fixture("smart_grid_s1.hyleak", Mode::Precise);
    h.check_value("smart grid s1 precise", precise.leakage_corrected,
                  kSmartGrid1, 1e-9);
    const RunReport hybrid =
        h.run_fixture("smart_grid_s1.hyleak", Mode::Hybrid);
    const double tol =
        std::max(0.01, 3.0 * std::sqrt(std::max(0.0, hybrid.variance)));
    h.check_value("smart grid s1 hybrid vs precise",
                  hybrid.leakage_corrected, precise.leakage_corrected, tol);
  }

  // Three-party dining cryptographers, exact.
  h.check_value(
      "dining3 precise",
      h.run_fixture("dining3.hyleak", Mode::Precise).leakage_corrected,
      kDining3, 1e-9);

  return std::move(h.summary);
}

}  // namespace leakscope
