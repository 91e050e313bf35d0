#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "leakscope/errors.hpp"
#include "leakscope/matrix_io.hpp"
#include "leakscope/pipeline.hpp"

namespace leakscope {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Precise: return "precise";
    case Mode::Statistical: return "statistical";
    case Mode::Hybrid: return "hybrid";
  }
  return "?";
}

Mode parse_mode(const std::string& name) {
  if (name == "precise") return Mode::Precise;
  if (name == "statistical") return Mode::Statistical;
  if (name == "hybrid") return Mode::Hybrid;
  throw AnalysisError("unknown mode '" + name +
                      "' (expected precise, statistical or hybrid)");
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["schemaVersion"] = 1;
  j["file"] = file;
  j["mode"] = mode;
  j["seed"] = seed;
  j["priorEntropy"] = prior_entropy;
  j["posteriorEntropy"] = posterior_entropy;
  j["leakageRaw"] = leakage_raw;
  j["leakageCorrected"] = leakage_corrected;
  j["leakageClamped"] = leakage_clamped;
  j["variance"] = variance;
  j["confidenceInterval"] = {ci_lower, ci_upper};
  j["alpha"] = alpha;
  j["sampleAdequate"] = sample_adequate;
  j["exact"] = exact;
  j["totalSamples"] = total_samples;
  auto& comps = j["components"] = nlohmann::json::array();
  for (const auto& c : components) {
    nlohmann::json cj;
    cj["id"] = c.id;
    cj["method"] = c.method;
    cj["weight"] = c.weight;
    cj["samples"] = c.samples;
    cj["biasContribution"] = c.bias_contribution;
    cj["varianceContribution"] = c.variance_contribution;
    cj["batchAllocation"] = c.batch_allocation;
    comps.push_back(std::move(cj));
  }
  j["warnings"] = warnings;
  if (matrix) {
    std::ostringstream os;
    write_matrix_csv(os, *matrix);
    j["matrixCsv"] = os.str();
  }
  return j.dump(2);
}

std::string RunReport::to_text() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "file:                      " << file << "\n";
  os << "analysis mode:             " << mode;
  if (!exact) os << "  (seed " << seed << ", " << total_samples << " samples)";
  os << "\n";
  os << "prior Shannon entropy:     " << prior_entropy << "\n";
  os << "posterior Shannon entropy: " << posterior_entropy << "\n";
  os << "leakage (raw):             " << leakage_raw << "\n";
  os << "leakage (bias-corrected):  " << leakage_corrected << "\n";
  if (!exact) {
    os << std::setprecision(4);
    os << "confidence interval:       [" << ci_lower << ", " << ci_upper
       << "]  (alpha " << std::setprecision(3) << alpha << ")\n";
    os << std::scientific << std::setprecision(3);
    os << "variance:                  " << variance << "\n";
    os << std::fixed << std::setprecision(4);
  }
  os << "components:                " << components.size() << "\n";
  for (const auto& c : components) {
    os << "  #" << c.id << "  " << c.method << "  weight=" << c.weight;
    if (c.samples > 0) os << "  samples=" << c.samples;
    if (c.method != "precise") {
      os << std::scientific << std::setprecision(2)
         << "  variance=" << c.variance_contribution << std::fixed
         << std::setprecision(4);
    }
    os << "\n";
  }
  if (!sample_adequate)
    os << "warning: sample size below 4*|X|*|Y|; higher-order bias terms may "
          "matter\n";
  for (const auto& w : warnings) os << "warning: " << w << "\n";
  return os.str();
}

}  // namespace leakscope
