#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "psmlab/datagen.hpp"
#include "psmlab/estimation.hpp"

namespace psmlab {

struct SineInterval {
  double lo = 0.8;
  double hi = 1.0;
};

struct FixedCoefs {
  Vector alpha1;
  Vector beta2;
};

// Outcome-model extras shared by both outcome kinds; quadratic and
// interaction terms are only legal for the complex kind.
struct ComplexTerms {
  double beta0 = 0.0;
  double noise_sd = 1.0;
  std::vector<QuadTerm> quad_coefs;
  std::vector<InteractionTerm> interaction_coefs;
};

// One Monte Carlo scenario. Config files mirror these field names exactly;
// unknown keys are rejected.
struct ScenarioConfig {
  std::uint64_t seed = 1;
  int replicates = 1000;
  int n = 1500;
  int p = 5;
  double alpha0 = -0.9;
  double k_alpha = 1.0;
  double k_beta = 1.2;
  SineInterval sine_interval;
  std::optional<FixedCoefs> fixed_coefs;
  double beta1 = 0.5;
  OutcomeKind outcome_kind = OutcomeKind::kLinear;
  ComplexTerms complex_terms;
  std::vector<double> caliper_multipliers = {20, 1, 0.2, 0.02, 0.002, 0.0002};
  std::vector<ModelSpec> model_specs = {ModelSpec::ma(), ModelSpec::max45(),
                                        ModelSpec::mfull(5)};
  bool include_unmatched_arm = false;
  SandwichFlavor sandwich_flavor = SandwichFlavor::kHc1;

  // Throws ConfigInvalid on any violated constraint.
  void validate() const;

  // The outcome generator this scenario implies (without coefficients).
  OutcomeModelSpec make_outcome(CoefVector beta2) const;
};

// Parses the key/value format with [section] headers:
//
//   seed = 20260801
//   caliper_multipliers = 20, 1, 0.2, 0.02, 0.002, 0.0002
//   model_specs = MA, MAX45, MFull
//   [sine_interval]
//   lo = 0.8
//   hi = 1.0
//
// Sections: sine_interval, fixed_coefs (alpha1 =, beta2 =), complex_terms
// (beta0 =, noise_sd =, quad_coefs = 1:0.5 2:0.5,
//  interaction_coefs = 1*2:0.7 3*4:0.7). '#' and ';' start comments.
// Unknown keys or sections raise ConfigInvalid.
ScenarioConfig parse_scenario_config(std::istream& in, const std::string& origin);

// Loads and validates a config file. IoError when unreadable.
ScenarioConfig load_scenario_config(const std::string& path);

// Applies the PSMLAB_SEED environment override when the variable is set;
// a non-numeric value raises ConfigInvalid.
void apply_env_seed_override(ScenarioConfig& config);

// Parses one model spec name: MA, MAX45, MFull, or custom(i,j,...).
ModelSpec parse_model_spec(const std::string& token, int p);

}  // namespace psmlab
