#include "psmlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace psmlab {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Splits a list value on commas and/or whitespace.
std::vector<std::string> split_list(const std::string& value) {
  std::string normalized = value;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream stream(normalized);
  std::vector<std::string> tokens;
  std::string token;
  while (stream >> token) tokens.push_back(token);
  return tokens;
}

double parse_double(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return d;
  } catch (const std::exception&) {
    throw ConfigInvalid("key '" + key + "': cannot parse '" + value +
                        "' as a number");
  }
}

long long parse_integer(const std::string& value, const std::string& key) {
  long long out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigInvalid("key '" + key + "': cannot parse '" + value +
                        "' as an integer");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
  std::uint64_t out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigInvalid("key '" + key + "': cannot parse '" + value +
                        "' as an unsigned integer");
  }
  return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
  const std::string v = lower(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigInvalid("key '" + key + "': cannot parse '" + value +
                      "' as a boolean");
}

Vector parse_vector(const std::string& value, const std::string& key) {
  const auto tokens = split_list(value);
  Vector v(static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = parse_double(tokens[i], key);
  }
  return v;
}

// "3:0.5" -> quadratic term on X3 with coefficient 0.5
std::vector<QuadTerm> parse_quad_terms(const std::string& value,
                                       const std::string& key) {
  std::vector<QuadTerm> terms;
  for (const auto& token : split_list(value)) {
    const auto colon = token.find(':');
    if (colon == std::string::npos) {
      throw ConfigInvalid("key '" + key + "': expected covariate:coef, got '" +
                          token + "'");
    }
    QuadTerm term;
    term.covariate =
        static_cast<int>(parse_integer(token.substr(0, colon), key));
    term.coef = parse_double(token.substr(colon + 1), key);
    terms.push_back(term);
  }
  return terms;
}

// "1*2:0.7" -> interaction X1*X2 with coefficient 0.7
std::vector<InteractionTerm> parse_interaction_terms(const std::string& value,
                                                     const std::string& key) {
  std::vector<InteractionTerm> terms;
  for (const auto& token : split_list(value)) {
    const auto star = token.find('*');
    const auto colon = token.find(':');
    if (star == std::string::npos || colon == std::string::npos || colon < star) {
      throw ConfigInvalid("key '" + key + "': expected i*j:coef, got '" + token +
                          "'");
    }
    InteractionTerm term;
    term.first = static_cast<int>(parse_integer(token.substr(0, star), key));
    term.second = static_cast<int>(
        parse_integer(token.substr(star + 1, colon - star - 1), key));
    term.coef = parse_double(token.substr(colon + 1), key);
    terms.push_back(term);
  }
  return terms;
}

}  // namespace

ModelSpec parse_model_spec(const std::string& token, int p) {
  const std::string t = lower(trim(token));
  if (t == "ma") return ModelSpec::ma();
  if (t == "max45") return ModelSpec::max45();
  if (t == "mfull") return ModelSpec::mfull(p);
  if (t.rfind("custom(", 0) == 0 && t.back() == ')') {
    const std::string inner = t.substr(7, t.size() - 8);
    std::vector<int> covariates;
    for (const auto& piece : split_list(inner)) {
      covariates.push_back(static_cast<int>(parse_integer(piece, "model_specs")));
    }
    return ModelSpec::custom(std::move(covariates));
  }
  throw ConfigInvalid("model_specs: unknown spec '" + token +
                      "' (expected MA, MAX45, MFull, or custom(...))");
}

void ScenarioConfig::validate() const {
  if (replicates < 1) throw ConfigInvalid("replicates must be >= 1");
  if (n < 2) throw ConfigInvalid("n must be >= 2");
  if (p < 1) throw ConfigInvalid("p must be >= 1");
  if (!(k_alpha > 0.0)) throw ConfigInvalid("k_alpha must be > 0");
  if (!(k_beta > 0.0)) throw ConfigInvalid("k_beta must be > 0");
  if (!(sine_interval.lo >= 0.0 && sine_interval.lo < sine_interval.hi &&
        sine_interval.hi <= 1.0)) {
    throw ConfigInvalid("sine_interval must satisfy 0 <= lo < hi <= 1");
  }
  if (caliper_multipliers.empty()) {
    throw ConfigInvalid("caliper_multipliers must be non-empty");
  }
  for (std::size_t i = 0; i < caliper_multipliers.size(); ++i) {
    if (!(caliper_multipliers[i] > 0.0)) {
      throw ConfigInvalid("caliper_multipliers must be positive");
    }
    if (i > 0 && !(caliper_multipliers[i] < caliper_multipliers[i - 1])) {
      throw ConfigInvalid("caliper_multipliers must be strictly descending");
    }
  }
  if (model_specs.empty()) throw ConfigInvalid("model_specs must be non-empty");
  for (const auto& spec : model_specs) {
    for (const int c : spec.covariates) {
      if (c < 1 || c > p) {
        throw ConfigInvalid("model spec " + spec.name() +
                            " references covariate outside 1.." + std::to_string(p));
      }
    }
  }
  if (!(complex_terms.noise_sd > 0.0)) {
    throw ConfigInvalid("complex_terms.noise_sd must be > 0");
  }
  if (outcome_kind == OutcomeKind::kLinear &&
      (!complex_terms.quad_coefs.empty() ||
       !complex_terms.interaction_coefs.empty())) {
    throw ConfigInvalid(
        "outcome_kind = linear cannot carry quad_coefs or interaction_coefs");
  }
  for (const auto& term : complex_terms.quad_coefs) {
    if (term.covariate < 1 || term.covariate > p) {
      throw ConfigInvalid("quad_coefs covariate outside 1.." + std::to_string(p));
    }
  }
  for (const auto& term : complex_terms.interaction_coefs) {
    if (term.first < 1 || term.first > p || term.second < 1 || term.second > p) {
      throw ConfigInvalid("interaction_coefs covariate outside 1.." +
                          std::to_string(p));
    }
  }
  if (fixed_coefs) {
    // A zero alpha1 is legal: it is the pure randomized-design control arm.
    if (fixed_coefs->alpha1.size() != p || fixed_coefs->beta2.size() != p) {
      throw ConfigInvalid("fixed_coefs vectors must have length p = " +
                          std::to_string(p));
    }
  }
}

OutcomeModelSpec ScenarioConfig::make_outcome(CoefVector beta2) const {
  OutcomeModelSpec outcome;
  outcome.kind = outcome_kind;
  outcome.beta0 = complex_terms.beta0;
  outcome.beta1 = beta1;
  outcome.beta2 = std::move(beta2);
  outcome.noise_sd = complex_terms.noise_sd;
  if (outcome_kind == OutcomeKind::kComplex) {
    outcome.quad_coefs = complex_terms.quad_coefs;
    outcome.interaction_coefs = complex_terms.interaction_coefs;
    if (outcome.quad_coefs.empty() && outcome.interaction_coefs.empty()) {
      // Complex kind with no explicit terms falls back to the default set.
      const OutcomeModelSpec def = OutcomeModelSpec::complex_default(
          outcome.beta0, outcome.beta1, outcome.beta2, outcome.noise_sd);
      outcome.quad_coefs = def.quad_coefs;
      outcome.interaction_coefs = def.interaction_coefs;
    }
  }
  outcome.validate();
  return outcome;
}

ScenarioConfig parse_scenario_config(std::istream& in, const std::string& origin) {
  ScenarioConfig config;

  // Raw key/value capture, by section ("" = top level).
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::string current;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigInvalid(origin + ":" + std::to_string(line_no) +
                            ": malformed section header '" + line + "'");
      }
      current = lower(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigInvalid(origin + ":" + std::to_string(line_no) +
                          ": expected key = value, got '" + line + "'");
    }
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigInvalid(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    if (!sections[current].emplace(key, value).second) {
      throw ConfigInvalid(origin + ":" + std::to_string(line_no) +
                          ": duplicate key '" + key + "'");
    }
  }

  const std::set<std::string> known_sections = {"", "sine_interval",
                                                "fixed_coefs", "complex_terms"};
  for (const auto& [section, _] : sections) {
    if (!known_sections.count(section)) {
      throw ConfigInvalid(origin + ": unknown section [" + section + "]");
    }
  }

  // Top level.
  for (const auto& [key, value] : sections[""]) {
    if (key == "seed") {
      config.seed = parse_u64(value, key);
    } else if (key == "replicates") {
      config.replicates = static_cast<int>(parse_integer(value, key));
    } else if (key == "n") {
      config.n = static_cast<int>(parse_integer(value, key));
    } else if (key == "p") {
      config.p = static_cast<int>(parse_integer(value, key));
    } else if (key == "alpha0") {
      config.alpha0 = parse_double(value, key);
    } else if (key == "k_alpha") {
      config.k_alpha = parse_double(value, key);
    } else if (key == "k_beta") {
      config.k_beta = parse_double(value, key);
    } else if (key == "beta1") {
      config.beta1 = parse_double(value, key);
    } else if (key == "outcome_kind") {
      const std::string v = lower(value);
      if (v == "linear") {
        config.outcome_kind = OutcomeKind::kLinear;
      } else if (v == "complex") {
        config.outcome_kind = OutcomeKind::kComplex;
      } else {
        throw ConfigInvalid("outcome_kind must be linear or complex, got '" +
                            value + "'");
      }
    } else if (key == "caliper_multipliers") {
      config.caliper_multipliers.clear();
      for (const auto& token : split_list(value)) {
        config.caliper_multipliers.push_back(parse_double(token, key));
      }
    } else if (key == "model_specs") {
      config.model_specs.clear();
      // Custom specs contain commas inside parentheses; split carefully.
      std::vector<std::string> tokens;
      std::string buffer;
      int depth = 0;
      for (const char c : value + ",") {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
          const std::string t = trim(buffer);
          if (!t.empty()) tokens.push_back(t);
          buffer.clear();
        } else {
          buffer += c;
        }
      }
      for (const auto& token : tokens) {
        config.model_specs.push_back(parse_model_spec(token, config.p));
      }
    } else if (key == "include_unmatched_arm") {
      config.include_unmatched_arm = parse_bool(value, key);
    } else if (key == "sandwich_flavor") {
      const std::string v = lower(value);
      if (v == "hc1") {
        config.sandwich_flavor = SandwichFlavor::kHc1;
      } else if (v == "hc0") {
        config.sandwich_flavor = SandwichFlavor::kHc0;
      } else {
        throw ConfigInvalid("sandwich_flavor must be hc0 or hc1, got '" + value +
                            "'");
      }
    } else {
      throw ConfigInvalid(origin + ": unknown key '" + key + "'");
    }
  }

  for (const auto& [key, value] : sections["sine_interval"]) {
    if (key == "lo") {
      config.sine_interval.lo = parse_double(value, key);
    } else if (key == "hi") {
      config.sine_interval.hi = parse_double(value, key);
    } else {
      throw ConfigInvalid(origin + ": unknown key 'sine_interval." + key + "'");
    }
  }

  if (sections.count("fixed_coefs") && !sections["fixed_coefs"].empty()) {
    FixedCoefs fixed;
    bool have_alpha = false;
    bool have_beta = false;
    for (const auto& [key, value] : sections["fixed_coefs"]) {
      if (key == "alpha1") {
        fixed.alpha1 = parse_vector(value, key);
        have_alpha = true;
      } else if (key == "beta2") {
        fixed.beta2 = parse_vector(value, key);
        have_beta = true;
      } else {
        throw ConfigInvalid(origin + ": unknown key 'fixed_coefs." + key + "'");
      }
    }
    if (!have_alpha || !have_beta) {
      throw ConfigInvalid("fixed_coefs requires both alpha1 and beta2");
    }
    config.fixed_coefs = std::move(fixed);
  }

  for (const auto& [key, value] : sections["complex_terms"]) {
    if (key == "beta0") {
      config.complex_terms.beta0 = parse_double(value, key);
    } else if (key == "noise_sd") {
      config.complex_terms.noise_sd = parse_double(value, key);
    } else if (key == "quad_coefs") {
      config.complex_terms.quad_coefs = parse_quad_terms(value, key);
    } else if (key == "interaction_coefs") {
      config.complex_terms.interaction_coefs = parse_interaction_terms(value, key);
    } else {
      throw ConfigInvalid(origin + ": unknown key 'complex_terms." + key + "'");
    }
  }

  config.validate();
  return config;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_scenario_config(in, path);
}

void apply_env_seed_override(ScenarioConfig& config) {
  if (const char* env = std::getenv("PSMLAB_SEED")) {
    config.seed = parse_u64(env, "PSMLAB_SEED");
  }
}

}  // namespace psmlab
