#include "illab/config.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "illab/errors.hpp"

namespace illab {

namespace {

using nlohmann::json;

const std::set<std::string> kExperiments = {"classify",    "qdist",  "probe_stability",
                                            "probe_local", "rates",  "saturation"};
const std::set<std::string> kOps = {"volterra",          "diagonal",      "identity",
                                    "scalar_rational",   "weighted_identity",
                                    "quadratic_two",     "autoconv_real", "autoconv_complex"};
const std::set<std::string> kMethods = {"tikhonov", "lavrentiev"};
const std::set<std::string> kSigmaLaws = {"one_over_k", "constant", "well_posed_step"};
const std::set<std::string> kTargets = {"default", "zero", "one", "u1", "u2", "value"};
const std::set<std::string> kSources = {"smooth", "supersmooth", "range_op",
                                        "range_op_squared", "zero"};
const std::set<std::string> kDirectionFamilies = {"auto", "bump", "oscillatory"};

void check_choice(const std::string& key, const std::string& value,
                  const std::set<std::string>& allowed) {
  if (!allowed.count(value))
    fail("invalid-config", "unknown value '" + value + "' for key '" + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    fail("invalid-config", std::string("key '") + key + "' has the wrong type");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail("invalid-config", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) fail("invalid-config", "top-level JSON value must be an object");

  const std::set<std::string> known = {
      "experiment", "op",          "n",           "method",        "sigma_law",
      "target",     "target_value", "source",     "direction_family", "radius",
      "length",     "delta_min",   "delta_max",   "delta_count",   "alpha_min",
      "alpha_max",  "alpha_count", "seed",        "feasibility_tol", "svg",
      "out_dir"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key()))
      fail("invalid-config", "unknown key '" + it.key() + "'");
  }

  ExperimentConfig cfg;
  read(j, "experiment", cfg.experiment);
  read(j, "op", cfg.op);
  read(j, "n", cfg.n);
  read(j, "method", cfg.method);
  read(j, "sigma_law", cfg.sigma_law);
  read(j, "target", cfg.target);
  read(j, "target_value", cfg.target_value);
  read(j, "source", cfg.source);
  read(j, "direction_family", cfg.direction_family);
  read(j, "radius", cfg.radius);
  read(j, "length", cfg.length);
  read(j, "delta_min", cfg.delta_min);
  read(j, "delta_max", cfg.delta_max);
  read(j, "delta_count", cfg.delta_count);
  read(j, "alpha_min", cfg.alpha_min);
  read(j, "alpha_max", cfg.alpha_max);
  read(j, "alpha_count", cfg.alpha_count);
  read(j, "seed", cfg.seed);
  read(j, "feasibility_tol", cfg.feasibility_tol);
  read(j, "svg", cfg.svg);
  read(j, "out_dir", cfg.out_dir);

  check_choice("experiment", cfg.experiment, kExperiments);
  check_choice("op", cfg.op, kOps);
  check_choice("method", cfg.method, kMethods);
  check_choice("sigma_law", cfg.sigma_law, kSigmaLaws);
  check_choice("target", cfg.target, kTargets);
  check_choice("source", cfg.source, kSources);
  check_choice("direction_family", cfg.direction_family, kDirectionFamilies);

  if (cfg.n < 1) fail("invalid-config", "n must be positive");
  if (cfg.length < 4) fail("invalid-config", "length must be at least 4");
  if (!(cfg.radius > 0)) fail("invalid-config", "radius must be positive");
  if (!(cfg.delta_min > 0) || !(cfg.delta_max > cfg.delta_min) || cfg.delta_count < 3)
    fail("invalid-config", "noise grid needs 0 < delta_min < delta_max and >= 3 points");
  if (!(cfg.alpha_min > 0) || !(cfg.alpha_max > cfg.alpha_min) || cfg.alpha_count < 2)
    fail("invalid-config", "alpha grid needs 0 < alpha_min < alpha_max and >= 2 points");
  if (cfg.out_dir.empty()) fail("invalid-config", "out_dir must not be empty");
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["op"] = cfg.op;
  j["n"] = cfg.n;
  j["method"] = cfg.method;
  j["sigma_law"] = cfg.sigma_law;
  j["target"] = cfg.target;
  j["target_value"] = cfg.target_value;
  j["source"] = cfg.source;
  j["direction_family"] = cfg.direction_family;
  j["radius"] = cfg.radius;
  j["length"] = cfg.length;
  j["delta_min"] = cfg.delta_min;
  j["delta_max"] = cfg.delta_max;
  j["delta_count"] = cfg.delta_count;
  j["alpha_min"] = cfg.alpha_min;
  j["alpha_max"] = cfg.alpha_max;
  j["alpha_count"] = cfg.alpha_count;
  j["seed"] = cfg.seed;
  j["feasibility_tol"] = cfg.feasibility_tol;
  j["svg"] = cfg.svg;
  j["out_dir"] = cfg.out_dir;
  return j.dump(2) + "\n";
}

}  // namespace illab
