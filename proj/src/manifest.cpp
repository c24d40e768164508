#include "logei/manifest.hpp"

#include <chrono>
#include <ctime>
#include <json.hpp>

#include "logei/errors.hpp"

namespace logei {

namespace {

using nlohmann::json;

// Narrow extraction helpers: every failure names the field by JSON pointer.

std::int64_t take_int(const json& j, const std::string& pointer) {
  if (!j.is_number_integer()) {
    throw ConfigError("config " + pointer + ": expected an integer");
  }
  return j.get<std::int64_t>();
}

std::uint64_t take_uint(const json& j, const std::string& pointer) {
  if (!j.is_number_unsigned() &&
      !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw ConfigError("config " + pointer + ": expected a nonnegative "
                      "integer");
  }
  return j.get<std::uint64_t>();
}

std::string take_string(const json& j, const std::string& pointer) {
  if (!j.is_string()) {
    throw ConfigError("config " + pointer + ": expected a string");
  }
  return j.get<std::string>();
}

AcquisitionVariant take_variant(const json& j, const std::string& pointer) {
  const std::string name = take_string(j, pointer);
  try {
    return acquisition_variant_from_string(name);
  } catch (const DomainError& e) {
    throw ConfigError("config " + pointer + ": " + e.what());
  }
}

void apply_bo_field(BOConfig& bo, const std::string& key, const json& value,
                    const std::string& prefix) {
  const std::string pointer = prefix + key;
  if (key == "acquisition") {
    bo.acquisition = take_variant(value, pointer);
  } else if (key == "init_design_size") {
    bo.init_design_size = static_cast<int>(take_int(value, pointer));
  } else if (key == "max_evaluations") {
    bo.max_evaluations = static_cast<int>(take_int(value, pointer));
  } else if (key == "candidate_pool") {
    bo.candidate_pool = static_cast<int>(take_int(value, pointer));
  } else if (key == "local_refinement_steps") {
    bo.local_refinement_steps = static_cast<int>(take_int(value, pointer));
  } else if (key == "tune_budget") {
    bo.tune_budget = static_cast<int>(take_int(value, pointer));
  } else if (key == "seed") {
    bo.seed = take_uint(value, pointer);
  } else {
    throw ConfigError("config " + pointer + ": unknown field");
  }
}

void apply_quad_field(QuadratureConfig& quad, const std::string& key,
                      const json& value, const std::string& prefix) {
  const std::string pointer = prefix + key;
  if (key == "node_count") {
    quad.node_count = static_cast<int>(take_int(value, pointer));
  } else if (key == "mc_samples") {
    quad.mc_samples = take_int(value, pointer);
  } else if (key == "mc_seed") {
    quad.mc_seed = take_uint(value, pointer);
  } else {
    throw ConfigError("config " + pointer + ": unknown field");
  }
}

json bo_to_json(const BOConfig& bo) {
  return json{{"acquisition", to_string(bo.acquisition)},
              {"init_design_size", bo.init_design_size},
              {"max_evaluations", bo.max_evaluations},
              {"candidate_pool", bo.candidate_pool},
              {"local_refinement_steps", bo.local_refinement_steps},
              {"tune_budget", bo.tune_budget},
              {"seed", bo.seed}};
}

json quad_to_json(const QuadratureConfig& quad) {
  return json{{"node_count", quad.node_count},
              {"mc_samples", quad.mc_samples},
              {"mc_seed", quad.mc_seed}};
}

json parse_json_or_throw(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw ConfigError("config: not valid JSON");
  }
  return j;
}

}  // namespace

bool RunManifest::operator==(const RunManifest& other) const {
  return artifact_version == other.artifact_version &&
         generator == other.generator && problem == other.problem &&
         bo.acquisition == other.bo.acquisition &&
         bo.init_design_size == other.bo.init_design_size &&
         bo.max_evaluations == other.bo.max_evaluations &&
         bo.candidate_pool == other.bo.candidate_pool &&
         bo.local_refinement_steps == other.bo.local_refinement_steps &&
         bo.tune_budget == other.bo.tune_budget && bo.seed == other.bo.seed &&
         quad.node_count == other.quad.node_count &&
         quad.mc_samples == other.quad.mc_samples &&
         quad.mc_seed == other.quad.mc_seed && created_at == other.created_at;
}

std::string serialize_manifest(const RunManifest& m) {
  json j{{"artifact_version", m.artifact_version},
         {"generator", m.generator},
         {"seed", m.bo.seed},
         {"problem", m.problem},
         {"bo", bo_to_json(m.bo)},
         {"quadrature", quad_to_json(m.quad)},
         {"created_at", m.created_at}};
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text) {
  const json j = parse_json_or_throw(text);
  if (!j.is_object()) {
    throw ConfigError("config : expected a JSON object");
  }
  RunManifest m;
  bool saw_top_seed = false;
  std::uint64_t top_seed = 0;
  for (const auto& [key, value] : j.items()) {
    if (key == "artifact_version") {
      m.artifact_version = take_string(value, "/artifact_version");
    } else if (key == "generator") {
      m.generator = take_string(value, "/generator");
    } else if (key == "seed") {
      top_seed = take_uint(value, "/seed");
      saw_top_seed = true;
    } else if (key == "problem") {
      m.problem = take_string(value, "/problem");
    } else if (key == "bo") {
      if (!value.is_object()) {
        throw ConfigError("config /bo: expected an object");
      }
      for (const auto& [bk, bv] : value.items()) {
        apply_bo_field(m.bo, bk, bv, "/bo/");
      }
    } else if (key == "quadrature") {
      if (!value.is_object()) {
        throw ConfigError("config /quadrature: expected an object");
      }
      for (const auto& [qk, qv] : value.items()) {
        apply_quad_field(m.quad, qk, qv, "/quadrature/");
      }
    } else if (key == "created_at") {
      m.created_at = take_string(value, "/created_at");
    } else {
      throw ConfigError("config /" + key + ": unknown field");
    }
  }
  if (saw_top_seed && top_seed != m.bo.seed) {
    throw ConfigError("config /seed: does not match /bo/seed");
  }
  return m;
}

RunConfig parse_run_config(const std::string& text, RunConfig defaults) {
  const json j = parse_json_or_throw(text);
  if (!j.is_object()) {
    throw ConfigError("config : expected a JSON object");
  }
  RunConfig out = defaults;
  for (const auto& [key, value] : j.items()) {
    if (key == "node_count" || key == "mc_samples" || key == "mc_seed") {
      apply_quad_field(out.quad, key, value, "/");
    } else {
      apply_bo_field(out.bo, key, value, "/");
    }
  }
  return out;
}

std::string now_utc_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace logei
