#pragma once

#include <string>

#include "logei/bo_loop.hpp"
#include "logei/oracle.hpp"

namespace logei {

// Everything needed to reproduce a run: config snapshot, artifact version,
// RNG algorithm name, seed, and creation timestamp.
struct RunManifest {
  std::string artifact_version;
  std::string generator;
  std::string problem;
  BOConfig bo;
  QuadratureConfig quad;
  std::string created_at;  // ISO-8601 UTC

  bool operator==(const RunManifest& other) const;
};

std::string serialize_manifest(const RunManifest& m);
RunManifest parse_manifest(const std::string& text);

// Run-config JSON: fields mirror BOConfig and QuadratureConfig, every field
// optional on top of the defaults passed in; unknown fields and type
// mismatches raise ConfigError with the JSON pointer of the bad field.
struct RunConfig {
  BOConfig bo;
  QuadratureConfig quad;
};
RunConfig parse_run_config(const std::string& text, RunConfig defaults);

std::string now_utc_iso8601();

}  // namespace logei
