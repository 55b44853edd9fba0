#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "newsbias/cdcr.h"
#include "newsbias/grouping.h"

namespace newsbias {

// Engine and service settings. The text format is one "key = value" per line;
// '#' starts a comment; unknown keys are errors. See README for the key list.
struct EngineConfig {
  // Annotation provider: "builtin" or "remote".
  std::string annotator = "builtin";
  std::string annotator_endpoint;
  std::string gazetteer_path;

  // Embedding provider: "hash" or "table".
  std::string embeddings = "hash";
  int embedding_dimension = 64;
  uint64_t embedding_seed = 42;
  std::string embedding_path;

  SieveConfig sieves;

  // Sentiment classifier: "lexicon" or "remote"; fallback "lexicon" or "none".
  std::string classifier = "lexicon";
  std::string classifier_endpoint;
  std::string lexicon_path;
  std::string classifier_fallback = "lexicon";

  int provider_timeout_ms = 10000;
  int threads = 1;

  PositionWeight weight;
  size_t person_top_n = 10;
  double mfa_tau = 0.1;
  int kmeans_k = 3;
  uint64_t kmeans_seed = 42;

  // Service only; not part of the engine hash.
  int port = 8080;
  std::filesystem::path data_dir = "data";

  // Throws Error naming the line on malformed input or unknown keys.
  static EngineConfig parse(std::string_view text);
  static EngineConfig load(const std::filesystem::path &path);

  // NEWSBIAS_PORT and NEWSBIAS_DATA_DIR override the file values.
  void apply_environment();
  // Throws Error on out-of-range values or missing endpoints.
  void validate() const;

  // Canonical text of every engine key, sorted, with defaults filled in.
  std::string engine_text() const;
  // 16 hex digits of FNV-1a over engine_text(). Service keys are excluded so
  // moving the data dir does not orphan stored analyses.
  std::string hash() const;
};

}  // namespace newsbias
