#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsbias/annotate.h"
#include "newsbias/cdcr.h"
#include "newsbias/config.h"
#include "newsbias/embedding.h"
#include "newsbias/grouping.h"
#include "newsbias/ingest.h"
#include "newsbias/tsc.h"

namespace newsbias {

inline constexpr const char *kFlagNoMfa = "no-MFA";

// Result of running the full pipeline over one topic.
struct TopicAnalysis {
  Topic topic;
  // Person concepts only, in merge order (p0, p1, ...).
  std::vector<PersonConcept> concepts;
  std::map<MentionKey, PolarityLabel> labels;
  PersonIndex person_index;
  std::vector<ArticleVector> vectors;
  // MFA and ALL are absent when the topic has no person mentions.
  std::map<GroupingMethod, BiasGrouping> groupings;
  std::map<std::string, double> relevance;
  std::vector<std::string> flags;
  std::string created_at;
  std::string engine_config_hash;

  bool has_flag(std::string_view flag) const;
  const PersonConcept *person(std::string_view person_id) const;
  const ArticleVector *vector_of(std::string_view article_id) const;
  // Index of the MFA inside person_index, when there is one.
  std::optional<size_t> mfa_index() const;

  // Throws SchemaError if any referenced article, person or mention is
  // missing or the groupings do not partition the articles.
  void check_consistency() const;
};

// Export document. Stable key order; numbers round-trip exactly.
nlohmann::json to_json(const TopicAnalysis &analysis);
// Inverse of to_json; validates consistency.
TopicAnalysis analysis_from_json(const nlohmann::json &doc);

struct Providers {
  std::unique_ptr<AnnotationProvider> annotator;
  std::unique_ptr<EmbeddingProvider> embeddings;
  std::unique_ptr<SentimentClassifier> classifier;
  std::unique_ptr<SentimentClassifier> fallback;

  static Providers from_config(const EngineConfig &config);
};

// Failure of one pipeline stage ("annotate", "cdcr", "tsc", "grouping");
// `article_id` is empty when the failure is not tied to one article.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, std::string article_id, const std::string &what);
  const std::string &stage() const { return stage_; }
  const std::string &article_id() const { return article_id_; }

 private:
  std::string stage_;
  std::string article_id_;
};

// annotate -> cdcr -> tsc -> grouping. `created_at` defaults to the current
// UTC time. Does not persist.
TopicAnalysis analyze_topic(const Topic &topic, const EngineConfig &config,
                            const Providers &providers, std::string created_at = "");

std::string utc_timestamp();

// File-per-topic store: <data_dir>/analyses/<topic_id>__<config hash>.json.
// Writes go to a temporary file that is renamed into place, so a failed
// write leaves no partial analysis. Reads are served from memory.
class AnalysisStore {
 public:
  explicit AnalysisStore(std::filesystem::path data_dir);

  void put(const TopicAnalysis &analysis);
  // The analysis under `config_hash`, else the most recently created one.
  std::shared_ptr<const TopicAnalysis> get(std::string_view topic_id,
                                           std::string_view config_hash = "") const;
  std::vector<std::shared_ptr<const TopicAnalysis>> list() const;
  const std::filesystem::path &dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, std::shared_ptr<const TopicAnalysis>> entries_;
};

}  // namespace newsbias
