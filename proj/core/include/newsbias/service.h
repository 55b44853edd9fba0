#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "newsbias/analysis.h"
#include "newsbias/config.h"
#include "newsbias/profiles.h"
#include "newsbias/views.h"

namespace newsbias {

// Everything the HTTP API and the CLI share. Layout under data_dir:
//   topics/<topic_id>.json       input topics awaiting analysis
//   analyses/<topic>__<hash>.json stored analyses
//   responses.jsonl              study responses
class Service {
 public:
  explicit Service(EngineConfig config);
  Service(EngineConfig config, Providers providers);

  const EngineConfig &config() const { return config_; }

  // Runs the pipeline and persists the result. Runs are serialized.
  std::shared_ptr<const TopicAnalysis> analyze(const Topic &topic);
  // Loads <data_dir>/topics/<topic_id>.json and analyzes it.
  std::shared_ptr<const TopicAnalysis> analyze_stored(const std::string &topic_id);

  std::shared_ptr<const TopicAnalysis> analysis(std::string_view topic_id) const;
  nlohmann::json list_topics() const;

  nlohmann::json overview(std::string_view topic_id, const ConjointProfile &profile);
  nlohmann::json article_view(std::string_view topic_id, std::string_view article_id,
                              const ConjointProfile &profile) const;
  nlohmann::json export_topic(std::string_view topic_id) const;
  // Validates and stores an exported document as is.
  std::shared_ptr<const TopicAnalysis> import_topic(const nlohmann::json &doc);

  Ack log_response(const ResponseRecord &record);
  const ResponseStore &responses() const { return responses_; }

 private:
  EngineConfig config_;
  Providers providers_;
  AnalysisStore store_;
  ResponseStore responses_;
  RandomGroupingCache random_cache_;
  std::mutex analyze_mu_;
};

// JSON API over a Service:
//   GET  /topics
//   POST /topics/{id}/analyze             body: topic JSON, or empty to use the stored input
//   GET  /topics/{id}/overview?profile=<json>|seed=<n>
//   GET  /topics/{id}/articles/{aid}/view?profile=<json>|seed=<n>
//   GET  /profiles/random?topic_id=<id>&seed=<n>
//   GET  /questionnaire
//   POST /responses                       201, 400 invalid, 409 duplicate
//   GET  /export/{id}
// Errors are {"error": message[, "field": path]} with 400, 404, 409, 422 or 500.
class HttpServer {
 public:
  explicit HttpServer(Service &service);
  ~HttpServer();
  HttpServer(const HttpServer &) = delete;
  HttpServer &operator=(const HttpServer &) = delete;

  // Binds to `port` (0 picks a free port) and returns the bound port.
  int bind(const std::string &host, int port);
  // Serves until stop(); call after bind().
  bool listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace newsbias
