#include "newsbias/service.h"

#include <atomic>
#include <set>

#include <httplib.h>

namespace newsbias {

Service::Service(EngineConfig config) : Service(config, Providers::from_config(config)) {}

Service::Service(EngineConfig config, Providers providers)
    : config_(std::move(config)),
      providers_(std::move(providers)),
      store_(config_.data_dir),
      responses_(config_.data_dir / "responses.jsonl", Questionnaire::builtin()) {
  config_.validate();
}

std::shared_ptr<const TopicAnalysis> Service::analyze(const Topic &topic) {
  std::lock_guard lock(analyze_mu_);
  TopicAnalysis a = analyze_topic(topic, config_, providers_);
  store_.put(a);
  return store_.get(a.topic.topic_id, a.engine_config_hash);
}

std::shared_ptr<const TopicAnalysis> Service::analyze_stored(const std::string &topic_id) {
  const auto path = config_.data_dir / "topics" / (topic_id + ".json");
  if (topic_id.find('/') != std::string::npos || !std::filesystem::exists(path)) {
    throw NotFoundError("no stored topic '" + topic_id + "'");
  }
  return analyze(load_topic(path));
}

std::shared_ptr<const TopicAnalysis> Service::analysis(std::string_view topic_id) const {
  return store_.get(topic_id, config_.hash());
}

nlohmann::json Service::list_topics() const {
  std::map<std::string, nlohmann::json> rows;
  for (const auto &a : store_.list()) {
    auto &row = rows[a->topic.topic_id];
    // Prefer the analysis made with the current configuration.
    if (!row.is_null() && row["engine_config_hash"] == config_.hash()) continue;
    row = {{"topic_id", a->topic.topic_id},
           {"event_description", a->topic.event_description},
           {"article_count", a->topic.articles.size()},
           {"analyzed", true},
           {"engine_config_hash", a->engine_config_hash},
           {"created_at", a->created_at},
           {"flags", a->flags}};
  }
  std::error_code ec;
  const auto topics_dir = config_.data_dir / "topics";
  if (std::filesystem::is_directory(topics_dir, ec)) {
    for (const auto &entry : std::filesystem::directory_iterator(topics_dir, ec)) {
      if (entry.path().extension() != ".json") continue;
      std::string id = entry.path().stem().string();
      if (rows.count(id)) continue;
      rows[id] = {{"topic_id", id}, {"analyzed", false}};
    }
  }
  nlohmann::json out = nlohmann::json::array();
  for (auto &[id, row] : rows) out.push_back(std::move(row));
  return out;
}

nlohmann::json Service::overview(std::string_view topic_id, const ConjointProfile &profile) {
  return get_overview(*analysis(topic_id), profile, random_cache_);
}

nlohmann::json Service::article_view(std::string_view topic_id, std::string_view article_id,
                                     const ConjointProfile &profile) const {
  return get_article_view(*analysis(topic_id), article_id, profile);
}

nlohmann::json Service::export_topic(std::string_view topic_id) const {
  return to_json(*analysis(topic_id));
}

std::shared_ptr<const TopicAnalysis> Service::import_topic(const nlohmann::json &doc) {
  TopicAnalysis a = analysis_from_json(doc);
  store_.put(a);
  return store_.get(a.topic.topic_id, a.engine_config_hash);
}

Ack Service::log_response(const ResponseRecord &record) { return responses_.log_response(record); }

// --- HTTP ------------------------------------------------------------------

namespace {

void send_json(httplib::Response &res, int status, const nlohmann::json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response &res, int status, const std::string &message,
                nlohmann::json extra = nlohmann::json::object()) {
  extra["error"] = message;
  send_json(res, status, extra);
}

// Maps engine exceptions onto status codes.
template <typename Fn>
void guarded(httplib::Response &res, Fn fn) {
  try {
    fn();
  } catch (const NotFoundError &e) {
    send_error(res, 404, e.what());
  } catch (const ConflictError &e) {
    send_error(res, 409, e.what());
  } catch (const SchemaError &e) {
    send_error(res, 400, e.what(), {{"field", e.field()}});
  } catch (const PipelineError &e) {
    send_error(res, 422, e.what(), {{"stage", e.stage()}, {"article_id", e.article_id()}});
  } catch (const nlohmann::json::exception &e) {
    send_error(res, 400, std::string("malformed JSON: ") + e.what());
  } catch (const Error &e) {
    send_error(res, 400, e.what());
  } catch (const std::exception &e) {
    send_error(res, 500, e.what());
  }
}

uint64_t parse_seed(const std::string &s) {
  try {
    size_t used = 0;
    uint64_t v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw SchemaError("seed", "not an unsigned integer: '" + s + "'");
  }
}

// The profile of a view request: an explicit JSON profile or a seed to
// randomize one for this topic.
ConjointProfile request_profile(const httplib::Request &req, const std::string &topic_id) {
  if (req.has_param("profile")) {
    return profile_from_json(nlohmann::json::parse(req.get_param_value("profile")));
  }
  if (req.has_param("seed")) {
    ProfileConstraints c;
    c.topic_id = topic_id;
    return randomize_profile(parse_seed(req.get_param_value("seed")), c);
  }
  throw SchemaError("profile", "pass a profile or a seed");
}

nlohmann::json analysis_summary(const TopicAnalysis &a) {
  nlohmann::json groupings = nlohmann::json::object();
  for (const auto &[method, g] : a.groupings) {
    nlohmann::json groups = nlohmann::json::array();
    for (const Group &group : g.groups) groups.push_back({{"label", group.label}, {"size", group.members.size()}});
    groupings[std::string(to_string(method))] = groups;
  }
  return {{"topic_id", a.topic.topic_id},
          {"engine_config_hash", a.engine_config_hash},
          {"created_at", a.created_at},
          {"flags", a.flags},
          {"persons", a.concepts.size()},
          {"groupings", groupings}};
}

nlohmann::json questionnaire_json(const Questionnaire &q) {
  nlohmann::json out = nlohmann::json::array();
  for (const Question &question : q.questions) {
    nlohmann::json j{{"id", question.id}, {"text", question.text}, {"step", question.step}};
    if (question.is_scale) {
      j["scale"] = {{"min", question.scale_min}, {"max", question.scale_max}};
    } else {
      j["options"] = question.options;
    }
    out.push_back(std::move(j));
  }
  return {{"questions", out}};
}

}  // namespace

struct HttpServer::Impl {
  Service &service;
  httplib::Server server;
  std::atomic<bool> bound{false};

  explicit Impl(Service &s) : service(s) { routes(); }

  void routes() {
    server.Get("/topics", [this](const httplib::Request &, httplib::Response &res) {
      guarded(res, [&] { send_json(res, 200, service.list_topics()); });
    });

    server.Post(R"(/topics/([^/]+)/analyze)", [this](const httplib::Request &req,
                                                    httplib::Response &res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        std::shared_ptr<const TopicAnalysis> a;
        if (req.body.empty()) {
          a = service.analyze_stored(id);
        } else {
          Topic topic = parse_topic(nlohmann::json::parse(req.body));
          if (topic.topic_id != id) {
            throw SchemaError("topic_id", "body is for topic '" + topic.topic_id + "', not '" + id + "'");
          }
          a = service.analyze(topic);
        }
        send_json(res, 201, analysis_summary(*a));
      });
    });

    server.Get(R"(/topics/([^/]+)/overview)", [this](const httplib::Request &req,
                                                    httplib::Response &res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        send_json(res, 200, service.overview(id, request_profile(req, id)));
      });
    });

    server.Get(R"(/topics/([^/]+)/articles/([^/]+)/view)",
               [this](const httplib::Request &req, httplib::Response &res) {
                 guarded(res, [&] {
                   const std::string id = req.matches[1];
                   const std::string aid = req.matches[2];
                   send_json(res, 200, service.article_view(id, aid, request_profile(req, id)));
                 });
               });

    server.Get("/profiles/random", [](const httplib::Request &req, httplib::Response &res) {
      guarded(res, [&] {
        if (!req.has_param("topic_id")) throw SchemaError("topic_id", "missing");
        if (!req.has_param("seed")) throw SchemaError("seed", "missing");
        ProfileConstraints c;
        c.topic_id = req.get_param_value("topic_id");
        if (req.has_param("task_set_index")) {
          c.task_set_index = static_cast<int>(parse_seed(req.get_param_value("task_set_index")));
        }
        send_json(res, 200, to_json(randomize_profile(parse_seed(req.get_param_value("seed")), c)));
      });
    });

    server.Get("/questionnaire", [](const httplib::Request &, httplib::Response &res) {
      guarded(res, [&] { send_json(res, 200, questionnaire_json(Questionnaire::builtin())); });
    });

    server.Post("/responses", [this](const httplib::Request &req, httplib::Response &res) {
      guarded(res, [&] {
        ResponseRecord record = response_from_json(nlohmann::json::parse(req.body));
        Ack ack = service.log_response(record);
        send_json(res, 201, {{"sequence", ack.sequence}});
      });
    });

    server.Get(R"(/export/([^/]+))", [this](const httplib::Request &req, httplib::Response &res) {
      guarded(res, [&] { send_json(res, 200, service.export_topic(req.matches[1].str())); });
    });
  }
};

HttpServer::HttpServer(Service &service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string &host, int port) {
  int bound_port = port;
  if (port == 0) {
    bound_port = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound_port = -1;
  }
  if (bound_port < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  impl_->bound = true;
  return bound_port;
}

bool HttpServer::listen() {
  if (!impl_->bound) throw Error("HttpServer::listen called before bind");
  return impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace newsbias
