// newsbias command line: analyze topics, serve the JSON API, export/import
// analyses.
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "newsbias/service.h"

namespace {

newsbias::HttpServer *g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

struct Common {
  std::string config_path;
  std::string data_dir;
  int port = -1;
};

newsbias::EngineConfig resolve_config(const Common &c) {
  newsbias::EngineConfig config =
      c.config_path.empty() ? newsbias::EngineConfig{} : newsbias::EngineConfig::load(c.config_path);
  config.apply_environment();
  if (!c.data_dir.empty()) config.data_dir = c.data_dir;
  if (c.port >= 0) config.port = c.port;
  config.validate();
  return config;
}

void add_common(CLI::App *cmd, Common &c) {
  cmd->add_option("--config", c.config_path, "Key-value config file")->check(CLI::ExistingFile);
  cmd->add_option("--data-dir", c.data_dir, "Data directory (overrides config and NEWSBIAS_DATA_DIR)");
}

nlohmann::json read_json(const std::string &path) {
  if (path == "-") return nlohmann::json::parse(std::cin);
  std::ifstream in(path);
  if (!in) throw newsbias::Error("cannot open " + path);
  return nlohmann::json::parse(in);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"News media-bias analysis engine and service"};
  app.require_subcommand(1);
  Common common;

  std::string topic_path;
  bool print_full = false;
  auto *analyze = app.add_subcommand("analyze", "Analyze a topic JSON file and store the result");
  add_common(analyze, common);
  analyze->add_option("topic", topic_path, "Topic JSON file")->required()->check(CLI::ExistingFile);
  analyze->add_flag("--print", print_full, "Print the full analysis document instead of a summary");

  std::string host = "127.0.0.1";
  auto *serve = app.add_subcommand("serve", "Serve the HTTP JSON API");
  add_common(serve, common);
  serve->add_option("--port", common.port, "Port (overrides config and NEWSBIAS_PORT)");
  serve->add_option("--host", host, "Interface to bind");

  std::string topic_id;
  std::string out_path;
  auto *exp = app.add_subcommand("export", "Print a stored analysis as JSON");
  add_common(exp, common);
  exp->add_option("topic_id", topic_id, "Topic id")->required();
  exp->add_option("-o,--out", out_path, "Write to a file instead of stdout");

  std::string import_path;
  auto *imp = app.add_subcommand("import", "Store an exported analysis document");
  add_common(imp, common);
  imp->add_option("file", import_path, "Analysis JSON ('-' for stdin)")->required();

  std::vector<std::string> urls;
  std::string event;
  auto *fetch = app.add_subcommand("fetch", "Fetch article pages into a topic JSON file");
  fetch->add_option("urls", urls, "Article URLs")->required();
  fetch->add_option("--topic-id", topic_id, "Topic id")->required();
  fetch->add_option("--event", event, "Event description");
  fetch->add_option("-o,--out", out_path, "Output file (default stdout)");

  uint64_t seed = 0;
  auto *profile = app.add_subcommand("profile", "Print a randomized conjoint profile");
  profile->add_option("--topic-id", topic_id, "Topic id")->required();
  profile->add_option("--seed", seed, "Random seed")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) {
      newsbias::Service service(resolve_config(common));
      auto a = service.analyze(newsbias::load_topic(topic_path));
      if (print_full) {
        std::cout << newsbias::to_json(*a).dump(2) << "\n";
      } else {
        nlohmann::json summary{{"topic_id", a->topic.topic_id},
                               {"engine_config_hash", a->engine_config_hash},
                               {"persons", a->concepts.size()},
                               {"flags", a->flags}};
        for (const auto &[method, g] : a->groupings) {
          nlohmann::json groups = nlohmann::json::array();
          for (const auto &group : g.groups) {
            groups.push_back({{"label", group.label}, {"members", group.members}});
          }
          summary["groupings"][std::string(newsbias::to_string(method))] = groups;
        }
        std::cout << summary.dump(2) << "\n";
      }
    } else if (*serve) {
      newsbias::Service service(resolve_config(common));
      newsbias::HttpServer server(service);
      int port = server.bind(host, service.config().port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << host << ":" << port << " (data dir "
                << service.config().data_dir.string() << ")\n";
      server.listen();
      g_server = nullptr;
    } else if (*exp) {
      newsbias::Service service(resolve_config(common));
      std::string doc = service.export_topic(topic_id).dump(2) + "\n";
      if (out_path.empty()) {
        std::cout << doc;
      } else {
        std::ofstream out(out_path);
        out << doc;
        if (!out) throw newsbias::Error("cannot write " + out_path);
      }
    } else if (*imp) {
      newsbias::Service service(resolve_config(common));
      auto a = service.import_topic(read_json(import_path));
      std::cout << "imported " << a->topic.topic_id << " (" << a->engine_config_hash << ")\n";
    } else if (*fetch) {
      newsbias::FetchOptions opts;
      opts.topic_id = topic_id;
      opts.event_description = event;
      newsbias::FetchResult r = newsbias::fetch_topic(urls, opts);
      for (const auto &f : r.failures) std::cerr << "failed: " << f.url << ": " << f.reason << "\n";
      std::string doc = newsbias::topic_to_json(r.topic).dump(2) + "\n";
      if (out_path.empty()) {
        std::cout << doc;
      } else {
        std::ofstream(out_path) << doc;
      }
    } else if (*profile) {
      newsbias::ProfileConstraints c;
      c.topic_id = topic_id;
      std::cout << newsbias::to_json(newsbias::randomize_profile(seed, c)).dump(2) << "\n";
    }
  } catch (const newsbias::NotFoundError &e) {
    std::cerr << "not found: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
