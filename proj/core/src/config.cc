#include "newsbias/config.h"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "text_util.h"

namespace newsbias {

namespace {

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string &key, const std::string &value) {
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    char *end = nullptr;
    out = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0') throw Error(key + ": not a number: '" + value + "'");
  } else {
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw Error(key + ": not an integer: '" + value + "'");
    }
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::function<void(EngineConfig &, const std::string &)> set;
  std::function<std::string(const EngineConfig &)> get;
  bool engine = true;
};

template <typename T>
Field number_field(T EngineConfig::*member) {
  return {[member](EngineConfig &c, const std::string &v) {
            c.*member = parse_number<T>("value", v);
          },
          [member](const EngineConfig &c) {
            if constexpr (std::is_floating_point_v<T>) return format_double(c.*member);
            else return std::to_string(c.*member);
          }};
}

Field string_field(std::string EngineConfig::*member) {
  return {[member](EngineConfig &c, const std::string &v) { c.*member = v; },
          [member](const EngineConfig &c) { return c.*member; }};
}

Field sieve_threshold(double SieveConfig::*member) {
  return {[member](EngineConfig &c, const std::string &v) {
            c.sieves.*member = parse_number<double>("value", v);
          },
          [member](const EngineConfig &c) { return format_double(c.sieves.*member); }};
}

// Enabled sieves as a comma-separated list of sieve numbers.
std::string sieve_list(const SieveConfig &s) {
  std::string out;
  bool on[] = {s.exact_representative_match, s.mention_set_similarity, s.head_word_match,
               s.alias_acronym_match,        s.substring_compound_match,
               s.representative_embedding_similarity};
  for (int i = 0; i < 6; ++i) {
    if (!on[i]) continue;
    if (!out.empty()) out += ",";
    out += std::to_string(i + 1);
  }
  return out;
}

void set_sieve_list(SieveConfig &s, const std::string &value) {
  bool on[6] = {};
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    int n = parse_number<int>("cdcr.sieves", item);
    if (n < 1 || n > 6) throw Error("cdcr.sieves: sieve numbers are 1..6, got " + item);
    on[n - 1] = true;
  }
  s.exact_representative_match = on[0];
  s.mention_set_similarity = on[1];
  s.head_word_match = on[2];
  s.alias_acronym_match = on[3];
  s.substring_compound_match = on[4];
  s.representative_embedding_similarity = on[5];
}

// "a : b, c : d"
std::string alias_list(const SieveConfig &s) {
  std::string out;
  for (const auto &[a, b] : s.aliases) {
    if (!out.empty()) out += ", ";
    out += a + " : " + b;
  }
  return out;
}

void set_alias_list(SieveConfig &s, const std::string &value) {
  s.aliases.clear();
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    size_t colon = item.find(':');
    if (colon == std::string::npos) throw Error("cdcr.aliases: expected 'name : alias', got '" + item + "'");
    s.aliases.emplace_back(trim(item.substr(0, colon)), trim(item.substr(colon + 1)));
  }
}

const std::map<std::string, Field> &fields() {
  static const std::map<std::string, Field> kFields = [] {
    std::map<std::string, Field> f;
    f["annotator"] = string_field(&EngineConfig::annotator);
    f["annotator.endpoint"] = string_field(&EngineConfig::annotator_endpoint);
    f["annotator.gazetteer"] = string_field(&EngineConfig::gazetteer_path);
    f["embeddings"] = string_field(&EngineConfig::embeddings);
    f["embeddings.dimension"] = number_field(&EngineConfig::embedding_dimension);
    f["embeddings.seed"] = number_field(&EngineConfig::embedding_seed);
    f["embeddings.path"] = string_field(&EngineConfig::embedding_path);
    f["cdcr.sieves"] = {[](EngineConfig &c, const std::string &v) { set_sieve_list(c.sieves, v); },
                        [](const EngineConfig &c) { return sieve_list(c.sieves); }};
    f["cdcr.tau2"] = sieve_threshold(&SieveConfig::mention_set_threshold);
    f["cdcr.tau6"] = sieve_threshold(&SieveConfig::representative_threshold);
    f["cdcr.aliases"] = {[](EngineConfig &c, const std::string &v) { set_alias_list(c.sieves, v); },
                         [](const EngineConfig &c) { return alias_list(c.sieves); }};
    f["classifier"] = string_field(&EngineConfig::classifier);
    f["classifier.endpoint"] = string_field(&EngineConfig::classifier_endpoint);
    f["classifier.lexicon"] = string_field(&EngineConfig::lexicon_path);
    f["classifier.fallback"] = string_field(&EngineConfig::classifier_fallback);
    f["provider.timeout_ms"] = number_field(&EngineConfig::provider_timeout_ms);
    f["threads"] = number_field(&EngineConfig::threads);
    f["threads"].engine = false;
    f["weight.start"] = {
        [](EngineConfig &c, const std::string &v) { c.weight.w_start = parse_number<double>("weight.start", v); },
        [](const EngineConfig &c) { return format_double(c.weight.w_start); }};
    f["weight.end"] = {
        [](EngineConfig &c, const std::string &v) { c.weight.w_end = parse_number<double>("weight.end", v); },
        [](const EngineConfig &c) { return format_double(c.weight.w_end); }};
    f["grouping.top_n"] = number_field(&EngineConfig::person_top_n);
    f["grouping.mfa_tau"] = number_field(&EngineConfig::mfa_tau);
    f["grouping.k"] = number_field(&EngineConfig::kmeans_k);
    f["grouping.seed"] = number_field(&EngineConfig::kmeans_seed);
    f["service.port"] = number_field(&EngineConfig::port);
    f["service.port"].engine = false;
    f["service.data_dir"] = {
        [](EngineConfig &c, const std::string &v) { c.data_dir = v; },
        [](const EngineConfig &c) { return c.data_dir.string(); }, false};
    return f;
  }();
  return kFields;
}

}  // namespace

EngineConfig EngineConfig::parse(std::string_view text) {
  EngineConfig config;
  std::stringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    size_t eq = line.find('=');
    const std::string where = "config line " + std::to_string(lineno);
    if (eq == std::string::npos) throw Error(where + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto it = fields().find(key);
    if (it == fields().end()) throw Error(where + ": unknown key '" + key + "'");
    try {
      it->second.set(config, value);
    } catch (const Error &e) {
      throw Error(where + " (" + key + "): " + e.what());
    }
  }
  return config;
}

EngineConfig EngineConfig::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const Error &e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void EngineConfig::apply_environment() {
  if (const char *p = std::getenv("NEWSBIAS_PORT"); p && *p) {
    port = parse_number<int>("NEWSBIAS_PORT", p);
  }
  if (const char *d = std::getenv("NEWSBIAS_DATA_DIR"); d && *d) data_dir = d;
}

void EngineConfig::validate() const {
  if (annotator != "builtin" && annotator != "remote") {
    throw Error("annotator must be builtin or remote, got '" + annotator + "'");
  }
  if (annotator == "remote" && annotator_endpoint.empty()) {
    throw Error("annotator = remote requires annotator.endpoint");
  }
  if (embeddings != "hash" && embeddings != "table") {
    throw Error("embeddings must be hash or table, got '" + embeddings + "'");
  }
  if (embeddings == "table" && embedding_path.empty()) {
    throw Error("embeddings = table requires embeddings.path");
  }
  if (embedding_dimension <= 0) throw Error("embeddings.dimension must be positive");
  if (classifier != "lexicon" && classifier != "remote") {
    throw Error("classifier must be lexicon or remote, got '" + classifier + "'");
  }
  if (classifier == "remote" && classifier_endpoint.empty()) {
    throw Error("classifier = remote requires classifier.endpoint");
  }
  if (classifier_fallback != "lexicon" && classifier_fallback != "none") {
    throw Error("classifier.fallback must be lexicon or none");
  }
  if (provider_timeout_ms <= 0) throw Error("provider.timeout_ms must be positive");
  if (threads <= 0) throw Error("threads must be positive");
  sieves.validate();
  weight.validate();
  if (person_top_n == 0) throw Error("grouping.top_n must be positive");
  if (mfa_tau < 0.0) throw Error("grouping.mfa_tau must be non-negative");
  if (kmeans_k <= 0) throw Error("grouping.k must be positive");
  if (port < 0 || port > 65535) throw Error("service.port out of range");
}

std::string EngineConfig::engine_text() const {
  std::string out;
  for (const auto &[key, field] : fields()) {
    if (!field.engine) continue;
    out += key + " = " + field.get(*this) + "\n";
  }
  return out;
}

std::string EngineConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(text::fnv1a(engine_text())));
  return buf;
}

}  // namespace newsbias
