#include "newsbias/analysis.h"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

namespace newsbias {

namespace {

constexpr int kSchemaVersion = 1;

const std::vector<GroupingMethod> kStoredMethods = {GroupingMethod::kMfa, GroupingMethod::kAll,
                                                    GroupingMethod::kPolSides};

template <typename T>
T field(const nlohmann::json &j, const char *name, const std::string &at) {
  if (!j.is_object() || !j.contains(name)) throw SchemaError(at + name, "missing");
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception &) {
    throw SchemaError(at + name, "wrong type");
  }
}

nlohmann::json mention_json(const Mention &m) {
  return {{"article_id", m.article_id}, {"char_start", m.char_start}, {"char_end", m.char_end},
          {"sentence_idx", m.sentence_idx}, {"surface", m.surface},   {"head", m.head},
          {"ner_type", to_string(m.ner_type)}, {"token_start", m.token_start},
          {"token_end", m.token_end}};
}

Mention mention_from(const nlohmann::json &j, const std::string &at) {
  Mention m;
  m.article_id = field<std::string>(j, "article_id", at);
  m.char_start = field<int>(j, "char_start", at);
  m.char_end = field<int>(j, "char_end", at);
  m.sentence_idx = field<int>(j, "sentence_idx", at);
  m.surface = field<std::string>(j, "surface", at);
  m.head = field<std::string>(j, "head", at);
  m.ner_type = parse_ner_type(field<std::string>(j, "ner_type", at));
  m.token_start = field<int>(j, "token_start", at);
  m.token_end = field<int>(j, "token_end", at);
  return m;
}

nlohmann::json grouping_json(const BiasGrouping &g) {
  nlohmann::json groups = nlohmann::json::array();
  for (const Group &group : g.groups) {
    groups.push_back({{"label", group.label},
                      {"members", group.members},
                      {"representative", group.representative
                                             ? nlohmann::json(*group.representative)
                                             : nlohmann::json()}});
  }
  return {{"method", to_string(g.method)},
          {"mfa_person_id", g.mfa_person_id ? nlohmann::json(*g.mfa_person_id) : nlohmann::json()},
          {"groups", groups}};
}

BiasGrouping grouping_from(const nlohmann::json &j, const std::string &at) {
  BiasGrouping g;
  g.method = parse_grouping_method(field<std::string>(j, "method", at));
  if (j.contains("mfa_person_id") && !j["mfa_person_id"].is_null()) {
    g.mfa_person_id = field<std::string>(j, "mfa_person_id", at);
  }
  const auto &groups = j.at("groups");
  if (!groups.is_array()) throw SchemaError(at + "groups", "expected an array");
  for (size_t i = 0; i < groups.size(); ++i) {
    const std::string gat = at + "groups[" + std::to_string(i) + "].";
    Group group;
    group.label = field<std::string>(groups[i], "label", gat);
    group.members = field<std::vector<std::string>>(groups[i], "members", gat);
    if (groups[i].contains("representative") && !groups[i]["representative"].is_null()) {
      group.representative = field<std::string>(groups[i], "representative", gat);
    }
    g.groups.push_back(std::move(group));
  }
  return g;
}

}  // namespace

bool TopicAnalysis::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

const PersonConcept *TopicAnalysis::person(std::string_view person_id) const {
  for (const PersonConcept &p : concepts) {
    if (p.person_id == person_id) return &p;
  }
  return nullptr;
}

const ArticleVector *TopicAnalysis::vector_of(std::string_view article_id) const {
  for (const ArticleVector &v : vectors) {
    if (v.article_id == article_id) return &v;
  }
  return nullptr;
}

std::optional<size_t> TopicAnalysis::mfa_index() const {
  auto it = groupings.find(GroupingMethod::kMfa);
  if (it == groupings.end() || !it->second.mfa_person_id) return std::nullopt;
  return person_index.find(*it->second.mfa_person_id);
}

void TopicAnalysis::check_consistency() const {
  std::set<std::string> article_ids;
  for (const Article &a : topic.articles) article_ids.insert(a.id());

  std::set<MentionKey> mention_keys;
  for (size_t i = 0; i < concepts.size(); ++i) {
    const std::string at = "concepts[" + std::to_string(i) + "]";
    for (const MentionChain &chain : concepts[i].chains) {
      for (const Mention &m : chain.mentions) {
        const Article *article = topic.find(m.article_id);
        if (!article) throw SchemaError(at, "unknown article " + m.article_id);
        if (m.char_start < 0 || m.char_end > static_cast<int>(article->text().size()) ||
            m.char_start >= m.char_end) {
          throw SchemaError(at, "mention span out of range in article " + m.article_id);
        }
        mention_keys.insert(key_of(m));
      }
    }
  }
  for (const MentionKey &k : mention_keys) {
    if (!labels.count(k)) {
      throw SchemaError("labels", "mention " + k.article_id + ":" + std::to_string(k.char_start) +
                                      " has no label");
    }
  }
  for (const auto &[k, label] : labels) {
    if (!mention_keys.count(k)) {
      throw SchemaError("labels", "label for unknown mention " + k.article_id + ":" +
                                      std::to_string(k.char_start));
    }
    if (!label.consistent()) throw SchemaError("labels", "score does not match polarity");
  }
  for (const std::string &pid : person_index.person_ids) {
    if (!person(pid)) throw SchemaError("person_index", "unknown person " + pid);
  }
  if (vectors.size() != topic.articles.size()) {
    throw SchemaError("vectors", "expected one vector per article");
  }
  for (size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].article_id != topic.articles[i].id()) {
      throw SchemaError("vectors[" + std::to_string(i) + "]", "article order mismatch");
    }
    if (vectors[i].scores.size() != person_index.size()) {
      throw SchemaError("vectors[" + std::to_string(i) + "]", "dimension mismatch");
    }
  }
  for (const auto &[method, g] : groupings) {
    const std::string at = "groupings." + std::string(to_string(method));
    if (g.method != method) throw SchemaError(at, "method mismatch");
    std::multiset<std::string> seen;
    for (const Group &group : g.groups) {
      seen.insert(group.members.begin(), group.members.end());
      if (group.representative &&
          std::find(group.members.begin(), group.members.end(), *group.representative) ==
              group.members.end()) {
        throw SchemaError(at, "representative outside its group");
      }
    }
    if (seen != std::multiset<std::string>(article_ids.begin(), article_ids.end())) {
      throw SchemaError(at, "groups do not partition the articles");
    }
    if (g.mfa_person_id && !person(*g.mfa_person_id)) {
      throw SchemaError(at, "unknown MFA person " + *g.mfa_person_id);
    }
  }
  std::set<std::string> relevance_ids;
  for (const auto &[aid, _] : relevance) relevance_ids.insert(aid);
  if (relevance_ids != article_ids) throw SchemaError("relevance", "expected one score per article");
}

nlohmann::json to_json(const TopicAnalysis &a) {
  nlohmann::json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["topic_id"] = a.topic.topic_id;
  doc["created_at"] = a.created_at;
  doc["engine_config_hash"] = a.engine_config_hash;
  doc["flags"] = a.flags;
  doc["topic"] = topic_to_json(a.topic);

  nlohmann::json concepts = nlohmann::json::array();
  for (const PersonConcept &p : a.concepts) {
    nlohmann::json chains = nlohmann::json::array();
    for (const MentionChain &c : p.chains) {
      nlohmann::json mentions = nlohmann::json::array();
      for (const Mention &m : c.mentions) mentions.push_back(mention_json(m));
      chains.push_back({{"chain_id", c.chain_id},
                        {"source", to_string(c.source)},
                        {"representative", c.representative},
                        {"mentions", mentions}});
    }
    concepts.push_back({{"person_id", p.person_id},
                        {"canonical_name", p.canonical_name},
                        {"ner_type", to_string(p.ner_type)},
                        {"mention_count", p.mention_count},
                        {"chains", chains}});
  }
  doc["concepts"] = concepts;

  nlohmann::json labels = nlohmann::json::array();
  for (const auto &[k, l] : a.labels) {
    labels.push_back({{"article_id", k.article_id},
                      {"char_start", k.char_start},
                      {"char_end", k.char_end},
                      {"polarity", to_string(l.value)},
                      {"score", l.score},
                      {"confidence", l.confidence}});
  }
  doc["labels"] = labels;

  nlohmann::json index = nlohmann::json::array();
  for (size_t i = 0; i < a.person_index.size(); ++i) {
    index.push_back({{"person_id", a.person_index.person_ids[i]}, {"name", a.person_index.names[i]}});
  }
  doc["person_index"] = index;

  nlohmann::json vectors = nlohmann::json::array();
  for (const ArticleVector &v : a.vectors) {
    vectors.push_back({{"article_id", v.article_id},
                       {"scores", v.scores},
                       {"m_max", v.m_max},
                       {"flagged", v.flagged}});
  }
  doc["vectors"] = vectors;

  nlohmann::json groupings = nlohmann::json::object();
  for (GroupingMethod m : kStoredMethods) {
    auto it = a.groupings.find(m);
    groupings[std::string(to_string(m))] =
        it == a.groupings.end() ? nlohmann::json() : grouping_json(it->second);
  }
  doc["groupings"] = groupings;
  doc["relevance"] = a.relevance;
  return doc;
}

TopicAnalysis analysis_from_json(const nlohmann::json &doc) {
  if (!doc.is_object()) throw SchemaError("analysis", "expected an object");
  if (field<int>(doc, "schema_version", "") != kSchemaVersion) {
    throw SchemaError("schema_version", "unsupported version");
  }
  TopicAnalysis a;
  try {
    a.topic = parse_topic(doc.at("topic"));
  } catch (const SchemaError &e) {
    throw SchemaError("topic." + e.field(), "invalid");
  } catch (const nlohmann::json::exception &) {
    throw SchemaError("topic", "missing");
  }
  if (field<std::string>(doc, "topic_id", "") != a.topic.topic_id) {
    throw SchemaError("topic_id", "does not match topic.topic_id");
  }
  a.created_at = field<std::string>(doc, "created_at", "");
  a.engine_config_hash = field<std::string>(doc, "engine_config_hash", "");
  a.flags = field<std::vector<std::string>>(doc, "flags", "");

  try {
    const auto &concepts = doc.at("concepts");
    for (size_t i = 0; i < concepts.size(); ++i) {
      const nlohmann::json &cj = concepts[i];
      const std::string at = "concepts[" + std::to_string(i) + "].";
      PersonConcept p;
      p.person_id = field<std::string>(cj, "person_id", at);
      p.canonical_name = field<std::string>(cj, "canonical_name", at);
      p.ner_type = parse_ner_type(field<std::string>(cj, "ner_type", at));
      for (const nlohmann::json &chj : cj.at("chains")) {
        MentionChain chain;
        chain.chain_id = field<std::string>(chj, "chain_id", at + "chains.");
        chain.source = parse_chain_source(field<std::string>(chj, "source", at + "chains."));
        chain.representative = field<std::string>(chj, "representative", at + "chains.");
        for (const nlohmann::json &mj : chj.at("mentions")) {
          chain.mentions.push_back(mention_from(mj, at + "chains.mentions."));
        }
        // Same construction as the cascade: chain order, then stable by offset.
        for (const Mention &m : chain.mentions) {
          p.per_article_mentions[m.article_id].push_back(m);
          ++p.mention_count;
        }
        p.chains.push_back(std::move(chain));
      }
      for (auto &[aid, ms] : p.per_article_mentions) {
        std::stable_sort(ms.begin(), ms.end(), [](const Mention &x, const Mention &y) {
          return x.char_start < y.char_start;
        });
      }
      if (field<int>(cj, "mention_count", at) != p.mention_count) {
        throw SchemaError(at + "mention_count", "does not match the chains");
      }
      a.concepts.push_back(std::move(p));
    }

    for (const nlohmann::json &lj : doc.at("labels")) {
      MentionKey k{field<std::string>(lj, "article_id", "labels."),
                   field<int>(lj, "char_start", "labels."), field<int>(lj, "char_end", "labels.")};
      PolarityLabel l;
      l.value = parse_polarity(field<std::string>(lj, "polarity", "labels."));
      l.score = field<int>(lj, "score", "labels.");
      l.confidence = field<double>(lj, "confidence", "labels.");
      if (!a.labels.emplace(std::move(k), l).second) {
        throw SchemaError("labels", "duplicate mention");
      }
    }

    for (const nlohmann::json &ij : doc.at("person_index")) {
      a.person_index.person_ids.push_back(field<std::string>(ij, "person_id", "person_index."));
      a.person_index.names.push_back(field<std::string>(ij, "name", "person_index."));
    }

    for (const nlohmann::json &vj : doc.at("vectors")) {
      ArticleVector v;
      v.article_id = field<std::string>(vj, "article_id", "vectors.");
      v.scores = field<std::vector<double>>(vj, "scores", "vectors.");
      v.m_max = field<int>(vj, "m_max", "vectors.");
      v.flagged = field<bool>(vj, "flagged", "vectors.");
      a.vectors.push_back(std::move(v));
    }

    const auto &groupings = doc.at("groupings");
    for (GroupingMethod m : kStoredMethods) {
      const std::string key(to_string(m));
      if (!groupings.contains(key)) throw SchemaError("groupings." + key, "missing");
      if (groupings[key].is_null()) continue;
      a.groupings.emplace(m, grouping_from(groupings[key], "groupings." + key + "."));
    }
    a.relevance = field<std::map<std::string, double>>(doc, "relevance", "");
  } catch (const nlohmann::json::exception &e) {
    throw SchemaError("analysis", e.what());
  } catch (const SchemaError &) {
    throw;
  } catch (const Error &e) {
    throw SchemaError("analysis", e.what());
  }
  a.check_consistency();
  return a;
}

Providers Providers::from_config(const EngineConfig &config) {
  config.validate();
  const std::chrono::milliseconds timeout(config.provider_timeout_ms);
  Providers p;
  if (config.annotator == "remote") {
    p.annotator = std::make_unique<RemoteAnnotator>(config.annotator_endpoint, timeout);
  } else if (!config.gazetteer_path.empty()) {
    p.annotator = std::make_unique<BuiltinAnnotator>(Gazetteer::load(config.gazetteer_path));
  } else {
    p.annotator = std::make_unique<BuiltinAnnotator>();
  }
  if (config.embeddings == "table") {
    p.embeddings = std::make_unique<TableEmbedding>(TableEmbedding::load(config.embedding_path));
  } else {
    p.embeddings = std::make_unique<HashEmbedding>(config.embedding_dimension, config.embedding_seed);
  }
  auto lexicon = [&] {
    return config.lexicon_path.empty()
               ? std::make_unique<LexiconClassifier>()
               : std::make_unique<LexiconClassifier>(Lexicon::load(config.lexicon_path));
  };
  if (config.classifier == "remote") {
    p.classifier = std::make_unique<RemoteClassifier>(config.classifier_endpoint, timeout);
    if (config.classifier_fallback == "lexicon") p.fallback = lexicon();
  } else {
    p.classifier = lexicon();
  }
  return p;
}

PipelineError::PipelineError(std::string stage, std::string article_id, const std::string &what)
    : Error(stage + (article_id.empty() ? "" : " (article " + article_id + ")") + ": " + what),
      stage_(std::move(stage)),
      article_id_(std::move(article_id)) {}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

TopicAnalysis analyze_topic(const Topic &topic, const EngineConfig &config,
                            const Providers &providers, std::string created_at) {
  if (topic.articles.empty()) throw PipelineError("ingest", "", "topic has no articles");
  if (!providers.annotator || !providers.embeddings || !providers.classifier) {
    throw PipelineError("ingest", "", "providers not configured");
  }

  // annotate, one task per article in batches of `threads`
  std::vector<AnnotatedArticle> annotated(topic.articles.size());
  auto annotate_one = [&](size_t i) {
    const Article &article = topic.articles[i];
    AnnotatedArticle out;
    out.annotation = annotate_article(article, *providers.annotator);
    if (!out.annotation.pos.empty()) out.np_singletons = extract_np_singletons(article, out.annotation);
    return out;
  };
  const size_t batch = static_cast<size_t>(std::max(1, config.threads));
  for (size_t begin = 0; begin < topic.articles.size(); begin += batch) {
    size_t end = std::min(topic.articles.size(), begin + batch);
    std::vector<std::future<AnnotatedArticle>> jobs;
    for (size_t i = begin; i < end; ++i) jobs.push_back(std::async(std::launch::async, annotate_one, i));
    for (size_t i = begin; i < end; ++i) {
      try {
        annotated[i] = jobs[i - begin].get();
      } catch (const AnnotationError &e) {
        throw PipelineError("annotate", e.article_id(), e.what());
      } catch (const std::exception &e) {
        throw PipelineError("annotate", topic.articles[i].id(), e.what());
      }
    }
  }

  TopicAnalysis a;
  a.topic = topic;
  a.engine_config_hash = config.hash();
  a.created_at = created_at.empty() ? utc_timestamp() : std::move(created_at);

  try {
    std::vector<MentionChain> candidates = extract_candidates(annotated);
    MergeResult merged = merge_sieves(candidates, config.sieves, providers.embeddings.get());
    a.concepts = person_concepts(merged.concepts);
  } catch (const std::exception &e) {
    throw PipelineError("cdcr", "", e.what());
  }

  try {
    ClassifyOptions opts;
    opts.fallback = providers.fallback.get();
    opts.fail_fast = true;
    a.labels = classify_topic(topic, a.concepts, *providers.classifier, opts).labels;
  } catch (const ClassifierError &e) {
    throw PipelineError("tsc", e.mention().article_id, e.what());
  } catch (const std::exception &e) {
    throw PipelineError("tsc", "", e.what());
  }

  try {
    for (const auto &[aid, r] : topic_relevance(topic, *providers.embeddings)) {
      a.relevance[aid] = r.score;
    }
    a.person_index = build_person_index(a.concepts, config.person_top_n);
    a.vectors = build_article_vectors(topic, a.concepts, a.person_index, a.labels, config.weight);

    bool any_mention = std::any_of(a.concepts.begin(), a.concepts.end(),
                                   [](const PersonConcept &p) { return p.mention_count > 0; });
    if (any_mention) {
      const PersonConcept &mfa = a.concepts[find_mfa(a.concepts)];
      std::optional<size_t> idx = a.person_index.find(mfa.person_id);
      if (!idx) throw Error("MFA " + mfa.person_id + " missing from the person index");
      a.groupings[GroupingMethod::kMfa] =
          group_mfa(a.vectors, *idx, config.mfa_tau, mfa.person_id, mfa.canonical_name);
      a.groupings[GroupingMethod::kAll] =
          group_all(a.vectors, a.person_index, config.kmeans_k, config.kmeans_seed, config.mfa_tau);
    } else {
      a.flags.push_back(kFlagNoMfa);
    }
    a.groupings[GroupingMethod::kPolSides] = group_polsides(topic);
    for (auto &[method, g] : a.groupings) assign_representatives(g, a.vectors, a.relevance);
    a.check_consistency();
  } catch (const std::exception &e) {
    throw PipelineError("grouping", "", e.what());
  }
  return a;
}

// --- store -----------------------------------------------------------------

namespace {

bool safe_topic_id(std::string_view id) {
  if (id.empty() || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
}

}  // namespace

AnalysisStore::AnalysisStore(std::filesystem::path data_dir) : dir_(std::move(data_dir) / "analyses") {
  std::filesystem::create_directories(dir_);
  for (const auto &entry : std::filesystem::directory_iterator(dir_)) {
    const auto &path = entry.path();
    if (path.extension() != ".json" || path.filename().string().front() == '.') continue;
    std::ifstream in(path);
    try {
      auto a = std::make_shared<TopicAnalysis>(analysis_from_json(nlohmann::json::parse(in)));
      entries_[{a->topic.topic_id, a->engine_config_hash}] = std::move(a);
    } catch (const std::exception &e) {
      throw Error("stored analysis " + path.string() + ": " + e.what());
    }
  }
}

void AnalysisStore::put(const TopicAnalysis &analysis) {
  if (!safe_topic_id(analysis.topic.topic_id)) {
    throw Error("topic id '" + analysis.topic.topic_id + "' is not usable as a file name");
  }
  analysis.check_consistency();
  const std::string name = analysis.topic.topic_id + "__" + analysis.engine_config_hash + ".json";
  const auto final_path = dir_ / name;
  const auto tmp_path = dir_ / ("." + name + ".tmp");
  std::lock_guard lock(mu_);
  {
    std::ofstream out(tmp_path, std::ios::trunc);
    out << to_json(analysis).dump(2) << '\n';
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp_path, ec);
      throw Error("cannot write analysis to " + tmp_path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp_path, final_path, ec);
  if (ec) {
    std::filesystem::remove(tmp_path, ec);
    throw Error("cannot move analysis into " + final_path.string());
  }
  entries_[{analysis.topic.topic_id, analysis.engine_config_hash}] =
      std::make_shared<TopicAnalysis>(analysis);
}

std::shared_ptr<const TopicAnalysis> AnalysisStore::get(std::string_view topic_id,
                                                         std::string_view config_hash) const {
  std::lock_guard lock(mu_);
  std::shared_ptr<const TopicAnalysis> best;
  for (const auto &[key, a] : entries_) {
    if (key.first != topic_id) continue;
    if (!config_hash.empty() && key.second == config_hash) return a;
    if (!best || a->created_at > best->created_at) best = a;
  }
  if (!best) throw NotFoundError("no analysis for topic '" + std::string(topic_id) + "'");
  return best;
}

std::vector<std::shared_ptr<const TopicAnalysis>> AnalysisStore::list() const {
  std::lock_guard lock(mu_);
  std::vector<std::shared_ptr<const TopicAnalysis>> out;
  for (const auto &[key, a] : entries_) out.push_back(a);
  return out;
}

}  // namespace newsbias
