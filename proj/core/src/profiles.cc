#include "newsbias/profiles.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <random>

#include "embedded_data.h"
#include "text_util.h"

namespace newsbias {

namespace {

constexpr std::array<std::string_view, kOverviewVariantCount> kVariantNames = {
    "none", "plain", "polsides", "mfa", "polsides_generic", "mfa_generic", "random_generic",
    "all_generic"};
constexpr std::array<std::string_view, 3> kTagNames = {"polsides", "mfap", "allp"};
constexpr std::array<std::string_view, 2> kExplanationNames = {"specific", "generic"};
constexpr std::array<std::string_view, kHighlightModeCount> kHighlightNames = {
    "disabled", "single_color", "two_color", "three_color"};

template <typename E, size_t N>
E parse_enum(const std::array<std::string_view, N> &names, std::string_view s,
             const char *what) {
  for (size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  throw Error(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

// The mode implied by a variant; nullopt for no overview.
std::optional<ExplanationMode> implied_explanation(OverviewVariant v) {
  if (v == OverviewVariant::kNone) return std::nullopt;
  return is_generic(v) ? ExplanationMode::kGeneric : ExplanationMode::kSpecific;
}

nlohmann::json tags_to_json(const std::set<TagType> &tags) {
  auto out = nlohmann::json::array();
  for (TagType t : tags) out.push_back(to_string(t));
  return out;
}

std::set<TagType> tags_from_json(const nlohmann::json &j, const std::string &field) {
  if (!j.is_array()) throw SchemaError(field, "expected an array");
  std::set<TagType> out;
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) throw SchemaError(field, "expected strings");
    try {
      out.insert(parse_tag_type(j[i].get<std::string>()));
    } catch (const SchemaError &) {
      throw;
    } catch (const Error &e) {
      throw SchemaError(field + "[" + std::to_string(i) + "]", e.what());
    }
  }
  return out;
}

template <typename T>
T require(const nlohmann::json &j, const char *field) {
  if (!j.is_object() || !j.contains(field)) throw SchemaError(field, "missing");
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception &) {
    throw SchemaError(field, "wrong type");
  }
}

std::string derive_profile_id(const ConjointProfile &p) {
  nlohmann::json j = to_json(p);
  j.erase("profile_id");
  char buf[24];
  std::snprintf(buf, sizeof buf, "pf-%016llx",
                static_cast<unsigned long long>(text::fnv1a(j.dump())));
  return buf;
}

}  // namespace

std::string_view to_string(OverviewVariant v) { return kVariantNames[static_cast<size_t>(v)]; }
std::string_view to_string(TagType t) { return kTagNames[static_cast<size_t>(t)]; }
std::string_view to_string(ExplanationMode m) { return kExplanationNames[static_cast<size_t>(m)]; }
std::string_view to_string(HighlightMode m) { return kHighlightNames[static_cast<size_t>(m)]; }

OverviewVariant parse_overview_variant(std::string_view s) {
  return parse_enum<OverviewVariant>(kVariantNames, s, "overview variant");
}
TagType parse_tag_type(std::string_view s) { return parse_enum<TagType>(kTagNames, s, "tag type"); }
ExplanationMode parse_explanation_mode(std::string_view s) {
  return parse_enum<ExplanationMode>(kExplanationNames, s, "explanation mode");
}
HighlightMode parse_highlight_mode(std::string_view s) {
  return parse_enum<HighlightMode>(kHighlightNames, s, "highlight mode");
}

bool is_generic(OverviewVariant v) {
  switch (v) {
    case OverviewVariant::kPolSidesGeneric:
    case OverviewVariant::kMfaGeneric:
    case OverviewVariant::kRandomGeneric:
    case OverviewVariant::kAllGeneric:
      return true;
    default:
      return false;
  }
}

void ConjointProfile::validate() const {
  if (topic_id.empty()) throw SchemaError("topic_id", "must not be empty");
  if (task_set_index != 1 && task_set_index != 2) {
    throw SchemaError("task_set_index", "must be 1 or 2");
  }
  if (headline_tags.count(TagType::kAllp)) {
    throw SchemaError("headline_tags", "allp is not a headline tag level");
  }
  if (explanation_mode != implied_explanation(overview_variant)) {
    if (overview_variant == OverviewVariant::kNone) {
      throw SchemaError("explanation_mode", "must be absent without an overview");
    }
    throw SchemaError("explanation_mode",
                      std::string("variant ") + std::string(to_string(overview_variant)) +
                          " requires " +
                          std::string(to_string(*implied_explanation(overview_variant))));
  }
}

nlohmann::json to_json(const ConjointProfile &p) {
  nlohmann::json j;
  j["profile_id"] = p.profile_id;
  j["seed"] = p.seed;
  j["overview_variant"] = to_string(p.overview_variant);
  j["headline_tags"] = tags_to_json(p.headline_tags);
  j["explanation_mode"] =
      p.explanation_mode ? nlohmann::json(to_string(*p.explanation_mode)) : nlohmann::json();
  j["highlight_mode"] = to_string(p.highlight_mode);
  j["show_context_bar"] = p.show_context_bar;
  j["show_bias_group_indicators"] = tags_to_json(p.show_bias_group_indicators);
  j["topic_id"] = p.topic_id;
  j["task_set_index"] = p.task_set_index;
  return j;
}

ConjointProfile profile_from_json(const nlohmann::json &j) {
  if (!j.is_object()) throw SchemaError("profile", "expected an object");
  ConjointProfile p;
  auto parse = [](const char *field, auto fn) {
    try {
      return fn();
    } catch (const SchemaError &) {
      throw;
    } catch (const Error &e) {
      throw SchemaError(field, e.what());
    }
  };
  p.seed = j.contains("seed") ? require<uint64_t>(j, "seed") : 0;
  p.overview_variant = parse("overview_variant", [&] {
    return parse_overview_variant(require<std::string>(j, "overview_variant"));
  });
  p.headline_tags =
      j.contains("headline_tags") ? tags_from_json(j["headline_tags"], "headline_tags")
                                  : std::set<TagType>{};
  if (j.contains("explanation_mode") && !j["explanation_mode"].is_null()) {
    p.explanation_mode = parse("explanation_mode", [&] {
      return parse_explanation_mode(require<std::string>(j, "explanation_mode"));
    });
  }
  p.highlight_mode = parse("highlight_mode", [&] {
    return parse_highlight_mode(require<std::string>(j, "highlight_mode"));
  });
  p.show_context_bar = require<bool>(j, "show_context_bar");
  p.show_bias_group_indicators =
      j.contains("show_bias_group_indicators")
          ? tags_from_json(j["show_bias_group_indicators"], "show_bias_group_indicators")
          : std::set<TagType>{};
  p.topic_id = require<std::string>(j, "topic_id");
  p.task_set_index = require<int>(j, "task_set_index");
  p.validate();
  p.profile_id = j.contains("profile_id") ? require<std::string>(j, "profile_id")
                                          : derive_profile_id(p);
  if (p.profile_id.empty()) throw SchemaError("profile_id", "must not be empty");
  return p;
}

ConjointProfile randomize_profile(uint64_t seed, const ProfileConstraints &c) {
  if (c.headline_tags && c.headline_tags->count(TagType::kAllp)) {
    throw Error("constraint headline_tags contains allp, which is never shown as a headline tag");
  }
  if (c.task_set_index && *c.task_set_index != 1 && *c.task_set_index != 2) {
    throw Error("constraint task_set_index must be 1 or 2");
  }
  if (c.overview_variant && c.explanation_mode &&
      implied_explanation(*c.overview_variant) != c.explanation_mode) {
    throw Error("constraint explanation_mode contradicts overview_variant " +
                std::string(to_string(*c.overview_variant)));
  }
  if (!c.topic_id && c.topic_pool.empty()) {
    throw Error("constraints fix no topic and give no topic pool");
  }
  if (c.topic_id && !c.topic_pool.empty() &&
      std::find(c.topic_pool.begin(), c.topic_pool.end(), *c.topic_id) == c.topic_pool.end()) {
    throw Error("constraint topic_id '" + *c.topic_id + "' is not in the topic pool");
  }

  // Every attribute is drawn in a fixed order whether or not it is
  // constrained, so fixing one attribute leaves the others' draws unchanged.
  // Study seeds are small consecutive integers; seed_seq spreads them over
  // the whole engine state instead of seeding the generator with them as is.
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  auto uniform = [&rng](size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng); };
  auto coin = [&uniform] { return uniform(2) == 1; };

  ConjointProfile p;
  p.seed = seed;

  auto variant = static_cast<OverviewVariant>(uniform(kOverviewVariantCount));
  if (c.overview_variant) {
    variant = *c.overview_variant;
  } else if (c.explanation_mode) {
    // Uniform over the variants compatible with the fixed mode, from a side
    // stream so the main sequence stays aligned.
    std::vector<OverviewVariant> allowed;
    for (int i = 0; i < kOverviewVariantCount; ++i) {
      auto v = static_cast<OverviewVariant>(i);
      if (implied_explanation(v) == c.explanation_mode) allowed.push_back(v);
    }
    std::seed_seq side_seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32), 1u};
    std::mt19937_64 side(side_seq);
    variant = allowed[std::uniform_int_distribution<size_t>(0, allowed.size() - 1)(side)];
  }
  p.overview_variant = variant;
  p.explanation_mode = implied_explanation(variant);

  for (TagType t : {TagType::kPolSides, TagType::kMfap}) {
    if (coin()) p.headline_tags.insert(t);
  }
  if (c.headline_tags) p.headline_tags = *c.headline_tags;

  p.highlight_mode = static_cast<HighlightMode>(uniform(kHighlightModeCount));
  if (c.highlight_mode) p.highlight_mode = *c.highlight_mode;

  p.show_context_bar = coin();
  if (c.show_context_bar) p.show_context_bar = *c.show_context_bar;

  for (TagType t : {TagType::kPolSides, TagType::kMfap, TagType::kAllp}) {
    if (coin()) p.show_bias_group_indicators.insert(t);
  }
  if (c.show_bias_group_indicators) p.show_bias_group_indicators = *c.show_bias_group_indicators;

  size_t topic_draw = c.topic_pool.empty() ? 0 : uniform(c.topic_pool.size());
  p.topic_id = c.topic_id ? *c.topic_id : c.topic_pool[topic_draw];

  p.task_set_index = 1 + static_cast<int>(uniform(2));
  if (c.task_set_index) p.task_set_index = *c.task_set_index;

  p.validate();
  p.profile_id = derive_profile_id(p);
  return p;
}

// --- questionnaire ---------------------------------------------------------

const Question *Questionnaire::find(std::string_view id) const {
  for (const Question &q : questions) {
    if (q.id == id) return &q;
  }
  return nullptr;
}

Questionnaire Questionnaire::from_json(const nlohmann::json &j) {
  if (!j.is_object() || !j.contains("questions") || !j["questions"].is_array()) {
    throw SchemaError("questions", "expected an array");
  }
  Questionnaire out;
  std::set<std::string> seen;
  for (size_t i = 0; i < j["questions"].size(); ++i) {
    const nlohmann::json &qj = j["questions"][i];
    const std::string at = "questions[" + std::to_string(i) + "]";
    Question q;
    try {
      q.id = require<std::string>(qj, "id");
      q.text = require<std::string>(qj, "text");
      q.step = qj.value("step", "");
    } catch (const SchemaError &e) {
      throw SchemaError(at + "." + e.field(), "missing or wrong type");
    }
    if (!seen.insert(q.id).second) throw SchemaError(at + ".id", "duplicate '" + q.id + "'");
    if (qj.contains("scale")) {
      q.is_scale = true;
      q.scale_min = qj["scale"].value("min", 1);
      q.scale_max = qj["scale"].value("max", 10);
      if (q.scale_min > q.scale_max) throw SchemaError(at + ".scale", "min exceeds max");
    } else if (qj.contains("options") && qj["options"].is_array() && !qj["options"].empty()) {
      q.is_scale = false;
      q.options = qj["options"].get<std::vector<std::string>>();
    } else {
      throw SchemaError(at, "needs a scale or options");
    }
    out.questions.push_back(std::move(q));
  }
  return out;
}

Questionnaire Questionnaire::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open questionnaire " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw Error("questionnaire " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

const Questionnaire &Questionnaire::builtin() {
  static const Questionnaire q = from_json(nlohmann::json::parse(kQuestionnaireJson));
  return q;
}

// --- responses -------------------------------------------------------------

nlohmann::json to_json(const ResponseRecord &r) {
  nlohmann::json j;
  j["respondent_id"] = r.respondent_id;
  j["profile"] = to_json(r.profile);
  j["question_id"] = r.question_id;
  std::visit([&j](const auto &a) { j["answer"] = a; }, r.answer);
  j["timestamp"] = r.timestamp;
  return j;
}

ResponseRecord response_from_json(const nlohmann::json &j) {
  if (!j.is_object()) throw SchemaError("response", "expected an object");
  ResponseRecord r;
  r.respondent_id = require<std::string>(j, "respondent_id");
  if (r.respondent_id.empty()) throw SchemaError("respondent_id", "must not be empty");
  if (!j.contains("profile")) throw SchemaError("profile", "missing");
  try {
    r.profile = profile_from_json(j["profile"]);
  } catch (const SchemaError &e) {
    throw SchemaError("profile." + e.field(), "invalid");
  }
  r.question_id = require<std::string>(j, "question_id");
  if (!j.contains("answer")) throw SchemaError("answer", "missing");
  const nlohmann::json &a = j["answer"];
  if (a.is_number_integer()) {
    r.answer = a.get<int>();
  } else if (a.is_string()) {
    r.answer = a.get<std::string>();
  } else {
    throw SchemaError("answer", "expected an integer or a string");
  }
  r.timestamp = require<std::string>(j, "timestamp");
  return r;
}

void validate_response(const ResponseRecord &record, const Questionnaire &questionnaire) {
  if (record.respondent_id.empty()) throw SchemaError("respondent_id", "must not be empty");
  const Question *q = questionnaire.find(record.question_id);
  if (!q) throw SchemaError("question_id", "unknown question '" + record.question_id + "'");
  if (q->is_scale) {
    const int *v = std::get_if<int>(&record.answer);
    if (!v) throw SchemaError("answer", "question " + q->id + " expects an integer");
    if (*v < q->scale_min || *v > q->scale_max) {
      throw SchemaError("answer", std::to_string(*v) + " outside [" + std::to_string(q->scale_min) +
                                      ", " + std::to_string(q->scale_max) + "]");
    }
  } else {
    const std::string *v = std::get_if<std::string>(&record.answer);
    if (!v || std::find(q->options.begin(), q->options.end(), *v) == q->options.end()) {
      throw SchemaError("answer", "not one of the options of question " + q->id);
    }
  }
  record.profile.validate();
}

ResponseStore::ResponseStore(std::filesystem::path path, Questionnaire questionnaire)
    : path_(std::move(path)), questionnaire_(std::move(questionnaire)) {
  std::error_code ec;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      ResponseRecord r = response_from_json(nlohmann::json::parse(line));
      keys_.emplace(r.respondent_id, r.question_id, r.profile.task_set_index);
      records_.push_back(std::move(r));
    } catch (const std::exception &e) {
      throw Error(path_.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

Ack ResponseStore::log_response(const ResponseRecord &record) {
  validate_response(record, questionnaire_);
  Key key{record.respondent_id, record.question_id, record.profile.task_set_index};
  std::lock_guard lock(mu_);
  if (keys_.count(key)) {
    throw ConflictError("response already recorded for respondent " + record.respondent_id +
                        ", question " + record.question_id + ", task set " +
                        std::to_string(record.profile.task_set_index));
  }
  std::ofstream out(path_, std::ios::app);
  out << to_json(record).dump() << '\n';
  out.flush();
  if (!out) throw Error("cannot append to response store " + path_.string());
  keys_.insert(std::move(key));
  records_.push_back(record);
  return Ack{records_.size()};
}

std::vector<ResponseRecord> ResponseStore::by_respondent(std::string_view respondent_id) const {
  std::lock_guard lock(mu_);
  std::vector<ResponseRecord> out;
  for (const ResponseRecord &r : records_) {
    if (r.respondent_id == respondent_id) out.push_back(r);
  }
  return out;
}

std::vector<ResponseRecord> ResponseStore::by_profile(std::string_view profile_id) const {
  std::lock_guard lock(mu_);
  std::vector<ResponseRecord> out;
  for (const ResponseRecord &r : records_) {
    if (r.profile.profile_id == profile_id) out.push_back(r);
  }
  return out;
}

std::vector<ResponseRecord> ResponseStore::all() const {
  std::lock_guard lock(mu_);
  return records_;
}

}  // namespace newsbias
