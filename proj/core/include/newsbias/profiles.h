#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsbias/error.h"

namespace newsbias {

enum class OverviewVariant {
  kNone,
  kPlain,
  kPolSides,
  kMfa,
  kPolSidesGeneric,
  kMfaGeneric,
  kRandomGeneric,
  kAllGeneric,
};
inline constexpr int kOverviewVariantCount = 8;

enum class TagType { kPolSides, kMfap, kAllp };
enum class ExplanationMode { kSpecific, kGeneric };
enum class HighlightMode { kDisabled, kSingleColor, kTwoColor, kThreeColor };
inline constexpr int kHighlightModeCount = 4;

std::string_view to_string(OverviewVariant v);
std::string_view to_string(TagType t);
std::string_view to_string(ExplanationMode m);
std::string_view to_string(HighlightMode m);
OverviewVariant parse_overview_variant(std::string_view s);
TagType parse_tag_type(std::string_view s);
ExplanationMode parse_explanation_mode(std::string_view s);
HighlightMode parse_highlight_mode(std::string_view s);

bool is_generic(OverviewVariant v);

// One randomized visualization configuration.
struct ConjointProfile {
  std::string profile_id;
  uint64_t seed = 0;
  OverviewVariant overview_variant = OverviewVariant::kNone;
  std::set<TagType> headline_tags;
  // Absent when there is no overview.
  std::optional<ExplanationMode> explanation_mode;
  HighlightMode highlight_mode = HighlightMode::kDisabled;
  bool show_context_bar = false;
  std::set<TagType> show_bias_group_indicators;
  std::string topic_id;
  int task_set_index = 1;

  // Throws SchemaError naming the violated invariant.
  void validate() const;
  bool operator==(const ConjointProfile &) const = default;
};

nlohmann::json to_json(const ConjointProfile &p);
// Parses and validates; a missing profile_id is derived from the content.
ConjointProfile profile_from_json(const nlohmann::json &j);

struct ProfileConstraints {
  std::optional<OverviewVariant> overview_variant;
  std::optional<ExplanationMode> explanation_mode;
  std::optional<HighlightMode> highlight_mode;
  std::optional<bool> show_context_bar;
  std::optional<std::set<TagType>> headline_tags;
  std::optional<std::set<TagType>> show_bias_group_indicators;
  std::optional<std::string> topic_id;
  // Topics to draw from when topic_id is not fixed.
  std::vector<std::string> topic_pool;
  std::optional<int> task_set_index;
};

// Draws every free attribute independently and uniformly from its levels:
// overview variant (8 levels), one present/absent switch per headline tag type
// except ALLP, highlight mode (4), context bar (2), one switch per bias-group
// indicator (3 x 2), topic, task set (1 or 2). The explanation mode follows
// from the variant: generic for *_generic variants, absent for none, specific
// otherwise. Contradictory constraints raise Error.
ConjointProfile randomize_profile(uint64_t seed, const ProfileConstraints &constraints);

// --- responses -------------------------------------------------------------

struct Question {
  std::string id;
  std::string text;
  // Scale questions accept integers in [scale_min, scale_max]; choice
  // questions accept one of `options`.
  bool is_scale = true;
  int scale_min = 1;
  int scale_max = 10;
  std::vector<std::string> options;
  std::string step;  // "post_overview", "post_article", "discrete_choice", ...
};

struct Questionnaire {
  std::vector<Question> questions;

  const Question *find(std::string_view id) const;
  static Questionnaire from_json(const nlohmann::json &j);
  static Questionnaire load(const std::filesystem::path &path);
  // The committed default questionnaire.
  static const Questionnaire &builtin();
};

using Answer = std::variant<int, std::string>;

struct ResponseRecord {
  std::string respondent_id;
  ConjointProfile profile;
  std::string question_id;
  Answer answer;
  std::string timestamp;  // ISO-8601

  bool operator==(const ResponseRecord &) const = default;
};

nlohmann::json to_json(const ResponseRecord &r);
ResponseRecord response_from_json(const nlohmann::json &j);

// Throws SchemaError when the question is unknown or the answer is outside
// the question's scale or options.
void validate_response(const ResponseRecord &record, const Questionnaire &questionnaire);

struct Ack {
  uint64_t sequence = 0;
};

// Append-only JSON-lines store; one line per record. Appends are serialized.
// Records are unique per (respondent, question, task set).
class ResponseStore {
 public:
  ResponseStore(std::filesystem::path path, Questionnaire questionnaire);

  // Validates, rejects duplicates (ConflictError), appends and flushes.
  // I/O failures raise Error.
  Ack log_response(const ResponseRecord &record);

  std::vector<ResponseRecord> by_respondent(std::string_view respondent_id) const;
  std::vector<ResponseRecord> by_profile(std::string_view profile_id) const;
  std::vector<ResponseRecord> all() const;
  const std::filesystem::path &path() const { return path_; }

 private:
  using Key = std::tuple<std::string, std::string, int>;

  std::filesystem::path path_;
  Questionnaire questionnaire_;
  mutable std::mutex mu_;
  std::vector<ResponseRecord> records_;
  std::set<Key> keys_;
};

}  // namespace newsbias
