#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsbias/analysis.h"
#include "newsbias/profiles.h"

namespace newsbias {

// Editable explanation texts keyed by "specific.<variant>[.<group>]",
// "generic" and "generic.group". Placeholders: {person}, {n}.
struct ExplanationTemplates {
  std::map<std::string, std::string> entries;

  static const ExplanationTemplates &builtin();
  static ExplanationTemplates from_json(const nlohmann::json &j);
  static ExplanationTemplates load(const std::filesystem::path &path);

  // Throws Error for an unknown key.
  std::string render(std::string_view key, const std::map<std::string, std::string> &vars = {}) const;
};

// Random groupings drawn once per (profile, topic) and reused afterwards.
class RandomGroupingCache {
 public:
  BiasGrouping get(const TopicAnalysis &analysis, const ConjointProfile &profile);
  size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, BiasGrouping> cache_;
};

// Grouping shown by a variant, if any: polsides* -> PolSides, mfa* -> MFA,
// all_generic -> ALL, random_generic -> Random; none and plain -> nullopt.
std::optional<GroupingMethod> grouping_for(OverviewVariant v);

// Overview payload for `profile`. Throws SchemaError for a topic mismatch
// between profile and analysis and Error for variant none.
nlohmann::json get_overview(const TopicAnalysis &analysis, const ConjointProfile &profile,
                            RandomGroupingCache &random_cache,
                            const ExplanationTemplates &templates = ExplanationTemplates::builtin());

struct Highlight {
  int char_start = 0;
  int char_end = 0;
  std::string person_id;
  Polarity polarity = Polarity::kNeutral;

  bool operator==(const Highlight &) const = default;
};

// Labeled person mentions of one article with overlaps resolved (the longest
// span wins, then the earlier start), filtered by `mode`: disabled -> none,
// single_color and two_color -> positive and negative, three_color -> all.
// Sorted by offset.
std::vector<Highlight> article_highlights(const TopicAnalysis &analysis, std::string_view article_id,
                                          HighlightMode mode);

// Article view payload for `profile`. Throws NotFoundError for an unknown
// article.
nlohmann::json get_article_view(const TopicAnalysis &analysis, std::string_view article_id,
                                const ConjointProfile &profile);

}  // namespace newsbias
