#include "newsbias/views.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "embedded_data.h"
#include "text_util.h"

namespace newsbias {

namespace {

constexpr size_t kExcerptChars = 240;

// Lead cut at a word boundary.
std::string excerpt(const Article &a) {
  const std::string &lead = a.lead().empty() ? a.body() : a.lead();
  if (lead.size() <= kExcerptChars) return lead;
  size_t cut = lead.rfind(' ', kExcerptChars);
  if (cut == std::string::npos || cut == 0) cut = kExcerptChars;
  return lead.substr(0, cut) + " ...";
}

std::string generic_label(size_t index) { return "Perspective " + std::to_string(index + 1); }

std::optional<GroupingMethod> method_for_tag(TagType t) {
  switch (t) {
    case TagType::kPolSides: return GroupingMethod::kPolSides;
    case TagType::kMfap: return GroupingMethod::kMfa;
    case TagType::kAllp: return GroupingMethod::kAll;
  }
  return std::nullopt;
}

// {type, label, group_index} for every tag type whose grouping exists. Tags
// always carry the grouping's own labels, independent of the explanation mode.
nlohmann::json group_tags(const TopicAnalysis &a, std::string_view article_id,
                          const std::set<TagType> &types) {
  nlohmann::json out = nlohmann::json::array();
  for (TagType t : types) {
    auto it = a.groupings.find(*method_for_tag(t));
    if (it == a.groupings.end()) continue;
    std::optional<size_t> gi = it->second.group_of(article_id);
    if (!gi) continue;
    out.push_back({{"type", to_string(t)},
                   {"label", it->second.groups[*gi].label},
                   {"group_index", *gi}});
  }
  return out;
}

double relevance_of(const TopicAnalysis &a, const std::string &id) {
  auto it = a.relevance.find(id);
  return it == a.relevance.end() ? 0.0 : it->second;
}

// Ids sorted by descending relevance, then id.
std::vector<std::string> by_relevance(const TopicAnalysis &a, std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end(), [&](const std::string &x, const std::string &y) {
    double rx = relevance_of(a, x);
    double ry = relevance_of(a, y);
    if (rx != ry) return rx > ry;
    return x < y;
  });
  return ids;
}

std::string_view band_key(size_t index) {
  static constexpr std::string_view kBands[] = {"pro", "ambivalent", "contra"};
  return kBands[std::min<size_t>(index, 2)];
}

std::string_view color_for(Polarity p, HighlightMode mode) {
  if (mode == HighlightMode::kSingleColor) return "gray";
  switch (p) {
    case Polarity::kPositive: return "green";
    case Polarity::kNegative: return "red";
    case Polarity::kNeutral: return "gray";
  }
  return "gray";
}

void require_topic(const TopicAnalysis &a, const ConjointProfile &p) {
  p.validate();
  if (p.topic_id != a.topic.topic_id) {
    throw SchemaError("profile.topic_id", "profile is for topic '" + p.topic_id +
                                              "', not '" + a.topic.topic_id + "'");
  }
}

}  // namespace

const ExplanationTemplates &ExplanationTemplates::builtin() {
  static const ExplanationTemplates t = from_json(nlohmann::json::parse(kExplanationsJson));
  return t;
}

ExplanationTemplates ExplanationTemplates::from_json(const nlohmann::json &j) {
  if (!j.is_object()) throw SchemaError("explanations", "expected an object");
  ExplanationTemplates t;
  for (const auto &[k, v] : j.items()) {
    if (!v.is_string()) throw SchemaError("explanations." + k, "expected a string");
    t.entries[k] = v.get<std::string>();
  }
  return t;
}

ExplanationTemplates ExplanationTemplates::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open explanation templates " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception &e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string ExplanationTemplates::render(std::string_view key,
                                         const std::map<std::string, std::string> &vars) const {
  auto it = entries.find(std::string(key));
  if (it == entries.end()) throw Error("no explanation template '" + std::string(key) + "'");
  std::string out = it->second;
  for (const auto &[name, value] : vars) {
    const std::string needle = "{" + name + "}";
    for (size_t pos = out.find(needle); pos != std::string::npos;
         pos = out.find(needle, pos + value.size())) {
      out.replace(pos, needle.size(), value);
    }
  }
  return out;
}

BiasGrouping RandomGroupingCache::get(const TopicAnalysis &analysis, const ConjointProfile &profile) {
  std::pair<std::string, std::string> key{profile.profile_id, analysis.topic.topic_id};
  std::lock_guard lock(mu_);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  uint64_t seed = text::fnv1a(analysis.topic.topic_id, text::fnv1a(profile.profile_id) ^ profile.seed);
  BiasGrouping g = group_random(analysis.topic, seed);
  assign_representatives(g, analysis.vectors, analysis.relevance);
  return cache_.emplace(std::move(key), std::move(g)).first->second;
}

size_t RandomGroupingCache::size() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

std::optional<GroupingMethod> grouping_for(OverviewVariant v) {
  switch (v) {
    case OverviewVariant::kPolSides:
    case OverviewVariant::kPolSidesGeneric:
      return GroupingMethod::kPolSides;
    case OverviewVariant::kMfa:
    case OverviewVariant::kMfaGeneric:
      return GroupingMethod::kMfa;
    case OverviewVariant::kAllGeneric:
      return GroupingMethod::kAll;
    case OverviewVariant::kRandomGeneric:
      return GroupingMethod::kRandom;
    default:
      return std::nullopt;
  }
}

nlohmann::json get_overview(const TopicAnalysis &a, const ConjointProfile &profile,
                            RandomGroupingCache &random_cache, const ExplanationTemplates &templates) {
  require_topic(a, profile);
  if (profile.overview_variant == OverviewVariant::kNone) {
    throw Error("profile " + profile.profile_id + " has no overview (variant none)");
  }
  const ExplanationMode mode = *profile.explanation_mode;
  const std::optional<GroupingMethod> method = grouping_for(profile.overview_variant);

  auto item = [&](const std::string &id, bool with_excerpt) {
    const Article *art = a.topic.find(id);
    nlohmann::json j{{"article_id", id},
                     {"headline", art->title()},
                     {"relevance", relevance_of(a, id)},
                     {"tags", group_tags(a, id, profile.headline_tags)}};
    if (with_excerpt) j["excerpt"] = excerpt(*art);
    return j;
  };

  std::vector<std::string> all_ids;
  for (const Article &art : a.topic.articles) all_ids.push_back(art.id());

  nlohmann::json out;
  out["topic_id"] = a.topic.topic_id;
  out["event_description"] = a.topic.event_description;
  out["profile_id"] = profile.profile_id;
  out["overview_variant"] = to_string(profile.overview_variant);
  out["explanation_mode"] = to_string(mode);
  out["grouping_method"] = method ? nlohmann::json(to_string(*method)) : nlohmann::json();
  out["headline_tags"] = nlohmann::json::array();
  for (TagType t : profile.headline_tags) out["headline_tags"].push_back(to_string(t));
  out["groups"] = nlohmann::json::array();

  std::string person;
  if (auto it = a.groupings.find(GroupingMethod::kMfa); it != a.groupings.end()) {
    if (const PersonConcept *p = a.person(*it->second.mfa_person_id)) person = p->canonical_name;
  }

  std::set<std::string> showcased;
  if (profile.overview_variant == OverviewVariant::kPlain) {
    out["main_article"] = nlohmann::json();
    out["grouping_available"] = false;
    out["explanation"] = templates.render("specific.plain");
  } else {
    const std::string main_id = by_relevance(a, all_ids).front();
    showcased.insert(main_id);
    out["main_article"] = item(main_id, true);

    std::optional<BiasGrouping> grouping;
    if (*method == GroupingMethod::kRandom) {
      grouping = random_cache.get(a, profile);
    } else if (auto it = a.groupings.find(*method); it != a.groupings.end()) {
      grouping = it->second;
    }
    out["grouping_available"] = grouping.has_value();
    if (mode == ExplanationMode::kGeneric) {
      out["explanation"] = templates.render("generic");
    } else {
      out["explanation"] =
          templates.render("specific." + text::to_lower(to_string(*method)), {{"person", person}});
    }

    if (grouping) {
      std::map<std::string, ArticleVector> vectors;
      for (const ArticleVector &v : a.vectors) vectors.emplace(v.article_id, v);
      size_t shown = 0;
      for (size_t gi = 0; gi < grouping->groups.size(); ++gi) {
        const Group &g = grouping->groups[gi];
        if (g.members.empty()) continue;
        nlohmann::json gj;
        if (mode == ExplanationMode::kGeneric) {
          gj["label"] = generic_label(shown);
          gj["explanation_text"] =
              templates.render("generic.group", {{"n", std::to_string(shown + 1)}});
        } else {
          gj["label"] = g.label;
          std::string key = "specific." + text::to_lower(to_string(*method)) + ".";
          key += *method == GroupingMethod::kMfa ? std::string(band_key(gi)) : g.label;
          gj["explanation_text"] = templates.render(key, {{"person", person}});
        }
        gj["group_index"] = gi;
        // The main article is shown once, at the top.
        std::vector<std::string> candidates;
        for (const std::string &m : g.members) {
          if (m != main_id) candidates.push_back(m);
        }
        std::optional<std::string> rep =
            g.representative && *g.representative != main_id
                ? g.representative
                : representative_article(candidates, vectors, a.relevance);
        gj["representative"] = rep ? item(*rep, true) : nlohmann::json();
        if (rep) showcased.insert(*rep);
        gj["members"] = nlohmann::json::array();
        for (const std::string &m : by_relevance(a, g.members)) gj["members"].push_back(item(m, false));
        out["groups"].push_back(std::move(gj));
        ++shown;
      }
    }
  }

  std::vector<std::string> further;
  for (const std::string &id : all_ids) {
    if (!showcased.count(id)) further.push_back(id);
  }
  out["further_articles"] = nlohmann::json::array();
  for (const std::string &id : by_relevance(a, further)) out["further_articles"].push_back(item(id, true));
  return out;
}

std::vector<Highlight> article_highlights(const TopicAnalysis &a, std::string_view article_id,
                                          HighlightMode mode) {
  if (!a.topic.find(article_id)) {
    throw NotFoundError("article '" + std::string(article_id) + "' not in topic " + a.topic.topic_id);
  }
  std::vector<Highlight> spans;
  for (const PersonConcept &p : a.concepts) {
    auto it = p.per_article_mentions.find(std::string(article_id));
    if (it == p.per_article_mentions.end()) continue;
    for (const Mention &m : it->second) {
      auto label = a.labels.find(key_of(m));
      if (label == a.labels.end()) continue;
      spans.push_back({m.char_start, m.char_end, p.person_id, label->second.value});
    }
  }
  std::sort(spans.begin(), spans.end(), [](const Highlight &x, const Highlight &y) {
    int lx = x.char_end - x.char_start;
    int ly = y.char_end - y.char_start;
    if (lx != ly) return lx > ly;
    if (x.char_start != y.char_start) return x.char_start < y.char_start;
    return x.person_id < y.person_id;
  });
  std::vector<Highlight> kept;
  for (const Highlight &h : spans) {
    bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const Highlight &k) {
      return h.char_start < k.char_end && k.char_start < h.char_end;
    });
    if (!overlaps) kept.push_back(h);
  }
  std::vector<Highlight> out;
  for (const Highlight &h : kept) {
    if (mode == HighlightMode::kDisabled) break;
    if (mode != HighlightMode::kThreeColor && h.polarity == Polarity::kNeutral) continue;
    out.push_back(h);
  }
  std::sort(out.begin(), out.end(),
            [](const Highlight &x, const Highlight &y) { return x.char_start < y.char_start; });
  return out;
}

nlohmann::json get_article_view(const TopicAnalysis &a, std::string_view article_id,
                                const ConjointProfile &profile) {
  require_topic(a, profile);
  const Article *art = a.topic.find(article_id);
  if (!art) {
    throw NotFoundError("article '" + std::string(article_id) + "' not in topic " + a.topic.topic_id);
  }
  nlohmann::json out;
  out["topic_id"] = a.topic.topic_id;
  out["article_id"] = art->id();
  out["profile_id"] = profile.profile_id;
  out["headline"] = art->title();
  out["lead"] = art->lead();
  out["body"] = art->body();
  out["text"] = art->text();
  out["lead_start"] = art->lead_start();
  out["body_start"] = art->body_start();
  out["highlight_mode"] = to_string(profile.highlight_mode);
  out["headline_tags"] = group_tags(a, art->id(), profile.headline_tags);
  out["bias_group_indicators"] =
      group_tags(a, art->id(), profile.show_bias_group_indicators);

  out["highlights"] = nlohmann::json::array();
  for (const Highlight &h : article_highlights(a, article_id, profile.highlight_mode)) {
    const PersonConcept *p = a.person(h.person_id);
    out["highlights"].push_back({{"char_start", h.char_start},
                                 {"char_end", h.char_end},
                                 {"person_id", h.person_id},
                                 {"person_name", p ? p->canonical_name : ""},
                                 {"polarity", to_string(h.polarity)},
                                 {"color", color_for(h.polarity, profile.highlight_mode)}});
  }

  if (profile.show_context_bar) {
    std::optional<size_t> mfa = a.mfa_index();
    nlohmann::json bar = nlohmann::json::array();
    for (const ArticleVector &v : a.vectors) {
      bar.push_back({{"article_id", v.article_id},
                     {"s_mfa", mfa ? nlohmann::json(v.scores[*mfa]) : nlohmann::json()},
                     {"headline", a.topic.find(v.article_id)->title()},
                     {"is_current", v.article_id == article_id}});
    }
    out["context_bar"] = bar;
  } else {
    out["context_bar"] = nlohmann::json();
  }
  return out;
}

}  // namespace newsbias
