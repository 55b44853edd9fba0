#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "newsbias/annotate.h"
#include "newsbias/cdcr.h"
#include "newsbias/embedding.h"
#include "newsbias/ingest.h"
#include "newsbias/tsc.h"

namespace newsbias {

// Mention importance by position: linear from w_start at the first token of
// the article to w_end at the last.
struct PositionWeight {
  double w_start = 1.0;
  double w_end = 0.5;

  double operator()(double offset_ratio) const {
    return w_start + (w_end - w_start) * offset_ratio;
  }
  // Throws Error unless 0 <= w_end <= w_start <= 1.
  void validate() const;
};

// Token-offset ratio of a mention's first token in [0, 1].
double offset_ratio(const Article &article, const Mention &mention);

struct WeightedMention {
  double offset_ratio = 0.0;
  int score = 0;  // s(m) in {-1, 0, +1}
};

// sum_m w(m) s(m) / m_max. Zero for an empty list or m_max == 0.
double aggregate_polarity(std::span<const WeightedMention> mentions, int m_max,
                          const PositionWeight &weight);

// Number of mentions of the most frequently mentioned person in `article_id`.
int max_person_mentions(std::string_view article_id, std::span<const PersonConcept> persons);

// Article-level polarity of `person` in `article`. Every mention must be
// labeled (Error otherwise); m_max is taken over all `persons`.
double aggregate_polarity(const Article &article, const PersonConcept &person,
                          std::span<const PersonConcept> persons,
                          const std::map<MentionKey, PolarityLabel> &labels,
                          const PositionWeight &weight);

// Persons that span the vector space: the `top_n` concepts with most mentions
// (ties by canonical name).
struct PersonIndex {
  std::vector<std::string> person_ids;
  std::vector<std::string> names;

  size_t size() const { return person_ids.size(); }
  std::optional<size_t> find(std::string_view person_id) const;
};

PersonIndex build_person_index(std::span<const PersonConcept> persons, size_t top_n = 10);

struct ArticleVector {
  std::string article_id;
  std::vector<double> scores;  // aligned to PersonIndex
  int m_max = 0;
  // No person mentions at all; scores are all zero.
  bool flagged = false;

  bool operator==(const ArticleVector &) const = default;
};

std::vector<ArticleVector> build_article_vectors(const Topic &topic,
                                                 std::span<const PersonConcept> persons,
                                                 const PersonIndex &index,
                                                 const std::map<MentionKey, PolarityLabel> &labels,
                                                 const PositionWeight &weight);

// Index of the person with the most mentions; ties go to the
// lexicographically smallest canonical name. Throws Error if no person has a
// mention.
size_t find_mfa(std::span<const PersonConcept> persons);

enum class GroupingMethod { kMfa, kAll, kPolSides, kRandom };

std::string_view to_string(GroupingMethod m);
GroupingMethod parse_grouping_method(std::string_view s);

struct Group {
  std::string label;
  std::vector<std::string> members;
  std::optional<std::string> representative;

  bool operator==(const Group &) const = default;
};

// Exactly three groups partitioning the topic's articles.
struct BiasGrouping {
  GroupingMethod method = GroupingMethod::kMfa;
  std::vector<Group> groups;
  std::optional<std::string> mfa_person_id;

  // Group index holding `article_id`, if any.
  std::optional<size_t> group_of(std::string_view article_id) const;
  bool operator==(const BiasGrouping &) const = default;
};

// positive (s > tau), ambivalent (|s| <= tau), negative (s < -tau), labeled
// "pro-<name>", "ambivalent", "contra-<name>".
BiasGrouping group_mfa(std::span<const ArticleVector> vectors, size_t mfa_index, double tau,
                       const std::string &mfa_person_id, const std::string &mfa_name);

// k-means over the article vectors. Clusters are ordered by descending MFA
// coordinate of their centroid, empty clusters last; labels summarize the
// centroid's strongest person polarities ("pro-A / contra-B", or "mixed").
BiasGrouping group_all(std::span<const ArticleVector> vectors, const PersonIndex &index,
                       int k = 3, uint64_t seed = 42, double tau = 0.1);

// Groups "left", "center", "right" by outlet orientation; unknown outlets
// join "center".
BiasGrouping group_polsides(const Topic &topic);

// Each article independently and uniformly into "Perspective 1".."3".
BiasGrouping group_random(const Topic &topic, uint64_t seed);

// Member closest to the group centroid; ties by higher relevance, then id.
std::optional<std::string> representative_article(
    std::span<const std::string> members, const std::map<std::string, ArticleVector> &vectors,
    const std::map<std::string, double> &relevance);

void assign_representatives(BiasGrouping &grouping, std::span<const ArticleVector> vectors,
                            const std::map<std::string, double> &relevance);

struct RelevanceScore {
  double score = 0.0;
  bool oov = false;
};

// Mean vector of an article's word tokens.
std::optional<Vector> article_vector(const Article &article, const EmbeddingProvider &embeddings);

// Similarity between the article's mean token vector and the mean token vector
// of all articles in `scope` (token-weighted), mapped to [0, 1].
RelevanceScore relevance_score(const Article &article, std::span<const Article *const> scope,
                               const EmbeddingProvider &embeddings);
RelevanceScore relevance_score(const Article &article, const Topic &topic,
                               const EmbeddingProvider &embeddings);

// Event relevance for every article of the topic.
std::map<std::string, RelevanceScore> topic_relevance(const Topic &topic,
                                                      const EmbeddingProvider &embeddings);

}  // namespace newsbias
