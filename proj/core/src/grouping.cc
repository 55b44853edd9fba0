#include "newsbias/grouping.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "newsbias/kmeans.h"
#include "text_util.h"

namespace newsbias {

void PositionWeight::validate() const {
  if (!(0.0 <= w_end && w_end <= w_start && w_start <= 1.0)) {
    throw Error("position weight requires 0 <= w_end <= w_start <= 1");
  }
}

double offset_ratio(const Article &article, const Mention &mention) {
  size_t n = article.tokens().size();
  if (n <= 1) return 0.0;
  return std::clamp(static_cast<double>(mention.token_start) / static_cast<double>(n - 1), 0.0, 1.0);
}

double aggregate_polarity(std::span<const WeightedMention> mentions, int m_max,
                          const PositionWeight &weight) {
  if (m_max <= 0) return 0.0;
  double sum = 0.0;
  for (const WeightedMention &m : mentions) sum += weight(m.offset_ratio) * m.score;
  return sum / m_max;
}

int max_person_mentions(std::string_view article_id, std::span<const PersonConcept> persons) {
  int best = 0;
  for (const PersonConcept &p : persons) {
    auto it = p.per_article_mentions.find(std::string(article_id));
    if (it != p.per_article_mentions.end()) best = std::max(best, static_cast<int>(it->second.size()));
  }
  return best;
}

namespace {

std::vector<WeightedMention> weighted_mentions(const Article &article, const PersonConcept &person,
                                               const std::map<MentionKey, PolarityLabel> &labels) {
  std::vector<WeightedMention> out;
  auto it = person.per_article_mentions.find(article.id());
  if (it == person.per_article_mentions.end()) return out;
  for (const Mention &m : it->second) {
    auto label = labels.find(key_of(m));
    if (label == labels.end()) {
      throw Error("mention " + m.surface + " in " + article.id() + " has no polarity label");
    }
    out.push_back({offset_ratio(article, m), label->second.score});
  }
  return out;
}

}  // namespace

double aggregate_polarity(const Article &article, const PersonConcept &person,
                          std::span<const PersonConcept> persons,
                          const std::map<MentionKey, PolarityLabel> &labels,
                          const PositionWeight &weight) {
  std::vector<WeightedMention> ms = weighted_mentions(article, person, labels);
  return aggregate_polarity(ms, max_person_mentions(article.id(), persons), weight);
}

std::optional<size_t> PersonIndex::find(std::string_view person_id) const {
  for (size_t i = 0; i < person_ids.size(); ++i) {
    if (person_ids[i] == person_id) return i;
  }
  return std::nullopt;
}

namespace {

// Most mentions first, then canonical name.
std::vector<size_t> ranked_persons(std::span<const PersonConcept> persons) {
  std::vector<size_t> order(persons.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (persons[a].mention_count != persons[b].mention_count) {
      return persons[a].mention_count > persons[b].mention_count;
    }
    return persons[a].canonical_name < persons[b].canonical_name;
  });
  return order;
}

}  // namespace

PersonIndex build_person_index(std::span<const PersonConcept> persons, size_t top_n) {
  PersonIndex index;
  for (size_t i : ranked_persons(persons)) {
    if (index.size() >= top_n) break;
    if (persons[i].mention_count == 0) continue;
    index.person_ids.push_back(persons[i].person_id);
    index.names.push_back(persons[i].canonical_name);
  }
  return index;
}

std::vector<ArticleVector> build_article_vectors(const Topic &topic,
                                                 std::span<const PersonConcept> persons,
                                                 const PersonIndex &index,
                                                 const std::map<MentionKey, PolarityLabel> &labels,
                                                 const PositionWeight &weight) {
  std::vector<const PersonConcept *> by_index(index.size(), nullptr);
  for (const PersonConcept &p : persons) {
    if (auto i = index.find(p.person_id)) by_index[*i] = &p;
  }
  std::vector<ArticleVector> out;
  for (const Article &article : topic.articles) {
    ArticleVector v;
    v.article_id = article.id();
    v.m_max = max_person_mentions(article.id(), persons);
    v.flagged = v.m_max == 0;
    v.scores.assign(index.size(), 0.0);
    for (size_t i = 0; i < index.size(); ++i) {
      if (!by_index[i]) throw Error("person index references unknown person " + index.person_ids[i]);
      std::vector<WeightedMention> ms = weighted_mentions(article, *by_index[i], labels);
      v.scores[i] = aggregate_polarity(ms, v.m_max, weight);
    }
    out.push_back(std::move(v));
  }
  return out;
}

size_t find_mfa(std::span<const PersonConcept> persons) {
  std::optional<size_t> best;
  for (size_t i = 0; i < persons.size(); ++i) {
    if (persons[i].mention_count <= 0) continue;
    if (!best || persons[i].mention_count > persons[*best].mention_count ||
        (persons[i].mention_count == persons[*best].mention_count &&
         persons[i].canonical_name < persons[*best].canonical_name)) {
      best = i;
    }
  }
  if (!best) throw Error("no person concepts with mentions; MFA undefined");
  return *best;
}

std::string_view to_string(GroupingMethod m) {
  switch (m) {
    case GroupingMethod::kMfa: return "MFA";
    case GroupingMethod::kAll: return "ALL";
    case GroupingMethod::kPolSides: return "PolSides";
    case GroupingMethod::kRandom: return "Random";
  }
  return "MFA";
}

GroupingMethod parse_grouping_method(std::string_view s) {
  for (GroupingMethod m : {GroupingMethod::kMfa, GroupingMethod::kAll, GroupingMethod::kPolSides,
                           GroupingMethod::kRandom}) {
    if (to_string(m) == s) return m;
  }
  throw SchemaError("method", "unknown grouping method '" + std::string(s) + "'");
}

std::optional<size_t> BiasGrouping::group_of(std::string_view article_id) const {
  for (size_t g = 0; g < groups.size(); ++g) {
    if (std::find(groups[g].members.begin(), groups[g].members.end(), article_id) !=
        groups[g].members.end()) {
      return g;
    }
  }
  return std::nullopt;
}

BiasGrouping group_mfa(std::span<const ArticleVector> vectors, size_t mfa_index, double tau,
                       const std::string &mfa_person_id, const std::string &mfa_name) {
  if (tau < 0.0) throw Error("MFA band threshold must be non-negative");
  BiasGrouping g;
  g.method = GroupingMethod::kMfa;
  g.mfa_person_id = mfa_person_id;
  g.groups = {{"pro-" + mfa_name, {}, {}}, {"ambivalent", {}, {}}, {"contra-" + mfa_name, {}, {}}};
  for (const ArticleVector &v : vectors) {
    double s = mfa_index < v.scores.size() ? v.scores[mfa_index] : 0.0;
    size_t band = s > tau ? 0 : s < -tau ? 2 : 1;
    g.groups[band].members.push_back(v.article_id);
  }
  return g;
}

namespace {

std::string cluster_label(const Vector &centroid, const PersonIndex &index, double tau) {
  std::vector<size_t> order(std::min(centroid.size(), index.size()));
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::abs(centroid[a]) > std::abs(centroid[b]);
  });
  std::string label;
  int parts = 0;
  for (size_t i : order) {
    if (parts == 2 || std::abs(centroid[i]) <= tau) break;
    if (!label.empty()) label += " / ";
    label += (centroid[i] > 0 ? "pro-" : "contra-") + index.names[i];
    ++parts;
  }
  return label.empty() ? "mixed" : label;
}

}  // namespace

BiasGrouping group_all(std::span<const ArticleVector> vectors, const PersonIndex &index, int k,
                       uint64_t seed, double tau) {
  std::vector<Vector> points;
  points.reserve(vectors.size());
  for (const ArticleVector &v : vectors) points.push_back(v.scores);
  KMeansOptions opts;
  opts.k = k;
  opts.seed = seed;
  KMeansResult km = kmeans(points, opts);

  struct Cluster {
    Vector centroid;
    std::vector<size_t> members;
  };
  std::vector<Cluster> clusters(k);
  for (int c = 0; c < k && c < static_cast<int>(km.centroids.size()); ++c) {
    clusters[c].centroid = km.centroids[c];
  }
  for (size_t i = 0; i < km.assignment.size(); ++i) clusters[km.assignment[i]].members.push_back(i);
  std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster &a, const Cluster &b) {
    if (a.members.empty() != b.members.empty()) return b.members.empty();
    if (a.members.empty()) return false;
    double ma = a.centroid.empty() ? 0.0 : a.centroid[0];
    double mb = b.centroid.empty() ? 0.0 : b.centroid[0];
    if (ma != mb) return ma > mb;
    return a.members.front() < b.members.front();
  });

  BiasGrouping g;
  g.method = GroupingMethod::kAll;
  for (const Cluster &c : clusters) {
    Group group;
    group.label = c.members.empty() ? "empty" : cluster_label(c.centroid, index, tau);
    for (size_t i : c.members) group.members.push_back(vectors[i].article_id);
    g.groups.push_back(std::move(group));
  }
  while (g.groups.size() < 3) g.groups.push_back({"empty", {}, {}});
  return g;
}

BiasGrouping group_polsides(const Topic &topic) {
  BiasGrouping g;
  g.method = GroupingMethod::kPolSides;
  g.groups = {{"left", {}, {}}, {"center", {}, {}}, {"right", {}, {}}};
  for (const Article &a : topic.articles) {
    size_t idx = a.orientation() == Orientation::kLeft    ? 0
                 : a.orientation() == Orientation::kRight ? 2
                                                          : 1;
    g.groups[idx].members.push_back(a.id());
  }
  return g;
}

BiasGrouping group_random(const Topic &topic, uint64_t seed) {
  BiasGrouping g;
  g.method = GroupingMethod::kRandom;
  g.groups = {{"Perspective 1", {}, {}}, {"Perspective 2", {}, {}}, {"Perspective 3", {}, {}}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 2);
  for (const Article &a : topic.articles) g.groups[pick(rng)].members.push_back(a.id());
  return g;
}

std::optional<std::string> representative_article(
    std::span<const std::string> members, const std::map<std::string, ArticleVector> &vectors,
    const std::map<std::string, double> &relevance) {
  if (members.empty()) return std::nullopt;
  auto scores_of = [&](const std::string &id) -> const std::vector<double> & {
    static const std::vector<double> kEmpty;
    auto it = vectors.find(id);
    return it == vectors.end() ? kEmpty : it->second.scores;
  };
  size_t dim = 0;
  for (const std::string &id : members) dim = std::max(dim, scores_of(id).size());
  Vector centroid(dim, 0.0);
  for (const std::string &id : members) {
    const auto &s = scores_of(id);
    for (size_t d = 0; d < s.size(); ++d) centroid[d] += s[d];
  }
  for (double &x : centroid) x /= static_cast<double>(members.size());

  auto rel = [&](const std::string &id) {
    auto it = relevance.find(id);
    return it == relevance.end() ? 0.0 : it->second;
  };
  constexpr double kTie = 1e-12;
  const std::string *best = nullptr;
  double best_d = 0.0;
  for (const std::string &id : members) {
    Vector v(dim, 0.0);
    const auto &s = scores_of(id);
    std::copy(s.begin(), s.end(), v.begin());
    double d = std::sqrt(squared_distance(v, centroid));
    bool better = !best || d < best_d - kTie ||
                  (std::abs(d - best_d) <= kTie &&
                   (rel(id) > rel(*best) || (rel(id) == rel(*best) && id < *best)));
    if (better) {
      best = &id;
      best_d = d;
    }
  }
  return *best;
}

void assign_representatives(BiasGrouping &grouping, std::span<const ArticleVector> vectors,
                            const std::map<std::string, double> &relevance) {
  std::map<std::string, ArticleVector> by_id;
  for (const ArticleVector &v : vectors) by_id.emplace(v.article_id, v);
  for (Group &g : grouping.groups) g.representative = representative_article(g.members, by_id, relevance);
}

namespace {

struct TokenSum {
  Vector sum;
  int count = 0;
};

TokenSum token_sum(const Article &article, const EmbeddingProvider &embeddings) {
  TokenSum ts{Vector(embeddings.dimension(), 0.0), 0};
  for (const Token &t : article.tokens()) {
    if (!text::has_alnum(t.surface)) continue;
    std::optional<Vector> v = embeddings.lookup(t.surface);
    if (!v) continue;
    for (size_t i = 0; i < ts.sum.size(); ++i) ts.sum[i] += (*v)[i];
    ++ts.count;
  }
  return ts;
}

std::optional<Vector> mean_of(const TokenSum &ts) {
  if (ts.count == 0) return std::nullopt;
  Vector v = ts.sum;
  for (double &x : v) x /= ts.count;
  return v;
}

}  // namespace

std::optional<Vector> article_vector(const Article &article, const EmbeddingProvider &embeddings) {
  return mean_of(token_sum(article, embeddings));
}

RelevanceScore relevance_score(const Article &article, std::span<const Article *const> scope,
                               const EmbeddingProvider &embeddings) {
  TokenSum total{Vector(embeddings.dimension(), 0.0), 0};
  for (const Article *a : scope) {
    TokenSum ts = token_sum(*a, embeddings);
    for (size_t i = 0; i < total.sum.size(); ++i) total.sum[i] += ts.sum[i];
    total.count += ts.count;
  }
  Similarity s = vector_similarity(article_vector(article, embeddings), mean_of(total));
  return {s.score, s.oov};
}

RelevanceScore relevance_score(const Article &article, const Topic &topic,
                               const EmbeddingProvider &embeddings) {
  std::vector<const Article *> scope;
  for (const Article &a : topic.articles) scope.push_back(&a);
  return relevance_score(article, scope, embeddings);
}

std::map<std::string, RelevanceScore> topic_relevance(const Topic &topic,
                                                      const EmbeddingProvider &embeddings) {
  std::vector<TokenSum> sums;
  TokenSum total{Vector(embeddings.dimension(), 0.0), 0};
  for (const Article &a : topic.articles) {
    sums.push_back(token_sum(a, embeddings));
    for (size_t i = 0; i < total.sum.size(); ++i) total.sum[i] += sums.back().sum[i];
    total.count += sums.back().count;
  }
  std::optional<Vector> topic_mean = mean_of(total);
  std::map<std::string, RelevanceScore> out;
  for (size_t i = 0; i < topic.articles.size(); ++i) {
    Similarity s = vector_similarity(mean_of(sums[i]), topic_mean);
    out[topic.articles[i].id()] = {s.score, s.oov};
  }
  return out;
}

}  // namespace newsbias
