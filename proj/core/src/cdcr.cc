#include "newsbias/cdcr.h"

#include <algorithm>
#include <optional>
#include <set>
#include <unordered_set>

#include "text_util.h"
#include "union_find.h"

namespace newsbias {

std::string_view to_string(Sieve s) {
  switch (s) {
    case Sieve::kExactRepresentative: return "exact_representative_match";
    case Sieve::kMentionSetSimilarity: return "mention_set_similarity";
    case Sieve::kHeadWord: return "head_word_match";
    case Sieve::kAliasAcronym: return "alias_acronym_match";
    case Sieve::kSubstringCompound: return "substring_compound_match";
    case Sieve::kRepresentativeEmbedding: return "representative_embedding_similarity";
  }
  return "unknown";
}

void SieveConfig::validate() const {
  auto check = [](double t, const char *name) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw Error(std::string("sieve threshold ") + name + " must lie in [0, 1]");
    }
  };
  check(mention_set_threshold, "mention_set_threshold");
  check(representative_threshold, "representative_threshold");
}

namespace {

const std::unordered_set<std::string> &determiners() {
  static const std::unordered_set<std::string> s = {"the", "a", "an", "this", "that"};
  return s;
}

const std::unordered_set<std::string> &pronouns() {
  static const std::unordered_set<std::string> s = {
      "he", "him", "his", "himself", "she", "her", "hers", "herself", "it", "its",
      "they", "them", "their", "i", "me", "we", "us", "you", "who"};
  return s;
}

std::string strip_possessive(std::string w) {
  for (std::string_view suf : {std::string_view("'s"), std::string_view("\xE2\x80\x99s")}) {
    if (w.size() > suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0) {
      w.resize(w.size() - suf.size());
    }
  }
  return w;
}

// Words of a phrase with leading determiners and a trailing possessive
// removed; case preserved.
std::vector<std::string> phrase_words(std::string_view phrase) {
  std::vector<std::string> words = text::split_words(phrase);
  while (!words.empty() && determiners().count(text::to_lower(words.front()))) {
    words.erase(words.begin());
  }
  if (!words.empty()) words.back() = strip_possessive(words.back());
  if (!words.empty() && words.back() == "'s") words.pop_back();
  return words;
}

std::string normalized(std::string_view phrase) {
  std::string out;
  for (const std::string &w : phrase_words(phrase)) {
    if (!out.empty()) out += ' ';
    out += text::to_lower(w);
  }
  return out;
}

bool is_title(const std::string &w) {
  std::string lw = text::to_lower(w);
  if (!lw.empty() && lw.back() == '.') lw.pop_back();
  return Gazetteer::builtin().titles.count(lw) > 0;
}

bool any_capitalized(const std::vector<std::string> &words) {
  return std::any_of(words.begin(), words.end(),
                     [](const std::string &w) { return text::is_capitalized(w); });
}

// Head word used by the head-word sieve, or empty if the representative is
// not headed by a capitalized, non-title, non-pronoun word.
std::string head_word(std::string_view representative) {
  std::vector<std::string> words = phrase_words(representative);
  if (words.empty()) return {};
  const std::string &h = words.back();
  if (!text::is_capitalized(h) || is_title(h) || pronouns().count(text::to_lower(h))) return {};
  return text::to_lower(h);
}

// Lowercased words split at hyphens with titles removed.
std::vector<std::string> core_words(std::string_view representative) {
  std::vector<std::string> out;
  for (const std::string &w : phrase_words(representative)) {
    if (is_title(w)) continue;
    size_t start = 0;
    while (start <= w.size()) {
      size_t dash = w.find('-', start);
      if (dash == std::string::npos) dash = w.size();
      if (dash > start) out.push_back(text::to_lower(w.substr(start, dash - start)));
      start = dash + 1;
    }
  }
  return out;
}

std::string acronym(std::string_view representative) {
  std::string out;
  for (const std::string &w : phrase_words(representative)) {
    size_t start = 0;
    while (start < w.size()) {
      size_t dash = w.find('-', start);
      if (dash == std::string::npos) dash = w.size();
      if (dash > start && std::isupper(static_cast<unsigned char>(w[start]))) out += w[start];
      start = dash + 1;
    }
  }
  return out.size() >= 2 ? out : std::string();
}

// Uppercase letters only if the phrase is a single all-caps token like "AOC"
// or "A.O.C.".
std::string as_acronym_token(std::string_view representative) {
  std::vector<std::string> words = phrase_words(representative);
  if (words.size() != 1) return {};
  std::string out;
  for (char c : words.front()) {
    if (c == '.') continue;
    if (!std::isupper(static_cast<unsigned char>(c))) return {};
    out += c;
  }
  return out.size() >= 2 ? out : std::string();
}

bool contiguous_subsequence(const std::vector<std::string> &needle,
                            const std::vector<std::string> &hay) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

std::optional<Vector> mention_vector(const EmbeddingProvider &emb, const Mention &m) {
  std::vector<std::string> words = text::split_words(m.surface);
  return mean_vector(emb, words);
}

std::optional<Vector> mean_of(const std::vector<Vector> &vs, int dim) {
  if (vs.empty()) return std::nullopt;
  Vector sum(dim, 0.0);
  for (const Vector &v : vs) {
    for (int i = 0; i < dim; ++i) sum[i] += v[i];
  }
  for (double &x : sum) x /= static_cast<double>(vs.size());
  return sum;
}

std::optional<Vector> chains_vector(const EmbeddingProvider &emb,
                                    std::span<const MentionChain *const> chains) {
  std::vector<Vector> vs;
  for (const MentionChain *c : chains) {
    for (const Mention &m : c->mentions) {
      if (auto v = mention_vector(emb, m)) vs.push_back(std::move(*v));
    }
  }
  return mean_of(vs, emb.dimension());
}

bool span_contains(const Mention &outer, const Mention &inner) {
  return outer.article_id == inner.article_id && outer.char_start <= inner.char_start &&
         inner.char_end <= outer.char_end;
}

}  // namespace

std::vector<MentionChain> extract_candidates(std::span<const AnnotatedArticle> articles) {
  std::vector<MentionChain> out;
  std::set<std::vector<MentionKey>> seen;
  auto span_set = [](const MentionChain &c) {
    std::vector<MentionKey> keys;
    for (const Mention &m : c.mentions) keys.push_back(key_of(m));
    std::sort(keys.begin(), keys.end());
    return keys;
  };
  for (const AnnotatedArticle &a : articles) {
    std::vector<const Mention *> chain_mentions;
    for (const MentionChain &c : a.annotation.chains) {
      if (c.mentions.empty()) continue;
      if (!seen.insert(span_set(c)).second) continue;
      for (const Mention &m : c.mentions) chain_mentions.push_back(&m);
      out.push_back(c);
    }
    for (const MentionChain &np : a.np_singletons) {
      if (np.mentions.empty()) continue;
      const Mention &m = np.mentions.front();
      bool covered = std::any_of(chain_mentions.begin(), chain_mentions.end(), [&](const Mention *cm) {
        return key_of(*cm) == key_of(m) || (span_contains(m, *cm) && cm->head == m.head);
      });
      if (covered) continue;
      if (!seen.insert(span_set(np)).second) continue;
      out.push_back(np);
    }
  }
  return out;
}

Similarity chain_similarity(const MentionChain &a, const MentionChain &b,
                            const EmbeddingProvider &embeddings) {
  const MentionChain *pa[] = {&a};
  const MentionChain *pb[] = {&b};
  return vector_similarity(chains_vector(embeddings, pa), chains_vector(embeddings, pb));
}

MergeResult merge_sieves(std::span<const MentionChain> candidates, const SieveConfig &config,
                         const EmbeddingProvider *embeddings) {
  config.validate();
  if (config.needs_embeddings() && embeddings == nullptr) {
    throw CdcrError("sieves 2 and 6 require an embedding provider");
  }
  const size_t n = candidates.size();
  UnionFind uf(n);
  MergeResult result;

  std::vector<NerType> types(n);
  for (size_t i = 0; i < n; ++i) types[i] = candidates[i].ner_type();

  auto unite = [&](Sieve sieve, size_t i, size_t j) {
    if (types[i] != types[j]) return;
    if (uf.unite(i, j)) {
      result.merges.push_back({sieve, candidates[i].chain_id, candidates[j].chain_id});
    }
  };
  // Any-pair sieve: merges every compatible pair of chains satisfying `match`.
  auto pairwise = [&](Sieve sieve, auto &&match) {
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        if (types[i] != types[j] || uf.find(i) == uf.find(j)) continue;
        if (match(i, j)) unite(sieve, i, j);
      }
    }
  };
  auto guarded = [&](auto &&fn) {
    try {
      fn();
    } catch (const CdcrError &) {
      throw;
    } catch (const std::exception &e) {
      throw CdcrError(std::string("embedding provider failed: ") + e.what());
    }
  };

  // 1. Exact representative match.
  if (config.exact_representative_match) {
    std::vector<std::string> reps(n);
    for (size_t i = 0; i < n; ++i) reps[i] = normalized(candidates[i].representative);
    pairwise(Sieve::kExactRepresentative,
             [&](size_t i, size_t j) { return !reps[i].empty() && reps[i] == reps[j]; });
  }

  // 2. Similarity of all mentions, per current cluster.
  if (config.mention_set_similarity) {
    guarded([&] {
      std::map<size_t, std::vector<const MentionChain *>> clusters;
      for (size_t i = 0; i < n; ++i) clusters[uf.find(i)].push_back(&candidates[i]);
      std::vector<size_t> roots;
      std::vector<std::optional<Vector>> vecs;
      for (auto &[root, members] : clusters) {
        roots.push_back(root);
        vecs.push_back(chains_vector(*embeddings, members));
      }
      std::vector<std::pair<size_t, size_t>> matches;
      for (size_t a = 0; a < roots.size(); ++a) {
        for (size_t b = a + 1; b < roots.size(); ++b) {
          if (types[roots[a]] != types[roots[b]]) continue;
          Similarity s = vector_similarity(vecs[a], vecs[b]);
          if (!s.oov && s.score >= config.mention_set_threshold) {
            matches.emplace_back(roots[a], roots[b]);
          }
        }
      }
      for (auto [a, b] : matches) unite(Sieve::kMentionSetSimilarity, a, b);
    });
  }

  // 3. Shared head word.
  if (config.head_word_match) {
    std::vector<std::string> heads(n);
    for (size_t i = 0; i < n; ++i) heads[i] = head_word(candidates[i].representative);
    pairwise(Sieve::kHeadWord,
             [&](size_t i, size_t j) { return !heads[i].empty() && heads[i] == heads[j]; });
  }

  // 4. Alias table or acronym.
  if (config.alias_acronym_match) {
    std::set<std::pair<std::string, std::string>> aliases;
    for (const auto &[x, y] : config.aliases) {
      aliases.emplace(normalized(x), normalized(y));
      aliases.emplace(normalized(y), normalized(x));
    }
    std::vector<std::string> norm(n), acr(n), tok(n);
    for (size_t i = 0; i < n; ++i) {
      norm[i] = normalized(candidates[i].representative);
      acr[i] = acronym(candidates[i].representative);
      tok[i] = as_acronym_token(candidates[i].representative);
    }
    pairwise(Sieve::kAliasAcronym, [&](size_t i, size_t j) {
      if (aliases.count({norm[i], norm[j]})) return true;
      return (!tok[i].empty() && tok[i] == acr[j] && tok[j].empty()) ||
             (!tok[j].empty() && tok[j] == acr[i] && tok[i].empty());
    });
  }

  // 5. Substring / compound match on title-free words.
  if (config.substring_compound_match) {
    std::vector<std::vector<std::string>> cores(n);
    std::vector<bool> proper(n);
    for (size_t i = 0; i < n; ++i) {
      cores[i] = core_words(candidates[i].representative);
      proper[i] = any_capitalized(phrase_words(candidates[i].representative));
    }
    pairwise(Sieve::kSubstringCompound, [&](size_t i, size_t j) {
      if (!proper[i] || !proper[j]) return false;
      return contiguous_subsequence(cores[i], cores[j]) ||
             contiguous_subsequence(cores[j], cores[i]);
    });
  }

  // 6. Representative phrase similarity.
  if (config.representative_embedding_similarity) {
    guarded([&] {
      std::vector<std::optional<Vector>> vecs(n);
      for (size_t i = 0; i < n; ++i) {
        std::vector<std::string> words = phrase_words(candidates[i].representative);
        vecs[i] = mean_vector(*embeddings, words);
      }
      pairwise(Sieve::kRepresentativeEmbedding, [&](size_t i, size_t j) {
        Similarity s = vector_similarity(vecs[i], vecs[j]);
        return !s.oov && s.score >= config.representative_threshold;
      });
    });
  }

  // Collect clusters in first-member order.
  std::map<size_t, std::vector<size_t>> members;
  std::vector<size_t> root_order;
  for (size_t i = 0; i < n; ++i) {
    size_t r = uf.find(i);
    if (!members.count(r)) root_order.push_back(r);
    members[r].push_back(i);
  }
  std::vector<PersonConcept> concepts;
  for (size_t r : root_order) {
    PersonConcept c;
    c.ner_type = types[r];
    size_t largest = members[r].front();
    for (size_t i : members[r]) {
      if (candidates[i].mentions.size() > candidates[largest].mentions.size()) largest = i;
      c.chains.push_back(candidates[i]);
      for (const Mention &m : candidates[i].mentions) {
        c.per_article_mentions[m.article_id].push_back(m);
        ++c.mention_count;
      }
    }
    for (auto &[aid, ms] : c.per_article_mentions) {
      std::stable_sort(ms.begin(), ms.end(), [](const Mention &a, const Mention &b) {
        return a.char_start < b.char_start;
      });
    }
    c.canonical_name = candidates[largest].representative;
    concepts.push_back(std::move(c));
  }
  std::stable_sort(concepts.begin(), concepts.end(),
                   [](const PersonConcept &a, const PersonConcept &b) {
                     if (a.ner_type != b.ner_type) return a.ner_type == NerType::kPerson;
                     if (a.mention_count != b.mention_count) return a.mention_count > b.mention_count;
                     return a.canonical_name < b.canonical_name;
                   });
  int persons = 0;
  int others = 0;
  for (PersonConcept &c : concepts) {
    c.person_id = c.ner_type == NerType::kPerson ? "p" + std::to_string(persons++)
                                                 : "o" + std::to_string(others++);
  }
  result.concepts = std::move(concepts);
  return result;
}

std::vector<PersonConcept> person_concepts(std::span<const PersonConcept> concepts) {
  std::vector<PersonConcept> out;
  for (const PersonConcept &c : concepts) {
    if (c.ner_type == NerType::kPerson) out.push_back(c);
  }
  return out;
}

}  // namespace newsbias
