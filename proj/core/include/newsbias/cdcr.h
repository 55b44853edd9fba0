#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "newsbias/annotate.h"
#include "newsbias/embedding.h"
#include "newsbias/error.h"

namespace newsbias {

// The candidate-merging cascade, in application order.
enum class Sieve {
  kExactRepresentative = 1,
  kMentionSetSimilarity = 2,
  kHeadWord = 3,
  kAliasAcronym = 4,
  kSubstringCompound = 5,
  kRepresentativeEmbedding = 6,
};

std::string_view to_string(Sieve s);

struct SieveConfig {
  bool exact_representative_match = true;
  bool mention_set_similarity = true;
  double mention_set_threshold = 0.85;  // tau2
  bool head_word_match = true;
  bool alias_acronym_match = true;
  bool substring_compound_match = true;
  bool representative_embedding_similarity = true;
  double representative_threshold = 0.80;  // tau6
  // Extra alias pairs for the alias sieve, compared case-insensitively.
  std::vector<std::pair<std::string, std::string>> aliases;

  bool needs_embeddings() const {
    return mention_set_similarity || representative_embedding_similarity;
  }
  // Throws Error if a threshold is outside [0, 1].
  void validate() const;
};

// A resolved concept: one or more candidate chains from any article that refer
// to the same entity. Person concepts carry ner_type kPerson; the cascade also
// returns non-person concepts so that its output partitions the input.
struct PersonConcept {
  std::string person_id;
  std::string canonical_name;
  NerType ner_type = NerType::kPerson;
  std::vector<MentionChain> chains;
  int mention_count = 0;
  std::map<std::string, std::vector<Mention>> per_article_mentions;

  bool operator==(const PersonConcept &) const = default;
};

class CdcrError : public Error {
 public:
  using Error::Error;
};

// One article's provider output together with its NP singletons.
struct AnnotatedArticle {
  ArticleAnnotation annotation;
  std::vector<MentionChain> np_singletons;
};

// Union of within-document chains and NP singletons. An NP singleton is
// dropped when its span equals, or contains with the same head, a mention of
// a within-document chain; chains with identical span sets are kept once.
std::vector<MentionChain> extract_candidates(std::span<const AnnotatedArticle> articles);

// Semantic similarity of all mentions of two chains: cosine of the mean
// mention vectors (each mention the mean of its word vectors), mapped to
// [0, 1]. Symmetric. OOV on either side yields {0, oov=true}.
Similarity chain_similarity(const MentionChain &a, const MentionChain &b,
                            const EmbeddingProvider &embeddings);

struct MergeEvent {
  Sieve sieve;
  std::string chain_a;
  std::string chain_b;
};

struct MergeResult {
  // Persons first ("p0", "p1", ... by descending mention count, then name),
  // followed by other concepts ("o0", ...).
  std::vector<PersonConcept> concepts;
  // Every union that joined two previously separate clusters.
  std::vector<MergeEvent> merges;
};

// Applies the enabled sieves in order. Each sieve takes the transitive closure
// of its pairwise matches, so the result does not depend on candidate order.
// Chains of different ner_type are never merged. `embeddings` may be null
// when sieves 2 and 6 are disabled; otherwise a null provider or a provider
// failure raises CdcrError.
MergeResult merge_sieves(std::span<const MentionChain> candidates, const SieveConfig &config,
                         const EmbeddingProvider *embeddings);

// Persons only, in merge_sieves order.
std::vector<PersonConcept> person_concepts(std::span<const PersonConcept> concepts);

}  // namespace newsbias
