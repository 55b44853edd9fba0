#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsbias/error.h"
#include "newsbias/ingest.h"

namespace newsbias {

enum class NerType { kPerson, kOther };

std::string_view to_string(NerType t);
NerType parse_ner_type(std::string_view s);

enum class PosTag { kDet, kPron, kPropn, kNoun, kAdj, kVerb, kAdp, kConj, kNum, kPunct, kOther };

std::string_view to_string(PosTag t);

struct Mention {
  std::string article_id;
  int char_start = 0;
  int char_end = 0;
  int sentence_idx = 0;
  std::string surface;
  std::string head;
  NerType ner_type = NerType::kOther;
  // First covered token and one past the last, within the article.
  int token_start = 0;
  int token_end = 0;

  bool operator==(const Mention &) const = default;
};

// Identity of a mention within a topic.
struct MentionKey {
  std::string article_id;
  int char_start = 0;
  int char_end = 0;

  auto operator<=>(const MentionKey &) const = default;
};

inline MentionKey key_of(const Mention &m) { return {m.article_id, m.char_start, m.char_end}; }

enum class ChainSource { kInDocCoref, kNpSingleton };

std::string_view to_string(ChainSource s);
ChainSource parse_chain_source(std::string_view s);

struct MentionChain {
  std::string chain_id;
  std::vector<Mention> mentions;
  std::string representative;
  ChainSource source = ChainSource::kInDocCoref;

  // kPerson when at least half of the mentions are person-typed.
  NerType ner_type() const;
  bool operator==(const MentionChain &) const = default;
};

struct Capabilities {
  bool pos = false;
  bool ner = false;
  bool in_doc_coref = false;
};

struct ArticleAnnotation {
  std::string article_id;
  // One tag per article token; empty when the provider has no POS capability.
  std::vector<PosTag> pos;
  // Person-typed mentions.
  std::vector<Mention> mentions;
  // Within-document chains.
  std::vector<MentionChain> chains;
};

class AnnotationError : public Error {
 public:
  AnnotationError(std::string article_id, const std::string &what)
      : Error("article " + article_id + ": " + what), article_id_(std::move(article_id)) {}
  const std::string &article_id() const { return article_id_; }

 private:
  std::string article_id_;
};

// Implementations must be safe for concurrent use across articles.
class AnnotationProvider {
 public:
  virtual ~AnnotationProvider() = default;
  virtual std::string name() const = 0;
  virtual Capabilities capabilities() const = 0;
  virtual ArticleAnnotation annotate(const Article &article) const = 0;
};

// Runs `provider` on `article` and validates its output: spans must align with
// article tokens and cover the stated surface, chains must be non-empty and
// reference reported mentions. Chains with fewer than half person-typed
// mentions are dropped and only person mentions are kept. Provider failures
// and invalid output raise AnnotationError carrying the article id.
ArticleAnnotation annotate_article(const Article &article, const AnnotationProvider &provider);

// Singleton chains for every maximal noun phrase headed by a proper noun or a
// person-typed token. Requires `annotation.pos`.
std::vector<MentionChain> extract_np_singletons(const Article &article,
                                                const ArticleAnnotation &annotation);

enum class Gender { kUnknown, kMale, kFemale };

// Name lists behind the built-in person detector.
struct Gazetteer {
  std::unordered_map<std::string, Gender> first_names;   // lowercase
  std::unordered_map<std::string, Gender> surnames;      // lowercase
  std::unordered_map<std::string, Gender> titles;        // lowercase, no period

  static const Gazetteer &builtin();
  // Lines "kind name gender" with kind in {first, surname, title} and gender
  // in {m, f, u}; '#' starts a comment. Entries extend the built-in lists.
  static Gazetteer load(const std::string &path);
};

// Deterministic offline provider: POS from closed-class lists, suffix rules
// and capitalization; persons from capitalized runs that contain a title
// followed by a name or a gazetteer hit; within-document chains by shared
// head word, with third-person pronouns linked to the nearest preceding
// gender-compatible person. Pronouns without an antecedent are dropped.
class BuiltinAnnotator : public AnnotationProvider {
 public:
  BuiltinAnnotator() : BuiltinAnnotator(Gazetteer::builtin()) {}
  explicit BuiltinAnnotator(Gazetteer gazetteer) : gazetteer_(std::move(gazetteer)) {}

  std::string name() const override { return "builtin"; }
  Capabilities capabilities() const override { return {true, true, true}; }
  ArticleAnnotation annotate(const Article &article) const override;

  std::vector<PosTag> tag(const Article &article) const;

 private:
  Gazetteer gazetteer_;
};

// Provider backed by an HTTP service. POST {endpoint}/annotate with
// {"article": {id, title, lead, body, text}}; the reply carries
// {"pos"?: [tag...], "mentions": [{char_start, char_end, head?, ner_type}],
//  "chains": [{"mentions": [index...], "representative"?}]}
// with offsets into `text`.
class RemoteAnnotator : public AnnotationProvider {
 public:
  RemoteAnnotator(std::string endpoint, std::chrono::milliseconds timeout);

  std::string name() const override { return "remote:" + endpoint_; }
  Capabilities capabilities() const override { return {true, true, true}; }
  ArticleAnnotation annotate(const Article &article) const override;

  // Decodes a reply body; exposed for testing.
  static ArticleAnnotation decode(const Article &article, const nlohmann::json &reply);

 private:
  std::string endpoint_;
  std::chrono::milliseconds timeout_;
};

}  // namespace newsbias
