#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "newsbias/annotate.h"
#include "newsbias/cdcr.h"
#include "newsbias/error.h"
#include "newsbias/ingest.h"

namespace newsbias {

enum class Polarity { kPositive, kNegative, kNeutral };

std::string_view to_string(Polarity p);
Polarity parse_polarity(std::string_view s);

struct PolarityLabel {
  Polarity value = Polarity::kNeutral;
  // +1 positive, -1 negative, 0 neutral.
  int score = 0;
  double confidence = 0.0;

  static PolarityLabel make(Polarity value, double confidence);
  bool consistent() const;
  bool operator==(const PolarityLabel &) const = default;
};

class ClassifierError : public Error {
 public:
  ClassifierError(MentionKey mention, const std::string &what);
  const MentionKey &mention() const { return mention_; }

 private:
  MentionKey mention_;
};

enum class ClassifierMode { kBuiltinLexicon, kRemote };

// Target-dependent sentiment classifier. `target_start`/`target_end` are byte
// offsets of the target mention inside `sentence`. Implementations must
// tolerate concurrent calls.
class SentimentClassifier {
 public:
  virtual ~SentimentClassifier() = default;
  virtual std::string name() const = 0;
  virtual ClassifierMode mode() const = 0;
  virtual PolarityLabel classify(std::string_view sentence, int target_start,
                                 int target_end) const = 0;
};

struct Lexicon {
  std::unordered_map<std::string, double> valence;  // lowercase token -> valence
  std::unordered_set<std::string> negators = {"not", "no", "never", "n't"};
  int negation_window = 3;

  static const Lexicon &builtin();
  // "token valence" per line; '#' starts a comment.
  static Lexicon load(const std::filesystem::path &path);
};

// Sums the valences of sentence tokens outside the target; a valenced token
// with a negator among the preceding `negation_window` tokens is flipped.
// Positive sum -> positive, negative -> negative, zero -> neutral.
// Confidence is |sum| / sum of |valence| over hits (1 when nothing matched).
class LexiconClassifier : public SentimentClassifier {
 public:
  LexiconClassifier() : LexiconClassifier(Lexicon::builtin()) {}
  explicit LexiconClassifier(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}

  std::string name() const override { return "lexicon"; }
  ClassifierMode mode() const override { return ClassifierMode::kBuiltinLexicon; }
  PolarityLabel classify(std::string_view sentence, int target_start,
                         int target_end) const override;

 private:
  Lexicon lexicon_;
};

// POST {endpoint}/classify with {sentence, target_char_start, target_char_end};
// expects {label: "positive"|"negative"|"neutral", confidence}.
class RemoteClassifier : public SentimentClassifier {
 public:
  RemoteClassifier(std::string endpoint, std::chrono::milliseconds timeout);

  std::string name() const override { return "remote:" + endpoint_; }
  ClassifierMode mode() const override { return ClassifierMode::kRemote; }
  PolarityLabel classify(std::string_view sentence, int target_start,
                         int target_end) const override;

 private:
  std::string endpoint_;
  std::chrono::milliseconds timeout_;
};

// Classifies `mention` against the sentence of `article` that contains it.
// Classifier failures become ClassifierError carrying the mention identity.
PolarityLabel classify_mention(const Article &article, const Mention &mention,
                               const SentimentClassifier &classifier);

struct TopicLabels {
  std::map<MentionKey, PolarityLabel> labels;
  // Set when some mentions could not be labeled; see `errors`.
  bool incomplete = false;
  std::vector<std::string> errors;
};

struct ClassifyOptions {
  // Used for a mention when the primary classifier fails.
  const SentimentClassifier *fallback = nullptr;
  // Abort on the first failure instead of recording it.
  bool fail_fast = false;
  int threads = 1;
};

// Labels every mention of every concept.
TopicLabels classify_topic(const Topic &topic, std::span<const PersonConcept> concepts,
                           const SentimentClassifier &classifier,
                           const ClassifyOptions &options = {});

}  // namespace newsbias
