#include "newsbias/tsc.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "http_client.h"
#include "text_util.h"

namespace newsbias {

std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::kPositive: return "positive";
    case Polarity::kNegative: return "negative";
    case Polarity::kNeutral: return "neutral";
  }
  return "neutral";
}

Polarity parse_polarity(std::string_view s) {
  if (s == "positive") return Polarity::kPositive;
  if (s == "negative") return Polarity::kNegative;
  if (s == "neutral") return Polarity::kNeutral;
  throw SchemaError("label", "unknown polarity '" + std::string(s) + "'");
}

PolarityLabel PolarityLabel::make(Polarity value, double confidence) {
  int score = value == Polarity::kPositive ? 1 : value == Polarity::kNegative ? -1 : 0;
  return {value, score, std::clamp(confidence, 0.0, 1.0)};
}

bool PolarityLabel::consistent() const {
  return make(value, confidence).score == score && confidence >= 0.0 && confidence <= 1.0;
}

namespace {

std::string describe(const MentionKey &k) {
  return k.article_id + "[" + std::to_string(k.char_start) + "," + std::to_string(k.char_end) + ")";
}

}  // namespace

ClassifierError::ClassifierError(MentionKey mention, const std::string &what)
    : Error("mention " + describe(mention) + ": " + what), mention_(std::move(mention)) {}

const Lexicon &Lexicon::builtin() {
  static const Lexicon lex = [] {
    Lexicon l;
    constexpr std::pair<const char *, double> kWords[] = {
        // positive
        {"praise", 1}, {"praised", 1}, {"praises", 1}, {"applaud", 1}, {"applauded", 1},
        {"support", 1}, {"supported", 1}, {"backed", 1}, {"hailed", 1}, {"welcomed", 1},
        {"success", 1}, {"successful", 1}, {"win", 1}, {"won", 1}, {"victory", 1},
        {"good", 1}, {"great", 1}, {"strong", 1}, {"effective", 1}, {"skilled", 1},
        {"leadership", 1}, {"achievement", 1}, {"breakthrough", 1}, {"credit", 1},
        {"credited", 1}, {"thanked", 1}, {"honest", 1}, {"wise", 1}, {"brave", 1},
        {"courageous", 1}, {"compromise", 1}, {"agreement", 1}, {"deal", 0.5},
        {"responsible", 1}, {"reasonable", 1}, {"productive", 1}, {"respected", 1},
        {"champion", 1}, {"triumph", 1}, {"rescued", 1}, {"saved", 1}, {"steady", 1},
        {"calm", 1}, {"commended", 1}, {"admired", 1}, {"popular", 1}, {"best", 1},
        // negative
        {"tough", -1}, {"criticized", -1}, {"criticism", -1}, {"slammed", -1},
        {"attacked", -1}, {"blamed", -1}, {"blame", -1}, {"accused", -1}, {"failed", -1},
        {"failure", -1}, {"fail", -1}, {"bad", -1}, {"weak", -1}, {"reckless", -1},
        {"chaos", -1}, {"chaotic", -1}, {"crisis", -1}, {"disaster", -1}, {"lied", -1},
        {"lies", -1}, {"corrupt", -1}, {"scandal", -1}, {"dangerous", -1}, {"threat", -1},
        {"threatened", -1}, {"refused", -1}, {"obstruct", -1}, {"obstructed", -1},
        {"hostage", -1}, {"irresponsible", -1}, {"extreme", -1}, {"radical", -1},
        {"incompetent", -1}, {"mocked", -1}, {"ridiculed", -1}, {"condemned", -1},
        {"denounced", -1}, {"warned", -0.5}, {"defeat", -1}, {"lost", -1}, {"losing", -1},
        {"worst", -1}, {"angry", -1}, {"furious", -1}, {"stubborn", -1}, {"caved", -1},
        {"humiliating", -1}, {"embarrassing", -1}, {"fiasco", -1}, {"blunder", -1},
        {"scolded", -1}, {"rebuked", -1}, {"sabotage", -1}, {"stalled", -1},
    };
    for (auto [w, v] : kWords) l.valence.emplace(w, v);
    return l;
  }();
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon " + path.string());
  Lexicon lex;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    double v = 0.0;
    if (!(fields >> v)) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no), "expected 'token valence'");
    }
    lex.valence[text::to_lower(token)] = v;
  }
  return lex;
}

PolarityLabel LexiconClassifier::classify(std::string_view sentence, int target_start,
                                          int target_end) const {
  Segmentation seg = segment(sentence);
  const auto &tokens = seg.tokens;
  double sum = 0.0;
  double magnitude = 0.0;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].char_start < target_end && tokens[i].char_end > target_start) continue;
    auto it = lexicon_.valence.find(text::to_lower(tokens[i].surface));
    if (it == lexicon_.valence.end() || it->second == 0.0) continue;
    double v = it->second;
    size_t from = i >= static_cast<size_t>(lexicon_.negation_window)
                      ? i - lexicon_.negation_window
                      : 0;
    for (size_t k = from; k < i; ++k) {
      std::string lw = text::to_lower(tokens[k].surface);
      if (lw == "n\xE2\x80\x99t") lw = "n't";
      if (lexicon_.negators.count(lw)) {
        v = -v;
        break;
      }
    }
    sum += v;
    magnitude += std::abs(v);
  }
  if (magnitude == 0.0) return PolarityLabel::make(Polarity::kNeutral, 1.0);
  double confidence = std::abs(sum) / magnitude;
  if (sum > 0) return PolarityLabel::make(Polarity::kPositive, confidence);
  if (sum < 0) return PolarityLabel::make(Polarity::kNegative, confidence);
  return PolarityLabel::make(Polarity::kNeutral, confidence);
}

RemoteClassifier::RemoteClassifier(std::string endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {}

PolarityLabel RemoteClassifier::classify(std::string_view sentence, int target_start,
                                         int target_end) const {
  nlohmann::json request = {{"sentence", std::string(sentence)},
                            {"target_char_start", target_start},
                            {"target_char_end", target_end}};
  nlohmann::json reply = http::post_json(endpoint_, "/classify", request, timeout_);
  try {
    return PolarityLabel::make(parse_polarity(reply.at("label").get<std::string>()),
                               reply.value("confidence", 1.0));
  } catch (const nlohmann::json::exception &e) {
    throw Error(std::string("malformed classify reply: ") + e.what());
  }
}

PolarityLabel classify_mention(const Article &article, const Mention &mention,
                               const SentimentClassifier &classifier) {
  MentionKey key = key_of(mention);
  if (mention.sentence_idx < 0 ||
      mention.sentence_idx >= static_cast<int>(article.sentences().size())) {
    throw ClassifierError(key, "sentence index out of range");
  }
  const SentenceSpan &s = article.sentences()[mention.sentence_idx];
  if (mention.char_start < s.char_start || mention.char_end > s.char_end) {
    throw ClassifierError(key, "mention does not lie within its sentence");
  }
  try {
    PolarityLabel label = classifier.classify(article.sentence_text(mention.sentence_idx),
                                              mention.char_start - s.char_start,
                                              mention.char_end - s.char_start);
    if (!label.consistent()) throw Error("inconsistent label from " + classifier.name());
    return label;
  } catch (const ClassifierError &) {
    throw;
  } catch (const std::exception &e) {
    throw ClassifierError(key, classifier.name() + ": " + e.what());
  }
}

TopicLabels classify_topic(const Topic &topic, std::span<const PersonConcept> concepts,
                           const SentimentClassifier &classifier, const ClassifyOptions &options) {
  struct Job {
    const Article *article;
    const Mention *mention;
  };
  std::vector<Job> jobs;
  std::set<MentionKey> queued;
  for (const PersonConcept &c : concepts) {
    for (const auto &[aid, mentions] : c.per_article_mentions) {
      const Article *article = topic.find(aid);
      if (!article) throw Error("concept " + c.person_id + " references unknown article " + aid);
      for (const Mention &m : mentions) {
        if (queued.insert(key_of(m)).second) jobs.push_back({article, &m});
      }
    }
  }

  TopicLabels out;
  std::mutex mu;
  auto run = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const Job &job = jobs[i];
      try {
        PolarityLabel label = classify_mention(*job.article, *job.mention, classifier);
        std::lock_guard lock(mu);
        out.labels.emplace(key_of(*job.mention), label);
      } catch (const ClassifierError &e) {
        if (options.fallback) {
          PolarityLabel label = classify_mention(*job.article, *job.mention, *options.fallback);
          std::lock_guard lock(mu);
          out.labels.emplace(key_of(*job.mention), label);
          continue;
        }
        std::lock_guard lock(mu);
        out.incomplete = true;
        out.errors.emplace_back(e.what());
      }
    }
  };

  if (options.fail_fast) {
    for (const Job &job : jobs) {
      try {
        out.labels.emplace(key_of(*job.mention),
                           classify_mention(*job.article, *job.mention, classifier));
      } catch (const ClassifierError &) {
        if (!options.fallback) throw;
        out.labels.emplace(key_of(*job.mention),
                           classify_mention(*job.article, *job.mention, *options.fallback));
      }
    }
    return out;
  }
  size_t threads = std::max(1, options.threads);
  threads = std::min(threads, std::max<size_t>(jobs.size(), 1));
  if (threads <= 1) {
    run(0, jobs.size());
  } else {
    std::vector<std::thread> pool;
    size_t chunk = (jobs.size() + threads - 1) / threads;
    for (size_t t = 0; t < threads; ++t) {
      size_t b = t * chunk;
      size_t e = std::min(jobs.size(), b + chunk);
      if (b < e) pool.emplace_back(run, b, e);
    }
    for (auto &th : pool) th.join();
  }
  std::sort(out.errors.begin(), out.errors.end());
  return out;
}

}  // namespace newsbias
