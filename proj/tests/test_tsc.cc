#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

#include "newsbias/analysis.h"
#include "newsbias/tsc.h"
#include "test_util.h"

namespace newsbias {
namespace {

using testing::make_article;

PolarityLabel classify(const SentimentClassifier &c, const std::string &sentence,
                       const std::string &target) {
  int start = static_cast<int>(sentence.find(target));
  return c.classify(sentence, start, start + static_cast<int>(target.size()));
}

TEST(Lexicon, ToughCoverageIsNegative) {
  PolarityLabel l = classify(LexiconClassifier(), "The Mueller report was tough on Trump.", "Trump");
  EXPECT_EQ(l.value, Polarity::kNegative);
  EXPECT_EQ(l.score, -1);
}

TEST(Lexicon, NoHitsIsNeutral) {
  PolarityLabel l = classify(LexiconClassifier(), "Pelosi walked to the car.", "Pelosi");
  EXPECT_EQ(l.value, Polarity::kNeutral);
  EXPECT_EQ(l.score, 0);
  EXPECT_EQ(l.confidence, 1.0);
}

TEST(Lexicon, NegationFlipsWithinWindow) {
  Lexicon lex;
  lex.valence = {{"praise", 1.0}};
  LexiconClassifier c(lex);
  EXPECT_EQ(classify(c, "Critics did not praise Pelosi.", "Pelosi").value, Polarity::kNegative);
  EXPECT_EQ(classify(c, "Critics praise Pelosi.", "Pelosi").value, Polarity::kPositive);
  // Four tokens between negator and hit: outside the window of three.
  EXPECT_EQ(classify(c, "Not that anyone would ever praise Pelosi.", "Pelosi").value,
            Polarity::kPositive);
}

TEST(Lexicon, TargetTokensDoNotCount) {
  Lexicon lex;
  lex.valence = {{"hope", 1.0}};
  EXPECT_EQ(classify(LexiconClassifier(lex), "Hope spoke today.", "Hope").value,
            Polarity::kNeutral);
}

TEST(Lexicon, ConfidenceIsNetOverGross) {
  Lexicon lex;
  lex.valence = {{"good", 2.0}, {"bad", -1.0}};
  PolarityLabel l = classify(LexiconClassifier(lex), "Good and bad news for Trump.", "Trump");
  EXPECT_EQ(l.value, Polarity::kPositive);
  EXPECT_DOUBLE_EQ(l.confidence, 1.0 / 3.0);
  EXPECT_TRUE(l.consistent());
}

TEST(Lexicon, LoadFromFile) {
  testing::TempDir dir;
  auto path = dir.path() / "lex.txt";
  std::ofstream(path) << "# custom\nsplendid 1.5\nawful -2\n";
  Lexicon lex = Lexicon::load(path);
  EXPECT_EQ(lex.valence.at("splendid"), 1.5);
  std::ofstream(path) << "broken\n";
  EXPECT_THROW(Lexicon::load(path), SchemaError);
}

// Minimal concept set from the built-in annotator: one concept per chain.
std::vector<PersonConcept> concepts_of(const Topic &topic) {
  BuiltinAnnotator annotator;
  std::vector<PersonConcept> out;
  for (const Article &a : topic.articles) {
    for (const MentionChain &c : annotate_article(a, annotator).chains) {
      PersonConcept pc;
      pc.person_id = "p" + std::to_string(out.size());
      pc.chains = {c};
      for (const Mention &m : c.mentions) pc.per_article_mentions[a.id()].push_back(m);
      pc.mention_count = static_cast<int>(c.mentions.size());
      out.push_back(pc);
    }
  }
  return out;
}

TEST(ClassifyTopic, NoPersonsEmptyMap) {
  Topic t{"t", "e", {make_article("a1", "The weather was mild.")}};
  TopicLabels l = classify_topic(t, concepts_of(t), LexiconClassifier());
  EXPECT_TRUE(l.labels.empty());
  EXPECT_FALSE(l.incomplete);
}

TEST(ClassifyTopic, EveryMentionLabeled) {
  Topic t{"t", "e", {make_article("a1", "Trump spoke. Trump left. Later Trump returned.")}};
  auto concepts = concepts_of(t);
  ASSERT_EQ(concepts.size(), 1u);
  ASSERT_EQ(concepts[0].mention_count, 3);
  EXPECT_EQ(classify_topic(t, concepts, LexiconClassifier()).labels.size(), 3u);
}

TEST(ClassifyTopic, DeterministicAndThreadIndependent) {
  Topic t = testing::fixture_topic();
  auto concepts = concepts_of(t);
  TopicLabels one = classify_topic(t, concepts, LexiconClassifier());
  ClassifyOptions opts;
  opts.threads = 4;
  TopicLabels four = classify_topic(t, concepts, LexiconClassifier(), opts);
  EXPECT_EQ(one.labels, four.labels);
  EXPECT_EQ(one.labels, classify_topic(t, concepts, LexiconClassifier()).labels);
}

// The hand-labeled sheet lists every person mention of the fixture with its
// expected polarity; the pipeline must agree on keys and labels.
TEST(ClassifyTopic, FixtureMatchesHandSheet) {
  EngineConfig config;
  Providers providers = Providers::from_config(config);
  TopicAnalysis a = analyze_topic(testing::fixture_topic(), config, providers, "t0");
  auto sheet = testing::polarity_sheet();
  ASSERT_EQ(sheet.size(), a.labels.size());
  std::map<std::string, int> expected_counts, actual_counts;
  for (const auto &row : sheet) {
    MentionKey key{row.article_id, row.char_start, row.char_end};
    auto it = a.labels.find(key);
    ASSERT_NE(it, a.labels.end()) << row.article_id << " " << row.surface;
    EXPECT_EQ(to_string(it->second.value), row.polarity)
        << row.article_id << " [" << row.char_start << "," << row.char_end << ") " << row.surface;
    EXPECT_EQ(a.topic.find(row.article_id)->span(row.char_start, row.char_end), row.surface);
    ++expected_counts[row.polarity];
  }
  for (const auto &[k, l] : a.labels) ++actual_counts[std::string(to_string(l.value))];
  EXPECT_EQ(expected_counts, actual_counts);
}

class SlowServer {
 public:
  explicit SlowServer(std::chrono::milliseconds delay) {
    server_.Post("/classify", [delay](const httplib::Request &, httplib::Response &res) {
      std::this_thread::sleep_for(delay);
      res.set_content(R"({"label": "positive", "confidence": 0.9})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~SlowServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

TEST(RemoteClassifier, RepliesAreDecoded) {
  SlowServer server(std::chrono::milliseconds(0));
  RemoteClassifier remote(server.url(), std::chrono::milliseconds(2000));
  PolarityLabel l = classify(remote, "Trump spoke.", "Trump");
  EXPECT_EQ(l.value, Polarity::kPositive);
  EXPECT_DOUBLE_EQ(l.confidence, 0.9);
}

TEST(RemoteClassifier, TimeoutCarriesMentionAndFallsBack) {
  SlowServer server(std::chrono::milliseconds(800));
  RemoteClassifier remote(server.url(), std::chrono::milliseconds(150));
  Topic t{"t", "e", {make_article("a1", "The Mueller report was tough on Trump.")}};
  // Two persons: Mueller and Trump.
  auto concepts = concepts_of(t);
  ASSERT_EQ(concepts.size(), 2u);
  ASSERT_EQ(concepts[1].chains[0].representative, "Trump");
  const Mention &m = concepts[1].per_article_mentions.at("a1").front();
  try {
    classify_mention(t.articles[0], m, remote);
    FAIL() << "expected timeout";
  } catch (const ClassifierError &e) {
    EXPECT_EQ(e.mention(), key_of(m));
  }

  TopicLabels partial = classify_topic(t, concepts, remote);
  EXPECT_TRUE(partial.incomplete);
  EXPECT_TRUE(partial.labels.empty());
  ASSERT_EQ(partial.errors.size(), 2u);

  ClassifyOptions strict;
  strict.fail_fast = true;
  EXPECT_THROW(classify_topic(t, concepts, remote, strict), ClassifierError);

  LexiconClassifier lexicon;
  ClassifyOptions opts;
  opts.fallback = &lexicon;
  TopicLabels l = classify_topic(t, concepts, remote, opts);
  EXPECT_FALSE(l.incomplete);
  ASSERT_EQ(l.labels.size(), 2u);
  EXPECT_EQ(l.labels.at(key_of(m)).value, Polarity::kNegative);
}

TEST(PolarityLabel, ScoreFollowsValue) {
  EXPECT_EQ(PolarityLabel::make(Polarity::kPositive, 0.5).score, 1);
  EXPECT_EQ(PolarityLabel::make(Polarity::kNegative, 0.5).score, -1);
  EXPECT_EQ(PolarityLabel::make(Polarity::kNeutral, 2.0).confidence, 1.0);
  PolarityLabel bad{Polarity::kPositive, -1, 0.5};
  EXPECT_FALSE(bad.consistent());
  EXPECT_EQ(parse_polarity("negative"), Polarity::kNegative);
  EXPECT_THROW(parse_polarity("angry"), Error);
}

}  // namespace
}  // namespace newsbias
