#include <gtest/gtest.h>
#include <httplib.h>

#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "newsbias/ingest.h"
#include "test_util.h"

namespace newsbias {
namespace {

using testing::fixture;

std::vector<std::string> surfaces(const Segmentation &s) {
  std::vector<std::string> out;
  for (const Token &t : s.tokens) out.push_back(t.surface);
  return out;
}

TEST(Segment, EmptyInput) {
  Segmentation s = segment("");
  EXPECT_TRUE(s.tokens.empty());
  EXPECT_TRUE(s.sentences.empty());
}

TEST(Segment, SingleSentence) {
  Segmentation s = segment("Hello world.");
  EXPECT_EQ(surfaces(s), (std::vector<std::string>{"Hello", "world", "."}));
  ASSERT_EQ(s.sentences.size(), 1u);
}

TEST(Segment, TwoShortSentencesHandCount) {
  // Hand count: Trump | spoke | . | Pelosi | replied | .
  Segmentation s = segment("Trump spoke. Pelosi replied.");
  EXPECT_EQ(surfaces(s),
            (std::vector<std::string>{"Trump", "spoke", ".", "Pelosi", "replied", "."}));
  ASSERT_EQ(s.sentences.size(), 2u);
  EXPECT_EQ(s.tokens[3].sentence_idx, 1);
}

TEST(Segment, AbbreviationIsNotABoundary) {
  ASSERT_TRUE(is_abbreviation("Dr"));
  Segmentation s = segment("Dr. Smith left. He returned.");
  ASSERT_EQ(s.sentences.size(), 2u);
  EXPECT_EQ(s.tokens[0].surface, "Dr.");
}

TEST(Segment, CliticsAndNewlines) {
  Segmentation s = segment("Pelosi's aides didn't comment\nTrump left");
  EXPECT_EQ(surfaces(s), (std::vector<std::string>{"Pelosi", "'s", "aides", "did", "n't",
                                                   "comment", "Trump", "left"}));
  EXPECT_EQ(s.sentences.size(), 2u);
}

TEST(Segment, MultibytePunctuationIsItsOwnToken) {
  Segmentation s = segment("Trump \xE2\x80\x94 again.");
  EXPECT_EQ(surfaces(s), (std::vector<std::string>{"Trump", "\xE2\x80\x94", "again", "."}));
}

// Span soundness, ordering, sentence partition and determinism over random
// text assembled from a small alphabet of tricky pieces.
TEST(Segment, PropertiesOnRandomText) {
  const std::vector<std::string> pieces = {"Trump", "Dr.", "U.S.", "won't", "it's", " ", "  ",
                                           ".", "!", "?", ",", "\n", "e-mail", "\xE2\x80\x9C",
                                           "\xC2\xBF", "42", "a", "Mr.", "\""};
  std::mt19937_64 rng(7);
  for (int round = 0; round < 300; ++round) {
    std::string text;
    int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) text += pieces[rng() % pieces.size()];
    Segmentation s = segment(text);
    int prev_end = 0;
    for (const Token &t : s.tokens) {
      ASSERT_GE(t.char_start, prev_end) << text;
      ASSERT_LT(t.char_start, t.char_end);
      ASSERT_EQ(text.substr(t.char_start, t.char_end - t.char_start), t.surface);
      ASSERT_GE(t.sentence_idx, 0);
      ASSERT_LT(t.sentence_idx, static_cast<int>(s.sentences.size()));
      const SentenceSpan &sp = s.sentences[t.sentence_idx];
      ASSERT_LE(sp.char_start, t.char_start);
      ASSERT_GE(sp.char_end, t.char_end);
      prev_end = t.char_end;
    }
    for (size_t i = 1; i < s.sentences.size(); ++i) {
      ASSERT_LE(s.sentences[i - 1].char_end, s.sentences[i].char_start);
    }
    Segmentation again = segment(text);
    ASSERT_EQ(again.tokens, s.tokens);
    ASSERT_EQ(again.sentences, s.sentences);
  }
}

TEST(Article, CanonicalTextAndOffsets) {
  Article a("x", std::nullopt, "Out", Orientation::kLeft, "  A   title ", "The lead.",
            "The   body.\n Second.");
  EXPECT_EQ(a.title(), "A title");
  EXPECT_EQ(a.text(), "A title\nThe lead.\nThe body. Second.");
  EXPECT_EQ(a.span(a.lead_start(), a.lead_start() + 9), "The lead.");
  EXPECT_EQ(a.span(a.body_start(), a.body_start() + 3), "The");
  // Title, lead and body never share a sentence.
  EXPECT_NE(a.tokens().front().sentence_idx, a.tokens()[a.token_index_at(a.lead_start())].sentence_idx);
}

TEST(LoadTopic, FixtureHasTenSegmentedArticles) {
  Topic t = load_topic(fixture("debt_ceiling_topic.json"));
  ASSERT_EQ(t.articles.size(), 10u);
  std::set<std::string> ids;
  for (const Article &a : t.articles) {
    ids.insert(a.id());
    EXPECT_FALSE(a.tokens().empty());
    EXPECT_FALSE(a.sentences().empty());
  }
  EXPECT_EQ(ids.size(), 10u);
  EXPECT_EQ(t.find("a6")->orientation(), Orientation::kUnknown);
}

TEST(LoadTopic, ReloadingExportedFormIsIdempotent) {
  Topic t = testing::fixture_topic();
  Topic again = parse_topic(topic_to_json(t));
  ASSERT_EQ(again.articles.size(), t.articles.size());
  for (size_t i = 0; i < t.articles.size(); ++i) {
    EXPECT_EQ(again.articles[i].text(), t.articles[i].text());
    EXPECT_EQ(again.articles[i].tokens(), t.articles[i].tokens());
    EXPECT_EQ(again.articles[i].sentences(), t.articles[i].sentences());
  }
  EXPECT_EQ(topic_to_json(again), topic_to_json(t));
}

nlohmann::json small_topic() {
  return nlohmann::json::parse(R"({
    "topic_id": "t", "event_description": "e",
    "articles": [
      {"id": "a1", "outlet_name": "O", "outlet_orientation": "left", "title": "T", "lead": "L", "body": "B"},
      {"id": "a2", "outlet_name": "O", "outlet_orientation": "right", "title": "T", "lead": "L", "body": "B"}
    ]})");
}

TEST(LoadTopic, DuplicateIdIsRejectedNamingTheField) {
  nlohmann::json doc = small_topic();
  doc["articles"][1]["id"] = "a1";
  try {
    parse_topic(doc);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError &e) {
    EXPECT_EQ(e.field(), "articles[1].id");
  }
}

TEST(LoadTopic, SchemaViolationsNameTheField) {
  auto field_of = [](const nlohmann::json &doc) {
    try {
      parse_topic(doc);
    } catch (const SchemaError &e) {
      return e.field();
    }
    return std::string("<none>");
  };
  nlohmann::json doc = small_topic();
  doc["articles"][0]["outlet_orientation"] = "far-left";
  EXPECT_EQ(field_of(doc), "articles[0].outlet_orientation");
  doc = small_topic();
  doc["articles"][1].erase("title");
  EXPECT_EQ(field_of(doc), "articles[1].title");
  doc = small_topic();
  doc["articles"] = nlohmann::json::array();
  EXPECT_EQ(field_of(doc), "articles");
  doc = small_topic();
  doc["articles"][0]["body"] = 3;
  EXPECT_EQ(field_of(doc), "articles[0].body");
  EXPECT_EQ(field_of(small_topic()), "<none>");
}

TEST(LoadTopic, MissingFileIsAnError) {
  EXPECT_THROW(load_topic(fixture("does_not_exist.json")), Error);
}

TEST(ExtractPage, FixturePage) {
  std::ifstream in(fixture("article_page.html"));
  std::stringstream ss;
  ss << in.rdbuf();
  ExtractedPage p = extract_page(ss.str());
  EXPECT_EQ(p.title, "Senate leaders trade offers on the budget");
  EXPECT_EQ(p.lead, "Senate leaders exchanged new offers on Monday as the deadline approached.");
  EXPECT_EQ(p.body,
            "McConnell said the Senate would stay in session & vote on Friday. "
            "Schumer called the latest offer \"a step forward\".");
}

TEST(ExtractPage, FallsBackToTitleElement) {
  ExtractedPage p = extract_page("<title>Only title</title><p>Lead.</p>");
  EXPECT_EQ(p.title, "Only title");
  EXPECT_EQ(p.lead, "Lead.");
  EXPECT_EQ(p.body, "");
}

PageFetcher fake_fetcher(std::set<std::string> broken) {
  return [broken](const std::string &url, std::chrono::milliseconds) -> std::string {
    if (broken.count(url)) throw Error("connection refused");
    return "<h1>Headline " + url + "</h1><p>Lead.</p><p>Body one.</p><p>Body two.</p>";
  };
}

TEST(FetchTopic, AllSucceed) {
  FetchOptions opts;
  opts.fetcher = fake_fetcher({});
  FetchResult r = fetch_topic({"http://x/1", "http://x/2", "http://x/3"}, opts);
  EXPECT_EQ(r.topic.articles.size(), 3u);
  EXPECT_TRUE(r.failures.empty());
  EXPECT_EQ(r.topic.articles[2].id(), "a3");
  EXPECT_EQ(r.topic.articles[0].body(), "Body one. Body two.");
}

TEST(FetchTopic, PartialFailureKeepsTheRest) {
  FetchOptions opts;
  opts.fetcher = fake_fetcher({"http://x/2"});
  FetchResult r = fetch_topic({"http://x/1", "http://x/2", "http://x/3"}, opts);
  ASSERT_EQ(r.topic.articles.size(), 2u);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].url, "http://x/2");
  EXPECT_EQ(r.topic.articles[1].id(), "a3");
}

TEST(FetchTopic, AllFailIsAnError) {
  FetchOptions opts;
  opts.fetcher = fake_fetcher({"http://x/1"});
  EXPECT_THROW(fetch_topic({"http://x/1"}, opts), Error);
  EXPECT_THROW(fetch_topic({}, opts), Error);
}

// Real HTTP against a local server: one page, one 404, one unroutable port
// and one endpoint slower than the timeout.
TEST(FetchTopic, OverHttp) {
  httplib::Server server;
  server.Get("/ok", [](const httplib::Request &, httplib::Response &res) {
    res.set_content("<h1>Local</h1><p>Lead here.</p><p>Body here.</p>", "text/html");
  });
  server.Get("/slow", [](const httplib::Request &, httplib::Response &res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    res.set_content("<h1>Late</h1><p>x</p>", "text/html");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string base = "http://127.0.0.1:" + std::to_string(port);

  FetchOptions opts;
  opts.timeout = std::chrono::milliseconds(300);
  FetchResult r = fetch_topic({base + "/ok", base + "/missing", base + "/slow"}, opts);
  server.stop();
  t.join();

  ASSERT_EQ(r.topic.articles.size(), 1u);
  EXPECT_EQ(r.topic.articles[0].title(), "Local");
  EXPECT_EQ(r.topic.articles[0].outlet_name(), "127.0.0.1:" + std::to_string(port));
  EXPECT_EQ(r.failures.size(), 2u);
}

}  // namespace
}  // namespace newsbias
