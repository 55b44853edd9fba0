#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsbias/error.h"

namespace newsbias {

enum class Orientation { kLeft, kCenter, kRight, kUnknown };

std::string_view to_string(Orientation o);
// Throws SchemaError (field "outlet_orientation") on unknown values.
Orientation parse_orientation(std::string_view s);

struct Token {
  std::string surface;
  int char_start = 0;
  int char_end = 0;
  int sentence_idx = 0;

  bool operator==(const Token &) const = default;
};

struct SentenceSpan {
  int char_start = 0;
  int char_end = 0;

  bool operator==(const SentenceSpan &) const = default;
};

struct Segmentation {
  std::vector<Token> tokens;
  std::vector<SentenceSpan> sentences;
};

// Rule-based tokenizer and sentence splitter. Word tokens are maximal
// alphanumeric runs with internal apostrophes, hyphens and periods; clitics
// "n't" and "'s" become their own tokens; every other non-space character is
// a punctuation token. Sentences end at . ! ? unless the period belongs to a
// known abbreviation or a single-letter initial, and always at a newline.
// Byte offsets; deterministic.
Segmentation segment(std::string_view text);

// True if `word` (without the trailing period) is in the abbreviation list.
bool is_abbreviation(std::string_view word);

// Collapses every whitespace run to a single space and trims both ends.
std::string normalize_whitespace(std::string_view text);

// One news item. Text fields are whitespace-normalized; `text()` is the
// canonical concatenation title + "\n" + lead + "\n" + body over which all
// token, sentence and mention offsets are expressed.
class Article {
 public:
  Article() = default;
  Article(std::string id, std::optional<std::string> url,
          std::string outlet_name, Orientation orientation, std::string title,
          std::string lead, std::string body);

  const std::string &id() const { return id_; }
  const std::optional<std::string> &url() const { return url_; }
  const std::string &outlet_name() const { return outlet_name_; }
  Orientation orientation() const { return orientation_; }
  const std::string &title() const { return title_; }
  const std::string &lead() const { return lead_; }
  const std::string &body() const { return body_; }
  const std::string &text() const { return text_; }
  const std::vector<Token> &tokens() const { return tokens_; }
  const std::vector<SentenceSpan> &sentences() const { return sentences_; }

  std::string_view span(int char_start, int char_end) const {
    return std::string_view(text_).substr(char_start, char_end - char_start);
  }
  std::string_view sentence_text(int sentence_idx) const;
  // Index of the first token starting at or after `char_start`.
  int token_index_at(int char_start) const;

  // Offsets of the lead and body inside text(); the title starts at 0.
  int lead_start() const { return static_cast<int>(title_.size()) + 1; }
  int body_start() const { return lead_start() + static_cast<int>(lead_.size()) + 1; }

 private:
  std::string id_;
  std::optional<std::string> url_;
  std::string outlet_name_;
  Orientation orientation_ = Orientation::kUnknown;
  std::string title_;
  std::string lead_;
  std::string body_;
  std::string text_;
  std::vector<Token> tokens_;
  std::vector<SentenceSpan> sentences_;
};

struct Topic {
  std::string topic_id;
  std::string event_description;
  std::vector<Article> articles;

  const Article *find(std::string_view article_id) const;
};

// Parses the topic input schema:
//   {topic_id, event_description,
//    articles: [{id, url?, outlet_name, outlet_orientation, title, lead, body}]}
// Throws SchemaError naming the offending field; a duplicate article id is
// reported on the later article's "articles[i].id".
Topic parse_topic(const nlohmann::json &doc);
Topic load_topic(const std::filesystem::path &path);
nlohmann::json topic_to_json(const Topic &topic);

struct ExtractedPage {
  std::string title;
  std::string lead;
  std::string body;
};

// Minimal boilerplate removal: title is the first <h1> (falling back to
// <title>), lead is the first <p>, body the remaining <p> elements joined by a
// space. Scripts, styles and tags are stripped; common entities decoded.
ExtractedPage extract_page(std::string_view html);

struct FetchFailure {
  std::string url;
  std::string reason;
};

struct FetchResult {
  Topic topic;
  std::vector<FetchFailure> failures;
};

// Retrieves a URL and returns the response body. Throws on failure.
using PageFetcher = std::function<std::string(const std::string &url,
                                              std::chrono::milliseconds timeout)>;

// HTTP(S) GET via cpp-httplib; follows redirects; non-2xx is an error.
std::string http_get(const std::string &url, std::chrono::milliseconds timeout);

struct FetchOptions {
  std::chrono::milliseconds timeout{10000};
  std::string topic_id = "fetched";
  std::string event_description;
  PageFetcher fetcher = http_get;
};

// Fetches all URLs concurrently. Articles get ids "a1", "a2", ... in URL order
// (failed URLs keep their slot in the numbering), outlet_name is the URL host
// and orientation unknown. Throws Error if no URL succeeded.
FetchResult fetch_topic(const std::vector<std::string> &urls,
                        const FetchOptions &options = {});

}  // namespace newsbias
