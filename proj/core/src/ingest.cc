#include "newsbias/ingest.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <unordered_set>

#include <httplib.h>

#include "text_util.h"

namespace newsbias {

namespace {

constexpr std::array<std::string_view, 40> kAbbreviations = {
    "mr",   "mrs",  "ms",  "dr",   "prof", "sen",  "rep", "gov",
    "gen",  "lt",   "col", "sgt",  "capt", "st",   "jr",  "sr",
    "inc",  "ltd",  "corp", "co",  "vs",   "u.s",  "u.k", "u.n",
    "e.g",  "i.e",  "jan", "feb",  "aug",  "sep",  "sept", "oct",
    "nov",  "dec",  "mt",  "rev",  "hon",  "atty", "dept", "pres"};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Length of the UTF-8 sequence starting at `text[i]`, clamped to the input.
size_t utf8_length(std::string_view text, size_t i) {
  auto lead = static_cast<unsigned char>(text[i]);
  size_t len = 1;
  if (lead >= 0xF0) {
    len = 4;
  } else if (lead >= 0xE0) {
    len = 3;
  } else if (lead >= 0xC0) {
    len = 2;
  }
  return std::min(len, text.size() - i);
}

// Multi-byte punctuation: U+2000..U+206F (dashes, curly quotes, ellipsis) and
// the Latin-1 punctuation range U+00A1..U+00BF.
bool is_multibyte_punct(std::string_view text, size_t i) {
  if (i + 1 >= text.size()) return false;
  auto b0 = static_cast<unsigned char>(text[i]);
  auto b1 = static_cast<unsigned char>(text[i + 1]);
  if (b0 == 0xE2) return b1 == 0x80 || b1 == 0x81;
  if (b0 == 0xC2) return b1 >= 0xA0 && b1 <= 0xBF;
  return false;
}

bool is_word_char(std::string_view text, size_t i) {
  auto c = static_cast<unsigned char>(text[i]);
  if (c < 0x80) return std::isalnum(c) != 0;
  if (c < 0xC0) return true;  // stray continuation byte; keep it in the word
  return !is_multibyte_punct(text, i);
}

constexpr std::string_view kRightQuote = "\xE2\x80\x99";

// Length of a word-internal joiner (' - . or U+2019) at `i`, or 0.
size_t joiner_length(std::string_view text, size_t i) {
  char c = text[i];
  if (c == '\'' || c == '-' || c == '.') return 1;
  if (text.substr(i, 3) == kRightQuote) return 3;
  return 0;
}

bool ends_with_ci(std::string_view s, std::string_view suffix) {
  if (s.size() < suffix.size()) return false;
  return text::to_lower(s.substr(s.size() - suffix.size())) == suffix;
}

// Byte length of a trailing clitic ("n't", "'s") to split off `word`, or 0.
size_t clitic_length(std::string_view word) {
  for (std::string_view c : {std::string_view("n't"), std::string_view("n\xE2\x80\x99t")}) {
    if (word.size() > c.size() && ends_with_ci(word, c)) return c.size();
  }
  for (std::string_view c : {std::string_view("'s"), std::string_view("\xE2\x80\x99s")}) {
    if (word.size() > c.size() && ends_with_ci(word, c)) return c.size();
  }
  return 0;
}

bool is_terminal(std::string_view tok) {
  return tok == "." || tok == "!" || tok == "?" || tok == "\xE2\x80\xA6";
}

bool is_closer(std::string_view tok) {
  return tok == "\"" || tok == "'" || tok == ")" || tok == "]" ||
         tok == "\xE2\x80\x9D" || tok == kRightQuote;
}

struct RawToken {
  size_t start;
  size_t end;
  bool newline_before;
};

std::vector<RawToken> tokenize(std::string_view text) {
  std::vector<RawToken> out;
  size_t i = 0;
  bool newline = false;
  while (i < text.size()) {
    if (is_space(text[i])) {
      newline = newline || text[i] == '\n';
      ++i;
      continue;
    }
    size_t start = i;
    if (is_word_char(text, i)) {
      size_t j = i;
      while (j < text.size()) {
        if (is_word_char(text, j)) {
          j += utf8_length(text, j);
          continue;
        }
        size_t jl = joiner_length(text, j);
        if (jl > 0 && j + jl < text.size() && is_word_char(text, j + jl)) {
          j += jl;
          continue;
        }
        break;
      }
      std::string_view word = text.substr(start, j - start);
      bool initial = word.size() == 1 && std::isupper(static_cast<unsigned char>(word[0]));
      if (j < text.size() && text[j] == '.' && (initial || is_abbreviation(word))) {
        ++j;
        out.push_back({start, j, newline});
      } else if (size_t cl = clitic_length(word); cl > 0) {
        out.push_back({start, j - cl, newline});
        out.push_back({j - cl, j, false});
      } else {
        out.push_back({start, j, newline});
      }
      i = j;
    } else {
      i += utf8_length(text, i);
      out.push_back({start, i, newline});
    }
    newline = false;
  }
  return out;
}

}  // namespace

bool is_abbreviation(std::string_view word) {
  std::string lower = text::to_lower(word);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) !=
         kAbbreviations.end();
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

Segmentation segment(std::string_view text) {
  Segmentation seg;
  std::vector<RawToken> raw = tokenize(text);
  bool sentence_open = false;
  bool closed_by_terminal = false;
  for (const RawToken &rt : raw) {
    std::string_view surface = text.substr(rt.start, rt.end - rt.start);
    bool attach = closed_by_terminal && !rt.newline_before &&
                  (is_closer(surface) || is_terminal(surface));
    if (attach) {
      seg.sentences.back().char_end = static_cast<int>(rt.end);
    } else {
      if (sentence_open && (rt.newline_before || closed_by_terminal)) {
        sentence_open = false;
      }
      if (!sentence_open) {
        seg.sentences.push_back({static_cast<int>(rt.start), static_cast<int>(rt.end)});
        sentence_open = true;
      }
      seg.sentences.back().char_end = static_cast<int>(rt.end);
      closed_by_terminal = is_terminal(surface);
    }
    seg.tokens.push_back({std::string(surface), static_cast<int>(rt.start),
                          static_cast<int>(rt.end),
                          static_cast<int>(seg.sentences.size()) - 1});
  }
  return seg;
}

std::string_view to_string(Orientation o) {
  switch (o) {
    case Orientation::kLeft: return "left";
    case Orientation::kCenter: return "center";
    case Orientation::kRight: return "right";
    case Orientation::kUnknown: return "unknown";
  }
  return "unknown";
}

Orientation parse_orientation(std::string_view s) {
  if (s == "left") return Orientation::kLeft;
  if (s == "center") return Orientation::kCenter;
  if (s == "right") return Orientation::kRight;
  if (s == "unknown") return Orientation::kUnknown;
  throw SchemaError("outlet_orientation", "unknown orientation '" + std::string(s) + "'");
}

Article::Article(std::string id, std::optional<std::string> url,
                 std::string outlet_name, Orientation orientation,
                 std::string title, std::string lead, std::string body)
    : id_(std::move(id)),
      url_(std::move(url)),
      outlet_name_(normalize_whitespace(outlet_name)),
      orientation_(orientation),
      title_(normalize_whitespace(title)),
      lead_(normalize_whitespace(lead)),
      body_(normalize_whitespace(body)) {
  text_ = title_ + "\n" + lead_ + "\n" + body_;
  Segmentation seg = segment(text_);
  tokens_ = std::move(seg.tokens);
  sentences_ = std::move(seg.sentences);
}

std::string_view Article::sentence_text(int sentence_idx) const {
  const SentenceSpan &s = sentences_.at(sentence_idx);
  return span(s.char_start, s.char_end);
}

int Article::token_index_at(int char_start) const {
  auto it = std::lower_bound(
      tokens_.begin(), tokens_.end(), char_start,
      [](const Token &t, int pos) { return t.char_start < pos; });
  return static_cast<int>(it - tokens_.begin());
}

const Article *Topic::find(std::string_view article_id) const {
  for (const Article &a : articles) {
    if (a.id() == article_id) return &a;
  }
  return nullptr;
}

namespace {

const nlohmann::json &require(const nlohmann::json &obj, const char *key,
                              const std::string &path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + key, "missing required field");
  return *it;
}

std::string require_string(const nlohmann::json &obj, const char *key,
                           const std::string &path) {
  const nlohmann::json &v = require(obj, key, path);
  if (!v.is_string()) throw SchemaError(path + key, "expected a string");
  return v.get<std::string>();
}

}  // namespace

Topic parse_topic(const nlohmann::json &doc) {
  if (!doc.is_object()) throw SchemaError("$", "topic must be a JSON object");
  Topic topic;
  topic.topic_id = require_string(doc, "topic_id", "");
  if (topic.topic_id.empty()) throw SchemaError("topic_id", "must not be empty");
  topic.event_description = require_string(doc, "event_description", "");
  const nlohmann::json &articles = require(doc, "articles", "");
  if (!articles.is_array()) throw SchemaError("articles", "expected an array");
  if (articles.empty()) throw SchemaError("articles", "at least one article required");

  std::set<std::string> seen;
  for (size_t i = 0; i < articles.size(); ++i) {
    const nlohmann::json &a = articles[i];
    std::string path = "articles[" + std::to_string(i) + "].";
    if (!a.is_object()) throw SchemaError(path.substr(0, path.size() - 1), "expected an object");
    std::string id = require_string(a, "id", path);
    if (id.empty()) throw SchemaError(path + "id", "must not be empty");
    if (!seen.insert(id).second) {
      throw SchemaError(path + "id", "duplicate article id '" + id + "'");
    }
    std::optional<std::string> url;
    if (auto it = a.find("url"); it != a.end() && !it->is_null()) {
      if (!it->is_string()) throw SchemaError(path + "url", "expected a string");
      url = it->get<std::string>();
    }
    Orientation orientation;
    try {
      orientation = parse_orientation(require_string(a, "outlet_orientation", path));
    } catch (const SchemaError &e) {
      if (e.field() != "outlet_orientation") throw;
      throw SchemaError(path + "outlet_orientation", e.what());
    }
    topic.articles.emplace_back(id, std::move(url), require_string(a, "outlet_name", path),
                                orientation, require_string(a, "title", path),
                                require_string(a, "lead", path),
                                require_string(a, "body", path));
  }
  return topic;
}

Topic load_topic(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open topic file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  return parse_topic(doc);
}

nlohmann::json topic_to_json(const Topic &topic) {
  nlohmann::json articles = nlohmann::json::array();
  for (const Article &a : topic.articles) {
    nlohmann::json j = {{"id", a.id()},
                        {"outlet_name", a.outlet_name()},
                        {"outlet_orientation", to_string(a.orientation())},
                        {"title", a.title()},
                        {"lead", a.lead()},
                        {"body", a.body()}};
    if (a.url()) j["url"] = *a.url();
    articles.push_back(std::move(j));
  }
  return {{"topic_id", topic.topic_id},
          {"event_description", topic.event_description},
          {"articles", std::move(articles)}};
}

// ---------------------------------------------------------------------------
// Page extraction

namespace {

void erase_elements(std::string &html, std::string &lower, std::string_view tag) {
  std::string open = "<" + std::string(tag);
  std::string close = "</" + std::string(tag) + ">";
  size_t pos = 0;
  while ((pos = lower.find(open, pos)) != std::string::npos) {
    size_t end = lower.find(close, pos);
    end = end == std::string::npos ? lower.size() : end + close.size();
    html.erase(pos, end - pos);
    lower.erase(pos, end - pos);
  }
}

void append_utf8(std::string &out, unsigned cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string decode_entities(std::string_view s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    size_t semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    std::string_view name = s.substr(i + 1, semi - i - 1);
    if (name == "amp") out += '&';
    else if (name == "lt") out += '<';
    else if (name == "gt") out += '>';
    else if (name == "quot") out += '"';
    else if (name == "apos") out += '\'';
    else if (name == "nbsp") out += ' ';
    else if (name.size() > 1 && name[0] == '#') {
      unsigned cp = 0;
      try {
        cp = (name[1] == 'x' || name[1] == 'X')
                 ? std::stoul(std::string(name.substr(2)), nullptr, 16)
                 : std::stoul(std::string(name.substr(1)), nullptr, 10);
      } catch (const std::exception &) {
        out.push_back('&');
        continue;
      }
      append_utf8(out, cp);
    } else {
      out.push_back('&');
      continue;
    }
    i = semi;
  }
  return out;
}

std::string strip_tags(std::string_view s) {
  std::string out;
  bool in_tag = false;
  for (char c : s) {
    if (c == '<') {
      in_tag = true;
      out.push_back(' ');
    } else if (c == '>') {
      in_tag = false;
    } else if (!in_tag) {
      out.push_back(c);
    }
  }
  return normalize_whitespace(decode_entities(out));
}

// Inner HTML of every <tag ...>...</tag> element in document order.
std::vector<std::string> element_texts(const std::string &html, const std::string &lower,
                                       std::string_view tag) {
  std::vector<std::string> out;
  std::string open = "<" + std::string(tag);
  std::string close = "</" + std::string(tag) + ">";
  size_t pos = 0;
  while ((pos = lower.find(open, pos)) != std::string::npos) {
    size_t after = pos + open.size();
    if (after >= lower.size()) break;
    char next = lower[after];
    if (next != '>' && !is_space(next)) {
      pos = after;
      continue;
    }
    size_t content = lower.find('>', after);
    if (content == std::string::npos) break;
    ++content;
    size_t end = lower.find(close, content);
    if (end == std::string::npos) end = lower.size();
    std::string text = strip_tags(std::string_view(html).substr(content, end - content));
    if (!text.empty()) out.push_back(std::move(text));
    pos = end;
  }
  return out;
}

}  // namespace

ExtractedPage extract_page(std::string_view html_in) {
  std::string html(html_in);
  std::string lower = text::to_lower(html);
  erase_elements(html, lower, "script");
  erase_elements(html, lower, "style");
  size_t c;
  while ((c = lower.find("<!--")) != std::string::npos) {
    size_t end = lower.find("-->", c);
    end = end == std::string::npos ? lower.size() : end + 3;
    html.erase(c, end - c);
    lower.erase(c, end - c);
  }

  ExtractedPage page;
  std::vector<std::string> h1 = element_texts(html, lower, "h1");
  if (!h1.empty()) {
    page.title = h1.front();
  } else if (auto title = element_texts(html, lower, "title"); !title.empty()) {
    page.title = title.front();
  }
  std::vector<std::string> paragraphs = element_texts(html, lower, "p");
  if (!paragraphs.empty()) {
    page.lead = paragraphs.front();
    for (size_t i = 1; i < paragraphs.size(); ++i) {
      if (!page.body.empty()) page.body += ' ';
      page.body += paragraphs[i];
    }
  }
  return page;
}

std::string http_get(const std::string &url, std::chrono::milliseconds timeout) {
  size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error("malformed URL: " + url);
  size_t path_start = url.find('/', scheme_end + 3);
  std::string origin = url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  if (!client.is_valid()) throw Error("unsupported URL: " + url);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_follow_location(true);
  httplib::Result res = client.Get(path);
  if (!res) throw Error(httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw Error("HTTP status " + std::to_string(res->status));
  }
  return res->body;
}

FetchResult fetch_topic(const std::vector<std::string> &urls, const FetchOptions &options) {
  if (urls.empty()) throw Error("fetch_topic: URL list is empty");
  std::vector<std::future<std::string>> pending;
  pending.reserve(urls.size());
  for (const std::string &url : urls) {
    pending.push_back(std::async(std::launch::async, options.fetcher, url, options.timeout));
  }

  FetchResult result;
  result.topic.topic_id = options.topic_id;
  result.topic.event_description = options.event_description;
  for (size_t i = 0; i < urls.size(); ++i) {
    try {
      std::string html = pending[i].get();
      ExtractedPage page = extract_page(html);
      if (page.title.empty() && page.lead.empty()) {
        throw Error("no extractable article content");
      }
      std::string host = urls[i];
      if (size_t s = host.find("://"); s != std::string::npos) host = host.substr(s + 3);
      host = host.substr(0, host.find('/'));
      result.topic.articles.emplace_back("a" + std::to_string(i + 1), urls[i], host,
                                         Orientation::kUnknown, page.title, page.lead,
                                         page.body);
    } catch (const std::exception &e) {
      result.failures.push_back({urls[i], e.what()});
    }
  }
  if (result.topic.articles.empty()) {
    throw Error("fetch_topic: all " + std::to_string(urls.size()) + " fetches failed");
  }
  return result;
}

}  // namespace newsbias
