#include "newsbias/annotate.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_set>

#include "http_client.h"
#include "text_util.h"

namespace newsbias {

std::string_view to_string(NerType t) { return t == NerType::kPerson ? "person" : "other"; }

NerType parse_ner_type(std::string_view s) {
  if (s == "person") return NerType::kPerson;
  if (s == "other") return NerType::kOther;
  throw SchemaError("ner_type", "unknown value '" + std::string(s) + "'");
}

std::string_view to_string(ChainSource s) {
  return s == ChainSource::kInDocCoref ? "in_doc_coref" : "np_singleton";
}

ChainSource parse_chain_source(std::string_view s) {
  if (s == "in_doc_coref") return ChainSource::kInDocCoref;
  if (s == "np_singleton") return ChainSource::kNpSingleton;
  throw SchemaError("source", "unknown value '" + std::string(s) + "'");
}

std::string_view to_string(PosTag t) {
  switch (t) {
    case PosTag::kDet: return "DET";
    case PosTag::kPron: return "PRON";
    case PosTag::kPropn: return "PROPN";
    case PosTag::kNoun: return "NOUN";
    case PosTag::kAdj: return "ADJ";
    case PosTag::kVerb: return "VERB";
    case PosTag::kAdp: return "ADP";
    case PosTag::kConj: return "CONJ";
    case PosTag::kNum: return "NUM";
    case PosTag::kPunct: return "PUNCT";
    case PosTag::kOther: return "X";
  }
  return "X";
}

namespace {

PosTag parse_pos(std::string_view s) {
  for (PosTag t : {PosTag::kDet, PosTag::kPron, PosTag::kPropn, PosTag::kNoun, PosTag::kAdj,
                   PosTag::kVerb, PosTag::kAdp, PosTag::kConj, PosTag::kNum, PosTag::kPunct,
                   PosTag::kOther}) {
    if (to_string(t) == s) return t;
  }
  throw SchemaError("pos", "unknown tag '" + std::string(s) + "'");
}

}  // namespace

NerType MentionChain::ner_type() const {
  size_t persons = std::count_if(mentions.begin(), mentions.end(),
                                 [](const Mention &m) { return m.ner_type == NerType::kPerson; });
  return 2 * persons >= mentions.size() && !mentions.empty() ? NerType::kPerson
                                                              : NerType::kOther;
}

// ---------------------------------------------------------------------------
// Gazetteer

const Gazetteer &Gazetteer::builtin() {
  static const Gazetteer g = [] {
    Gazetteer g;
    constexpr std::pair<const char *, Gender> kFirst[] = {
        {"donald", Gender::kMale},     {"joe", Gender::kMale},       {"joseph", Gender::kMale},
        {"barack", Gender::kMale},     {"mitch", Gender::kMale},     {"chuck", Gender::kMale},
        {"charles", Gender::kMale},    {"kevin", Gender::kMale},     {"mike", Gender::kMale},
        {"michael", Gender::kMale},    {"john", Gender::kMale},      {"james", Gender::kMale},
        {"robert", Gender::kMale},     {"william", Gender::kMale},   {"david", Gender::kMale},
        {"richard", Gender::kMale},    {"thomas", Gender::kMale},    {"steven", Gender::kMale},
        {"paul", Gender::kMale},       {"mark", Gender::kMale},      {"george", Gender::kMale},
        {"bernie", Gender::kMale},     {"ted", Gender::kMale},       {"lindsey", Gender::kMale},
        {"adam", Gender::kMale},       {"jerome", Gender::kMale},    {"hakeem", Gender::kMale},
        {"steve", Gender::kMale},      {"ron", Gender::kMale},       {"rand", Gender::kMale},
        {"nancy", Gender::kFemale},    {"hillary", Gender::kFemale}, {"kamala", Gender::kFemale},
        {"elizabeth", Gender::kFemale}, {"alexandria", Gender::kFemale},
        {"janet", Gender::kFemale},    {"mary", Gender::kFemale},    {"patricia", Gender::kFemale},
        {"jennifer", Gender::kFemale}, {"linda", Gender::kFemale},   {"susan", Gender::kFemale},
        {"sarah", Gender::kFemale},    {"karen", Gender::kFemale},   {"lisa", Gender::kFemale},
        {"maxine", Gender::kFemale},   {"ilhan", Gender::kFemale},   {"liz", Gender::kFemale},
        {"nikki", Gender::kFemale},    {"amy", Gender::kFemale},     {"dianne", Gender::kFemale},
        {"angela", Gender::kFemale},   {"theresa", Gender::kFemale}, {"michelle", Gender::kFemale},
    };
    constexpr std::pair<const char *, Gender> kSurnames[] = {
        {"trump", Gender::kMale},      {"biden", Gender::kMale},     {"obama", Gender::kMale},
        {"mcconnell", Gender::kMale},  {"schumer", Gender::kMale},   {"mccarthy", Gender::kMale},
        {"pence", Gender::kMale},      {"mueller", Gender::kMale},   {"sanders", Gender::kMale},
        {"cruz", Gender::kMale},       {"graham", Gender::kMale},    {"schiff", Gender::kMale},
        {"powell", Gender::kMale},     {"jeffries", Gender::kMale},  {"mnuchin", Gender::kMale},
        {"desantis", Gender::kMale},   {"putin", Gender::kMale},     {"macron", Gender::kMale},
        {"pelosi", Gender::kFemale},   {"clinton", Gender::kFemale}, {"harris", Gender::kFemale},
        {"warren", Gender::kFemale},   {"ocasio-cortez", Gender::kFemale},
        {"yellen", Gender::kFemale},   {"omar", Gender::kFemale},    {"cheney", Gender::kFemale},
        {"haley", Gender::kFemale},    {"klobuchar", Gender::kFemale},
        {"feinstein", Gender::kFemale}, {"merkel", Gender::kFemale},
    };
    constexpr std::pair<const char *, Gender> kTitles[] = {
        {"mr", Gender::kMale},          {"mrs", Gender::kFemale},       {"ms", Gender::kFemale},
        {"dr", Gender::kUnknown},       {"prof", Gender::kUnknown},     {"sen", Gender::kUnknown},
        {"rep", Gender::kUnknown},      {"gov", Gender::kUnknown},      {"gen", Gender::kUnknown},
        {"president", Gender::kUnknown}, {"senator", Gender::kUnknown}, {"speaker", Gender::kUnknown},
        {"representative", Gender::kUnknown}, {"congressman", Gender::kMale},
        {"congresswoman", Gender::kFemale}, {"governor", Gender::kUnknown},
        {"secretary", Gender::kUnknown}, {"minister", Gender::kUnknown},
        {"chancellor", Gender::kUnknown}, {"judge", Gender::kUnknown},
        {"justice", Gender::kUnknown},  {"leader", Gender::kUnknown},   {"chairman", Gender::kMale},
        {"chairwoman", Gender::kFemale}, {"mayor", Gender::kUnknown},   {"vice", Gender::kUnknown},
        {"former", Gender::kUnknown},   {"counsel", Gender::kUnknown},
    };
    for (auto [n, gd] : kFirst) g.first_names.emplace(n, gd);
    for (auto [n, gd] : kSurnames) g.surnames.emplace(n, gd);
    for (auto [n, gd] : kTitles) g.titles.emplace(n, gd);
    return g;
  }();
  return g;
}

Gazetteer Gazetteer::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open gazetteer " + path);
  Gazetteer g = builtin();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::vector<std::string> parts = text::split_words(line);
    if (parts.empty()) continue;
    if (parts.size() != 3) {
      throw SchemaError(path + ":" + std::to_string(line_no), "expected 'kind name gender'");
    }
    Gender gender = parts[2] == "m" ? Gender::kMale
                    : parts[2] == "f" ? Gender::kFemale
                                      : Gender::kUnknown;
    std::string name = text::to_lower(parts[1]);
    if (parts[0] == "first") g.first_names[name] = gender;
    else if (parts[0] == "surname") g.surnames[name] = gender;
    else if (parts[0] == "title") g.titles[name] = gender;
    else throw SchemaError(path + ":" + std::to_string(line_no), "unknown kind " + parts[0]);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Built-in POS tagging

namespace {

const std::unordered_map<std::string, PosTag> &closed_class() {
  static const std::unordered_map<std::string, PosTag> m = [] {
    std::unordered_map<std::string, PosTag> m;
    for (const char *w : {"the", "a", "an", "this", "that", "these", "those", "every", "each",
                          "some", "any", "all", "both", "another", "no"}) {
      m.emplace(w, PosTag::kDet);
    }
    for (const char *w : {"i", "me", "my", "mine", "myself", "we", "us", "our", "ours",
                          "ourselves", "you", "your", "yours", "yourself", "he", "him", "his",
                          "himself", "she", "her", "hers", "herself", "it", "its", "itself",
                          "they", "them", "their", "theirs", "themselves", "who", "whom",
                          "whose", "which", "what"}) {
      m.emplace(w, PosTag::kPron);
    }
    for (const char *w : {"of", "in", "on", "at", "by", "for", "with", "about", "against",
                          "from", "to", "into", "onto", "over", "after", "before", "under",
                          "between", "during", "without", "through", "than", "as", "upon",
                          "within", "across", "behind", "toward", "towards", "amid", "among",
                          "since", "until", "via", "per", "despite"}) {
      m.emplace(w, PosTag::kAdp);
    }
    for (const char *w : {"and", "or", "but", "nor", "yet", "so"}) m.emplace(w, PosTag::kConj);
    for (const char *w : {"is", "are", "was", "were", "be", "been", "being", "am", "has",
                          "have", "had", "do", "does", "did", "will", "would", "shall", "can",
                          "could", "should", "may", "might", "must", "said", "says", "say",
                          "told", "tells", "met", "spoke", "replied", "called", "left",
                          "returned", "went", "came", "made", "took", "gave", "got", "won",
                          "lost", "praised", "praise", "blamed", "blame", "slammed", "warned",
                          "urged", "accused", "attacked", "defended", "signed", "vowed"}) {
      m.emplace(w, PosTag::kVerb);
    }
    for (const char *w : {"not", "never", "very", "also", "just", "only", "still", "even",
                          "again", "then", "there", "here", "now", "too", "however", "when",
                          "while", "if", "because", "although", "though", "whether"}) {
      m.emplace(w, PosTag::kOther);
    }
    return m;
  }();
  return m;
}

const std::unordered_set<std::string> &common_nouns() {
  static const std::unordered_set<std::string> s = {
      "report",     "debt",      "ceiling",   "deal",       "bill",        "plan",
      "budget",     "law",       "vote",      "votes",      "administration", "government",
      "party",      "campaign",  "economy",   "crisis",     "agreement",   "negotiations",
      "talks",      "spending",  "default",   "limit",      "package",     "members",
      "leaders",    "leader",    "critics",   "official",   "officials",   "lawmakers",
      "country",    "nation",    "house",     "committee",  "spokesman",   "spokeswoman",
      "statement",  "proposal",  "meeting",   "measure",    "compromise",  "standoff",
      "allies",     "opponents", "supporters", "voters",    "president",   "senator",
      "speaker",    "people",    "week",      "day",        "year",        "time",
      "deadline",   "markets",   "investors", "economists", "analysts",    "cuts",
      "taxes",      "tax",       "reform",    "policy",     "border",      "wall",
      "shutdown",   "funding",   "money",     "side",       "sides",       "demands",
      "press",      "conference", "interview", "remarks",   "speech",      "move",
      "reporters",  "aides",     "colleagues", "chamber",   "floor",       "majority",
      "minority",   "democrats", "republicans", "trillion", "billion",    "million"};
  return s;
}

const std::unordered_set<std::string> &common_adjectives() {
  static const std::unordered_set<std::string> s = {
      "new",   "old",    "former",  "top",     "senior", "key",    "major",  "big",
      "political", "federal", "national", "economic", "public", "tough", "good", "bad",
      "strong", "weak",  "great",   "last",    "first",  "next",   "other",  "several",
      "many",  "few",    "late",    "early",   "long",   "short",  "high",   "low",
      "fierce", "harsh", "bipartisan", "partisan", "republican", "democratic", "white"};
  return s;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() + 2 && s.substr(s.size() - suffix.size()) == suffix;
}

PosTag open_class(const std::string &lw) {
  if (common_nouns().count(lw)) return PosTag::kNoun;
  if (common_adjectives().count(lw)) return PosTag::kAdj;
  for (std::string_view suf : {"ous", "ful", "ive", "able", "ible", "less", "ical"}) {
    if (ends_with(lw, suf)) return PosTag::kAdj;
  }
  for (std::string_view suf : {"tion", "sion", "ment", "ness", "ity", "ship", "ism", "ist",
                               "ance", "ence"}) {
    if (ends_with(lw, suf)) return PosTag::kNoun;
  }
  for (std::string_view suf : {"ed", "ing"}) {
    if (ends_with(lw, suf)) return PosTag::kVerb;
  }
  return PosTag::kOther;
}

std::string strip_period(std::string_view s) {
  std::string lw = text::to_lower(s);
  if (!lw.empty() && lw.back() == '.') lw.pop_back();
  return lw;
}

bool is_quote(std::string_view s) {
  return s == "\"" || s == "'" || s == "\xE2\x80\x9C" || s == "\xE2\x80\x98" || s == "(";
}

// First word position of each sentence, allowing leading quotes.
std::vector<bool> sentence_initial_flags(const Article &article) {
  const auto &tokens = article.tokens();
  std::vector<bool> initial(tokens.size(), false);
  int current = -1;
  bool need_word = false;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].sentence_idx != current) {
      current = tokens[i].sentence_idx;
      need_word = true;
    }
    if (!need_word) continue;
    if (text::has_alnum(tokens[i].surface)) {
      initial[i] = true;
      need_word = false;
    } else if (!is_quote(tokens[i].surface)) {
      need_word = false;
    }
  }
  return initial;
}

// Headline-style sentences: most open-class words capitalized. Only the
// title line qualifies; body sentences dense with names are not headlines.
std::vector<bool> title_case_sentences(const Article &article) {
  std::vector<int> words(article.sentences().size(), 0);
  std::vector<int> caps(article.sentences().size(), 0);
  for (const Token &t : article.tokens()) {
    if (t.char_start >= article.lead_start()) break;
    if (!text::has_alnum(t.surface) || std::isdigit(static_cast<unsigned char>(t.surface[0]))) {
      continue;
    }
    if (closed_class().count(text::to_lower(t.surface))) continue;
    ++words[t.sentence_idx];
    if (text::is_capitalized(t.surface)) ++caps[t.sentence_idx];
  }
  std::vector<bool> out(words.size());
  for (size_t s = 0; s < words.size(); ++s) {
    out[s] = words[s] >= 3 && caps[s] * 10 >= words[s] * 6;
  }
  return out;
}

}  // namespace

std::vector<PosTag> BuiltinAnnotator::tag(const Article &article) const {
  const auto &tokens = article.tokens();
  std::vector<bool> initial = sentence_initial_flags(article);
  std::vector<bool> title_case = title_case_sentences(article);

  std::unordered_set<std::string> capitalized_elsewhere;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (!initial[i] && !title_case[tokens[i].sentence_idx] &&
        text::is_capitalized(tokens[i].surface)) {
      capitalized_elsewhere.insert(tokens[i].surface);
    }
  }
  auto known_name = [&](const std::string &surface) {
    std::string lw = strip_period(surface);
    return gazetteer_.first_names.count(lw) || gazetteer_.surnames.count(lw) ||
           gazetteer_.titles.count(lw) || capitalized_elsewhere.count(surface);
  };

  std::vector<PosTag> tags(tokens.size(), PosTag::kOther);
  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string &surface = tokens[i].surface;
    if (!text::has_alnum(surface)) {
      tags[i] = PosTag::kPunct;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(surface[0]))) {
      tags[i] = PosTag::kNum;
      continue;
    }
    std::string lw = text::to_lower(surface);
    auto closed = closed_class().find(lw);
    if (!text::is_capitalized(surface)) {
      tags[i] = closed != closed_class().end() ? closed->second : open_class(lw);
      continue;
    }
    bool strict = initial[i] || title_case[tokens[i].sentence_idx];
    if (!strict) {
      tags[i] = lw == "i" ? PosTag::kPron : PosTag::kPropn;
    } else if (closed != closed_class().end()) {
      tags[i] = closed->second;
    } else if (known_name(surface)) {
      tags[i] = PosTag::kPropn;
    } else if (initial[i] && !title_case[tokens[i].sentence_idx] && i + 1 < tokens.size() &&
               tokens[i + 1].sentence_idx == tokens[i].sentence_idx &&
               text::is_capitalized(tokens[i + 1].surface) &&
               !closed_class().count(text::to_lower(tokens[i + 1].surface))) {
      tags[i] = PosTag::kPropn;
    } else {
      PosTag t = open_class(lw);
      tags[i] = t == PosTag::kOther ? PosTag::kNoun : t;
    }
  }
  return tags;
}

// ---------------------------------------------------------------------------
// Built-in person detection and within-document coreference

namespace {

Gender pronoun_gender(const std::string &lw) {
  if (lw == "he" || lw == "him" || lw == "his" || lw == "himself") return Gender::kMale;
  if (lw == "she" || lw == "her" || lw == "hers" || lw == "herself") return Gender::kFemale;
  return Gender::kUnknown;
}

bool is_personal_pronoun(const std::string &lw) {
  return pronoun_gender(lw) != Gender::kUnknown;
}

bool compatible(Gender a, Gender b) {
  return a == Gender::kUnknown || b == Gender::kUnknown || a == b;
}

Mention make_mention(const Article &article, int tok_start, int tok_end, NerType type) {
  const auto &tokens = article.tokens();
  Mention m;
  m.article_id = article.id();
  m.char_start = tokens[tok_start].char_start;
  m.char_end = tokens[tok_end - 1].char_end;
  m.sentence_idx = tokens[tok_start].sentence_idx;
  m.surface = std::string(article.span(m.char_start, m.char_end));
  m.head = tokens[tok_end - 1].surface;
  m.ner_type = type;
  m.token_start = tok_start;
  m.token_end = tok_end;
  return m;
}

}  // namespace

ArticleAnnotation BuiltinAnnotator::annotate(const Article &article) const {
  ArticleAnnotation out;
  out.article_id = article.id();
  out.pos = tag(article);
  const auto &tokens = article.tokens();
  const auto &pos = out.pos;

  auto is_title = [&](size_t i) { return gazetteer_.titles.count(strip_period(tokens[i].surface)) > 0; };

  struct Run {
    int start;
    int end;
    bool person;
  };
  std::vector<Run> runs;
  for (size_t i = 0; i < tokens.size();) {
    if (pos[i] != PosTag::kPropn) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < tokens.size() && pos[j] == PosTag::kPropn &&
           tokens[j].sentence_idx == tokens[i].sentence_idx) {
      ++j;
    }
    bool title_then_name = false;
    bool gazetteer_hit = false;
    bool all_titles = true;
    for (size_t k = i; k < j; ++k) {
      std::string lw = strip_period(tokens[k].surface);
      bool title = is_title(k);
      all_titles = all_titles && title;
      if (title && k + 1 < j && !is_title(k + 1)) title_then_name = true;
      if (!title && (gazetteer_.first_names.count(lw) || gazetteer_.surnames.count(lw))) {
        gazetteer_hit = true;
      }
    }
    runs.push_back({static_cast<int>(i), static_cast<int>(j),
                    !all_titles && (title_then_name || gazetteer_hit)});
    i = j;
  }
  // Runs ending in the head of a known person are persons too.
  std::set<std::string> person_heads;
  for (const Run &r : runs) {
    if (r.person) person_heads.insert(tokens[r.end - 1].surface);
  }
  for (Run &r : runs) {
    if (!r.person && !is_title(r.end - 1) && person_heads.count(tokens[r.end - 1].surface)) {
      r.person = true;
    }
  }

  auto gender_of_run = [&](const Run &r) {
    for (int k = r.start; k < r.end; ++k) {
      std::string lw = strip_period(tokens[k].surface);
      if (auto it = gazetteer_.titles.find(lw); it != gazetteer_.titles.end() &&
                                                it->second != Gender::kUnknown) {
        return it->second;
      }
      if (auto it = gazetteer_.first_names.find(lw); it != gazetteer_.first_names.end()) {
        return it->second;
      }
    }
    auto it = gazetteer_.surnames.find(strip_period(tokens[r.end - 1].surface));
    return it != gazetteer_.surnames.end() ? it->second : Gender::kUnknown;
  };

  // Walk the article in token order, building chains.
  struct ChainState {
    std::vector<Mention> mentions;
    std::set<std::string> heads;
    Gender gender = Gender::kUnknown;
  };
  std::vector<ChainState> chains;
  std::vector<int> recent;  // chain index per named mention, in text order
  size_t next_run = 0;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (next_run < runs.size() && runs[next_run].start == static_cast<int>(i)) {
      const Run &r = runs[next_run++];
      if (r.person) {
        Mention m = make_mention(article, r.start, r.end, NerType::kPerson);
        Gender g = gender_of_run(r);
        int chain = -1;
        for (size_t c = 0; c < chains.size(); ++c) {
          if (chains[c].heads.count(m.head) && compatible(chains[c].gender, g)) {
            chain = static_cast<int>(c);
            break;
          }
        }
        if (chain < 0) {
          chains.emplace_back();
          chain = static_cast<int>(chains.size()) - 1;
        }
        ChainState &cs = chains[chain];
        cs.heads.insert(m.head);
        if (cs.gender == Gender::kUnknown) cs.gender = g;
        cs.mentions.push_back(std::move(m));
        recent.push_back(chain);
      }
      i = r.end - 1;
      continue;
    }
    std::string lw = text::to_lower(tokens[i].surface);
    if (pos[i] != PosTag::kPron || !is_personal_pronoun(lw)) continue;
    Gender g = pronoun_gender(lw);
    for (auto it = recent.rbegin(); it != recent.rend(); ++it) {
      ChainState &cs = chains[*it];
      if (!compatible(cs.gender, g)) continue;
      Mention m = make_mention(article, static_cast<int>(i), static_cast<int>(i) + 1,
                               NerType::kPerson);
      cs.mentions.push_back(std::move(m));
      if (cs.gender == Gender::kUnknown) cs.gender = g;
      break;
    }
  }

  for (size_t c = 0; c < chains.size(); ++c) {
    MentionChain chain;
    chain.chain_id = article.id() + "#c" + std::to_string(c);
    chain.source = ChainSource::kInDocCoref;
    chain.mentions = std::move(chains[c].mentions);
    const Mention *best = nullptr;
    for (const Mention &m : chain.mentions) {
      if (pos[m.token_start] == PosTag::kPron) continue;
      if (!best || m.token_end - m.token_start > best->token_end - best->token_start) best = &m;
    }
    chain.representative = best ? best->surface : chain.mentions.front().surface;
    for (const Mention &m : chain.mentions) out.mentions.push_back(m);
    out.chains.push_back(std::move(chain));
  }
  std::sort(out.mentions.begin(), out.mentions.end(),
            [](const Mention &a, const Mention &b) { return a.char_start < b.char_start; });
  return out;
}

// ---------------------------------------------------------------------------
// Validation and NP singletons

ArticleAnnotation annotate_article(const Article &article, const AnnotationProvider &provider) {
  ArticleAnnotation raw;
  try {
    raw = provider.annotate(article);
  } catch (const AnnotationError &) {
    throw;
  } catch (const std::exception &e) {
    throw AnnotationError(article.id(), provider.name() + " failed: " + e.what());
  }

  const auto &tokens = article.tokens();
  if (!raw.pos.empty() && raw.pos.size() != tokens.size()) {
    throw AnnotationError(article.id(), "POS tag count does not match token count");
  }
  auto fix_mention = [&](Mention &m) {
    if (m.char_start < 0 || m.char_end <= m.char_start ||
        m.char_end > static_cast<int>(article.text().size())) {
      throw AnnotationError(article.id(), "mention span out of range");
    }
    int ts = article.token_index_at(m.char_start);
    int te = article.token_index_at(m.char_end);
    if (ts >= static_cast<int>(tokens.size()) || tokens[ts].char_start != m.char_start ||
        te == ts || tokens[te - 1].char_end != m.char_end) {
      throw AnnotationError(article.id(), "mention [" + std::to_string(m.char_start) + "," +
                                              std::to_string(m.char_end) +
                                              ") does not align with token boundaries");
    }
    if (m.surface.empty()) m.surface = std::string(article.span(m.char_start, m.char_end));
    if (m.surface != article.span(m.char_start, m.char_end)) {
      throw AnnotationError(article.id(), "mention surface '" + m.surface +
                                              "' does not match covered text");
    }
    if (m.head.empty()) m.head = tokens[te - 1].surface;
    m.article_id = article.id();
    m.token_start = ts;
    m.token_end = te;
    m.sentence_idx = tokens[ts].sentence_idx;
  };

  ArticleAnnotation out;
  out.article_id = article.id();
  out.pos = std::move(raw.pos);
  std::set<MentionKey> person_keys;
  for (Mention &m : raw.mentions) {
    fix_mention(m);
    if (m.ner_type != NerType::kPerson) continue;
    if (person_keys.insert(key_of(m)).second) out.mentions.push_back(m);
  }
  for (MentionChain &chain : raw.chains) {
    if (chain.mentions.empty()) throw AnnotationError(article.id(), "empty chain " + chain.chain_id);
    for (Mention &m : chain.mentions) fix_mention(m);
    if (chain.ner_type() != NerType::kPerson) continue;
    std::erase_if(chain.mentions, [](const Mention &m) { return m.ner_type != NerType::kPerson; });
    for (const Mention &m : chain.mentions) {
      if (!person_keys.count(key_of(m))) {
        throw AnnotationError(article.id(), "chain " + chain.chain_id +
                                                " references an unreported mention");
      }
    }
    if (chain.representative.empty()) {
      throw AnnotationError(article.id(), "chain " + chain.chain_id + " has no representative");
    }
    out.chains.push_back(std::move(chain));
  }
  std::sort(out.mentions.begin(), out.mentions.end(),
            [](const Mention &a, const Mention &b) { return a.char_start < b.char_start; });
  return out;
}

std::vector<MentionChain> extract_np_singletons(const Article &article,
                                                const ArticleAnnotation &annotation) {
  const auto &tokens = article.tokens();
  const auto &pos = annotation.pos;
  if (pos.size() != tokens.size()) {
    throw AnnotationError(article.id(), "NP extraction requires POS tags");
  }
  const Gazetteer &gaz = Gazetteer::builtin();

  auto nominal = [&](size_t i) {
    return pos[i] == PosTag::kAdj || pos[i] == PosTag::kNoun || pos[i] == PosTag::kPropn ||
           pos[i] == PosTag::kNum;
  };
  auto same_sentence = [&](size_t a, size_t b) {
    return tokens[a].sentence_idx == tokens[b].sentence_idx;
  };
  auto inside_person = [&](size_t tok) {
    for (const Mention &m : annotation.mentions) {
      if (m.token_start <= static_cast<int>(tok) && static_cast<int>(tok) < m.token_end) return true;
    }
    return false;
  };

  std::vector<MentionChain> out;
  size_t i = 0;
  while (i < tokens.size()) {
    size_t start = i;
    size_t j = i;
    if (pos[j] == PosTag::kDet) ++j;
    size_t nominal_start = j;
    while (j < tokens.size() && same_sentence(start, j) && nominal(j)) ++j;
    if (j == nominal_start) {
      i = start + 1;
      continue;
    }
    size_t head = j - 1;
    // "X of (the) Y Z" attaches when both X and the object are proper nouns.
    if (pos[head] == PosTag::kPropn && j + 1 < tokens.size() && same_sentence(start, j + 1) &&
        text::to_lower(tokens[j].surface) == "of") {
      size_t k = j + 1;
      if (k < tokens.size() && pos[k] == PosTag::kDet) ++k;
      size_t obj = k;
      while (k < tokens.size() && same_sentence(start, k) && pos[k] == PosTag::kPropn) ++k;
      if (k > obj) j = k;
    }
    bool person_head = inside_person(head) ||
                       gaz.titles.count(strip_period(tokens[head].surface)) > 0;
    if (pos[head] == PosTag::kPropn || person_head) {
      Mention m = make_mention(article, static_cast<int>(start), static_cast<int>(j),
                               person_head ? NerType::kPerson : NerType::kOther);
      m.head = tokens[head].surface;
      MentionChain chain;
      chain.chain_id = article.id() + "#np" + std::to_string(out.size());
      chain.representative = m.surface;
      chain.source = ChainSource::kNpSingleton;
      chain.mentions.push_back(std::move(m));
      out.push_back(std::move(chain));
    }
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Remote provider

RemoteAnnotator::RemoteAnnotator(std::string endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {}

ArticleAnnotation RemoteAnnotator::decode(const Article &article, const nlohmann::json &reply) {
  ArticleAnnotation out;
  out.article_id = article.id();
  try {
    if (auto it = reply.find("pos"); it != reply.end()) {
      for (const auto &t : *it) out.pos.push_back(parse_pos(t.get<std::string>()));
    }
    std::vector<Mention> mentions;
    for (const auto &jm : reply.at("mentions")) {
      Mention m;
      m.article_id = article.id();
      m.char_start = jm.at("char_start").get<int>();
      m.char_end = jm.at("char_end").get<int>();
      if (m.char_start < 0 || m.char_end > static_cast<int>(article.text().size()) ||
          m.char_end <= m.char_start) {
        throw AnnotationError(article.id(), "remote mention span out of range");
      }
      m.surface = std::string(article.span(m.char_start, m.char_end));
      m.head = jm.value("head", std::string());
      m.ner_type = parse_ner_type(jm.value("ner_type", std::string("person")));
      mentions.push_back(std::move(m));
    }
    if (auto it = reply.find("chains"); it != reply.end()) {
      int idx = 0;
      for (const auto &jc : *it) {
        MentionChain chain;
        chain.chain_id = article.id() + "#r" + std::to_string(idx++);
        for (const auto &mi : jc.at("mentions")) {
          chain.mentions.push_back(mentions.at(mi.get<size_t>()));
        }
        chain.representative = jc.value("representative", std::string());
        if (chain.representative.empty() && !chain.mentions.empty()) {
          chain.representative = chain.mentions.front().surface;
        }
        out.chains.push_back(std::move(chain));
      }
    }
    out.mentions = std::move(mentions);
  } catch (const nlohmann::json::exception &e) {
    throw AnnotationError(article.id(), std::string("malformed remote annotation: ") + e.what());
  } catch (const std::out_of_range &e) {
    throw AnnotationError(article.id(), std::string("chain references unknown mention: ") + e.what());
  }
  return out;
}

ArticleAnnotation RemoteAnnotator::annotate(const Article &article) const {
  nlohmann::json request = {{"article",
                             {{"id", article.id()},
                              {"title", article.title()},
                              {"lead", article.lead()},
                              {"body", article.body()},
                              {"text", article.text()}}}};
  nlohmann::json reply = http::post_json(endpoint_, "/annotate", request, timeout_);
  return decode(article, reply);
}

}  // namespace newsbias
