#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include "newsbias/service.h"
#include "test_util.h"

namespace newsbias {
namespace {

using testing::make_article;
using testing::TempDir;

// One analysis of the fixture shared by the read-only tests.
const TopicAnalysis &fixture_analysis() {
  static const TopicAnalysis a = [] {
    EngineConfig config;
    Providers providers = Providers::from_config(config);
    return analyze_topic(testing::fixture_topic(), config, providers, "2026-01-01T00:00:00Z");
  }();
  return a;
}

ConjointProfile profile(OverviewVariant v, HighlightMode h = HighlightMode::kThreeColor,
                        std::set<TagType> tags = {}) {
  ProfileConstraints c;
  c.topic_id = "debt-ceiling";
  c.overview_variant = v;
  c.highlight_mode = h;
  c.headline_tags = tags;
  c.show_context_bar = true;
  return randomize_profile(1, c);
}

// --- config -----------------------------------------------------------------

TEST(Config, ParseAndHash) {
  EngineConfig def;
  EngineConfig same = EngineConfig::parse("# defaults only\n\n");
  EXPECT_EQ(def.hash(), same.hash());
  EXPECT_EQ(def.hash().size(), 16u);

  EngineConfig c = EngineConfig::parse(
      "cdcr.tau2 = 0.9   # stricter\n"
      "cdcr.sieves = 1, 3,5\n"
      "cdcr.aliases = Joe Biden : Sleepy Joe, Alexandria Ocasio-Cortez : AOC\n"
      "weight.end = 0.25\n"
      "grouping.mfa_tau = 0.2\n"
      "service.port = 9000\n"
      "service.data_dir = /tmp/x\n");
  EXPECT_EQ(c.sieves.mention_set_threshold, 0.9);
  EXPECT_FALSE(c.sieves.mention_set_similarity);
  EXPECT_TRUE(c.sieves.substring_compound_match);
  ASSERT_EQ(c.sieves.aliases.size(), 2u);
  EXPECT_EQ(c.sieves.aliases[1].second, "AOC");
  EXPECT_EQ(c.weight.w_end, 0.25);
  EXPECT_EQ(c.port, 9000);
  EXPECT_NE(c.hash(), def.hash());
  EXPECT_EQ(EngineConfig::parse(c.engine_text()).hash(), c.hash());

  // Service keys do not change the engine hash.
  EXPECT_EQ(EngineConfig::parse("service.port = 1\nthreads = 8\n").hash(), def.hash());
}

TEST(Config, Errors) {
  EXPECT_THROW(EngineConfig::parse("nonsense = 1"), Error);
  EXPECT_THROW(EngineConfig::parse("cdcr.tau2"), Error);
  EXPECT_THROW(EngineConfig::parse("cdcr.tau2 = high"), Error);
  EXPECT_THROW(EngineConfig::parse("cdcr.sieves = 7"), Error);
  EXPECT_THROW(EngineConfig::parse("cdcr.tau2 = 1.5").validate(), Error);
  EXPECT_THROW(EngineConfig::parse("annotator = remote").validate(), Error);
  EXPECT_THROW(EngineConfig::parse("weight.start = 0.4").validate(), Error);
  EXPECT_THROW(EngineConfig::load("/nonexistent/newsbias.conf"), Error);
}

TEST(Config, EnvironmentOverrides) {
  EngineConfig c = EngineConfig::parse("service.port = 9000\nservice.data_dir = a\n");
  setenv("NEWSBIAS_PORT", "9123", 1);
  setenv("NEWSBIAS_DATA_DIR", "/srv/newsbias", 1);
  c.apply_environment();
  unsetenv("NEWSBIAS_PORT");
  unsetenv("NEWSBIAS_DATA_DIR");
  EXPECT_EQ(c.port, 9123);
  EXPECT_EQ(c.data_dir, "/srv/newsbias");
}

// --- analysis ---------------------------------------------------------------

TEST(Analysis, FixtureHasThreeGroupsPerMethod) {
  const TopicAnalysis &a = fixture_analysis();
  EXPECT_EQ(a.relevance.size(), 10u);
  EXPECT_FALSE(a.has_flag(kFlagNoMfa));
  for (GroupingMethod m : {GroupingMethod::kMfa, GroupingMethod::kAll, GroupingMethod::kPolSides}) {
    ASSERT_TRUE(a.groupings.count(m)) << to_string(m);
    EXPECT_EQ(a.groupings.at(m).groups.size(), 3u);
  }
  // Spot checks against the per-module results: the most mentioned person
  // and the orientation partition.
  ASSERT_TRUE(a.mfa_index());
  EXPECT_EQ(a.person_index.names[*a.mfa_index()], "President Trump");
  const auto &pol = a.groupings.at(GroupingMethod::kPolSides).groups;
  EXPECT_EQ(pol[0].members, (std::vector<std::string>{"a1", "a2", "a3"}));
  EXPECT_EQ(pol[2].members, (std::vector<std::string>{"a7", "a8", "a9"}));
  EXPECT_NO_THROW(a.check_consistency());
}

TEST(Analysis, SingleArticleTopic) {
  Topic t{"one", "e", {make_article("a1", "President Trump praised the deal.")}};
  EngineConfig config;
  TopicAnalysis a = analyze_topic(t, config, Providers::from_config(config));
  const BiasGrouping &mfa = a.groupings.at(GroupingMethod::kMfa);
  int non_empty = 0;
  for (const Group &g : mfa.groups) non_empty += !g.members.empty();
  EXPECT_EQ(non_empty, 1);
  EXPECT_EQ(mfa.groups[0].members, (std::vector<std::string>{"a1"}));
  EXPECT_NEAR(a.relevance.at("a1"), 1.0, 1e-12);
}

Topic person_free_topic() {
  return Topic{"quiet",
               "e",
               {make_article("a1", "The weather was mild all week.", "Mild week", "", Orientation::kLeft),
                make_article("a2", "Rain is expected on Sunday.", "Rain ahead", "", Orientation::kRight)}};
}

TEST(Analysis, PersonFreeTopicIsFlagged) {
  EngineConfig config;
  TopicAnalysis a = analyze_topic(person_free_topic(), config, Providers::from_config(config));
  EXPECT_TRUE(a.has_flag(kFlagNoMfa));
  EXPECT_FALSE(a.groupings.count(GroupingMethod::kMfa));
  EXPECT_FALSE(a.groupings.count(GroupingMethod::kAll));
  ASSERT_TRUE(a.groupings.count(GroupingMethod::kPolSides));
  EXPECT_FALSE(a.mfa_index());
  nlohmann::json doc = to_json(a);
  EXPECT_EQ(doc["flags"], nlohmann::json::array({"no-MFA"}));
  EXPECT_TRUE(doc["groupings"]["MFA"].is_null());
  EXPECT_EQ(to_json(analysis_from_json(doc)), doc);
}

TEST(Analysis, ExportImportIsBitIdentical) {
  const TopicAnalysis &a = fixture_analysis();
  std::string first = to_json(a).dump(2);
  TopicAnalysis back = analysis_from_json(nlohmann::json::parse(first));
  EXPECT_EQ(to_json(back).dump(2), first);
  EXPECT_EQ(back.labels, a.labels);
  EXPECT_EQ(back.vectors, a.vectors);
  EXPECT_EQ(back.groupings, a.groupings);
  EXPECT_EQ(back.concepts, a.concepts);
}

TEST(Analysis, InconsistentImportIsRejected) {
  nlohmann::json doc = to_json(fixture_analysis());
  doc["groupings"]["PolSides"]["groups"][0]["members"].push_back("a404");
  EXPECT_THROW(analysis_from_json(doc), SchemaError);
  doc = to_json(fixture_analysis());
  doc["schema_version"] = 99;
  EXPECT_THROW(analysis_from_json(doc), SchemaError);
}

class BrokenAnnotator : public AnnotationProvider {
 public:
  std::string name() const override { return "broken"; }
  Capabilities capabilities() const override { return {true, true, true}; }
  ArticleAnnotation annotate(const Article &article) const override {
    if (article.id() == "a4") throw std::runtime_error("model crashed");
    return inner_.annotate(article);
  }

 private:
  BuiltinAnnotator inner_;
};

TEST(Service, PipelineFailureNamesStageAndPersistsNothing) {
  TempDir dir;
  EngineConfig config;
  config.data_dir = dir.path();
  Providers providers = Providers::from_config(config);
  providers.annotator = std::make_unique<BrokenAnnotator>();
  Service service(config, std::move(providers));
  try {
    service.analyze(testing::fixture_topic());
    FAIL() << "expected PipelineError";
  } catch (const PipelineError &e) {
    EXPECT_EQ(e.stage(), "annotate");
    EXPECT_EQ(e.article_id(), "a4");
  }
  EXPECT_THROW(service.analysis("debt-ceiling"), NotFoundError);
  auto analyses = dir.path() / "analyses";
  EXPECT_TRUE(!std::filesystem::exists(analyses) || std::filesystem::is_empty(analyses));
}

TEST(Service, PersistsAndReloads) {
  TempDir dir;
  EngineConfig config;
  config.data_dir = dir.path();
  std::string exported;
  {
    Service service(config);
    auto a = service.analyze(testing::fixture_topic());
    EXPECT_EQ(a->engine_config_hash, config.hash());
    exported = service.export_topic("debt-ceiling").dump();
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "analyses" /
                                        ("debt-ceiling__" + config.hash() + ".json")));
  }
  Service again(config);
  EXPECT_EQ(again.export_topic("debt-ceiling").dump(), exported);
  nlohmann::json topics = again.list_topics();
  ASSERT_EQ(topics.size(), 1u);
  EXPECT_EQ(topics[0]["topic_id"], "debt-ceiling");
  EXPECT_EQ(topics[0]["analyzed"], true);
  EXPECT_THROW(again.export_topic("nope"), NotFoundError);

  // Import into a fresh data dir and re-export.
  TempDir other;
  EngineConfig config2 = config;
  config2.data_dir = other.path();
  Service fresh(config2);
  fresh.import_topic(nlohmann::json::parse(exported));
  EXPECT_EQ(fresh.export_topic("debt-ceiling").dump(), exported);
}

TEST(Service, AnalyzeStoredTopic) {
  TempDir dir;
  EngineConfig config;
  config.data_dir = dir.path();
  std::filesystem::create_directories(dir.path() / "topics");
  std::filesystem::copy_file(testing::fixture("debt_ceiling_topic.json"),
                             dir.path() / "topics" / "debt-ceiling.json");
  Service service(config);
  EXPECT_EQ(service.list_topics()[0]["analyzed"], false);
  EXPECT_EQ(service.analyze_stored("debt-ceiling")->topic.articles.size(), 10u);
  EXPECT_THROW(service.analyze_stored("missing"), NotFoundError);
  EXPECT_THROW(service.analyze_stored("../etc"), NotFoundError);
}

// --- overview ---------------------------------------------------------------

std::vector<std::string> ids(const nlohmann::json &items) {
  std::vector<std::string> out;
  for (const auto &i : items) out.push_back(i["article_id"]);
  return out;
}

std::multiset<std::string> showcased_and_further(const nlohmann::json &ov) {
  std::multiset<std::string> out;
  if (!ov["main_article"].is_null()) out.insert(ov["main_article"]["article_id"].get<std::string>());
  for (const auto &g : ov["groups"]) {
    if (!g["representative"].is_null()) out.insert(g["representative"]["article_id"].get<std::string>());
  }
  for (const auto &f : ov["further_articles"]) out.insert(f["article_id"].get<std::string>());
  return out;
}

std::multiset<std::string> all_ids() {
  std::multiset<std::string> out;
  for (const Article &a : fixture_analysis().topic.articles) out.insert(a.id());
  return out;
}

TEST(Overview, PlainIsOneRelevanceSortedList) {
  RandomGroupingCache cache;
  nlohmann::json ov = get_overview(fixture_analysis(), profile(OverviewVariant::kPlain), cache);
  EXPECT_TRUE(ov["groups"].empty());
  EXPECT_TRUE(ov["main_article"].is_null());
  ASSERT_EQ(ov["further_articles"].size(), 10u);
  double prev = 2.0;
  for (const auto &item : ov["further_articles"]) {
    EXPECT_LE(item["relevance"].get<double>(), prev);
    prev = item["relevance"];
    EXPECT_TRUE(item.contains("excerpt"));
  }
}

TEST(Overview, PolSidesLabels) {
  RandomGroupingCache cache;
  nlohmann::json ov = get_overview(fixture_analysis(), profile(OverviewVariant::kPolSides), cache);
  ASSERT_EQ(ov["groups"].size(), 3u);
  EXPECT_EQ(ov["groups"][0]["label"], "left");
  EXPECT_EQ(ov["groups"][1]["label"], "center");
  EXPECT_EQ(ov["groups"][2]["label"], "right");
  EXPECT_EQ(ov["explanation_mode"], "specific");
  EXPECT_EQ(ov["grouping_method"], "PolSides");
}

TEST(Overview, GenericLabels) {
  RandomGroupingCache cache;
  nlohmann::json ov = get_overview(fixture_analysis(), profile(OverviewVariant::kMfaGeneric,
                                                               HighlightMode::kDisabled,
                                                               {TagType::kMfap}),
                                   cache);
  ASSERT_EQ(ov["groups"].size(), 3u);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(ov["groups"][i]["label"], "Perspective " + std::to_string(i + 1));
    EXPECT_EQ(ov["groups"][i]["explanation_text"].get<std::string>().find("Trump"),
              std::string::npos);
  }
  EXPECT_EQ(ov["explanation_mode"], "generic");
  // Tags keep the grouping's own labels.
  EXPECT_EQ(ov["main_article"]["tags"][0]["type"], "mfap");
}

TEST(Overview, SpecificMfaNamesThePerson) {
  RandomGroupingCache cache;
  nlohmann::json ov = get_overview(fixture_analysis(), profile(OverviewVariant::kMfa), cache);
  EXPECT_EQ(ov["groups"][0]["label"], "pro-President Trump");
  EXPECT_NE(ov["explanation"].get<std::string>().find("President Trump"), std::string::npos);
}

TEST(Overview, MainArticleIsMostRelevantAndNotRepeated) {
  RandomGroupingCache cache;
  const TopicAnalysis &a = fixture_analysis();
  std::string best;
  for (const auto &[id, r] : a.relevance) {
    if (best.empty() || r > a.relevance.at(best)) best = id;
  }
  for (OverviewVariant v : {OverviewVariant::kPolSides, OverviewVariant::kMfa,
                            OverviewVariant::kAllGeneric, OverviewVariant::kRandomGeneric}) {
    nlohmann::json ov = get_overview(a, profile(v), cache);
    EXPECT_EQ(ov["main_article"]["article_id"], best);
    for (const auto &g : ov["groups"]) {
      if (!g["representative"].is_null()) EXPECT_NE(g["representative"]["article_id"], best);
    }
  }
}

TEST(Overview, PartitionForEveryVariant) {
  RandomGroupingCache cache;
  for (int v = 1; v < kOverviewVariantCount; ++v) {
    nlohmann::json ov =
        get_overview(fixture_analysis(), profile(static_cast<OverviewVariant>(v)), cache);
    EXPECT_EQ(showcased_and_further(ov), all_ids()) << to_string(static_cast<OverviewVariant>(v));
    // Group member lists also partition the topic.
    if (!ov["groups"].empty()) {
      std::multiset<std::string> members;
      for (const auto &g : ov["groups"]) {
        for (const auto &m : g["members"]) members.insert(m["article_id"].get<std::string>());
      }
      EXPECT_EQ(members, all_ids());
    }
  }
}

TEST(Overview, VariantNoneAndWrongTopicAreErrors) {
  RandomGroupingCache cache;
  EXPECT_THROW(get_overview(fixture_analysis(), profile(OverviewVariant::kNone), cache), Error);
  ConjointProfile p = profile(OverviewVariant::kPlain);
  p.topic_id = "other";
  EXPECT_THROW(get_overview(fixture_analysis(), p, cache), SchemaError);
}

TEST(Overview, RandomGroupingIsCachedPerProfile) {
  RandomGroupingCache cache;
  ConjointProfile p = profile(OverviewVariant::kRandomGeneric);
  nlohmann::json first = get_overview(fixture_analysis(), p, cache);
  EXPECT_EQ(get_overview(fixture_analysis(), p, cache), first);
  EXPECT_EQ(cache.size(), 1u);
  ProfileConstraints c;
  c.topic_id = "debt-ceiling";
  c.overview_variant = OverviewVariant::kRandomGeneric;
  get_overview(fixture_analysis(), randomize_profile(2, c), cache);
  EXPECT_EQ(cache.size(), 2u);
}

TEST(Overview, PersonFreeTopicMfaUnavailable) {
  EngineConfig config;
  TopicAnalysis a = analyze_topic(person_free_topic(), config, Providers::from_config(config));
  RandomGroupingCache cache;
  ProfileConstraints c;
  c.topic_id = "quiet";
  c.overview_variant = OverviewVariant::kMfa;
  c.headline_tags = std::set<TagType>{TagType::kMfap, TagType::kPolSides};
  nlohmann::json ov = get_overview(a, randomize_profile(1, c), cache);
  EXPECT_EQ(ov["grouping_available"], false);
  EXPECT_TRUE(ov["groups"].empty());
  EXPECT_EQ(showcased_and_further(ov).size(), 2u);
  EXPECT_EQ(ov["main_article"]["tags"].size(), 1u);  // only the PolSides tag exists
}

// Every payload attribute reflects the requesting profile.
TEST(Overview, ProfileFidelityOverRandomProfiles) {
  RandomGroupingCache cache;
  ProfileConstraints c;
  c.topic_id = "debt-ceiling";
  const TopicAnalysis &a = fixture_analysis();
  for (uint64_t seed = 0; seed < 200; ++seed) {
    ConjointProfile p = randomize_profile(seed, c);
    if (p.overview_variant != OverviewVariant::kNone) {
      nlohmann::json ov = get_overview(a, p, cache);
      EXPECT_EQ(ov["profile_id"], p.profile_id);
      EXPECT_EQ(ov["overview_variant"], to_string(p.overview_variant));
      EXPECT_EQ(ov["explanation_mode"], to_string(*p.explanation_mode));
      std::set<std::string> want;
      for (TagType t : p.headline_tags) want.insert(std::string(to_string(t)));
      std::set<std::string> listed(ov["headline_tags"].begin(), ov["headline_tags"].end());
      EXPECT_EQ(listed, want);
      auto check_tags = [&](const nlohmann::json &item) {
        std::set<std::string> got;
        for (const auto &t : item["tags"]) got.insert(t["type"].get<std::string>());
        EXPECT_EQ(got, want) << item["article_id"];
      };
      if (!ov["main_article"].is_null()) check_tags(ov["main_article"]);
      for (const auto &f : ov["further_articles"]) check_tags(f);
      for (const auto &g : ov["groups"]) {
        if (p.explanation_mode == ExplanationMode::kGeneric) {
          EXPECT_EQ(g["label"].get<std::string>().rfind("Perspective ", 0), 0u);
        }
      }
      EXPECT_EQ(get_overview(a, p, cache), ov);  // immutability
    }
    nlohmann::json view = get_article_view(a, "a5", p);
    EXPECT_EQ(view["highlight_mode"], to_string(p.highlight_mode));
    EXPECT_EQ(view["context_bar"].is_null(), !p.show_context_bar);
    std::set<std::string> ind;
    for (const auto &t : view["bias_group_indicators"]) ind.insert(t["type"].get<std::string>());
    std::set<std::string> want_ind;
    for (TagType t : p.show_bias_group_indicators) want_ind.insert(std::string(to_string(t)));
    EXPECT_EQ(ind, want_ind);
    if (p.highlight_mode == HighlightMode::kDisabled) EXPECT_TRUE(view["highlights"].empty());
    EXPECT_EQ(get_article_view(a, "a5", p), view);
  }
}

// --- article view -----------------------------------------------------------

TEST(ArticleView, ToughReportIsRedInTwoColor) {
  Topic t{"mueller", "e",
          {make_article("m1", "The Mueller report was tough on Trump. Trump met aides.", "Report",
                        "", Orientation::kCenter)}};
  EngineConfig config;
  TopicAnalysis a = analyze_topic(t, config, Providers::from_config(config));
  ProfileConstraints c;
  c.topic_id = "mueller";
  c.highlight_mode = HighlightMode::kTwoColor;
  nlohmann::json view = get_article_view(a, "m1", randomize_profile(1, c));
  // Both persons of the first sentence are negative; the neutral second
  // "Trump" is not shown in two_color.
  const std::string text = view["text"];
  std::vector<std::string> shown;
  for (const auto &h : view["highlights"]) {
    int start = h["char_start"], end = h["char_end"];
    shown.push_back(text.substr(start, end - start));
    EXPECT_EQ(h["polarity"], "negative");
    EXPECT_EQ(h["color"], "red");
    EXPECT_LT(start, static_cast<int>(text.find("Trump met")));
  }
  EXPECT_EQ(shown, (std::vector<std::string>{"Mueller", "Trump"}));
}

TEST(ArticleView, ModeArithmeticOnFixture) {
  const TopicAnalysis &a = fixture_analysis();
  auto sheet = testing::polarity_sheet();
  for (const Article &art : a.topic.articles) {
    int pos = 0, neg = 0, neu = 0;
    for (const auto &row : sheet) {
      if (row.article_id != art.id()) continue;
      pos += row.polarity == "positive";
      neg += row.polarity == "negative";
      neu += row.polarity == "neutral";
    }
    auto count = [&](HighlightMode m) { return article_highlights(a, art.id(), m).size(); };
    // The fixture has no overlapping person mentions, so counts follow the sheet.
    EXPECT_EQ(count(HighlightMode::kDisabled), 0u);
    EXPECT_EQ(count(HighlightMode::kSingleColor), size_t(pos + neg)) << art.id();
    EXPECT_EQ(count(HighlightMode::kTwoColor), size_t(pos + neg));
    EXPECT_EQ(count(HighlightMode::kThreeColor), size_t(pos + neg + neu));
  }
}

TEST(ArticleView, ColorsPerMode) {
  const TopicAnalysis &a = fixture_analysis();
  std::map<std::string, std::string> three = {
      {"positive", "green"}, {"negative", "red"}, {"neutral", "gray"}};
  for (int m = 0; m < kHighlightModeCount; ++m) {
    ConjointProfile p = profile(OverviewVariant::kPlain, static_cast<HighlightMode>(m));
    for (const Article &art : a.topic.articles) {
      nlohmann::json view = get_article_view(a, art.id(), p);
      int prev_end = 0;
      for (const auto &h : view["highlights"]) {
        EXPECT_GE(h["char_start"].get<int>(), prev_end);
        prev_end = h["char_end"];
        if (p.highlight_mode == HighlightMode::kSingleColor) {
          EXPECT_EQ(h["color"], "gray");
          EXPECT_NE(h["polarity"], "neutral");
        } else {
          EXPECT_EQ(h["color"], three.at(h["polarity"]));
        }
      }
    }
  }
}

TEST(ArticleView, OverlapsResolvedLongestFirst) {
  TopicAnalysis a = fixture_analysis();
  // Plant a second person whose mention covers a stored mention and extends it.
  const PersonConcept &p0 = a.concepts[0];
  const auto &[aid, ms] = *p0.per_article_mentions.begin();
  const Mention inner = ms.front();
  const Article *art = a.topic.find(aid);
  Mention outer = inner;
  outer.char_end = art->tokens()[inner.token_end].char_end;
  outer.token_end = inner.token_end + 1;
  outer.surface = std::string(art->span(outer.char_start, outer.char_end));
  PersonConcept extra;
  extra.person_id = "p9";
  extra.canonical_name = "Planted";
  extra.chains = {{"x", {outer}, outer.surface, ChainSource::kNpSingleton}};
  extra.per_article_mentions[aid] = {outer};
  extra.mention_count = 1;
  a.concepts.push_back(extra);
  a.labels[key_of(outer)] = PolarityLabel::make(Polarity::kNeutral, 1.0);

  auto hs = article_highlights(a, aid, HighlightMode::kThreeColor);
  bool saw_outer = false;
  for (const Highlight &h : hs) {
    EXPECT_FALSE(h.char_start == inner.char_start && h.char_end == inner.char_end);
    saw_outer |= h.person_id == "p9";
  }
  EXPECT_TRUE(saw_outer);
  for (size_t i = 1; i < hs.size(); ++i) EXPECT_LE(hs[i - 1].char_end, hs[i].char_start);
}

TEST(ArticleView, ContextBarCoversEveryArticleOnce) {
  const TopicAnalysis &a = fixture_analysis();
  nlohmann::json view = get_article_view(a, "a3", profile(OverviewVariant::kPlain));
  ASSERT_EQ(view["context_bar"].size(), 10u);
  std::set<std::string> seen;
  int current = 0;
  for (const auto &e : view["context_bar"]) {
    seen.insert(e["article_id"].get<std::string>());
    current += e["is_current"].get<bool>();
    EXPECT_EQ(e["s_mfa"].get<double>(), a.vector_of(e["article_id"].get<std::string>())->scores[*a.mfa_index()]);
  }
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_EQ(current, 1);
  EXPECT_THROW(get_article_view(a, "a404", profile(OverviewVariant::kPlain)), NotFoundError);
}

TEST(Explanations, TemplatesRender) {
  const ExplanationTemplates &t = ExplanationTemplates::builtin();
  EXPECT_NE(t.render("specific.mfa.pro", {{"person", "X Y"}}).find("X Y"), std::string::npos);
  EXPECT_NE(t.render("generic.group", {{"n", "2"}}).find("2"), std::string::npos);
  EXPECT_THROW(t.render("specific.nothing"), Error);
}

}  // namespace
}  // namespace newsbias
