#include <gtest/gtest.h>
#include <httplib.h>

#include <fstream>
#include <sstream>
#include <thread>

#include "newsbias/service.h"
#include "test_util.h"

namespace newsbias {
namespace {

std::string fixture_body() {
  std::ifstream in(testing::fixture("debt_ceiling_topic.json"));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A Service plus HttpServer on a free local port.
class ApiTest : public ::testing::Test {
 protected:
  void SetUp() override { start(Providers::from_config(config())); }

  void TearDown() override { stop(); }

  EngineConfig config() const {
    EngineConfig c;
    c.data_dir = dir_.path();
    return c;
  }

  void start(Providers providers) {
    service_ = std::make_unique<Service>(config(), std::move(providers));
    server_ = std::make_unique<HttpServer>(*service_);
    port_ = server_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_->listen(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    for (int i = 0; i < 200 && !server_->running(); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }

  void stop() {
    if (!server_) return;
    server_->stop();
    thread_.join();
    server_.reset();
  }

  httplib::Result get(const std::string &path, const httplib::Params &params = {}) {
    return client_->Get(path, params, httplib::Headers{});
  }

  httplib::Result post(const std::string &path, const std::string &body) {
    return client_->Post(path, body, "application/json");
  }

  void analyze_fixture() {
    auto r = post("/topics/debt-ceiling/analyze", fixture_body());
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 201) << r->body;
  }

  static nlohmann::json json(const httplib::Result &r) { return nlohmann::json::parse(r->body); }

  static std::string profile_param(OverviewVariant v) {
    ProfileConstraints c;
    c.topic_id = "debt-ceiling";
    c.overview_variant = v;
    c.highlight_mode = HighlightMode::kThreeColor;
    return to_json(randomize_profile(4, c)).dump();
  }

  testing::TempDir dir_;
  std::unique_ptr<Service> service_;
  std::unique_ptr<HttpServer> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(ApiTest, TopicsListAndAnalyze) {
  auto r = get("/topics");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(json(r), nlohmann::json::array());

  r = post("/topics/debt-ceiling/analyze", fixture_body());
  ASSERT_EQ(r->status, 201);
  nlohmann::json summary = json(r);
  EXPECT_EQ(summary["topic_id"], "debt-ceiling");
  EXPECT_EQ(summary["engine_config_hash"], config().hash());
  EXPECT_EQ(summary["groupings"]["MFA"].size(), 3u);
  EXPECT_EQ(r->get_header_value("Content-Type"), "application/json");

  r = get("/topics");
  ASSERT_EQ(json(r).size(), 1u);
  EXPECT_EQ(json(r)[0]["article_count"], 10);
}

TEST_F(ApiTest, AnalyzeErrors) {
  auto r = post("/topics/other/analyze", fixture_body());
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json(r)["field"], "topic_id");

  r = post("/topics/debt-ceiling/analyze", "{not json");
  EXPECT_EQ(r->status, 400);

  nlohmann::json doc = nlohmann::json::parse(fixture_body());
  doc["articles"][2]["outlet_orientation"] = "sideways";
  r = post("/topics/debt-ceiling/analyze", doc.dump());
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json(r)["field"], "articles[2].outlet_orientation");

  r = post("/topics/debt-ceiling/analyze", "");
  EXPECT_EQ(r->status, 404);
}

class FailingClassifier : public SentimentClassifier {
 public:
  std::string name() const override { return "failing"; }
  ClassifierMode mode() const override { return ClassifierMode::kRemote; }
  PolarityLabel classify(std::string_view, int, int) const override {
    throw std::runtime_error("unreachable classifier");
  }
};

TEST_F(ApiTest, PipelineFailureIs422WithStage) {
  stop();
  Providers providers = Providers::from_config(config());
  providers.classifier = std::make_unique<FailingClassifier>();
  providers.fallback.reset();
  start(std::move(providers));
  auto r = post("/topics/debt-ceiling/analyze", fixture_body());
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 422);
  EXPECT_EQ(json(r)["stage"], "tsc");
  EXPECT_FALSE(json(r)["article_id"].get<std::string>().empty());
  EXPECT_EQ(get("/export/debt-ceiling")->status, 404);
}

TEST_F(ApiTest, Overview) {
  analyze_fixture();
  auto r = get("/topics/debt-ceiling/overview", {{"profile", profile_param(OverviewVariant::kPolSides)}});
  ASSERT_EQ(r->status, 200) << r->body;
  nlohmann::json ov = json(r);
  EXPECT_EQ(ov["groups"].size(), 3u);
  EXPECT_EQ(ov["groups"][0]["label"], "left");
  EXPECT_EQ(ov, service_->overview("debt-ceiling", profile_from_json(nlohmann::json::parse(
                                                       profile_param(OverviewVariant::kPolSides)))));

  EXPECT_EQ(get("/topics/nope/overview", {{"profile", profile_param(OverviewVariant::kPlain)}})->status,
            404);
  EXPECT_EQ(get("/topics/debt-ceiling/overview")->status, 400);
  EXPECT_EQ(get("/topics/debt-ceiling/overview", {{"profile", "{"}})->status, 400);
  EXPECT_EQ(get("/topics/debt-ceiling/overview", {{"profile", profile_param(OverviewVariant::kNone)}})
                ->status,
            400);
  r = get("/topics/debt-ceiling/overview", {{"seed", "abc"}});
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json(r)["field"], "seed");

  // A seed draws the profile server side; repeated calls agree.
  for (std::string seed : {"1", "2", "3", "4", "5", "6"}) {
    auto a = get("/topics/debt-ceiling/overview", {{"seed", seed}});
    auto b = get("/topics/debt-ceiling/overview", {{"seed", seed}});
    EXPECT_TRUE(a->status == 200 || a->status == 400);
    EXPECT_EQ(a->body, b->body);
  }
}

TEST_F(ApiTest, ArticleView) {
  analyze_fixture();
  auto r = get("/topics/debt-ceiling/articles/a2/view",
               {{"profile", profile_param(OverviewVariant::kPlain)}});
  ASSERT_EQ(r->status, 200) << r->body;
  nlohmann::json view = json(r);
  EXPECT_EQ(view["article_id"], "a2");
  EXPECT_EQ(view["highlight_mode"], "three_color");
  EXPECT_FALSE(view["highlights"].empty());
  EXPECT_EQ(get("/topics/debt-ceiling/articles/zz/view",
                {{"profile", profile_param(OverviewVariant::kPlain)}})
                ->status,
            404);
  EXPECT_EQ(get("/topics/debt-ceiling/articles/a2/view", {{"seed", "11"}})->status, 200);
}

TEST_F(ApiTest, RandomProfiles) {
  auto r = get("/profiles/random", {{"topic_id", "debt-ceiling"}, {"seed", "42"}});
  ASSERT_EQ(r->status, 200);
  ConjointProfile p = profile_from_json(json(r));
  ProfileConstraints c;
  c.topic_id = "debt-ceiling";
  EXPECT_EQ(p, randomize_profile(42, c));
  r = get("/profiles/random", {{"topic_id", "t"}, {"seed", "42"}, {"task_set_index", "2"}});
  EXPECT_EQ(json(r)["task_set_index"], 2);
  EXPECT_EQ(get("/profiles/random", {{"topic_id", "t"}})->status, 400);
  EXPECT_EQ(get("/profiles/random", {{"topic_id", "t"}, {"seed", "1"}, {"task_set_index", "3"}})->status,
            400);
}

TEST_F(ApiTest, QuestionnaireAndResponses) {
  auto r = get("/questionnaire");
  ASSERT_EQ(r->status, 200);
  nlohmann::json q = json(r);
  ASSERT_FALSE(q["questions"].empty());
  EXPECT_TRUE(q["questions"][0].contains("scale"));

  ProfileConstraints c;
  c.topic_id = "debt-ceiling";
  ResponseRecord rec{"resp-9", randomize_profile(8, c), "art_trust", 6, "2026-02-01T12:00:00Z"};
  r = post("/responses", to_json(rec).dump());
  ASSERT_EQ(r->status, 201) << r->body;
  EXPECT_EQ(json(r)["sequence"], 1);
  EXPECT_EQ(post("/responses", to_json(rec).dump())->status, 409);

  rec.question_id = "art_fair";
  rec.answer = 11;
  r = post("/responses", to_json(rec).dump());
  EXPECT_EQ(r->status, 400);
  EXPECT_TRUE(json(r).contains("field"));
  EXPECT_EQ(post("/responses", "[]")->status, 400);

  ASSERT_EQ(service_->responses().all().size(), 1u);
  EXPECT_EQ(service_->responses().all()[0].question_id, "art_trust");
}

TEST_F(ApiTest, ExportMatchesServiceAndRoundTrips) {
  analyze_fixture();
  auto r = get("/export/debt-ceiling");
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(json(r), service_->export_topic("debt-ceiling"));
  EXPECT_EQ(to_json(analysis_from_json(json(r))).dump(), json(r).dump());
  EXPECT_EQ(get("/export/unknown")->status, 404);
}

TEST_F(ApiTest, UnknownRouteIs404) { EXPECT_EQ(get("/nothing/here")->status, 404); }

}  // namespace
}  // namespace newsbias
