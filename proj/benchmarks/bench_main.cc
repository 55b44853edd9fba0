#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "newsbias/analysis.h"
#include "newsbias/kmeans.h"

namespace newsbias {
namespace {

const Topic &fixture_topic() {
  static const Topic t =
      load_topic(std::filesystem::path(NEWSBIAS_FIXTURE_DIR) / "debt_ceiling_topic.json");
  return t;
}

const TopicAnalysis &fixture_analysis() {
  static const TopicAnalysis a = [] {
    EngineConfig config;
    Providers providers = Providers::from_config(config);
    return analyze_topic(fixture_topic(), config, providers, "2026-01-01T00:00:00Z");
  }();
  return a;
}

void BM_Segment(benchmark::State &state) {
  std::string text;
  for (const Article &a : fixture_topic().articles) text += a.body() + "\n\n";
  for (auto _ : state) benchmark::DoNotOptimize(segment(text));
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_Segment);

// Candidate chains replicated `range(0)` times with fresh ids.
void BM_Sieves(benchmark::State &state) {
  std::vector<MentionChain> base;
  for (const PersonConcept &p : fixture_analysis().concepts) {
    base.insert(base.end(), p.chains.begin(), p.chains.end());
  }
  std::vector<MentionChain> cands;
  for (int r = 0; r < state.range(0); ++r) {
    for (MentionChain c : base) {
      c.chain_id += "/" + std::to_string(r);
      for (Mention &m : c.mentions) m.article_id += "/" + std::to_string(r);
      cands.push_back(std::move(c));
    }
  }
  HashEmbedding emb(64, 42);
  for (auto _ : state) benchmark::DoNotOptimize(merge_sieves(cands, {}, &emb));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cands.size()));
}
BENCHMARK(BM_Sieves)->Arg(1)->Arg(4)->Arg(16);

void BM_Aggregate(benchmark::State &state) {
  std::mt19937_64 rng(1);
  std::vector<WeightedMention> ms(state.range(0));
  for (WeightedMention &m : ms) {
    m.offset_ratio = std::uniform_real_distribution<double>(0, 1)(rng);
    m.score = static_cast<int>(rng() % 3) - 1;
  }
  PositionWeight w;
  for (auto _ : state) benchmark::DoNotOptimize(aggregate_polarity(ms, static_cast<int>(ms.size()), w));
}
BENCHMARK(BM_Aggregate)->Arg(10)->Arg(1000);

void BM_KMeans(benchmark::State &state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0, 0.1);
  std::vector<Vector> points(state.range(0), Vector(10));
  for (size_t i = 0; i < points.size(); ++i) {
    for (size_t d = 0; d < 10; ++d) points[i][d] = (i % 3 == d % 3 ? 0.7 : -0.2) + noise(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(points));
}
BENCHMARK(BM_KMeans)->Arg(30)->Arg(300)->Arg(3000);

void BM_Pipeline(benchmark::State &state) {
  EngineConfig config;
  Providers providers = Providers::from_config(config);
  for (auto _ : state) {
    benchmark::DoNotOptimize(analyze_topic(fixture_topic(), config, providers, "2026-01-01T00:00:00Z"));
  }
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace newsbias

BENCHMARK_MAIN();
