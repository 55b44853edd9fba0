#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace newsbias {

using Vector = std::vector<double>;

// Token -> dense vector lookup. Implementations must be safe for concurrent
// reads. Lookups are case-insensitive.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dimension() const = 0;
  // nullopt for out-of-vocabulary tokens. Returned vectors have dimension().
  virtual std::optional<Vector> lookup(std::string_view token) const = 0;
};

// Pseudo-random unit vector per lowercased token, derived from a hash of the
// token and a fixed seed. Every token is in vocabulary, except tokens without
// any alphanumeric character.
class HashEmbedding : public EmbeddingProvider {
 public:
  explicit HashEmbedding(int dimension = 64, uint64_t seed = 42);

  int dimension() const override { return dimension_; }
  std::optional<Vector> lookup(std::string_view token) const override;

 private:
  int dimension_;
  uint64_t seed_;
};

// Finite vocabulary held in memory.
class TableEmbedding : public EmbeddingProvider {
 public:
  explicit TableEmbedding(int dimension);

  // Throws Error if `v` has the wrong dimension.
  void add(std::string token, Vector v);

  int dimension() const override { return dimension_; }
  std::optional<Vector> lookup(std::string_view token) const override;
  size_t size() const { return table_.size(); }

  // Text format: first line "dim N", then one "token v1 ... vN" per line.
  static TableEmbedding load(const std::filesystem::path &path);

 private:
  int dimension_;
  std::unordered_map<std::string, Vector> table_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
// Cosine similarity; 0 when either vector is zero.
double cosine(std::span<const double> a, std::span<const double> b);
// Maps a cosine in [-1, 1] affinely to [0, 1], clamped.
double unit_similarity(double cosine);

// Mean of the in-vocabulary token vectors of `tokens`; nullopt if none is in
// vocabulary.
std::optional<Vector> mean_vector(const EmbeddingProvider &embeddings,
                                  std::span<const std::string> tokens);

struct Similarity {
  double score = 0.0;
  // True when one side had no in-vocabulary token; score is then 0.
  bool oov = false;
};

// unit_similarity(cosine(a, b)) with the OOV convention above.
Similarity vector_similarity(const std::optional<Vector> &a, const std::optional<Vector> &b);

}  // namespace newsbias
