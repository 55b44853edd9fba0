#include "newsbias/embedding.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "newsbias/error.h"
#include "text_util.h"

namespace newsbias {

HashEmbedding::HashEmbedding(int dimension, uint64_t seed) : dimension_(dimension), seed_(seed) {
  if (dimension <= 0) throw Error("embedding dimension must be positive");
}

std::optional<Vector> HashEmbedding::lookup(std::string_view token) const {
  if (!text::has_alnum(token)) return std::nullopt;
  std::string lw = text::to_lower(token);
  std::mt19937_64 rng(text::fnv1a(lw, 14695981039346656037ull ^ seed_));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(dimension_);
  for (double &x : v) x = gauss(rng);
  double n = norm(v);
  for (double &x : v) x /= n;
  return v;
}

TableEmbedding::TableEmbedding(int dimension) : dimension_(dimension) {
  if (dimension <= 0) throw Error("embedding dimension must be positive");
}

void TableEmbedding::add(std::string token, Vector v) {
  if (static_cast<int>(v.size()) != dimension_) {
    throw Error("embedding for '" + token + "' has dimension " + std::to_string(v.size()) +
                ", expected " + std::to_string(dimension_));
  }
  table_[text::to_lower(token)] = std::move(v);
}

std::optional<Vector> TableEmbedding::lookup(std::string_view token) const {
  auto it = table_.find(text::to_lower(token));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

TableEmbedding TableEmbedding::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ":1", "missing 'dim N' header");
  std::istringstream header(line);
  std::string kw;
  int dim = 0;
  if (!(header >> kw >> dim) || kw != "dim" || dim <= 0) {
    throw SchemaError(path.string() + ":1", "expected 'dim N' header");
  }
  TableEmbedding table(dim);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    Vector v;
    v.reserve(dim);
    double x;
    while (fields >> x) v.push_back(x);
    if (!fields.eof() || static_cast<int>(v.size()) != dim) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no),
                        "expected " + std::to_string(dim) + " numeric components");
    }
    table.add(std::move(token), std::move(v));
  }
  return table;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size() && i < b.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine(std::span<const double> a, std::span<const double> b) {
  double na = norm(a);
  double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

double unit_similarity(double c) { return std::clamp((c + 1.0) / 2.0, 0.0, 1.0); }

std::optional<Vector> mean_vector(const EmbeddingProvider &embeddings,
                                  std::span<const std::string> tokens) {
  Vector sum(embeddings.dimension(), 0.0);
  int found = 0;
  for (const std::string &t : tokens) {
    std::optional<Vector> v = embeddings.lookup(t);
    if (!v) continue;
    for (size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
    ++found;
  }
  if (found == 0) return std::nullopt;
  for (double &x : sum) x /= found;
  return sum;
}

Similarity vector_similarity(const std::optional<Vector> &a, const std::optional<Vector> &b) {
  if (!a || !b) return {0.0, true};
  return {unit_similarity(cosine(*a, *b)), false};
}

}  // namespace newsbias
