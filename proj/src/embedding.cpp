#include "statefulrec/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "http_json.hpp"
#include "statefulrec/error.hpp"
#include "statefulrec/text.hpp"

namespace statefulrec {

namespace {

constexpr double kZeroNorm = 1e-12;

void require_same_dimension(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    fail(ErrorKind::kInvalidInput, "embedding dimension mismatch: " +
                                       std::to_string(a.dimension()) + " vs " +
                                       std::to_string(b.dimension()));
  }
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  for (const double v : values_) {
    if (!std::isfinite(v)) fail(ErrorKind::kInvalidInput, "embedding entry is not finite");
  }
}

EmbeddingVector EmbeddingVector::zeros(std::size_t dimension) {
  return EmbeddingVector(std::vector<double>(dimension, 0.0));
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  require_same_dimension(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm(const EmbeddingVector& v) { return std::sqrt(dot(v, v)); }

EmbeddingVector subtract(const EmbeddingVector& a, const EmbeddingVector& b) {
  require_same_dimension(a, b);
  std::vector<double> out(a.dimension());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return EmbeddingVector(std::move(out));
}

EmbeddingVector scale(const EmbeddingVector& v, double k) {
  std::vector<double> out(v.values().begin(), v.values().end());
  for (auto& x : out) x *= k;
  return EmbeddingVector(std::move(out));
}

EmbeddingVector mean_vector(std::span<const EmbeddingVector> vectors) {
  if (vectors.empty()) fail(ErrorKind::kInvalidInput, "mean of an empty set");
  std::vector<double> sum(vectors.front().dimension(), 0.0);
  for (const auto& v : vectors) {
    require_same_dimension(vectors.front(), v);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
  }
  const auto n = static_cast<double>(vectors.size());
  for (auto& x : sum) x /= n;
  return EmbeddingVector(std::move(sum));
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na < kZeroNorm || nb < kZeroNorm) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

void validate(const EmbedderConfig& config) {
  if (config.dimension == 0) {
    fail(ErrorKind::kInvalidConfiguration, "embedding dimension must be positive");
  }
  if (config.backend == BackendKind::kHttp && (!config.endpoint || config.endpoint->empty())) {
    fail(ErrorKind::kInvalidConfiguration, "http embedder requires an endpoint");
  }
}

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) {
    fail(ErrorKind::kInvalidConfiguration, "embedding dimension must be positive");
  }
}

EmbeddingVector HashingEmbedder::embed(std::string_view text) const {
  if (is_blank(text)) fail(ErrorKind::kInvalidInput, "cannot embed empty text");
  std::vector<double> values(dimension_, 0.0);
  for (const auto& token : tokenize(text)) {
    const std::uint64_t h = fnv1a64(token);
    const double sign = (h >> 63) == 0 ? 1.0 : -1.0;
    values[h % dimension_] += sign;
  }
  double sq = 0.0;
  for (const double v : values) sq += v * v;
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& v : values) v *= inv;
  }
  return EmbeddingVector(std::move(values));
}

HttpEmbedder::HttpEmbedder(std::string endpoint, std::size_t dimension, int timeout_ms)
    : endpoint_(std::move(endpoint)),
      dimension_(dimension),
      timeout_ms_(timeout_ms),
      token_(detail::token_from_environment()) {
  detail::parse_endpoint(endpoint_);
}

EmbeddingVector HttpEmbedder::embed(std::string_view text) const {
  if (is_blank(text)) fail(ErrorKind::kInvalidInput, "cannot embed empty text");
  const auto response = detail::post_json(detail::parse_endpoint(endpoint_),
                                          {{"text", std::string(text)}}, timeout_ms_, token_);
  if (!response.is_object() || !response.contains("values") || !response["values"].is_array()) {
    throw BackendError(200, "response body lacks a 'values' array");
  }
  std::vector<double> values;
  for (const auto& v : response["values"]) {
    if (!v.is_number()) throw BackendError(200, "non-numeric embedding entry");
    values.push_back(v.get<double>());
  }
  if (values.size() != dimension_) {
    throw BackendError(200, "embedding dimension " + std::to_string(values.size()) +
                                " does not match configured " + std::to_string(dimension_));
  }
  try {
    return EmbeddingVector(std::move(values));
  } catch (const Error& e) {
    throw BackendError(200, e.what());
  }
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  validate(config);
  if (config.backend == BackendKind::kHttp) {
    return std::make_unique<HttpEmbedder>(*config.endpoint, config.dimension,
                                          config.timeout_ms);
  }
  return std::make_unique<HashingEmbedder>(config.dimension);
}

EmbeddingVector embed(std::string_view text, const EmbedderConfig& config) {
  return make_embedder(config)->embed(text);
}

}  // namespace statefulrec
