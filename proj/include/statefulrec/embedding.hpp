#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "statefulrec/generation.hpp"

namespace statefulrec {

inline constexpr std::size_t kDefaultEmbeddingDimension = 64;

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  // Throws Error(kInvalidInput) on non-finite entries.
  explicit EmbeddingVector(std::vector<double> values);
  static EmbeddingVector zeros(std::size_t dimension);

  std::size_t dimension() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

double dot(const EmbeddingVector& a, const EmbeddingVector& b);
double norm(const EmbeddingVector& v);
EmbeddingVector subtract(const EmbeddingVector& a, const EmbeddingVector& b);
EmbeddingVector scale(const EmbeddingVector& v, double k);

// Componentwise mean, not re-normalized.
EmbeddingVector mean_vector(std::span<const EmbeddingVector> vectors);

// dot / (|a||b|), or 0 when either norm is below 1e-12.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct EmbedderConfig {
  BackendKind backend = BackendKind::kStub;
  std::size_t dimension = kDefaultEmbeddingDimension;
  std::optional<std::string> endpoint;
  int timeout_ms = 30'000;
};

void validate(const EmbedderConfig& config);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual std::size_t dimension() const = 0;
};

// Signed feature hashing: each token adds +-1 at fnv1a64(token) mod dimension,
// sign from bit 63 of the hash; the result is L2-normalized unless all-zero.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dimension = kDefaultEmbeddingDimension);

  EmbeddingVector embed(std::string_view text) const override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::size_t dimension_;
};

// POSTs {"text": ...} and expects {"values": [...]} of the configured length.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(std::string endpoint, std::size_t dimension, int timeout_ms);

  EmbeddingVector embed(std::string_view text) const override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::string endpoint_;
  std::size_t dimension_;
  int timeout_ms_;
  std::optional<std::string> token_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config);

// Convenience wrapper matching the single-call form.
EmbeddingVector embed(std::string_view text, const EmbedderConfig& config);

}  // namespace statefulrec
