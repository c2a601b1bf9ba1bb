#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "statefulrec/embedding.hpp"
#include "statefulrec/error.hpp"

using namespace statefulrec;

TEST(HashingEmbedder, SingleTokenMatchesIndependentHash) {
  const HashingEmbedder embedder(64);
  for (const char* token : {"recursion", "why", "x", "42", "claim"}) {
    const auto v = embedder.embed(token);
    const auto h = oracle::fnv1a64(token);
    const std::size_t index = h % 64;
    const double sign = (h >> 63) ? -1.0 : 1.0;
    for (std::size_t i = 0; i < 64; ++i) {
      EXPECT_EQ(v[i], i == index ? sign : 0.0) << token << " @" << i;
    }
  }
}

TEST(HashingEmbedder, TokenizationIsCaseAndPunctuationInsensitive) {
  const HashingEmbedder embedder;
  EXPECT_EQ(embedder.embed("Why, RECURSION?"), embedder.embed("why recursion"));
}

TEST(HashingEmbedder, BagOfTokens) {
  const HashingEmbedder embedder;
  EXPECT_EQ(embedder.embed("alpha beta gamma beta"), embedder.embed("beta gamma beta alpha"));
  EXPECT_EQ(embedder.embed("a b c"), embedder.embed("a b c"));
}

TEST(HashingEmbedder, UnitNormOrZero) {
  const HashingEmbedder embedder(16);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 300; ++i) {
    std::string text = "t";
    for (int k = 0; k < 1 + static_cast<int>(rng() % 20); ++k) text += " w" + std::to_string(rng() % 50);
    const auto v = embedder.embed(text);
    // Signed buckets can cancel completely ("t w14" at dim 16).
    const double len = norm(v);
    EXPECT_TRUE(len == 0.0 || std::fabs(len - 1.0) < 1e-9) << text << " " << len;
  }
  // Only separators: no tokens, all-zero vector.
  const auto zero = embedder.embed("?!");
  EXPECT_EQ(zero, EmbeddingVector::zeros(16));
}

TEST(HashingEmbedder, EmptyTextRejected) {
  try {
    embed("", EmbedderConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
}

TEST(HashingEmbedder, ConfiguredDimension) {
  EmbedderConfig c;
  c.dimension = 7;
  EXPECT_EQ(embed("hello world", c).dimension(), 7u);
  c.dimension = 0;
  EXPECT_THROW(make_embedder(c), Error);
}

TEST(MeanVector, Examples) {
  const EmbeddingVector v({0.3, -0.2, 0.9});
  const std::vector<EmbeddingVector> one = {v};
  EXPECT_EQ(mean_vector(one), v);
  const std::vector<EmbeddingVector> sym = {v, scale(v, -1.0)};
  EXPECT_EQ(mean_vector(sym), EmbeddingVector::zeros(3));
  const std::vector<EmbeddingVector> axes = {EmbeddingVector({1, 0}), EmbeddingVector({0, 1})};
  EXPECT_EQ(mean_vector(axes), EmbeddingVector({0.5, 0.5}));
  EXPECT_THROW(mean_vector({}), Error);
}

TEST(MeanVector, PermutationInvariant) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<EmbeddingVector> vs;
  for (int i = 0; i < 9; ++i) vs.emplace_back(std::vector<double>{u(rng), u(rng), u(rng)});
  const auto base = mean_vector(vs);
  for (int k = 0; k < 20; ++k) {
    std::shuffle(vs.begin(), vs.end(), rng);
    const auto m = mean_vector(vs);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(m[i], base[i], 1e-15);
  }
}

TEST(Cosine, Examples) {
  const EmbeddingVector v({0.2, -1.0, 3.0});
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-12);
  EXPECT_NEAR(cosine(v, scale(v, -1.0)), -1.0, 1e-12);
  EXPECT_NEAR(cosine(EmbeddingVector({1, 0}), EmbeddingVector({1, 1})), 0.7071067811865475,
              1e-12);
  EXPECT_EQ(cosine(EmbeddingVector::zeros(3), v), 0.0);
}

TEST(Cosine, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_real_distribution<double> k(0.01, 100);
  for (int i = 0; i < 200; ++i) {
    const EmbeddingVector a({u(rng), u(rng), u(rng), u(rng)});
    const EmbeddingVector b({u(rng), u(rng), u(rng), u(rng)});
    EXPECT_NEAR(cosine(a, b), cosine(b, a), 1e-15);
    EXPECT_NEAR(cosine(scale(a, k(rng)), b), cosine(a, b), 1e-9);
    EXPECT_LE(std::fabs(cosine(a, b)), 1.0);
  }
}

TEST(EmbeddingVector, RejectsNonFinite) {
  EXPECT_THROW(EmbeddingVector({1.0, std::nan("")}), Error);
  EXPECT_THROW(EmbeddingVector({HUGE_VAL}), Error);
  EXPECT_THROW(cosine(EmbeddingVector({1.0}), EmbeddingVector({1.0, 2.0})), Error);
}
