#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "statefulrec/diagnostics.hpp"
#include "statefulrec/error.hpp"
#include "statefulrec/report.hpp"

using namespace statefulrec;

namespace {

std::vector<EmbeddingVector> random_vectors(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<EmbeddingVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = normal(rng);
    out.emplace_back(std::move(v));
  }
  return out;
}

std::vector<std::vector<double>> raw(const std::vector<EmbeddingVector>& vs) {
  std::vector<std::vector<double>> out;
  for (const auto& v : vs) out.emplace_back(v.values().begin(), v.values().end());
  return out;
}

std::vector<MatchedItem> make_items(const std::vector<EmbeddingVector>& q,
                                    const std::vector<EmbeddingVector>& c,
                                    const std::vector<EmbeddingVector>& m) {
  std::vector<MatchedItem> items;
  for (std::size_t i = 0; i < q.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "q%04zu", i);
    items.push_back({id, q[i], c[i], m[i]});
  }
  return items;
}

}  // namespace

TEST(DeviationCorrelation, IdentityGivesOne) {
  std::mt19937_64 rng(1);
  const auto q = random_vectors(10, 8, rng);
  const auto s = deviation_correlation(q, q);
  EXPECT_NEAR(s.rho, 1.0, 1e-9);
  for (double x : s.per_item) EXPECT_NEAR(x, 1.0, 1e-9);
}

TEST(DeviationCorrelation, ReflectionGivesMinusOne) {
  std::mt19937_64 rng(2);
  const auto q = random_vectors(10, 8, rng);
  const auto center = mean_vector(q);
  std::vector<EmbeddingVector> r;
  for (const auto& v : q) r.push_back(subtract(scale(center, 2.0), v));
  EXPECT_NEAR(deviation_correlation(q, r).rho, -1.0, 1e-9);
}

TEST(DeviationCorrelation, RotatedTwoDimensionalCase) {
  // Questions (1,0),(0,1): deviations (0.5,-0.5), (-0.5,0.5).
  // Recs (0,1),(-1,0): mean (-0.5,0.5), deviations (0.5,0.5), (-0.5,-0.5).
  // Each pair is orthogonal, so rho = 0.
  const std::vector<EmbeddingVector> q = {EmbeddingVector({1, 0}), EmbeddingVector({0, 1})};
  const std::vector<EmbeddingVector> r = {EmbeddingVector({0, 1}), EmbeddingVector({-1, 0})};
  const auto s = deviation_correlation(q, r);
  EXPECT_EQ(s.per_item, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(s.rho, 0.0);
  EXPECT_EQ(s.rho, oracle::deviation_rho(raw(q), raw(r)));
}

TEST(DeviationCorrelation, MatchesDefinitionOracle) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto q = random_vectors(2 + rng() % 20, 1 + rng() % 10, rng);
    const auto r = random_vectors(q.size(), q[0].dimension(), rng);
    EXPECT_NEAR(deviation_correlation(q, r).rho, oracle::deviation_rho(raw(q), raw(r)), 1e-12);
  }
}

TEST(DeviationCorrelation, RhoIsMeanOfPerItemAndBounded) {
  std::mt19937_64 rng(4);
  const auto q = random_vectors(17, 6, rng);
  const auto r = random_vectors(17, 6, rng);
  const auto s = deviation_correlation(q, r);
  ASSERT_EQ(s.per_item.size(), 17u);
  double sum = 0.0;
  for (double x : s.per_item) {
    EXPECT_LE(std::fabs(x), 1.0);
    sum += x;
  }
  EXPECT_NEAR(s.rho, sum / 17.0, 1e-12);
}

TEST(DeviationCorrelation, RotationInvariance) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const std::size_t dim = 2 + rng() % 8;
    const auto q = random_vectors(3 + rng() % 15, dim, rng);
    const auto r = random_vectors(q.size(), dim, rng);
    const auto rot = oracle::random_rotation(dim, rng);
    std::vector<EmbeddingVector> q2, r2;
    for (std::size_t k = 0; k < q.size(); ++k) {
      q2.emplace_back(oracle::apply(rot, raw(q)[k]));
      r2.emplace_back(oracle::apply(rot, raw(r)[k]));
    }
    EXPECT_NEAR(deviation_correlation(q, r).rho, deviation_correlation(q2, r2).rho, 1e-9);
  }
}

TEST(DeviationCorrelation, ReorderingPermutesPerItem) {
  std::mt19937_64 rng(6);
  const auto q = random_vectors(12, 5, rng);
  const auto r = random_vectors(12, 5, rng);
  const auto base = deviation_correlation(q, r);
  std::vector<std::size_t> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<EmbeddingVector> q2, r2;
  for (auto k : perm) {
    q2.push_back(q[k]);
    r2.push_back(r[k]);
  }
  const auto shuffled = deviation_correlation(q2, r2);
  for (std::size_t k = 0; k < perm.size(); ++k) {
    EXPECT_NEAR(shuffled.per_item[k], base.per_item[perm[k]], 1e-12);
  }
  EXPECT_NEAR(shuffled.rho, base.rho, 1e-12);
}

TEST(DeviationCorrelation, ItemAtMeanScoresZero) {
  const std::vector<EmbeddingVector> q = {EmbeddingVector({1, 0}), EmbeddingVector({0, 1}),
                                          EmbeddingVector({0.5, 0.5})};
  const std::vector<EmbeddingVector> r = {EmbeddingVector({1, 0}), EmbeddingVector({0, 1}),
                                          EmbeddingVector({0.5, 0.5})};
  const auto s = deviation_correlation(q, r);
  EXPECT_EQ(s.per_item[2], 0.0);
  EXPECT_NEAR(s.rho, 2.0 / 3.0, 1e-12);
}

TEST(DeviationCorrelation, Preconditions) {
  const std::vector<EmbeddingVector> one = {EmbeddingVector({1, 0})};
  EXPECT_THROW(deviation_correlation(one, one), Error);
  const std::vector<EmbeddingVector> q = {EmbeddingVector({1, 0}), EmbeddingVector({0, 1})};
  const std::vector<EmbeddingVector> bad = {EmbeddingVector({1, 0}), EmbeddingVector({0, 1, 0})};
  EXPECT_THROW(deviation_correlation(q, bad), Error);
  const std::vector<EmbeddingVector> three = {q[0], q[1], q[0]};
  EXPECT_THROW(deviation_correlation(q, three), Error);
}

TEST(FlatPearson, IdentityAndReflection) {
  std::mt19937_64 rng(7);
  const auto q = random_vectors(8, 4, rng);
  EXPECT_NEAR(flat_pearson(q, q), 1.0, 1e-12);
  const auto center = mean_vector(q);
  std::vector<EmbeddingVector> r;
  for (const auto& v : q) r.push_back(subtract(scale(center, 2.0), v));
  EXPECT_NEAR(flat_pearson(q, r), -1.0, 1e-12);
}

TEST(CompareConditions, IdenticalConditionsAreNull) {
  std::mt19937_64 rng(8);
  const auto q = random_vectors(10, 6, rng);
  const auto r = random_vectors(10, 6, rng);
  const auto report = compare_conditions(make_items(q, r, r));
  EXPECT_EQ(report.rho_contextual, report.rho_memory);
  EXPECT_EQ(report.t_result.statistic, 0.0);
  EXPECT_EQ(report.t_result.p_value, 1.0);
  EXPECT_EQ(report.wilcoxon_result.p_value, 1.0);
  EXPECT_EQ(report.effect.cohens_dz, 0.0);
  EXPECT_EQ(report.n_items, 10u);
}

TEST(CompareConditions, OrthogonalMemoryDeviations) {
  // Question deviations live in the first two axes, memory deviations in the
  // last two, so every memory score is 0.
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  std::vector<EmbeddingVector> q, c, m;
  for (int i = 0; i < 6; ++i) {
    const double a = normal(rng), b = normal(rng);
    q.emplace_back(std::vector<double>{a, b, 0, 0});
    c.emplace_back(std::vector<double>{a + 0.3 * normal(rng), b + 0.3 * normal(rng),
                                       0.3 * normal(rng), 0});
    m.emplace_back(std::vector<double>{0, 0, normal(rng), normal(rng)});
  }
  const auto report = compare_conditions(make_items(q, c, m));
  EXPECT_NEAR(report.rho_memory, 0.0, 1e-9);
  EXPECT_GT(report.rho_contextual, 0.5);
  EXPECT_GT(report.t_result.statistic, 0.0);
}

TEST(CompareConditions, TwoItemsHaveNoSpread) {
  const std::vector<EmbeddingVector> q = {EmbeddingVector({1, 0, 0}), EmbeddingVector({0, 1, 0})};
  const std::vector<EmbeddingVector> c = {EmbeddingVector({1, 0.1, 0}),
                                          EmbeddingVector({0, 1, 0.2})};
  const std::vector<EmbeddingVector> m = {EmbeddingVector({0, 0, 1}), EmbeddingVector({0, 0, -1})};
  EXPECT_NEAR(deviation_correlation(q, m).rho, 0.0, 1e-9);
  const auto report = compare_conditions(make_items(q, c, m));
  EXPECT_TRUE(report.zero_spread_differences);
  EXPECT_EQ(report.t_result.p_value, 1.0);
  EXPECT_EQ(report.effect.cohens_dz, 0.0);
  EXPECT_NEAR(report.rho_memory, 0.0, 1e-9);
}

TEST(CompareConditions, SwappingConditionsNegatesT) {
  std::mt19937_64 rng(10);
  const auto q = random_vectors(15, 6, rng);
  std::vector<EmbeddingVector> c, m;
  std::normal_distribution<double> normal;
  for (const auto& v : q) {
    std::vector<double> a(v.values().begin(), v.values().end());
    std::vector<double> b(6);
    for (std::size_t k = 0; k < 6; ++k) {
      a[k] += 0.5 * normal(rng);
      b[k] = normal(rng);
    }
    c.emplace_back(a);
    m.emplace_back(b);
  }
  const auto fwd = compare_conditions(make_items(q, c, m));
  const auto rev = compare_conditions(make_items(q, m, c));
  EXPECT_EQ(fwd.rho_contextual, rev.rho_memory);
  EXPECT_EQ(fwd.rho_memory, rev.rho_contextual);
  EXPECT_EQ(fwd.t_result.statistic, -rev.t_result.statistic);
  EXPECT_EQ(fwd.t_result.p_value, rev.t_result.p_value);
  EXPECT_EQ(fwd.wilcoxon_result.statistic, rev.wilcoxon_result.statistic);
  EXPECT_EQ(fwd.effect.cohens_dz, -rev.effect.cohens_dz);
}

TEST(CompareConditions, ErrorsNameTheCondition) {
  const std::vector<EmbeddingVector> q = {EmbeddingVector({1, 0}), EmbeddingVector({0, 1})};
  std::vector<MatchedItem> items = make_items(q, q, q);
  items[1].rec_vec_memory = EmbeddingVector({0, 1, 0});
  try {
    compare_conditions(items);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("memory condition"), std::string::npos) << e.what();
  }
}

TEST(Report, JsonRoundTripAndFieldOrder) {
  std::mt19937_64 rng(11);
  const auto q = random_vectors(6, 4, rng);
  const auto c = random_vectors(6, 4, rng);
  const auto m = random_vectors(6, 4, rng);
  auto report = compare_conditions(make_items(q, c, m));
  report.config_digest = "fnv1a64:0123456789abcdef";
  report.divergence = DivergenceSummary{"q0001", {"a", "b"}, true, false, 0.25,
                                        {Tactic::kFeedUp, Tactic::kFeedBack}};
  const auto json = report_to_json(report);
  const auto back = report_from_json(json);
  EXPECT_EQ(report_to_json(back), json);
  EXPECT_EQ(back.rho_contextual, report.rho_contextual);
  EXPECT_EQ(back.t_result.p_value, report.t_result.p_value);
  const std::vector<std::string> keys = {"rho_contextual", "rho_memory", "t_result",
                                         "wilcoxon_result", "effect", "divergence", "n_items",
                                         "config_digest"};
  std::size_t last = 0;
  for (const auto& key : keys) {
    const auto at = json.find("\"" + key + "\"");
    ASSERT_NE(at, std::string::npos) << key;
    EXPECT_GT(at, last) << key;
    last = at;
  }
  EXPECT_NE(json.find("\"feed_up\""), std::string::npos);
}

TEST(Report, ItemsJsonlRoundTrip) {
  std::mt19937_64 rng(12);
  const auto q = random_vectors(5, 3, rng);
  const auto items = make_items(q, random_vectors(5, 3, rng), random_vectors(5, 3, rng));
  const auto text = items_to_jsonl(items);
  const auto back = items_from_jsonl(text);
  ASSERT_EQ(back.size(), items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    EXPECT_EQ(back[i].question_id, items[i].question_id);
    EXPECT_EQ(back[i].question_vec, items[i].question_vec);
    EXPECT_EQ(back[i].rec_vec_contextual, items[i].rec_vec_contextual);
    EXPECT_EQ(back[i].rec_vec_memory, items[i].rec_vec_memory);
  }
  EXPECT_EQ(items_to_jsonl(back), text);
  EXPECT_THROW(items_from_jsonl("{\"question_id\": 3}\n"), Error);
}
