#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "statefulrec/conditioning.hpp"
#include "statefulrec/embedding.hpp"
#include "statefulrec/generation.hpp"
#include "statefulrec/learner_model.hpp"
#include "statefulrec/stats.hpp"

namespace statefulrec {

struct MatchedItem {
  std::string question_id;
  EmbeddingVector question_vec;
  EmbeddingVector rec_vec_contextual;
  EmbeddingVector rec_vec_memory;
};

struct DeviationScores {
  std::vector<double> per_item;
  double rho = 0.0;  // mean of per_item
};

struct DivergenceSummary {
  std::string question_id;
  std::pair<std::string, std::string> learner_ids;
  bool contextual_texts_identical = false;
  bool memory_texts_identical = false;
  double memory_embedding_cosine = 0.0;
  std::pair<Tactic, Tactic> tactics{Tactic::kFeedUp, Tactic::kFeedUp};
};

struct DiagnosticsReport {
  double rho_contextual = 0.0;
  double rho_memory = 0.0;
  TestResult t_result;
  TestResult wilcoxon_result;
  EffectSize effect;
  // Per-item differences without spread (always the case for two items, whose
  // deviations mirror each other). The t-test and dz are then reported as
  // t = 0, p = 1, dz = 0 instead of failing.
  bool zero_spread_differences = false;
  std::optional<DivergenceSummary> divergence;  // absent when re-diagnosing saved items
  std::size_t n_items = 0;
  std::string config_digest;
  // Pearson coefficient over flattened deviation components, per condition.
  double flat_pearson_contextual = 0.0;
  double flat_pearson_memory = 0.0;
  std::vector<std::string> question_ids;
  std::vector<double> per_item_contextual;
  std::vector<double> per_item_memory;
};

// per_item_i = cosine(q_i - mean(q), r_i - mean(r)); rho = mean(per_item).
// Requires at least two items of one shared dimension.
DeviationScores deviation_correlation(std::span<const EmbeddingVector> questions,
                                      std::span<const EmbeddingVector> recs);

// Pearson correlation between all components of the question deviations and
// all components of the recommendation deviations; 0 when either side has no
// spread.
double flat_pearson(std::span<const EmbeddingVector> questions,
                    std::span<const EmbeddingVector> recs);

// Paired comparison of per-item deviation scores, contextual as `a` and
// memory-based as `b`. When the two conditions score identically on every
// item the Wilcoxon test reports statistic 0, p = 1 and dz is 0. Differences
// without spread set zero_spread_differences (see DiagnosticsReport).
DiagnosticsReport compare_conditions(std::span<const MatchedItem> items);

// Everything needed to produce and embed recommendations for a probe.
struct ProbeContext {
  const PromptTemplates& templates;
  const TacticMapping& mapping;
  const PersonaTable& personas;
  const Generator& generator;
  const Embedder& embedder;
};

// Generates contextual and memory-based recommendations for both learners on
// the same question and records how they differ.
DivergenceSummary divergence_probe(const std::string& question_id,
                                   const std::string& question_text,
                                   const std::pair<LearnerState, LearnerState>& states,
                                   const ProbeContext& context);

}  // namespace statefulrec
