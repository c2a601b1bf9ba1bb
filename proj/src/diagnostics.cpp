#include "statefulrec/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "statefulrec/error.hpp"

namespace statefulrec {

namespace {

std::vector<EmbeddingVector> deviations(std::span<const EmbeddingVector> vectors) {
  const auto center = mean_vector(vectors);
  std::vector<EmbeddingVector> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.push_back(subtract(v, center));
  return out;
}

void check_pairing(std::span<const EmbeddingVector> questions,
                   std::span<const EmbeddingVector> recs) {
  if (questions.size() != recs.size()) {
    fail(ErrorKind::kInvalidInput, "question and recommendation counts differ");
  }
  if (questions.size() < 2) {
    fail(ErrorKind::kInvalidInput, "deviation correlation needs at least two items");
  }
  const auto dim = questions.front().dimension();
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (questions[i].dimension() != dim || recs[i].dimension() != dim) {
      fail(ErrorKind::kInvalidInput, "embedding dimensions differ across items");
    }
  }
}

}  // namespace

DeviationScores deviation_correlation(std::span<const EmbeddingVector> questions,
                                      std::span<const EmbeddingVector> recs) {
  check_pairing(questions, recs);
  const auto q_dev = deviations(questions);
  const auto r_dev = deviations(recs);
  DeviationScores scores;
  scores.per_item.reserve(q_dev.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < q_dev.size(); ++i) {
    scores.per_item.push_back(cosine(q_dev[i], r_dev[i]));
    sum += scores.per_item.back();
  }
  scores.rho = sum / static_cast<double>(scores.per_item.size());
  return scores;
}

double flat_pearson(std::span<const EmbeddingVector> questions,
                    std::span<const EmbeddingVector> recs) {
  check_pairing(questions, recs);
  const auto q_dev = deviations(questions);
  const auto r_dev = deviations(recs);
  // Deviations from per-set means, flattened; Pearson re-centers on the
  // flattened means.
  double sum_x = 0.0;
  double sum_y = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < q_dev.size(); ++i) {
    for (std::size_t k = 0; k < q_dev[i].dimension(); ++k) {
      sum_x += q_dev[i][k];
      sum_y += r_dev[i][k];
      ++count;
    }
  }
  const double mx = sum_x / static_cast<double>(count);
  const double my = sum_y / static_cast<double>(count);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < q_dev.size(); ++i) {
    for (std::size_t k = 0; k < q_dev[i].dimension(); ++k) {
      const double x = q_dev[i][k] - mx;
      const double y = r_dev[i][k] - my;
      sxy += x * y;
      sxx += x * x;
      syy += y * y;
    }
  }
  if (sxx < 1e-24 || syy < 1e-24) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

DiagnosticsReport compare_conditions(std::span<const MatchedItem> items) {
  if (items.size() < 2) {
    fail(ErrorKind::kInvalidInput, "comparison needs at least two matched items");
  }
  std::vector<EmbeddingVector> questions;
  std::vector<EmbeddingVector> contextual;
  std::vector<EmbeddingVector> memory;
  DiagnosticsReport report;
  for (const auto& item : items) {
    questions.push_back(item.question_vec);
    contextual.push_back(item.rec_vec_contextual);
    memory.push_back(item.rec_vec_memory);
    report.question_ids.push_back(item.question_id);
  }

  auto score = [&questions](std::span<const EmbeddingVector> recs, const char* condition) {
    try {
      return std::pair{deviation_correlation(questions, recs), flat_pearson(questions, recs)};
    } catch (const Error& e) {
      throw annotate(e, std::string(condition) + " condition");
    }
  };
  auto [ctx_scores, ctx_flat] = score(contextual, "contextual");
  auto [mem_scores, mem_flat] = score(memory, "memory");

  report.n_items = items.size();
  report.rho_contextual = ctx_scores.rho;
  report.rho_memory = mem_scores.rho;
  report.flat_pearson_contextual = ctx_flat;
  report.flat_pearson_memory = mem_flat;

  const PairedSample sample(ctx_scores.per_item, mem_scores.per_item);
  report.per_item_contextual = std::move(ctx_scores.per_item);
  report.per_item_memory = std::move(mem_scores.per_item);

  const auto d = sample.differences();
  const bool all_zero = std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; });
  report.zero_spread_differences = has_zero_spread(d);
  if (report.zero_spread_differences) {
    report.t_result = TestResult{0.0, 1.0, TestMethod::kPairedT, d.size()};
    report.effect = EffectSize{0.0};
  }
  if (all_zero) {
    // Both conditions score identically: nothing to rank, no effect.
    report.wilcoxon_result = TestResult{0.0, 1.0, TestMethod::kWilcoxonExact, 0};
    return report;
  }
  try {
    if (!report.zero_spread_differences) {
      report.t_result = paired_t_test(sample);
      report.effect = cohens_dz(sample);
    }
    report.wilcoxon_result = wilcoxon_signed_rank(sample);
  } catch (const Error& e) {
    throw annotate(e, "paired comparison of per-item scores (contextual vs memory)");
  }
  return report;
}

DivergenceSummary divergence_probe(const std::string& question_id,
                                   const std::string& question_text,
                                   const std::pair<LearnerState, LearnerState>& states,
                                   const ProbeContext& context) {
  auto contextual = [&](const LearnerState& state) {
    const auto prompt = compose_prompt(Condition::kContextual, question_text, std::nullopt,
                                       std::nullopt, context.templates, context.personas);
    return generate({prompt, question_id, state.learner_id}, context.generator);
  };
  auto memory = [&](const LearnerState& state) {
    const auto tactic = select_tactic(state, context.mapping);
    const auto prompt = compose_prompt(Condition::kMemoryBased, question_text, state, tactic,
                                       context.templates, context.personas);
    return generate({prompt, question_id, state.learner_id}, context.generator);
  };

  const auto ctx_a = contextual(states.first);
  const auto ctx_b = contextual(states.second);
  const auto mem_a = memory(states.first);
  const auto mem_b = memory(states.second);

  DivergenceSummary summary;
  summary.question_id = question_id;
  summary.learner_ids = {states.first.learner_id, states.second.learner_id};
  summary.contextual_texts_identical = ctx_a.text == ctx_b.text;
  summary.memory_texts_identical = mem_a.text == mem_b.text;
  summary.memory_embedding_cosine =
      cosine(context.embedder.embed(mem_a.text), context.embedder.embed(mem_b.text));
  summary.tactics = {*mem_a.tactic, *mem_b.tactic};
  return summary;
}

}  // namespace statefulrec
