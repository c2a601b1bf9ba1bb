#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "statefulrec/conditioning.hpp"
#include "statefulrec/diagnostics.hpp"
#include "statefulrec/embedding.hpp"
#include "statefulrec/generation.hpp"
#include "statefulrec/learner_model.hpp"
#include "statefulrec/synth.hpp"

namespace statefulrec {

struct ExperimentConfig {
  std::uint64_t seed = 42;
  std::size_t n_questions = 50;
  std::size_t n_learners = 20;
  double alpha = kDefaultAlpha;

  // Optional overrides of the built-in resource files.
  std::optional<std::filesystem::path> mapping_path;
  std::optional<std::filesystem::path> templates_dir;
  std::optional<std::filesystem::path> lexicon_dir;
  std::optional<std::filesystem::path> personas_path;
  std::optional<std::filesystem::path> stopwords_path;

  // Interaction log to analyze instead of a synthetic corpus.
  std::optional<std::filesystem::path> input_log;

  GeneratorConfig generator;
  EmbedderConfig embedder;

  std::filesystem::path output = "report.json";
  std::optional<std::filesystem::path> items_output;
};

// Throws Error(kInvalidConfiguration) / Error(kInvalidParameter).
void validate(const ExperimentConfig& config);

// Parses a JSON document mirroring ExperimentConfig. Fields that are absent
// keep the values already in `base`.
ExperimentConfig config_from_json(std::string_view text, ExperimentConfig base = {});
std::string config_to_json(const ExperimentConfig& config);

// Resource bundle shared by every pipeline stage.
struct Resources {
  Lexicons lexicons = Lexicons::defaults();
  PersonaTable personas = PersonaTable::defaults();
  TacticMapping mapping = TacticMapping::defaults();
  PromptTemplates templates = PromptTemplates::defaults();
  Stopwords stopwords = Stopwords::defaults();
};

Resources load_resources(const ExperimentConfig& config);

// Hex digest over seed, sizes, alpha, backend selection and every resource
// that shapes the outputs.
std::string config_digest(const ExperimentConfig& config, const Resources& resources,
                          std::string_view corpus);

// Uniform sample without replacement of min(n, size) indices, returned in
// ascending order.
std::vector<std::size_t> sample_indices(std::size_t size, std::size_t n, std::uint64_t seed);

struct ExperimentOutcome {
  DiagnosticsReport report;
  std::string report_json;
  std::vector<MatchedItem> items;
};

// Full two-condition run: corpus -> state replay -> generation under both
// conditions -> embedding -> comparison -> divergence probe. Writes the report
// (and optionally the matched items) only after every stage succeeded. Stage
// failures are rethrown with the stage name prefixed.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

// Picks the learner pair with differing dominant needs and the largest L1
// distance between need vectors (ties broken by id order). Needs >= 2 states.
std::optional<std::pair<LearnerState, LearnerState>> most_distinct_pair(
    const std::vector<LearnerState>& states);

}  // namespace statefulrec
