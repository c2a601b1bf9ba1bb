// statefulrec: command-line front end for the contextual vs memory-based
// recommendation experiment.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 backend error,
// 5 degenerate statistics.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "statefulrec/conditioning.hpp"
#include "statefulrec/diagnostics.hpp"
#include "statefulrec/error.hpp"
#include "statefulrec/experiment.hpp"
#include "statefulrec/memory_store.hpp"
#include "statefulrec/report.hpp"
#include "statefulrec/synth.hpp"
#include "statefulrec/text.hpp"

namespace sr = statefulrec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitBackend = 4;
constexpr int kExitDegenerate = 5;

int exit_code(sr::ErrorKind kind) {
  switch (kind) {
    case sr::ErrorKind::kInvalidParameter:
    case sr::ErrorKind::kInvalidConfiguration:
    case sr::ErrorKind::kContractViolation:
      return kExitConfig;
    case sr::ErrorKind::kBackend:
      return kExitBackend;
    case sr::ErrorKind::kDegenerateSample:
      return kExitDegenerate;
    default:
      return kExitData;
  }
}

// Flags shared by several subcommands. Values are only applied when the flag
// was given, so a --config file provides the defaults.
struct CommonFlags {
  std::string config;
  std::uint64_t seed = 42;
  std::size_t n_questions = 50;
  std::size_t n_learners = 20;
  double alpha = sr::kDefaultAlpha;
  std::string mapping;
  std::string templates;
  std::string lexicons;
  std::string personas;
  std::string stopwords;
  std::string backend = "stub";
  std::string endpoint;
  int max_parallel = 4;
  int timeout_ms = 30'000;
  std::string embedder_backend = "stub";
  std::string embedder_endpoint;
  std::size_t dimension = sr::kDefaultEmbeddingDimension;
  std::string out;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* n_questions_opt = nullptr;
  CLI::Option* n_learners_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* backend_opt = nullptr;
  CLI::Option* max_parallel_opt = nullptr;
  CLI::Option* timeout_opt = nullptr;
  CLI::Option* embedder_backend_opt = nullptr;
  CLI::Option* dimension_opt = nullptr;
};

void add_resource_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--mapping", f.mapping, "need -> tactic mapping table (JSON)");
  cmd->add_option("--templates", f.templates,
                  "directory holding contextual.tmpl and memory.tmpl");
  cmd->add_option("--lexicons", f.lexicons, "directory holding the *.lex need lexicons");
  cmd->add_option("--personas", f.personas, "persona table (JSON)");
  cmd->add_option("--stopwords", f.stopwords, "stopword list, one word per line");
}

void add_backend_flags(CLI::App* cmd, CommonFlags& f) {
  f.backend_opt = cmd->add_option("--backend", f.backend, "generation backend")
                      ->check(CLI::IsMember({"stub", "http"}));
  cmd->add_option("--endpoint", f.endpoint, "generation endpoint (http backend)");
  f.max_parallel_opt =
      cmd->add_option("--max-parallel", f.max_parallel, "in-flight request bound");
  f.timeout_opt = cmd->add_option("--timeout-ms", f.timeout_ms, "backend request timeout");
  f.embedder_backend_opt =
      cmd->add_option("--embedder-backend", f.embedder_backend, "embedding backend")
          ->check(CLI::IsMember({"stub", "http"}));
  cmd->add_option("--embedder-endpoint", f.embedder_endpoint,
                  "embedding endpoint (http backend)");
  f.dimension_opt = cmd->add_option("--dimension", f.dimension, "embedding dimension");
}

sr::ExperimentConfig build_config(const CommonFlags& f) {
  sr::ExperimentConfig config;
  if (!f.config.empty()) config = sr::config_from_json(sr::read_file(f.config));
  if (f.seed_opt && f.seed_opt->count()) config.seed = f.seed;
  if (f.n_questions_opt && f.n_questions_opt->count()) config.n_questions = f.n_questions;
  if (f.n_learners_opt && f.n_learners_opt->count()) config.n_learners = f.n_learners;
  if (f.alpha_opt && f.alpha_opt->count()) config.alpha = f.alpha;
  if (!f.mapping.empty()) config.mapping_path = f.mapping;
  if (!f.templates.empty()) config.templates_dir = f.templates;
  if (!f.lexicons.empty()) config.lexicon_dir = f.lexicons;
  if (!f.personas.empty()) config.personas_path = f.personas;
  if (!f.stopwords.empty()) config.stopwords_path = f.stopwords;
  if (f.backend_opt && f.backend_opt->count()) {
    config.generator.backend = sr::parse_backend(f.backend);
  }
  if (!f.endpoint.empty()) config.generator.endpoint = f.endpoint;
  if (f.max_parallel_opt && f.max_parallel_opt->count()) {
    config.generator.max_parallel = f.max_parallel;
  }
  if (f.timeout_opt && f.timeout_opt->count()) {
    config.generator.timeout_ms = f.timeout_ms;
    config.embedder.timeout_ms = f.timeout_ms;
  }
  if (f.embedder_backend_opt && f.embedder_backend_opt->count()) {
    config.embedder.backend = sr::parse_backend(f.embedder_backend);
  }
  if (!f.embedder_endpoint.empty()) config.embedder.endpoint = f.embedder_endpoint;
  if (f.dimension_opt && f.dimension_opt->count()) config.embedder.dimension = f.dimension;
  if (!f.out.empty()) config.output = f.out;
  return config;
}

void print_state(const sr::LearnerState& s, const sr::PersonaTable& personas) {
  std::printf("%-16s count=%-4lld need=(%.3f, %.3f, %.3f) top_need=%-17s persona=%s\n",
              s.learner_id.c_str(), static_cast<long long>(s.interaction_count),
              s.need.performance, s.need.engagement, s.need.skill_progression,
              std::string(sr::to_string(s.dominant_need)).c_str(),
              personas.display(s.persona).c_str());
}

int cmd_synth(const CommonFlags& f) {
  auto config = build_config(f);
  if (config.n_questions < 1 || config.n_learners < 1) {
    sr::fail(sr::ErrorKind::kInvalidParameter, "n_questions and n_learners must be positive");
  }
  const auto events = sr::synthesize_interactions(
      sr::SynthConfig{config.seed, config.n_questions, config.n_learners});
  const auto path = f.out.empty() ? std::filesystem::path("interactions.jsonl")
                                  : std::filesystem::path(f.out);
  sr::write_file_atomic(path, sr::to_jsonl(events));
  std::printf("wrote %zu interactions to %s\n", events.size(), path.string().c_str());
  return kExitOk;
}

int cmd_ingest(const CommonFlags& f, const std::string& log_path, const std::string& store_path) {
  const auto config = build_config(f);
  const auto resources = sr::load_resources(config);
  auto store = sr::MemoryStore::open(store_path, resources.personas);

  const auto text = sr::read_file(log_path);
  const auto events = sr::parse_interaction_log(text);
  // parse_interaction_log skips blank lines; recover line numbers for errors.
  std::vector<std::size_t> line_numbers;
  {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      ++line_no;
      if (!sr::is_blank(std::string_view(text).substr(pos, end - pos))) {
        line_numbers.push_back(line_no);
      }
      pos = end + 1;
    }
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    try {
      store.apply_interaction(sr::make_interaction(e.learner_id, e.question_id,
                                                   e.question_text, e.timestamp,
                                                   resources.lexicons),
                              config.alpha);
    } catch (const sr::Error& err) {
      throw sr::annotate(err, "log line " + std::to_string(line_numbers[i]));
    }
  }
  store.flush();
  std::printf("applied %zu interactions; %zu learners in %s\n", events.size(), store.size(),
              store_path.c_str());
  for (const auto& [id, state] : store.states()) print_state(state, resources.personas);
  return kExitOk;
}

int cmd_recommend(const CommonFlags& f, const std::string& question,
                  const std::string& question_id, const std::string& learner_id,
                  const std::string& condition_name, const std::string& store_path) {
  auto config = build_config(f);
  config.generator.seed = config.seed;
  sr::validate(config.generator);
  const auto resources = sr::load_resources(config);
  const auto condition = sr::parse_condition(condition_name);

  sr::ConditionedPrompt prompt;
  if (condition == sr::Condition::kMemoryBased) {
    if (learner_id.empty()) {
      sr::fail(sr::ErrorKind::kMissingState, "memory-based recommendation needs --learner");
    }
    if (store_path.empty()) {
      sr::fail(sr::ErrorKind::kMissingState, "memory-based recommendation needs --store");
    }
    const auto store = sr::MemoryStore::open(store_path, resources.personas);
    const auto state = store.get_state(learner_id);
    if (!state) {
      sr::fail(sr::ErrorKind::kMissingState,
               "no stored state for learner '" + learner_id + "' in " + store_path);
    }
    prompt = sr::compose_prompt(condition, question, state,
                                sr::select_tactic(*state, resources.mapping),
                                resources.templates, resources.personas);
  } else {
    prompt = sr::compose_prompt(condition, question, std::nullopt, std::nullopt,
                                resources.templates, resources.personas);
  }

  const auto generator = sr::make_generator(config.generator, resources.stopwords);
  const auto rec = sr::generate(
      {prompt, question_id,
       learner_id.empty() ? std::nullopt : std::optional<std::string>(learner_id)},
      *generator);

  nlohmann::ordered_json doc;
  doc["text"] = rec.text;
  doc["condition"] = sr::to_string(rec.condition);
  doc["question_id"] = rec.question_id;
  doc["learner_id"] = rec.learner_id ? nlohmann::ordered_json(*rec.learner_id) : nullptr;
  doc["tactic"] = rec.tactic ? nlohmann::ordered_json(sr::to_string(*rec.tactic)) : nullptr;
  doc["backend_name"] = rec.backend_name;
  doc["prompt"] = prompt.rendered;
  std::cout << rec.text << "\n\n" << doc.dump(2) << "\n";
  return kExitOk;
}

int cmd_experiment(const CommonFlags& f, const std::string& log_path,
                   const std::string& items_out) {
  auto config = build_config(f);
  if (!log_path.empty()) config.input_log = log_path;
  if (!items_out.empty()) config.items_output = items_out;
  const auto outcome = sr::run_experiment(config);
  std::cout << sr::summarize(outcome.report);
  std::cout << "report written to " << config.output.string() << "\n";
  return kExitOk;
}

int cmd_diagnose(const CommonFlags& f, const std::string& items_path) {
  const auto content = sr::read_file(items_path);
  const auto items = sr::items_from_jsonl(content);
  auto report = sr::compare_conditions(items);
  report.config_digest = "items:fnv1a64:" + sr::to_hex(sr::fnv1a64(content));
  const auto out = f.out.empty() ? std::filesystem::path("report.json")
                                 : std::filesystem::path(f.out);
  sr::write_file_atomic(out, sr::report_to_json(report));
  std::cout << sr::summarize(report);
  std::cout << "report written to " << out.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual vs memory-based conditioning for teacher-facing recommendations"};
  app.require_subcommand(1);

  // One flag set per subcommand; the option pointers must not be shared.
  CommonFlags synth_flags, ingest_flags, recommend_flags, experiment_flags, diagnose_flags;
  std::string log_path;
  std::string store_path;
  std::string items_path;
  std::string items_out;
  std::string question;
  std::string question_id = "adhoc";
  std::string learner_id;
  std::string condition = "contextual";

  auto add_sizes = [](CLI::App* cmd, CommonFlags& flags) {
    flags.seed_opt = cmd->add_option("--seed", flags.seed, "PRNG seed (default 42)");
    flags.n_questions_opt =
        cmd->add_option("--n-questions", flags.n_questions, "questions (default 50)");
    flags.n_learners_opt =
        cmd->add_option("--n-learners", flags.n_learners, "learners (default 20)");
  };

  auto* synth = app.add_subcommand("synth", "write a seeded synthetic interaction log");
  synth->add_option("--config", synth_flags.config, "experiment config (JSON)");
  add_sizes(synth, synth_flags);
  synth->add_option("--out", synth_flags.out, "output JSONL (default interactions.jsonl)");

  auto* ingest = app.add_subcommand("ingest", "apply an interaction log to a learner store");
  ingest->add_option("--config", ingest_flags.config, "experiment config (JSON)");
  ingest->add_option("--log", log_path, "interaction log (JSONL)")->required();
  ingest->add_option("--store", store_path, "learner state store (JSONL)")->required();
  ingest_flags.alpha_opt =
      ingest->add_option("--alpha", ingest_flags.alpha, "update rate in (0, 1]");
  add_resource_flags(ingest, ingest_flags);

  auto* recommend = app.add_subcommand("recommend", "generate one recommendation");
  recommend->add_option("--config", recommend_flags.config, "experiment config (JSON)");
  recommend->add_option("--question", question, "student question")->required();
  recommend->add_option("--question-id", question_id, "question identifier");
  recommend->add_option("--learner", learner_id, "learner identifier");
  recommend->add_option("--condition", condition, "conditioning")
      ->check(CLI::IsMember({"contextual", "memory"}));
  recommend->add_option("--store", store_path, "learner state store (JSONL)");
  recommend_flags.seed_opt =
      recommend->add_option("--seed", recommend_flags.seed, "stub generator seed");
  add_resource_flags(recommend, recommend_flags);
  add_backend_flags(recommend, recommend_flags);

  auto* experiment = app.add_subcommand("experiment", "run the two-condition experiment");
  experiment->add_option("--config", experiment_flags.config, "experiment config (JSON)");
  add_sizes(experiment, experiment_flags);
  experiment_flags.alpha_opt =
      experiment->add_option("--alpha", experiment_flags.alpha, "update rate in (0, 1]");
  experiment->add_option("--log", log_path, "analyze this log instead of a synthetic one");
  experiment->add_option("--out", experiment_flags.out, "report path (default report.json)");
  experiment->add_option("--items-out", items_out, "also write matched items (JSONL)");
  add_resource_flags(experiment, experiment_flags);
  add_backend_flags(experiment, experiment_flags);

  auto* diagnose = app.add_subcommand("diagnose", "re-run the comparison on saved items");
  diagnose->add_option("--items", items_path, "matched items (JSONL)")->required();
  diagnose->add_option("--out", diagnose_flags.out, "report path (default report.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*synth) return cmd_synth(synth_flags);
    if (*ingest) return cmd_ingest(ingest_flags, log_path, store_path);
    if (*recommend) {
      return cmd_recommend(recommend_flags, question, question_id, learner_id, condition,
                           store_path);
    }
    if (*experiment) return cmd_experiment(experiment_flags, log_path, items_out);
    if (*diagnose) return cmd_diagnose(diagnose_flags, items_path);
  } catch (const sr::Error& e) {
    std::cerr << "error [" << sr::to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}
