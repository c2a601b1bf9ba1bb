#include "statefulrec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include <json.hpp>

#include "statefulrec/error.hpp"
#include "statefulrec/memory_store.hpp"
#include "statefulrec/random.hpp"
#include "statefulrec/report.hpp"
#include "statefulrec/text.hpp"

namespace statefulrec {

namespace {

using ordered_json = nlohmann::ordered_json;

template <typename Fn>
auto run_stage(std::string_view stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw annotate(e, "stage " + std::string(stage));
  }
}

void require_exists(const std::optional<std::filesystem::path>& path, const char* what) {
  if (path && !std::filesystem::exists(*path)) {
    fail(ErrorKind::kInvalidConfiguration,
         std::string(what) + " not found: " + path->string());
  }
}

std::vector<EmbeddingVector> embed_all(const std::vector<std::string>& texts,
                                       const Embedder& embedder, int max_parallel) {
  std::vector<std::optional<EmbeddingVector>> slots(texts.size());
  std::vector<std::exception_ptr> errors(texts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < texts.size(); i = next.fetch_add(1)) {
      try {
        slots[i] = embedder.embed(texts[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, max_parallel)), texts.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  std::vector<EmbeddingVector> out;
  out.reserve(slots.size());
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

std::optional<std::filesystem::path> optional_path(const ordered_json& doc, const char* key,
                                                   std::optional<std::filesystem::path> fallback) {
  if (!doc.contains(key) || doc[key].is_null()) return fallback;
  return std::filesystem::path(doc[key].get<std::string>());
}

ordered_json path_json(const std::optional<std::filesystem::path>& path) {
  return path ? ordered_json(path->string()) : ordered_json(nullptr);
}

double l1_distance(const NeedVector& a, const NeedVector& b) {
  return std::fabs(a.performance - b.performance) + std::fabs(a.engagement - b.engagement) +
         std::fabs(a.skill_progression - b.skill_progression);
}

}  // namespace

void validate(const ExperimentConfig& config) {
  if (config.n_questions < 2) fail(ErrorKind::kInvalidParameter, "n_questions must be >= 2");
  if (config.n_learners < 1) fail(ErrorKind::kInvalidParameter, "n_learners must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha <= 1.0)) {
    fail(ErrorKind::kInvalidParameter, "alpha must lie in (0, 1]");
  }
  validate(config.generator);
  validate(config.embedder);
  require_exists(config.mapping_path, "mapping table");
  require_exists(config.templates_dir, "template directory");
  require_exists(config.lexicon_dir, "lexicon directory");
  require_exists(config.personas_path, "persona table");
  require_exists(config.stopwords_path, "stopword list");
  require_exists(config.input_log, "interaction log");
  if (config.output.empty()) fail(ErrorKind::kInvalidConfiguration, "output path is empty");
}

ExperimentConfig config_from_json(std::string_view text, ExperimentConfig base) {
  ExperimentConfig config = std::move(base);
  try {
    const auto doc = ordered_json::parse(text);
    if (!doc.is_object()) fail(ErrorKind::kInvalidConfiguration, "config must be a JSON object");
    config.seed = doc.value("seed", config.seed);
    config.n_questions = doc.value("n_questions", config.n_questions);
    config.n_learners = doc.value("n_learners", config.n_learners);
    config.alpha = doc.value("alpha", config.alpha);
    config.mapping_path = optional_path(doc, "mapping", config.mapping_path);
    config.templates_dir = optional_path(doc, "templates", config.templates_dir);
    config.lexicon_dir = optional_path(doc, "lexicons", config.lexicon_dir);
    config.personas_path = optional_path(doc, "personas", config.personas_path);
    config.stopwords_path = optional_path(doc, "stopwords", config.stopwords_path);
    config.input_log = optional_path(doc, "input_log", config.input_log);
    config.items_output = optional_path(doc, "items_output", config.items_output);
    if (doc.contains("output")) config.output = doc["output"].get<std::string>();
    if (doc.contains("generator")) {
      const auto& g = doc["generator"];
      if (g.contains("backend")) {
        config.generator.backend = parse_backend(g["backend"].get<std::string>());
      }
      if (g.contains("endpoint") && !g["endpoint"].is_null()) {
        config.generator.endpoint = g["endpoint"].get<std::string>();
      }
      config.generator.timeout_ms = g.value("timeout_ms", config.generator.timeout_ms);
      config.generator.max_parallel = g.value("max_parallel", config.generator.max_parallel);
    }
    if (doc.contains("embedder")) {
      const auto& e = doc["embedder"];
      if (e.contains("backend")) {
        config.embedder.backend = parse_backend(e["backend"].get<std::string>());
      }
      if (e.contains("endpoint") && !e["endpoint"].is_null()) {
        config.embedder.endpoint = e["endpoint"].get<std::string>();
      }
      config.embedder.dimension = e.value("dimension", config.embedder.dimension);
      config.embedder.timeout_ms = e.value("timeout_ms", config.embedder.timeout_ms);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidConfiguration, std::string("config: ") + e.what());
  }
  return config;
}

std::string config_to_json(const ExperimentConfig& config) {
  ordered_json doc;
  doc["seed"] = config.seed;
  doc["n_questions"] = config.n_questions;
  doc["n_learners"] = config.n_learners;
  doc["alpha"] = config.alpha;
  doc["mapping"] = path_json(config.mapping_path);
  doc["templates"] = path_json(config.templates_dir);
  doc["lexicons"] = path_json(config.lexicon_dir);
  doc["personas"] = path_json(config.personas_path);
  doc["stopwords"] = path_json(config.stopwords_path);
  doc["input_log"] = path_json(config.input_log);
  doc["generator"] = {{"backend", to_string(config.generator.backend)},
                      {"endpoint", config.generator.endpoint
                                       ? ordered_json(*config.generator.endpoint)
                                       : ordered_json(nullptr)},
                      {"timeout_ms", config.generator.timeout_ms},
                      {"max_parallel", config.generator.max_parallel}};
  doc["embedder"] = {{"backend", to_string(config.embedder.backend)},
                     {"endpoint", config.embedder.endpoint ? ordered_json(*config.embedder.endpoint)
                                                           : ordered_json(nullptr)},
                     {"dimension", config.embedder.dimension},
                     {"timeout_ms", config.embedder.timeout_ms}};
  doc["output"] = config.output.string();
  doc["items_output"] = path_json(config.items_output);
  return doc.dump(2);
}

Resources load_resources(const ExperimentConfig& config) {
  Resources resources;
  if (config.lexicon_dir) resources.lexicons = Lexicons::load(*config.lexicon_dir);
  if (config.personas_path) resources.personas = PersonaTable::load(*config.personas_path);
  if (config.mapping_path) resources.mapping = TacticMapping::load(*config.mapping_path);
  if (config.templates_dir) resources.templates = PromptTemplates::load(*config.templates_dir);
  if (config.stopwords_path) resources.stopwords = Stopwords::load(*config.stopwords_path);
  return resources;
}

std::string config_digest(const ExperimentConfig& config, const Resources& resources,
                          std::string_view corpus) {
  ordered_json doc;
  doc["seed"] = config.seed;
  doc["n_questions"] = config.n_questions;
  doc["n_learners"] = config.n_learners;
  doc["alpha"] = config.alpha;
  doc["generator"] = {{"backend", to_string(config.generator.backend)},
                      {"endpoint", config.generator.endpoint.value_or("")}};
  doc["embedder"] = {{"backend", to_string(config.embedder.backend)},
                     {"endpoint", config.embedder.endpoint.value_or("")},
                     {"dimension", config.embedder.dimension}};
  doc["mapping"] = resources.mapping.to_json_text();
  doc["templates"] = {resources.templates.contextual, resources.templates.memory};
  for (const Need need : kAllNeeds) {
    doc["lexicons"][std::string(to_string(need))] = resources.lexicons.words(need);
  }
  doc["personas"] = resources.personas.to_json_text();
  doc["stopwords"] = resources.stopwords.sorted();
  doc["corpus"] = to_hex(fnv1a64(corpus));
  return "fnv1a64:" + to_hex(fnv1a64(doc.dump()));
}

std::vector<std::size_t> sample_indices(std::size_t size, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> pool(size);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  if (n >= size) return pool;
  // Partial Fisher-Yates on a stream separate from the corpus generator.
  Xoshiro256 rng(seed ^ 0x5a4d504c45ULL);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + rng.below(size - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::optional<std::pair<LearnerState, LearnerState>> most_distinct_pair(
    const std::vector<LearnerState>& states) {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  bool best_differs = false;
  double best_distance = -1.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      const bool differs = states[i].dominant_need != states[j].dominant_need;
      const double distance = l1_distance(states[i].need, states[j].need);
      if (!best || (differs && !best_differs) ||
          (differs == best_differs && distance > best_distance)) {
        best = {i, j};
        best_differs = differs;
        best_distance = distance;
      }
    }
  }
  if (!best) return std::nullopt;
  return std::pair{states[best->first], states[best->second]};
}

ExperimentOutcome run_experiment(const ExperimentConfig& input) {
  ExperimentConfig config = input;
  config.generator.seed = config.seed;

  const Resources resources = run_stage("config", [&] {
    validate(config);
    return load_resources(config);
  });

  const auto events = run_stage("corpus", [&] {
    if (config.input_log) return read_interaction_log(*config.input_log);
    return synthesize_interactions(
        SynthConfig{config.seed, config.n_questions, config.n_learners});
  });
  const std::string corpus = to_jsonl(events);

  // Replay the log in order. Each sampled question is conditioned on the state
  // as it was before that question, then the interaction is applied.
  std::vector<GenerationRequest> contextual_requests;
  std::vector<GenerationRequest> memory_requests;
  std::vector<std::string> question_texts;
  MemoryStore store = MemoryStore::in_memory(resources.personas);
  run_stage("replay", [&] {
    const auto sampled = sample_indices(events.size(), config.n_questions, config.seed);
    if (sampled.size() < 2) {
      fail(ErrorKind::kInvalidInput, "corpus has fewer than two questions");
    }
    std::set<std::string> seen_ids;
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& event = events[i];
      const auto record = make_interaction(event.learner_id, event.question_id,
                                           event.question_text, event.timestamp,
                                           resources.lexicons);
      if (cursor < sampled.size() && sampled[cursor] == i) {
        ++cursor;
        if (!seen_ids.insert(event.question_id).second) {
          fail(ErrorKind::kInvalidInput, "duplicate question_id " + event.question_id);
        }
        const auto state =
            store.get_state(event.learner_id)
                .value_or(initial_state(event.learner_id, resources.personas));
        contextual_requests.push_back(
            {compose_prompt(Condition::kContextual, event.question_text, std::nullopt,
                            std::nullopt, resources.templates, resources.personas),
             event.question_id, std::nullopt});
        memory_requests.push_back(
            {compose_prompt(Condition::kMemoryBased, event.question_text, state,
                            select_tactic(state, resources.mapping), resources.templates,
                            resources.personas),
             event.question_id, event.learner_id});
        question_texts.push_back(event.question_text);
      }
      store.apply_interaction(record, config.alpha);
    }
    return 0;
  });

  const auto generator = run_stage("generate", [&] {
    return make_generator(config.generator, resources.stopwords);
  });
  const auto [contextual_recs, memory_recs] = run_stage("generate", [&] {
    return std::pair{
        generate_batch(contextual_requests, *generator, config.generator.max_parallel),
        generate_batch(memory_requests, *generator, config.generator.max_parallel)};
  });

  const auto embedder = run_stage("embed", [&] { return make_embedder(config.embedder); });
  std::vector<MatchedItem> items = run_stage("embed", [&] {
    std::vector<std::string> rec_texts;
    for (const auto& rec : contextual_recs) rec_texts.push_back(rec.text);
    for (const auto& rec : memory_recs) rec_texts.push_back(rec.text);
    const auto parallel = config.generator.max_parallel;
    const auto question_vecs = embed_all(question_texts, *embedder, parallel);
    const auto rec_vecs = embed_all(rec_texts, *embedder, parallel);
    const auto n = question_texts.size();
    std::vector<MatchedItem> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back({contextual_recs[i].question_id, question_vecs[i], rec_vecs[i],
                     rec_vecs[n + i]});
    }
    std::stable_sort(out.begin(), out.end(), [](const MatchedItem& a, const MatchedItem& b) {
      return a.question_id < b.question_id;
    });
    return out;
  });

  DiagnosticsReport report = run_stage("compare", [&] { return compare_conditions(items); });

  report.divergence = run_stage("divergence", [&]() -> std::optional<DivergenceSummary> {
    std::vector<LearnerState> finals;
    for (const auto& [id, state] : store.states()) finals.push_back(state);
    const auto pair = most_distinct_pair(finals);
    if (!pair) return std::nullopt;
    const auto& first = items.front();
    const auto text_it = std::find_if(
        contextual_requests.begin(), contextual_requests.end(),
        [&first](const GenerationRequest& r) { return r.question_id == first.question_id; });
    const ProbeContext context{resources.templates, resources.mapping, resources.personas,
                               *generator, *embedder};
    return divergence_probe(first.question_id, text_it->prompt.question_text, *pair, context);
  });

  report.config_digest = config_digest(config, resources, corpus);

  ExperimentOutcome outcome;
  outcome.report_json = report_to_json(report);
  run_stage("write", [&] {
    if (config.items_output) write_file_atomic(*config.items_output, items_to_jsonl(items));
    write_file_atomic(config.output, outcome.report_json);
    return 0;
  });
  outcome.report = std::move(report);
  outcome.items = std::move(items);
  return outcome;
}

}  // namespace statefulrec
