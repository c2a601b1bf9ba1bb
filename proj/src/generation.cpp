#include "statefulrec/generation.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "http_json.hpp"
#include "statefulrec/random.hpp"
#include "statefulrec/text.hpp"

namespace statefulrec {

namespace {

constexpr const char* kDefaultStopwords[] = {
    "a",       "about",  "above", "after",  "again", "against", "all",     "also",
    "am",      "an",     "and",   "any",    "are",   "as",      "at",      "be",
    "because", "been",   "before", "being", "below", "between", "both",    "but",
    "by",      "can",    "could", "did",    "do",    "does",    "doing",   "down",
    "during",  "each",   "few",   "for",    "from",  "further", "get",     "got",
    "had",     "has",    "have",  "having", "he",    "her",     "here",    "hers",
    "him",     "his",    "how",   "i",      "if",    "in",      "into",    "is",
    "it",      "its",    "just",  "me",     "more",  "most",    "my",      "myself",
    "no",      "nor",    "not",   "now",    "of",    "off",     "on",      "once",
    "only",    "or",     "other", "our",    "ours",  "out",     "over",    "own",
    "s",       "same",   "she",   "should", "so",    "some",    "such",    "t",
    "than",    "that",   "the",   "their",  "theirs", "them",   "then",    "there",
    "these",   "they",   "this",  "those",  "through", "to",    "too",     "under",
    "until",   "up",     "very",  "was",    "we",    "were",    "what",    "when",
    "where",   "which",  "while", "who",    "whom",  "why",     "will",    "with",
    "would",   "you",    "your",  "yours",  "yourself",
};

std::string join(const std::vector<std::string>& words, std::string_view fallback) {
  if (words.empty()) return std::string(fallback);
  std::string out;
  for (const auto& word : words) {
    if (!out.empty()) out.push_back(' ');
    out.append(word);
  }
  return out;
}

// Closing sentences; one is picked per prompt from (rendered, seed).
constexpr std::string_view kFeedUpClosers[] = {
    "Revisit the learning objective at the start of the next session.",
    "Link the task explicitly to the upcoming assignment goals.",
    "Check that the success criteria for the task are explicit.",
};
constexpr std::string_view kFeedBackClosers[] = {
    "Confirm mastery with one targeted check question.",
    "Record which mastery criteria are already met.",
    "Follow up with a short accuracy check next session.",
};
constexpr std::string_view kFeedForwardClosers[] = {
    "Suggest one follow-up exercise for the coming week.",
    "Plan a short checkpoint to monitor progress.",
    "Recommend a scaffolded extension task.",
};

}  // namespace

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::kStub ? "stub" : "http";
}

BackendKind parse_backend(std::string_view name) {
  if (name == "stub") return BackendKind::kStub;
  if (name == "http") return BackendKind::kHttp;
  fail(ErrorKind::kInvalidConfiguration, "unknown backend '" + std::string(name) + "'");
}

void validate(const GeneratorConfig& config) {
  if (config.backend == BackendKind::kHttp && (!config.endpoint || config.endpoint->empty())) {
    fail(ErrorKind::kInvalidConfiguration, "http generator requires an endpoint");
  }
  if (config.max_parallel < 1) {
    fail(ErrorKind::kInvalidConfiguration, "max_parallel must be positive");
  }
  if (config.timeout_ms < 1) {
    fail(ErrorKind::kInvalidConfiguration, "timeout must be positive");
  }
}

// ---------------------------------------------------------------------------
// Stopwords

Stopwords Stopwords::defaults() {
  return from_words(std::vector<std::string>(std::begin(kDefaultStopwords),
                                             std::end(kDefaultStopwords)));
}

Stopwords Stopwords::load(const std::filesystem::path& path) {
  return from_words(parse_word_list(read_file(path)));
}

Stopwords Stopwords::from_words(const std::vector<std::string>& words) {
  Stopwords stopwords;
  for (const auto& word : words) {
    for (auto& token : tokenize(word)) stopwords.words_.insert(std::move(token));
  }
  return stopwords;
}

std::vector<std::string> Stopwords::content_words(std::string_view text,
                                                  std::size_t limit) const {
  std::vector<std::string> out;
  for (auto& token : tokenize(text)) {
    if (out.size() == limit) break;
    if (!contains(token)) out.push_back(std::move(token));
  }
  return out;
}

std::vector<std::string> Stopwords::sorted() const {
  std::vector<std::string> out(words_.begin(), words_.end());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Backends

StubGenerator::StubGenerator(std::uint64_t seed, Stopwords stopwords)
    : seed_(seed), stopwords_(std::move(stopwords)) {}

std::string StubGenerator::complete(const ConditionedPrompt& prompt) const {
  validate(prompt);
  if (prompt.condition == Condition::kContextual) {
    const auto words = stopwords_.content_words(prompt.question_text, kContextualWords);
    return "Have the student justify: " + join(words, "their answer") +
           " using a claim–evidence–reasoning structure.";
  }

  const auto& learner = *prompt.learner;
  const std::string persona = learner.persona;
  const std::string top_need(to_string(learner.dominant_need));
  const std::string focus =
      join(stopwords_.content_words(prompt.question_text, kMemoryWords), "the current task");

  std::uint64_t mix = fnv1a64(prompt.rendered) ^ seed_;
  const auto pick = splitmix64(mix) % 3;

  switch (*prompt.tactic) {
    case Tactic::kFeedUp:
      return "Clarify the purpose of the task for this " + persona +
             " learner, whose top need is " + top_need + ": explain why " + focus +
             " matters in the course context and ask the student to restate the goal in "
             "their own words. " +
             std::string(kFeedUpClosers[pick]);
    case Tactic::kFeedBack:
      return "Provide accuracy-based feedback relative to course mastery thresholds for this " +
             persona + " learner, whose top need is " + top_need +
             ": identify the specific misconception about " + focus +
             " and highlight concepts already mastered. " + std::string(kFeedBackClosers[pick]);
    case Tactic::kFeedForward:
      return "Give this " + persona + " learner, whose top need is " + top_need +
             ", concrete next action steps: practice " + focus +
             " on a worked example, then apply it to a new problem. " +
             std::string(kFeedForwardClosers[pick]);
  }
  return {};
}

HttpGenerator::HttpGenerator(std::string endpoint, int timeout_ms)
    : endpoint_(std::move(endpoint)),
      timeout_ms_(timeout_ms),
      token_(detail::token_from_environment()) {
  detail::parse_endpoint(endpoint_);
}

std::string HttpGenerator::complete(const ConditionedPrompt& prompt) const {
  validate(prompt);
  const auto response = detail::post_json(detail::parse_endpoint(endpoint_),
                                          {{"prompt", prompt.rendered}}, timeout_ms_, token_);
  if (!response.is_object() || !response.contains("text") || !response["text"].is_string()) {
    throw BackendError(200, "response body lacks a string 'text' field");
  }
  auto text = response["text"].get<std::string>();
  if (is_blank(text)) throw BackendError(200, "backend returned empty text");
  return text;
}

std::unique_ptr<Generator> make_generator(const GeneratorConfig& config, Stopwords stopwords) {
  validate(config);
  if (config.backend == BackendKind::kHttp) {
    return std::make_unique<HttpGenerator>(*config.endpoint, config.timeout_ms);
  }
  return std::make_unique<StubGenerator>(config.seed, std::move(stopwords));
}

// ---------------------------------------------------------------------------
// Contract

void validate(const ConditionedPrompt& prompt) {
  if (is_blank(prompt.question_text)) fail(ErrorKind::kInvalidInput, "question text is empty");
  const bool memory = prompt.condition == Condition::kMemoryBased;
  if (memory != prompt.learner.has_value() || memory != prompt.tactic.has_value()) {
    fail(ErrorKind::kContractViolation,
         "prompt fields do not match condition " + std::string(to_string(prompt.condition)));
  }
}

Recommendation generate(const GenerationRequest& request, const Generator& generator) {
  Recommendation rec;
  rec.text = generator.complete(request.prompt);
  if (is_blank(rec.text)) throw BackendError(0, "generator produced empty text");
  rec.condition = request.prompt.condition;
  rec.question_id = request.question_id;
  // Contextual recommendations carry no learner-specific fields.
  if (rec.condition == Condition::kMemoryBased) {
    rec.learner_id = request.learner_id;
    rec.tactic = request.prompt.tactic;
  }
  rec.backend_name = generator.name();
  return rec;
}

BatchError::BatchError(std::vector<BatchFailure> failures,
                       std::vector<std::optional<Recommendation>> results)
    : BackendError(failures.empty() ? 0 : failures.front().status,
                   [&failures] {
                     std::string msg = "batch generation failed at indices";
                     for (const auto& f : failures) msg += " " + std::to_string(f.index);
                     if (!failures.empty()) msg += " (first: " + failures.front().message + ")";
                     return msg;
                   }()),
      failures_(std::move(failures)),
      results_(std::move(results)) {}

std::vector<Recommendation> generate_batch(std::span<const GenerationRequest> requests,
                                           const Generator& generator, int max_parallel) {
  if (requests.empty()) fail(ErrorKind::kInvalidInput, "batch is empty");
  if (max_parallel < 1) fail(ErrorKind::kInvalidConfiguration, "max_parallel must be positive");

  const std::size_t n = requests.size();
  std::vector<std::optional<Recommendation>> results(n);
  std::vector<std::optional<BatchFailure>> failures(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        results[i] = generate(requests[i], generator);
      } catch (const BackendError& e) {
        failures[i] = BatchFailure{i, e.status(), e.what()};
      } catch (const std::exception& e) {
        failures[i] = BatchFailure{i, 0, e.what()};
      }
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(max_parallel), n);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::vector<BatchFailure> failed;
  for (auto& f : failures) {
    if (f) failed.push_back(std::move(*f));
  }
  if (!failed.empty()) throw BatchError(std::move(failed), std::move(results));

  std::vector<Recommendation> out;
  out.reserve(n);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace statefulrec
