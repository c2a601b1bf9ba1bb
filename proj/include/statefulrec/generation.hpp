#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "statefulrec/conditioning.hpp"
#include "statefulrec/error.hpp"

namespace statefulrec {

enum class BackendKind { kStub, kHttp };

std::string_view to_string(BackendKind kind);
BackendKind parse_backend(std::string_view name);

inline constexpr const char* kApiTokenEnv = "STATEFULREC_API_TOKEN";

struct GeneratorConfig {
  BackendKind backend = BackendKind::kStub;
  std::optional<std::string> endpoint;
  int timeout_ms = 30'000;
  int max_parallel = 4;
  std::uint64_t seed = 0;
};

// Throws Error(kInvalidConfiguration).
void validate(const GeneratorConfig& config);

struct Recommendation {
  std::string text;
  Condition condition = Condition::kContextual;
  std::string question_id;
  std::optional<std::string> learner_id;
  std::optional<Tactic> tactic;
  std::string backend_name;

  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

struct GenerationRequest {
  ConditionedPrompt prompt;
  std::string question_id;
  std::optional<std::string> learner_id;
};

class Stopwords {
 public:
  static Stopwords defaults();
  static Stopwords load(const std::filesystem::path& path);
  static Stopwords from_words(const std::vector<std::string>& words);

  bool contains(const std::string& token) const { return words_.contains(token); }
  // Question tokens that are not stopwords, in order, at most `limit`.
  std::vector<std::string> content_words(std::string_view text, std::size_t limit) const;
  std::vector<std::string> sorted() const;

 private:
  std::unordered_set<std::string> words_;
};

// One generation contract, several backends. Implementations are safe to call
// concurrently.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string complete(const ConditionedPrompt& prompt) const = 0;
  virtual std::string name() const = 0;
};

// Deterministic offline generator. Contextual prompts get a text built only
// from question content words; memory-based prompts get a tactic-specific text
// that interleaves persona and top need with a few question words. Output is a
// pure function of the prompt and the seed.
class StubGenerator final : public Generator {
 public:
  static constexpr std::size_t kContextualWords = 12;
  static constexpr std::size_t kMemoryWords = 6;

  explicit StubGenerator(std::uint64_t seed, Stopwords stopwords = Stopwords::defaults());

  std::string complete(const ConditionedPrompt& prompt) const override;
  std::string name() const override { return "stub"; }

 private:
  std::uint64_t seed_;
  Stopwords stopwords_;
};

// POSTs {"prompt": rendered} and expects {"text": "..."} back. Sends a bearer
// token when STATEFULREC_API_TOKEN is set at construction time.
class HttpGenerator final : public Generator {
 public:
  HttpGenerator(std::string endpoint, int timeout_ms);

  std::string complete(const ConditionedPrompt& prompt) const override;
  std::string name() const override { return "http"; }

 private:
  std::string endpoint_;
  int timeout_ms_;
  std::optional<std::string> token_;
};

std::unique_ptr<Generator> make_generator(const GeneratorConfig& config,
                                          Stopwords stopwords = Stopwords::defaults());

// Throws Error(kContractViolation) when condition and optional fields disagree.
void validate(const ConditionedPrompt& prompt);

Recommendation generate(const GenerationRequest& request, const Generator& generator);

struct BatchFailure {
  std::size_t index = 0;
  int status = 0;
  std::string message;
};

class BatchError : public BackendError {
 public:
  BatchError(std::vector<BatchFailure> failures,
             std::vector<std::optional<Recommendation>> results);

  const std::vector<BatchFailure>& failures() const { return failures_; }
  // Successful items keep their slot; failed slots are empty.
  const std::vector<std::optional<Recommendation>>& results() const { return results_; }

 private:
  std::vector<BatchFailure> failures_;
  std::vector<std::optional<Recommendation>> results_;
};

// Output order matches input order. At most `max_parallel` requests are in
// flight at any time. Returns once every item has resolved.
std::vector<Recommendation> generate_batch(std::span<const GenerationRequest> requests,
                                           const Generator& generator, int max_parallel);

}  // namespace statefulrec
