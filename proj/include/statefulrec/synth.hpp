#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace statefulrec {

// One line of an interaction log.
struct LogEvent {
  std::string learner_id;
  std::string question_id;
  std::string question_text;
  std::int64_t timestamp = 0;

  friend bool operator==(const LogEvent&, const LogEvent&) = default;
};

struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t n_questions = 50;
  std::size_t n_learners = 20;
  std::int64_t start_ms = 1'700'000'000'000;
};

// Seeded synthetic corpus. All randomness comes from one Xoshiro256 stream
// (xoshiro256**, splitmix64-seeded) consumed in this order:
//   1. per learner: three uniform need tendencies (performance, engagement,
//      skill_progression);
//   2. per question i: learner = (i + below(3)) mod n_learners, then a need
//      drawn in proportion to that learner's tendencies, a template of that
//      need, a topic, and a gap of 5 minutes plus below(175) minutes after the
//      previous question.
// Questions come from a bank keyed to the need lexicons, so the learner signal
// is recoverable from the text.
std::vector<LogEvent> synthesize_interactions(const SynthConfig& config);

std::string to_jsonl(const std::vector<LogEvent>& events);

// Parses an interaction log (learner_id, question_id, question_text,
// timestamp per line). Errors name the offending line.
std::vector<LogEvent> parse_interaction_log(std::string_view text);
std::vector<LogEvent> read_interaction_log(const std::filesystem::path& path);

}  // namespace statefulrec
