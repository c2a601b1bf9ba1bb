#include "statefulrec/synth.hpp"

#include <array>
#include <cstdio>

#include <json.hpp>

#include "statefulrec/error.hpp"
#include "statefulrec/random.hpp"
#include "statefulrec/text.hpp"

namespace statefulrec {

namespace {

constexpr std::int64_t kMinuteMs = 60'000;

// Templates per need, in canonical need order. Each template carries words of
// its own lexicon only.
constexpr std::array<std::array<std::string_view, 6>, 3> kQuestionBank = {{
    {{
        "Is my answer about {topic} correct according to the rubric?",
        "What grade would my {topic} solution get on the exam?",
        "Will the exam score depend on the {topic} part of the rubric?",
        "Did I get the {topic} problem correct on the quiz?",
        "Which rubric criteria did my {topic} submission miss for a better grade?",
        "Can you check whether my {topic} proof is correct before the exam?",
    }},
    {{
        "Why does {topic} matter for real software projects?",
        "I am curious about the meaning of {topic} beyond the lecture.",
        "What is the relevance of {topic} to my career?",
        "Why should I be interested in {topic} at all?",
        "I am curious why {topic} was invented in the first place.",
        "What deeper meaning does {topic} have for cognitive systems?",
    }},
    {{
        "How do I practice {topic} before the next assignment?",
        "What are the next steps to apply {topic} in my project?",
        "How can I apply {topic} to a new problem?",
        "Which practice steps help me get better at {topic}?",
        "How should I practice {topic} after this module?",
        "What steps come next once I understand {topic}?",
    }},
}};

constexpr std::array<std::string_view, 30> kTopics = {
    "recursion",                 "hash tables",
    "dynamic programming",       "binary search trees",
    "graph traversal",           "sorting algorithms",
    "memory management",         "concurrency control",
    "neural networks",           "gradient descent",
    "knowledge representation",  "semantic networks",
    "means ends analysis",       "case based reasoning",
    "production systems",        "frames and scripts",
    "constraint propagation",    "partial order planning",
    "version spaces",            "analogical reasoning",
    "bayesian inference",        "decision trees",
    "logic and resolution",      "learning by recording cases",
    "generate and test",         "incremental concept learning",
    "classification hierarchies", "diagnosis by abduction",
    "design by configuration",   "meta reasoning",
};

std::string fill(std::string_view tmpl, std::string_view topic) {
  std::string out(tmpl);
  const auto at = out.find("{topic}");
  out.replace(at, 7, topic);
  return out;
}

std::string padded_id(const char* prefix, std::size_t n) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%s%04zu", prefix, n);
  return buffer;
}

}  // namespace

std::vector<LogEvent> synthesize_interactions(const SynthConfig& config) {
  if (config.n_questions < 1) fail(ErrorKind::kInvalidParameter, "n_questions must be positive");
  if (config.n_learners < 1) fail(ErrorKind::kInvalidParameter, "n_learners must be positive");

  Xoshiro256 rng(config.seed);
  std::vector<std::array<double, 3>> tendencies(config.n_learners);
  for (auto& t : tendencies) {
    for (auto& component : t) component = rng.uniform();
  }

  std::vector<LogEvent> events;
  events.reserve(config.n_questions);
  std::int64_t clock = config.start_ms;
  for (std::size_t i = 0; i < config.n_questions; ++i) {
    const auto learner = (i + rng.below(3)) % config.n_learners;
    const auto& t = tendencies[learner];

    const double total = t[0] + t[1] + t[2];
    std::size_t need = 0;
    if (total > 0.0) {
      double draw = rng.uniform() * total;
      while (need < 2 && draw >= t[need]) draw -= t[need++];
    } else {
      need = rng.below(3);
    }
    const auto& templates = kQuestionBank[need];
    const auto tmpl = templates[rng.below(templates.size())];
    const auto topic = kTopics[rng.below(kTopics.size())];
    clock += 5 * kMinuteMs + static_cast<std::int64_t>(rng.below(175)) * kMinuteMs;

    events.push_back(LogEvent{padded_id("learner-", learner), padded_id("q", i),
                              fill(tmpl, topic), clock});
  }
  return events;
}

std::string to_jsonl(const std::vector<LogEvent>& events) {
  std::string out;
  for (const auto& event : events) {
    nlohmann::ordered_json line;
    line["learner_id"] = event.learner_id;
    line["question_id"] = event.question_id;
    line["question_text"] = event.question_text;
    line["timestamp"] = event.timestamp;
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<LogEvent> parse_interaction_log(std::string_view text) {
  std::vector<LogEvent> events;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (is_blank(line)) continue;
    try {
      const auto doc = nlohmann::json::parse(line);
      LogEvent event;
      event.learner_id = doc.at("learner_id").get<std::string>();
      event.question_id = doc.at("question_id").get<std::string>();
      event.question_text = doc.at("question_text").get<std::string>();
      const auto& ts = doc.at("timestamp");
      if (!ts.is_number_integer()) {
        fail(ErrorKind::kInvalidInput, "timestamp must be an integer");
      }
      event.timestamp = ts.get<std::int64_t>();
      if (event.learner_id.empty() || event.question_id.empty()) {
        fail(ErrorKind::kInvalidInput, "learner_id and question_id must be non-empty");
      }
      if (is_blank(event.question_text)) {
        fail(ErrorKind::kInvalidInput, "question_text is empty");
      }
      events.push_back(std::move(event));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kInvalidInput, "log line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw annotate(e, "log line " + std::to_string(line_no));
    }
  }
  return events;
}

std::vector<LogEvent> read_interaction_log(const std::filesystem::path& path) {
  return parse_interaction_log(read_file(path));
}

}  // namespace statefulrec
