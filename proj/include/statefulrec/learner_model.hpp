#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace statefulrec {

inline constexpr double kDefaultAlpha = 0.2;

// Instructional needs in canonical order. The order is load-bearing: it is the
// component order of NeedVector and the argmax tie-break order.
enum class Need { kPerformance = 0, kEngagement = 1, kSkillProgression = 2 };

inline constexpr std::array<Need, 3> kAllNeeds = {
    Need::kPerformance, Need::kEngagement, Need::kSkillProgression};

// "performance", "engagement", "skill_progression".
std::string_view to_string(Need need);
std::optional<Need> try_parse_need(std::string_view name);
Need parse_need(std::string_view name);

struct NeedVector {
  double performance = 1.0 / 3.0;
  double engagement = 1.0 / 3.0;
  double skill_progression = 1.0 / 3.0;

  static NeedVector uniform() { return {}; }

  double operator[](Need need) const;
  std::array<double, 3> components() const {
    return {performance, engagement, skill_progression};
  }

  friend bool operator==(const NeedVector&, const NeedVector&) = default;
};

bool is_valid(const NeedVector& need);

// Validated constructor; throws Error(kInvalidInput) on non-finite or
// out-of-range components.
NeedVector make_need_vector(double performance, double engagement,
                            double skill_progression);

struct PersonaLabel {
  std::string id;

  friend bool operator==(const PersonaLabel&, const PersonaLabel&) = default;
};

// Closed persona vocabulary plus the (dominant need, rate) -> persona table.
// The default table is:
//   engagement, rate >= 1/day  -> HelpSeekers
//   engagement, rate <  1/day  -> Balanced
//   performance                -> Performers
//   skill_progression          -> Explorers
class PersonaTable {
 public:
  struct Entry {
    std::string id;
    std::string display;
  };
  struct Rule {
    std::string at_or_above;
    std::string below;
  };

  static PersonaTable defaults();
  static PersonaTable from_json_text(std::string_view text);
  static PersonaTable load(const std::filesystem::path& path);

  std::string to_json_text() const;

  // Throws Error(kInvalidInput) for labels outside the vocabulary.
  PersonaLabel parse(std::string_view id) const;
  bool contains(std::string_view id) const;
  const std::string& display(const PersonaLabel& label) const;

  PersonaLabel assign(Need dominant, double questions_per_day) const;
  PersonaLabel initial() const { return PersonaLabel{initial_}; }
  double rate_threshold() const { return rate_threshold_; }
  const std::vector<Entry>& vocabulary() const { return vocabulary_; }

 private:
  PersonaTable() = default;
  void validate() const;

  std::vector<Entry> vocabulary_;
  std::array<Rule, 3> rules_;
  double rate_threshold_ = 1.0;
  std::string initial_;
};

// Keyword lexicons used by classify_signal, one set per need.
class Lexicons {
 public:
  static Lexicons defaults();
  // Reads performance.lex, engagement.lex, skill_progression.lex from `dir`.
  static Lexicons load(const std::filesystem::path& dir);
  static Lexicons from_words(std::vector<std::string> performance,
                             std::vector<std::string> engagement,
                             std::vector<std::string> skill_progression);

  bool matches(Need need, const std::string& token) const;
  std::vector<std::string> words(Need need) const;  // sorted

 private:
  std::array<std::unordered_set<std::string>, 3> sets_;
};

struct InteractionRecord {
  std::string learner_id;
  std::string question_id;
  std::string question_text;
  std::int64_t timestamp = 0;  // ms since epoch
  NeedVector signal;
};

// Builds a record and derives its signal with classify_signal. Throws
// Error(kInvalidInput) for blank question text or empty identifiers.
InteractionRecord make_interaction(std::string learner_id,
                                   std::string question_id,
                                   std::string question_text,
                                   std::int64_t timestamp,
                                   const Lexicons& lexicons);

struct LearnerState {
  std::string learner_id;
  NeedVector need;
  Need dominant_need = Need::kPerformance;
  PersonaLabel persona;
  std::int64_t interaction_count = 0;
  std::int64_t updated_at = 0;

  friend bool operator==(const LearnerState&, const LearnerState&) = default;
};

// Uniform need, initial persona, zero interactions.
LearnerState initial_state(std::string learner_id, const PersonaTable& personas);

// Throws Error(kInvalidInput) when any learner-model invariant is broken.
void validate(const LearnerState& state, const PersonaTable& personas);

NeedVector classify_signal(std::string_view question_text,
                           const Lexicons& lexicons);

// Exponentially weighted update; alpha must lie in (0, 1].
NeedVector update_need_vector(const NeedVector& prior, const NeedVector& signal,
                              double alpha);

// Argmax with ties resolved in canonical order.
Need derive_dominant_need(const NeedVector& need);

// Throws Error(kInsufficientHistory) when the state has no interactions.
PersonaLabel assign_persona(const LearnerState& state, double questions_per_day,
                            const PersonaTable& personas);

}  // namespace statefulrec
