#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "statefulrec/learner_model.hpp"

namespace statefulrec {

// Pedagogical tactics (Hattie & Timperley feedback levels).
enum class Tactic { kFeedUp = 0, kFeedBack = 1, kFeedForward = 2 };

inline constexpr std::array<Tactic, 3> kAllTactics = {Tactic::kFeedUp, Tactic::kFeedBack,
                                                      Tactic::kFeedForward};

// "feed_up", "feed_back", "feed_forward".
std::string_view to_string(Tactic tactic);
// "Feed Up: Goal Clarity", "Feed Back: Mastery Status", "Feed Forward: Action Steps".
std::string_view display_name(Tactic tactic);
Tactic parse_tactic(std::string_view name);

enum class Condition { kContextual, kMemoryBased };

// "contextual", "memory".
std::string_view to_string(Condition condition);
Condition parse_condition(std::string_view name);

// Total need -> tactic table. Loading a table that misses a need fails with
// Error(kInvalidConfiguration).
class TacticMapping {
 public:
  // Engagement -> Feed Up, Performance -> Feed Back,
  // SkillProgression -> Feed Forward.
  static TacticMapping defaults();
  static TacticMapping from_json_text(std::string_view text);
  static TacticMapping load(const std::filesystem::path& path);

  Tactic operator[](Need need) const { return table_[static_cast<std::size_t>(need)]; }
  std::string to_json_text() const;

 private:
  std::array<Tactic, 3> table_{};
};

Tactic select_tactic(const LearnerState& state, const TacticMapping& mapping);

// Prompt templates with named placeholders {question}, {persona}, {top_need},
// {need_vector} and {tactic}. Substitution is a single left-to-right pass over
// the template; substituted values are never rescanned.
struct PromptTemplates {
  std::string contextual;
  std::string memory;

  static PromptTemplates defaults();
  // Reads contextual.tmpl and memory.tmpl from `dir`.
  static PromptTemplates load(const std::filesystem::path& dir);
};

std::string render_template(std::string_view tmpl, std::string_view question,
                            std::string_view persona, std::string_view top_need,
                            std::string_view need_vector, std::string_view tactic);

// "performance=0.38, engagement=0.62, skill_progression=0.56"
std::string render_need_vector(const NeedVector& need);

// Rendered question block shared by both default templates.
std::string question_block(std::string_view question);

struct LearnerFields {
  std::string persona;  // display name
  Need dominant_need = Need::kPerformance;
  NeedVector need;

  friend bool operator==(const LearnerFields&, const LearnerFields&) = default;
};

struct ConditionedPrompt {
  Condition condition = Condition::kContextual;
  std::string question_text;
  std::optional<LearnerFields> learner;
  std::optional<Tactic> tactic;
  std::string rendered;
};

// Contextual prompts must come without state/tactic, memory-based prompts
// with both; anything else is Error(kContractViolation).
ConditionedPrompt compose_prompt(Condition condition, std::string_view question_text,
                                 const std::optional<LearnerState>& state,
                                 std::optional<Tactic> tactic,
                                 const PromptTemplates& templates = PromptTemplates::defaults(),
                                 const PersonaTable& personas = PersonaTable::defaults());

// Re-renders a prompt from its structured fields.
std::string render(const ConditionedPrompt& prompt, const PromptTemplates& templates);

}  // namespace statefulrec
