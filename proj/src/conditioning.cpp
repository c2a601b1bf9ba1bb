#include "statefulrec/conditioning.hpp"

#include <cstdio>

#include <json.hpp>

#include "statefulrec/error.hpp"
#include "statefulrec/text.hpp"

namespace statefulrec {

namespace {

constexpr std::string_view kContextualTemplate =
    "Given a student question:\n"
    "\"{question}\"\n"
    "\n"
    "Generate a teacher-facing pedagogical recommendation personalized for the student.\n";

constexpr std::string_view kMemoryTemplate =
    "Student context: persona={persona}; top_need={top_need};\n"
    "Need vector: {need_vector};\n"
    "Tactic: {tactic}.\n"
    "Given a student question:\n"
    "\"{question}\"\n"
    "\n"
    "Generate a teacher-facing pedagogical recommendation personalized for the student, "
    "consistent with the selected tactic.\n";

std::optional<Tactic> try_parse_tactic(std::string_view name) {
  for (const Tactic tactic : kAllTactics) {
    if (to_string(tactic) == name) return tactic;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Tactic tactic) {
  switch (tactic) {
    case Tactic::kFeedUp: return "feed_up";
    case Tactic::kFeedBack: return "feed_back";
    case Tactic::kFeedForward: return "feed_forward";
  }
  return "feed_up";
}

std::string_view display_name(Tactic tactic) {
  switch (tactic) {
    case Tactic::kFeedUp: return "Feed Up: Goal Clarity";
    case Tactic::kFeedBack: return "Feed Back: Mastery Status";
    case Tactic::kFeedForward: return "Feed Forward: Action Steps";
  }
  return "Feed Up: Goal Clarity";
}

Tactic parse_tactic(std::string_view name) {
  if (auto tactic = try_parse_tactic(name)) return *tactic;
  fail(ErrorKind::kInvalidInput, "unknown tactic '" + std::string(name) + "'");
}

std::string_view to_string(Condition condition) {
  return condition == Condition::kContextual ? "contextual" : "memory";
}

Condition parse_condition(std::string_view name) {
  if (name == "contextual") return Condition::kContextual;
  if (name == "memory" || name == "memory_based") return Condition::kMemoryBased;
  fail(ErrorKind::kInvalidInput, "unknown condition '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// TacticMapping

TacticMapping TacticMapping::defaults() {
  TacticMapping mapping;
  mapping.table_[static_cast<std::size_t>(Need::kPerformance)] = Tactic::kFeedBack;
  mapping.table_[static_cast<std::size_t>(Need::kEngagement)] = Tactic::kFeedUp;
  mapping.table_[static_cast<std::size_t>(Need::kSkillProgression)] = Tactic::kFeedForward;
  return mapping;
}

TacticMapping TacticMapping::from_json_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidConfiguration, std::string("tactic mapping: ") + e.what());
  }
  if (!doc.is_object()) {
    fail(ErrorKind::kInvalidConfiguration, "tactic mapping must be a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    if (!try_parse_need(key)) {
      fail(ErrorKind::kInvalidConfiguration, "tactic mapping: unknown need '" + key + "'");
    }
    if (!value.is_string() || !try_parse_tactic(value.get<std::string>())) {
      fail(ErrorKind::kInvalidConfiguration,
           "tactic mapping: invalid tactic for '" + key + "'");
    }
  }
  TacticMapping mapping;
  for (const Need need : kAllNeeds) {
    const std::string key(to_string(need));
    if (!doc.contains(key)) {
      fail(ErrorKind::kInvalidConfiguration, "tactic mapping is missing need '" + key + "'");
    }
    mapping.table_[static_cast<std::size_t>(need)] =
        *try_parse_tactic(doc[key].get<std::string>());
  }
  return mapping;
}

TacticMapping TacticMapping::load(const std::filesystem::path& path) {
  return from_json_text(read_file(path));
}

std::string TacticMapping::to_json_text() const {
  nlohmann::ordered_json doc;
  for (const Need need : kAllNeeds) {
    doc[std::string(to_string(need))] = to_string((*this)[need]);
  }
  return doc.dump(2);
}

Tactic select_tactic(const LearnerState& state, const TacticMapping& mapping) {
  return mapping[state.dominant_need];
}

// ---------------------------------------------------------------------------
// Templates

PromptTemplates PromptTemplates::defaults() {
  return {std::string(kContextualTemplate), std::string(kMemoryTemplate)};
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  return {read_file(dir / "contextual.tmpl"), read_file(dir / "memory.tmpl")};
}

std::string render_template(std::string_view tmpl, std::string_view question,
                            std::string_view persona, std::string_view top_need,
                            std::string_view need_vector, std::string_view tactic) {
  std::string out;
  out.reserve(tmpl.size() + question.size() + 64);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const auto close = tmpl.find('}', open + 1);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(open));
      break;
    }
    const auto name = tmpl.substr(open + 1, close - open - 1);
    if (name == "question") {
      out.append(question);
    } else if (name == "persona") {
      out.append(persona);
    } else if (name == "top_need") {
      out.append(top_need);
    } else if (name == "need_vector") {
      out.append(need_vector);
    } else if (name == "tactic") {
      out.append(tactic);
    } else {
      // Not a placeholder: keep the brace literally and continue after it.
      out.push_back('{');
      pos = open + 1;
      continue;
    }
    pos = close + 1;
  }
  return out;
}

std::string render_need_vector(const NeedVector& need) {
  char buffer[128];
  std::snprintf(buffer, sizeof(buffer),
                "performance=%.2f, engagement=%.2f, skill_progression=%.2f",
                need.performance, need.engagement, need.skill_progression);
  return buffer;
}

std::string question_block(std::string_view question) {
  return "Given a student question:\n\"" + std::string(question) + "\"\n";
}

// ---------------------------------------------------------------------------
// Composition

std::string render(const ConditionedPrompt& prompt, const PromptTemplates& templates) {
  if (prompt.condition == Condition::kContextual) {
    return render_template(templates.contextual, prompt.question_text, "", "", "", "");
  }
  const auto& learner = prompt.learner.value();
  return render_template(templates.memory, prompt.question_text, learner.persona,
                         to_string(learner.dominant_need),
                         render_need_vector(learner.need),
                         display_name(prompt.tactic.value()));
}

ConditionedPrompt compose_prompt(Condition condition, std::string_view question_text,
                                 const std::optional<LearnerState>& state,
                                 std::optional<Tactic> tactic,
                                 const PromptTemplates& templates,
                                 const PersonaTable& personas) {
  if (is_blank(question_text)) fail(ErrorKind::kInvalidInput, "question text is empty");
  ConditionedPrompt prompt;
  prompt.condition = condition;
  prompt.question_text = std::string(question_text);
  if (condition == Condition::kContextual) {
    if (state || tactic) {
      fail(ErrorKind::kContractViolation,
           "contextual prompts take neither learner state nor tactic");
    }
  } else {
    if (!state || !tactic) {
      fail(ErrorKind::kContractViolation,
           "memory-based prompts require both learner state and tactic");
    }
    prompt.learner = LearnerFields{personas.display(state->persona), state->dominant_need,
                                   state->need};
    prompt.tactic = tactic;
  }
  prompt.rendered = render(prompt, templates);
  return prompt;
}

}  // namespace statefulrec
