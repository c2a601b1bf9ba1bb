#include "statefulrec/learner_model.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "statefulrec/error.hpp"
#include "statefulrec/text.hpp"

namespace statefulrec {

namespace {

constexpr std::size_t index_of(Need need) { return static_cast<std::size_t>(need); }

bool in_unit_interval(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

std::string_view to_string(Need need) {
  switch (need) {
    case Need::kPerformance: return "performance";
    case Need::kEngagement: return "engagement";
    case Need::kSkillProgression: return "skill_progression";
  }
  return "performance";
}

std::optional<Need> try_parse_need(std::string_view name) {
  for (const Need need : kAllNeeds) {
    if (to_string(need) == name) return need;
  }
  return std::nullopt;
}

Need parse_need(std::string_view name) {
  if (auto need = try_parse_need(name)) return *need;
  fail(ErrorKind::kInvalidInput, "unknown need '" + std::string(name) + "'");
}

double NeedVector::operator[](Need need) const {
  return components()[index_of(need)];
}

bool is_valid(const NeedVector& need) {
  return in_unit_interval(need.performance) && in_unit_interval(need.engagement) &&
         in_unit_interval(need.skill_progression);
}

NeedVector make_need_vector(double performance, double engagement,
                            double skill_progression) {
  NeedVector need{performance, engagement, skill_progression};
  if (!is_valid(need)) {
    fail(ErrorKind::kInvalidInput,
         "need vector components must be finite and within [0, 1]");
  }
  return need;
}

// ---------------------------------------------------------------------------
// PersonaTable

PersonaTable PersonaTable::defaults() {
  PersonaTable table;
  table.vocabulary_ = {{"HelpSeekers", "Help Seekers"},
                       {"Performers", "Performers"},
                       {"Explorers", "Explorers"},
                       {"Balanced", "Balanced"}};
  table.rules_[index_of(Need::kPerformance)] = {"Performers", "Performers"};
  table.rules_[index_of(Need::kEngagement)] = {"HelpSeekers", "Balanced"};
  table.rules_[index_of(Need::kSkillProgression)] = {"Explorers", "Explorers"};
  table.rate_threshold_ = 1.0;
  table.initial_ = "Balanced";
  return table;
}

PersonaTable PersonaTable::from_json_text(std::string_view text) {
  using nlohmann::json;
  PersonaTable table;
  try {
    const json doc = json::parse(text);
    for (const auto& entry : doc.at("vocabulary")) {
      table.vocabulary_.push_back(
          {entry.at("id").get<std::string>(), entry.at("display").get<std::string>()});
    }
    table.rate_threshold_ = doc.at("rate_threshold").get<double>();
    table.initial_ = doc.at("initial").get<std::string>();
    const auto& rules = doc.at("rules");
    for (const Need need : kAllNeeds) {
      const auto& rule = rules.at(std::string(to_string(need)));
      table.rules_[index_of(need)] = {rule.at("at_or_above").get<std::string>(),
                                      rule.at("below").get<std::string>()};
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kInvalidConfiguration,
         std::string("persona table: ") + e.what());
  }
  table.validate();
  return table;
}

PersonaTable PersonaTable::load(const std::filesystem::path& path) {
  return from_json_text(read_file(path));
}

std::string PersonaTable::to_json_text() const {
  nlohmann::json doc;
  doc["vocabulary"] = nlohmann::json::array();
  for (const auto& entry : vocabulary_) {
    doc["vocabulary"].push_back({{"id", entry.id}, {"display", entry.display}});
  }
  doc["rate_threshold"] = rate_threshold_;
  doc["initial"] = initial_;
  for (const Need need : kAllNeeds) {
    const auto& rule = rules_[index_of(need)];
    doc["rules"][std::string(to_string(need))] = {{"at_or_above", rule.at_or_above},
                                                  {"below", rule.below}};
  }
  return doc.dump(2);
}

void PersonaTable::validate() const {
  if (vocabulary_.empty()) {
    fail(ErrorKind::kInvalidConfiguration, "persona vocabulary is empty");
  }
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (vocabulary_[i].id.empty()) {
      fail(ErrorKind::kInvalidConfiguration, "persona id must be non-empty");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (vocabulary_[i].id == vocabulary_[j].id) {
        fail(ErrorKind::kInvalidConfiguration,
             "duplicate persona id '" + vocabulary_[i].id + "'");
      }
    }
  }
  if (!std::isfinite(rate_threshold_) || rate_threshold_ < 0.0) {
    fail(ErrorKind::kInvalidConfiguration, "rate_threshold must be finite and >= 0");
  }
  auto require = [this](const std::string& id) {
    if (!contains(id)) {
      fail(ErrorKind::kInvalidConfiguration,
           "persona '" + id + "' is not in the vocabulary");
    }
  };
  require(initial_);
  for (const auto& rule : rules_) {
    require(rule.at_or_above);
    require(rule.below);
  }
}

bool PersonaTable::contains(std::string_view id) const {
  return std::any_of(vocabulary_.begin(), vocabulary_.end(),
                     [id](const Entry& e) { return e.id == id; });
}

PersonaLabel PersonaTable::parse(std::string_view id) const {
  if (!contains(id)) {
    fail(ErrorKind::kInvalidInput, "unknown persona '" + std::string(id) + "'");
  }
  return PersonaLabel{std::string(id)};
}

const std::string& PersonaTable::display(const PersonaLabel& label) const {
  for (const auto& entry : vocabulary_) {
    if (entry.id == label.id) return entry.display;
  }
  fail(ErrorKind::kInvalidInput, "unknown persona '" + label.id + "'");
}

PersonaLabel PersonaTable::assign(Need dominant, double questions_per_day) const {
  const auto& rule = rules_[index_of(dominant)];
  return PersonaLabel{questions_per_day >= rate_threshold_ ? rule.at_or_above
                                                           : rule.below};
}

// ---------------------------------------------------------------------------
// Lexicons

Lexicons Lexicons::defaults() {
  return from_words({"grade", "exam", "score", "correct", "rubric"},
                    {"why", "interested", "curious", "meaning", "relevance"},
                    {"how", "next", "steps", "practice", "apply"});
}

Lexicons Lexicons::from_words(std::vector<std::string> performance,
                              std::vector<std::string> engagement,
                              std::vector<std::string> skill_progression) {
  Lexicons lexicons;
  std::array<std::vector<std::string>*, 3> lists = {&performance, &engagement,
                                                    &skill_progression};
  for (std::size_t i = 0; i < lists.size(); ++i) {
    for (auto& word : *lists[i]) {
      // Lexicon entries are compared against tokens, so normalize them the
      // same way.
      for (auto& token : tokenize(word)) lexicons.sets_[i].insert(std::move(token));
    }
  }
  return lexicons;
}

Lexicons Lexicons::load(const std::filesystem::path& dir) {
  auto read = [&dir](Need need) {
    return parse_word_list(read_file(dir / (std::string(to_string(need)) + ".lex")));
  };
  return from_words(read(Need::kPerformance), read(Need::kEngagement),
                    read(Need::kSkillProgression));
}

bool Lexicons::matches(Need need, const std::string& token) const {
  return sets_[index_of(need)].contains(token);
}

std::vector<std::string> Lexicons::words(Need need) const {
  const auto& set = sets_[index_of(need)];
  std::vector<std::string> out(set.begin(), set.end());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Records and state

InteractionRecord make_interaction(std::string learner_id, std::string question_id,
                                   std::string question_text, std::int64_t timestamp,
                                   const Lexicons& lexicons) {
  if (learner_id.empty()) fail(ErrorKind::kInvalidInput, "learner_id is empty");
  if (question_id.empty()) fail(ErrorKind::kInvalidInput, "question_id is empty");
  InteractionRecord record;
  record.signal = classify_signal(question_text, lexicons);
  record.learner_id = std::move(learner_id);
  record.question_id = std::move(question_id);
  record.question_text = std::move(question_text);
  record.timestamp = timestamp;
  return record;
}

LearnerState initial_state(std::string learner_id, const PersonaTable& personas) {
  LearnerState state;
  state.learner_id = std::move(learner_id);
  state.need = NeedVector::uniform();
  state.dominant_need = derive_dominant_need(state.need);
  state.persona = personas.initial();
  return state;
}

void validate(const LearnerState& state, const PersonaTable& personas) {
  if (state.learner_id.empty()) fail(ErrorKind::kInvalidInput, "learner_id is empty");
  if (!is_valid(state.need)) {
    fail(ErrorKind::kInvalidInput, "need vector out of range for " + state.learner_id);
  }
  if (state.dominant_need != derive_dominant_need(state.need)) {
    fail(ErrorKind::kInvalidInput,
         "dominant_need disagrees with need vector for " + state.learner_id);
  }
  if (!personas.contains(state.persona.id)) {
    fail(ErrorKind::kInvalidInput, "unknown persona '" + state.persona.id + "'");
  }
  if (state.interaction_count < 0) {
    fail(ErrorKind::kInvalidInput, "negative interaction_count");
  }
}

NeedVector classify_signal(std::string_view question_text, const Lexicons& lexicons) {
  if (is_blank(question_text)) {
    fail(ErrorKind::kInvalidInput, "question text is empty");
  }
  std::array<std::int64_t, 3> hits{};
  for (const auto& token : tokenize(question_text)) {
    for (const Need need : kAllNeeds) {
      if (lexicons.matches(need, token)) ++hits[index_of(need)];
    }
  }
  const auto total = hits[0] + hits[1] + hits[2];
  if (total == 0) return NeedVector::uniform();
  const auto share = [total](std::int64_t n) {
    return static_cast<double>(n) / static_cast<double>(total);
  };
  return {share(hits[0]), share(hits[1]), share(hits[2])};
}

NeedVector update_need_vector(const NeedVector& prior, const NeedVector& signal,
                              double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    fail(ErrorKind::kInvalidParameter, "alpha must lie in (0, 1]");
  }
  if (!is_valid(prior) || !is_valid(signal)) {
    fail(ErrorKind::kInvalidInput, "need vector out of range");
  }
  auto blend = [alpha](double p, double s) {
    const double mixed = p + alpha * (s - p);
    return std::clamp(mixed, std::min(p, s), std::max(p, s));
  };
  return {blend(prior.performance, signal.performance),
          blend(prior.engagement, signal.engagement),
          blend(prior.skill_progression, signal.skill_progression)};
}

Need derive_dominant_need(const NeedVector& need) {
  Need best = Need::kPerformance;
  for (const Need candidate : kAllNeeds) {
    if (need[candidate] > need[best]) best = candidate;
  }
  return best;
}

PersonaLabel assign_persona(const LearnerState& state, double questions_per_day,
                            const PersonaTable& personas) {
  if (state.interaction_count < 1) {
    fail(ErrorKind::kInsufficientHistory,
         "persona needs at least one interaction for " + state.learner_id);
  }
  return personas.assign(state.dominant_need, questions_per_day);
}

}  // namespace statefulrec
