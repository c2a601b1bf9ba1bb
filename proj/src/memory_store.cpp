#include "statefulrec/memory_store.hpp"

#include <limits>
#include <system_error>

#include <json.hpp>

#include "statefulrec/error.hpp"
#include "statefulrec/text.hpp"

namespace statefulrec {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kMillisPerDay = 86'400'000.0;

}  // namespace

double questions_per_day(std::optional<std::int64_t> previous, std::int64_t current) {
  if (!previous) return 0.0;
  const auto gap = current - *previous;
  if (gap <= 0) return std::numeric_limits<double>::infinity();
  return kMillisPerDay / static_cast<double>(gap);
}

std::string serialize_state(const LearnerState& state) {
  ordered_json line;
  line["learner_id"] = state.learner_id;
  line["need"] = {{"performance", state.need.performance},
                  {"engagement", state.need.engagement},
                  {"skill_progression", state.need.skill_progression}};
  line["dominant_need"] = to_string(state.dominant_need);
  line["persona"] = state.persona.id;
  line["interaction_count"] = state.interaction_count;
  line["updated_at"] = state.updated_at;
  return line.dump();
}

LearnerState parse_state_line(std::string_view line, const PersonaTable& personas) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    fail(ErrorKind::kInvalidInput, std::string("malformed JSON at offset ") +
                                       std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::kInvalidInput, "record is not a JSON object");

  auto field = [&doc](const char* name) -> const ordered_json& {
    if (!doc.contains(name)) {
      fail(ErrorKind::kInvalidInput, std::string("missing field '") + name + "'");
    }
    return doc[name];
  };
  auto string_field = [&](const char* name) {
    const auto& value = field(name);
    if (!value.is_string()) {
      fail(ErrorKind::kInvalidInput, std::string("field '") + name + "' must be a string");
    }
    return value.get<std::string>();
  };
  auto integer_field = [&](const char* name) {
    const auto& value = field(name);
    if (!value.is_number_integer()) {
      fail(ErrorKind::kInvalidInput,
           std::string("field '") + name + "' must be an integer");
    }
    return value.get<std::int64_t>();
  };

  const auto& need_doc = field("need");
  if (!need_doc.is_object()) fail(ErrorKind::kInvalidInput, "field 'need' must be an object");
  auto component = [&need_doc](Need need) {
    const std::string key(to_string(need));
    if (!need_doc.contains(key) || !need_doc[key].is_number()) {
      fail(ErrorKind::kInvalidInput, "need." + key + " must be a number");
    }
    return need_doc[key].get<double>();
  };

  LearnerState state;
  state.learner_id = string_field("learner_id");
  state.need = make_need_vector(component(Need::kPerformance),
                                component(Need::kEngagement),
                                component(Need::kSkillProgression));
  state.dominant_need = parse_need(string_field("dominant_need"));
  state.persona = personas.parse(string_field("persona"));
  state.interaction_count = integer_field("interaction_count");
  state.updated_at = integer_field("updated_at");
  validate(state, personas);
  return state;
}

MemoryStore MemoryStore::open(std::filesystem::path path, PersonaTable personas) {
  MemoryStore store(std::move(path), std::move(personas));
  std::error_code ec;
  const auto status = std::filesystem::status(store.path_, ec);
  if (status.type() == std::filesystem::file_type::not_found) return store;
  if (ec) fail(ErrorKind::kIo, "cannot stat " + store.path_.string() + ": " + ec.message());
  if (!std::filesystem::is_regular_file(status)) {
    fail(ErrorKind::kIo, store.path_.string() + " is not a regular file");
  }

  const std::string content = read_file(store.path_);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    ++line_no;
    const std::string_view line(content.data() + pos, end - pos);
    const std::size_t offset = pos;
    pos = end + 1;
    if (is_blank(line)) continue;
    try {
      auto state = parse_state_line(line, store.personas_);
      const auto id = state.learner_id;
      if (!store.states_.emplace(id, std::move(state)).second) {
        fail(ErrorKind::kInvalidInput, "duplicate learner_id '" + id + "'");
      }
    } catch (const Error& e) {
      fail(ErrorKind::kCorruptStore, store.path_.string() + ":" +
                                         std::to_string(line_no) + " (byte " +
                                         std::to_string(offset) + "): " + e.what());
    }
  }
  return store;
}

MemoryStore MemoryStore::in_memory(PersonaTable personas) {
  return MemoryStore({}, std::move(personas));
}

LearnerState MemoryStore::apply_interaction(const InteractionRecord& record,
                                            double alpha) {
  if (is_blank(record.question_text)) {
    fail(ErrorKind::kInvalidInput, "question text is empty");
  }
  if (record.learner_id.empty()) fail(ErrorKind::kInvalidInput, "learner_id is empty");

  const auto it = states_.find(record.learner_id);
  std::optional<std::int64_t> previous;
  LearnerState next = it == states_.end() ? initial_state(record.learner_id, personas_)
                                          : it->second;
  if (it != states_.end() && it->second.interaction_count > 0) {
    if (record.timestamp <= it->second.updated_at) {
      fail(ErrorKind::kStaleEvent,
           "event " + record.question_id + " at " + std::to_string(record.timestamp) +
               " is not newer than state of " + record.learner_id + " (" +
               std::to_string(it->second.updated_at) + ")");
    }
    previous = it->second.updated_at;
  }

  next.need = update_need_vector(next.need, record.signal, alpha);
  next.dominant_need = derive_dominant_need(next.need);
  next.interaction_count += 1;
  next.updated_at = record.timestamp;
  next.persona = assign_persona(next, questions_per_day(previous, record.timestamp),
                                personas_);
  validate(next, personas_);

  states_.insert_or_assign(record.learner_id, next);
  dirty_ = true;
  return next;
}

std::optional<LearnerState> MemoryStore::get_state(std::string_view learner_id) const {
  const auto it = states_.find(learner_id);
  if (it == states_.end()) return std::nullopt;
  return it->second;
}

void MemoryStore::flush() {
  if (path_.empty()) {
    fail(ErrorKind::kContractViolation, "in-memory store has no backing file");
  }
  std::string content;
  for (const auto& [id, state] : states_) {
    validate(state, personas_);
    content += serialize_state(state);
    content += '\n';
  }
  write_file_atomic(path_, content);
  dirty_ = false;
}

}  // namespace statefulrec
