#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "statefulrec/learner_model.hpp"

namespace statefulrec {

// Questions per day implied by the gap between two consecutive events of one
// learner. Zero when there is no previous event.
double questions_per_day(std::optional<std::int64_t> previous, std::int64_t current);

// JSONL codec for one LearnerState line. `parse_state_line` throws
// Error(kInvalidInput) describing the first offending field.
std::string serialize_state(const LearnerState& state);
LearnerState parse_state_line(std::string_view line, const PersonaTable& personas);

// Persistent learner memory backed by a JSONL file (one state per line,
// sorted by learner_id). A store is owned by a single writer.
class MemoryStore {
 public:
  // Absent file -> empty store. Malformed content -> Error(kCorruptStore) with
  // the line number; never a silent reset.
  static MemoryStore open(std::filesystem::path path,
                          PersonaTable personas = PersonaTable::defaults());

  // In-memory store with no backing file; flush() is rejected.
  static MemoryStore in_memory(PersonaTable personas = PersonaTable::defaults());

  // Creates the learner if absent, folds the record's signal into the need
  // vector, recomputes dominant need and persona. Events not strictly newer
  // than the stored updated_at are rejected with Error(kStaleEvent) and leave
  // the store unchanged.
  LearnerState apply_interaction(const InteractionRecord& record,
                                 double alpha = kDefaultAlpha);

  std::optional<LearnerState> get_state(std::string_view learner_id) const;

  // Atomic replace via temp file + rename.
  void flush();

  const std::map<std::string, LearnerState, std::less<>>& states() const {
    return states_;
  }
  std::size_t size() const { return states_.size(); }
  bool dirty() const { return dirty_; }
  const std::filesystem::path& path() const { return path_; }
  const PersonaTable& personas() const { return personas_; }

 private:
  MemoryStore(std::filesystem::path path, PersonaTable personas)
      : path_(std::move(path)), personas_(std::move(personas)) {}

  std::filesystem::path path_;
  PersonaTable personas_;
  std::map<std::string, LearnerState, std::less<>> states_;
  bool dirty_ = false;
};

}  // namespace statefulrec
