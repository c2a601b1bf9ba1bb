#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "statefulrec/diagnostics.hpp"

namespace statefulrec {

// Single JSON document; floats are written in shortest round-trip form.
std::string report_to_json(const DiagnosticsReport& report);
DiagnosticsReport report_from_json(std::string_view text);

// Matched items as JSONL: question_id, question_vec, rec_vec_contextual,
// rec_vec_memory.
std::string items_to_jsonl(std::span<const MatchedItem> items);
std::vector<MatchedItem> items_from_jsonl(std::string_view text);

// Human-readable multi-line summary of a report.
std::string summarize(const DiagnosticsReport& report);

}  // namespace statefulrec
