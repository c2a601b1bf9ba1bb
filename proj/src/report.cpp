#include "statefulrec/report.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "statefulrec/error.hpp"
#include "statefulrec/text.hpp"

namespace statefulrec {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json test_to_json(const TestResult& result) {
  return {{"statistic", result.statistic},
          {"p_value", result.p_value},
          {"method", to_string(result.method)},
          {"n_effective", result.n_effective}};
}

TestResult test_from_json(const ordered_json& doc) {
  TestResult result;
  result.statistic = doc.at("statistic").get<double>();
  result.p_value = doc.at("p_value").get<double>();
  result.method = parse_test_method(doc.at("method").get<std::string>());
  result.n_effective = doc.at("n_effective").get<std::size_t>();
  return result;
}

ordered_json vector_to_json(const EmbeddingVector& v) {
  return ordered_json(std::vector<double>(v.values().begin(), v.values().end()));
}

EmbeddingVector vector_from_json(const ordered_json& doc, const char* field) {
  if (!doc.is_array()) {
    fail(ErrorKind::kInvalidInput, std::string("field '") + field + "' must be an array");
  }
  std::vector<double> values;
  values.reserve(doc.size());
  for (const auto& v : doc) {
    if (!v.is_number()) {
      fail(ErrorKind::kInvalidInput, std::string("field '") + field + "' has a non-number");
    }
    values.push_back(v.get<double>());
  }
  return EmbeddingVector(std::move(values));
}

}  // namespace

std::string report_to_json(const DiagnosticsReport& report) {
  ordered_json doc;
  doc["rho_contextual"] = report.rho_contextual;
  doc["rho_memory"] = report.rho_memory;
  doc["t_result"] = test_to_json(report.t_result);
  doc["wilcoxon_result"] = test_to_json(report.wilcoxon_result);
  doc["effect"] = {{"cohens_dz", report.effect.cohens_dz}};
  doc["zero_spread_differences"] = report.zero_spread_differences;
  if (report.divergence) {
    const auto& div = *report.divergence;
    doc["divergence"] = {
        {"question_id", div.question_id},
        {"learner_ids", {div.learner_ids.first, div.learner_ids.second}},
        {"contextual_texts_identical", div.contextual_texts_identical},
        {"memory_texts_identical", div.memory_texts_identical},
        {"memory_embedding_cosine", div.memory_embedding_cosine},
        {"tactics", {to_string(div.tactics.first), to_string(div.tactics.second)}}};
  } else {
    doc["divergence"] = nullptr;
  }
  doc["n_items"] = report.n_items;
  doc["config_digest"] = report.config_digest;
  doc["flat_pearson"] = {{"contextual", report.flat_pearson_contextual},
                         {"memory", report.flat_pearson_memory}};
  doc["per_item"] = {{"question_ids", report.question_ids},
                     {"contextual", report.per_item_contextual},
                     {"memory", report.per_item_memory}};
  return doc.dump(2) + "\n";
}

DiagnosticsReport report_from_json(std::string_view text) {
  DiagnosticsReport report;
  try {
    const auto doc = ordered_json::parse(text);
    report.rho_contextual = doc.at("rho_contextual").get<double>();
    report.rho_memory = doc.at("rho_memory").get<double>();
    report.t_result = test_from_json(doc.at("t_result"));
    report.wilcoxon_result = test_from_json(doc.at("wilcoxon_result"));
    report.effect.cohens_dz = doc.at("effect").at("cohens_dz").get<double>();
    report.zero_spread_differences = doc.at("zero_spread_differences").get<bool>();
    if (const auto& div = doc.at("divergence"); !div.is_null()) {
      DivergenceSummary summary;
      summary.question_id = div.at("question_id").get<std::string>();
      summary.learner_ids = {div.at("learner_ids").at(0).get<std::string>(),
                             div.at("learner_ids").at(1).get<std::string>()};
      summary.contextual_texts_identical = div.at("contextual_texts_identical").get<bool>();
      summary.memory_texts_identical = div.at("memory_texts_identical").get<bool>();
      summary.memory_embedding_cosine = div.at("memory_embedding_cosine").get<double>();
      summary.tactics = {parse_tactic(div.at("tactics").at(0).get<std::string>()),
                         parse_tactic(div.at("tactics").at(1).get<std::string>())};
      report.divergence = summary;
    }
    report.n_items = doc.at("n_items").get<std::size_t>();
    report.config_digest = doc.at("config_digest").get<std::string>();
    report.flat_pearson_contextual = doc.at("flat_pearson").at("contextual").get<double>();
    report.flat_pearson_memory = doc.at("flat_pearson").at("memory").get<double>();
    const auto& per_item = doc.at("per_item");
    report.question_ids = per_item.at("question_ids").get<std::vector<std::string>>();
    report.per_item_contextual = per_item.at("contextual").get<std::vector<double>>();
    report.per_item_memory = per_item.at("memory").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidInput, std::string("malformed report: ") + e.what());
  }
  return report;
}

std::string items_to_jsonl(std::span<const MatchedItem> items) {
  std::string out;
  for (const auto& item : items) {
    ordered_json line;
    line["question_id"] = item.question_id;
    line["question_vec"] = vector_to_json(item.question_vec);
    line["rec_vec_contextual"] = vector_to_json(item.rec_vec_contextual);
    line["rec_vec_memory"] = vector_to_json(item.rec_vec_memory);
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<MatchedItem> items_from_jsonl(std::string_view text) {
  std::vector<MatchedItem> items;
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
      const auto doc = ordered_json::parse(line);
      MatchedItem item;
      item.question_id = doc.at("question_id").get<std::string>();
      item.question_vec = vector_from_json(doc.at("question_vec"), "question_vec");
      item.rec_vec_contextual = vector_from_json(doc.at("rec_vec_contextual"),
                                                 "rec_vec_contextual");
      item.rec_vec_memory = vector_from_json(doc.at("rec_vec_memory"), "rec_vec_memory");
      const auto dim = item.question_vec.dimension();
      if (item.rec_vec_contextual.dimension() != dim || item.rec_vec_memory.dimension() != dim) {
        fail(ErrorKind::kInvalidInput, "vectors of one item differ in dimension");
      }
      items.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kInvalidInput, "item line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw annotate(e, "item line " + std::to_string(line_no));
    }
  }
  return items;
}

std::string summarize(const DiagnosticsReport& report) {
  std::ostringstream out;
  char buffer[256];
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buffer, sizeof(buffer), fmt, args...);
    out << buffer << '\n';
  };
  line("items compared:          %zu", report.n_items);
  line("rho contextual:          %.4f", report.rho_contextual);
  line("rho memory-based:        %.4f", report.rho_memory);
  line("paired t:                t = %.4f, p = %.3g (n = %zu)", report.t_result.statistic,
       report.t_result.p_value, report.t_result.n_effective);
  line("Wilcoxon signed-rank:    W = %.1f, p = %.3g (%s, n = %zu)",
       report.wilcoxon_result.statistic, report.wilcoxon_result.p_value,
       std::string(to_string(report.wilcoxon_result.method)).c_str(),
       report.wilcoxon_result.n_effective);
  line("Cohen's dz:              %.4f", report.effect.cohens_dz);
  if (report.zero_spread_differences) {
    out << "  note: per-item differences have no spread; t and dz are not informative\n";
  }
  line("flat Pearson:            contextual %.4f, memory-based %.4f",
       report.flat_pearson_contextual, report.flat_pearson_memory);
  if (report.divergence) {
    const auto& div = *report.divergence;
    out << "divergence probe:        question " << div.question_id << ", learners "
        << div.learner_ids.first << " / " << div.learner_ids.second << '\n';
    out << "  tactics:               " << display_name(div.tactics.first) << " / "
        << display_name(div.tactics.second) << '\n';
    out << "  contextual identical:  " << (div.contextual_texts_identical ? "yes" : "no")
        << '\n';
    out << "  memory identical:      " << (div.memory_texts_identical ? "yes" : "no") << '\n';
    line("  memory cosine:         %.4f", div.memory_embedding_cosine);
  }
  out << "config digest:           " << report.config_digest << '\n';
  return out.str();
}

}  // namespace statefulrec
