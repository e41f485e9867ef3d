#include "glyphshift/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "glyphshift/utf8.hpp"

namespace glyphshift {

using nlohmann::json;

namespace {

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json code_point_json(char32_t c) { return c == 0 ? json(nullptr) : json(utf8::format_code_point(c)); }

json normalized_json(const std::optional<NormalizedMap>& map) {
  if (!map) return nullptr;
  return {{"tokens", map->tokens},
          {"scores", vector_json(map->scores)},
          {"interpreter_id", to_string(map->interpreter)},
          {"target_class", map->target_class}};
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string number(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

std::string html_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string heatmap_row(const NormalizedMap& map) {
  std::string out = "<p class=\"row\">";
  for (std::size_t i = 0; i < map.tokens.size(); ++i) {
    const double s = std::clamp(map.scores(static_cast<Eigen::Index>(i)), 0.0, 1.0);
    const int fade = static_cast<int>(std::lround(255.0 * (1.0 - s)));
    char style[96];
    std::snprintf(style, sizeof style, "background-color:rgb(255,%d,%d)", fade, fade);
    out += "<span class=\"tok\" style=\"" + std::string(style) + "\" title=\"" + number(s) +
           "\">" + html_escape(map.tokens[i]) + "</span> ";
  }
  out += "</p>\n";
  return out;
}

std::string page(const std::string& title, const std::string& body) {
  return "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" + html_escape(title) +
         "</title>\n<style>body{font-family:sans-serif;margin:2em}"
         ".tok{padding:2px 3px;border-radius:3px}.row{line-height:2em}</style></head>\n"
         "<body>\n<h1>" + html_escape(title) + "</h1>\n" + body + "</body></html>\n";
}

json cell_key_json(const CellKey& key, const char* a, const char* b, const char* c) {
  return {{a, key.classifier}, {b, key.interpreter}, {c, key.attack}};
}

}  // namespace

std::string dump(const json& document) { return document.dump(2) + "\n"; }

json explanation_to_json(const InterpretationMap& map, std::uint64_t seed) {
  return {{"tokens", map.tokens},
          {"scores", vector_json(map.scores)},
          {"interpreter_id", to_string(map.interpreter)},
          {"target_class", map.target_class},
          {"seed", seed}};
}

json trace_to_json(const AttackOutcome& o) {
  json steps = json::array();
  for (const auto& s : o.trace) {
    steps.push_back({{"token_index", s.token_index},
                     {"position", s.position},
                     {"op", to_string(s.op)},
                     {"old_char", code_point_json(s.old_char)},
                     {"new_char", code_point_json(s.new_char)},
                     {"token_after", s.token_after},
                     {"label_after", s.label_after},
                     {"probabilities_after", vector_json(s.probabilities_after)},
                     {"attack_queries", s.attack_queries},
                     {"similarity", optional_json(s.similarity)}});
  }
  return {{"schema", kTraceSchema},
          {"attack", to_string(o.attack)},
          {"interpreter", o.interpreter ? json(to_string(*o.interpreter)) : json(nullptr)},
          {"interpreter_seed", o.interpreter_seed},
          {"benign_text", o.benign_text},
          {"benign_label", o.benign_label},
          {"token_count", o.token_count},
          {"success", o.success},
          {"stop_reason", to_string(o.stop_reason)},
          {"adversarial_text", o.adversarial_text ? json(*o.adversarial_text) : json(nullptr)},
          {"final_text", o.final_text},
          {"final_label", o.final_label},
          {"misclassification_confidence", o.misclassification_confidence},
          {"attack_queries", o.attack_queries},
          {"interpreter_queries", o.interpreter_queries},
          {"setup_queries", o.setup_queries},
          {"perturbed_chars", o.perturbed_chars},
          {"final_similarity", optional_json(o.final_similarity)},
          {"benign_map", normalized_json(o.benign_map)},
          {"adversarial_map", normalized_json(o.adversarial_map)},
          {"steps", steps}};
}

json report_to_json(const ExperimentReport& report) {
  json cells = json::array();
  for (const auto& [key, cell] : report.cells) {
    json entry = cell_key_json(key, "classifier", "interpreter", "attack");
    entry["n_attempted"] = cell.n_attempted;
    entry["n_succeeded"] = cell.n_succeeded;
    entry["asr"] = cell.asr;
    entry["mean_attack_queries"] = cell.mean_attack_queries;
    entry["median_attack_queries"] = cell.median_attack_queries;
    entry["mean_interpreter_queries"] = cell.mean_interpreter_queries;
    entry["median_interpreter_queries"] = cell.median_interpreter_queries;
    entry["mean_mc"] = optional_json(cell.mean_mc);
    entry["mean_pa"] = optional_json(cell.mean_pa);
    entry["mean_iou"] = optional_json(cell.mean_iou);
    cells.push_back(std::move(entry));
  }
  return {{"schema", "advreport/1"},
          {"settings",
           {{"iou_top_k_fraction", report.iou_top_k_fraction},
            {"master_seed", report.master_seed},
            {"sample_cap", report.sample_cap},
            {"similarity_threshold", report.attack.similarity_threshold},
            {"char_budget", report.attack.char_budget},
            {"policy", to_string(report.attack.policy.strategy)},
            {"resim_every", report.attack.resim_every},
            {"sample_count", report.interpreter.sample_count},
            {"kernel_width", report.interpreter.kernel_width},
            {"ridge_lambda", report.interpreter.ridge_lambda},
            {"mask_mode", report.interpreter.mask_mode == MaskMode::drop ? "drop"
                                                                         : "replace-with-empty"}}},
          {"cells", cells}};
}

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "classifier,interpreter,attack,n_attempted,n_succeeded,asr,mean_qc_attack,"
         "median_qc_attack,mean_qc_interp,median_qc_interp,mean_mc,mean_pa,mean_iou\n";
  for (const auto& [key, c] : report.cells) {
    out << key.classifier << ',' << key.interpreter << ',' << key.attack << ',' << c.n_attempted
        << ',' << c.n_succeeded << ',' << number(c.asr) << ',' << number(c.mean_attack_queries)
        << ',' << number(c.median_attack_queries) << ',' << number(c.mean_interpreter_queries)
        << ',' << number(c.median_interpreter_queries) << ',' << number(c.mean_mc) << ','
        << number(c.mean_pa) << ',' << number(c.mean_iou) << '\n';
  }
  return out.str();
}

std::string per_input_csv(const std::vector<AttackOutcome>& outcomes) {
  std::ostringstream out;
  out << "tl,mc,qc_attack,qc_interp,pa,success\n";
  for (const auto& o : outcomes) {
    out << o.token_count << ',' << number(o.misclassification_confidence) << ','
        << o.attack_queries << ',' << o.interpreter_queries << ',' << o.perturbed_chars << ','
        << (o.success ? 1 : 0) << '\n';
  }
  return out.str();
}

json correlation_to_json(const CorrelationTable& table) {
  json entries = json::array();
  for (const auto& e : table.entries) {
    entries.push_back({{"first", e.first},
                       {"second", e.second},
                       {"pearson", optional_json(e.pearson)},
                       {"spearman", optional_json(e.spearman)}});
  }
  return {{"n", table.rows.size()}, {"coefficients", entries}};
}

json transfer_to_json(const TransferReport& report) {
  json interpreters = json::array();
  for (const auto& [key, t] : report.interpreter_transfer) {
    json entry = cell_key_json(key, "source_interpreter", "target_interpreter", "classifier");
    entry["n_inputs"] = t.n_inputs;
    entry["mean_iou"] = optional_json(t.mean_iou);
    interpreters.push_back(std::move(entry));
  }
  json classifiers = json::array();
  for (const auto& [key, t] : report.classifier_transfer) {
    json entry = cell_key_json(key, "interpreter", "source_classifier", "target_classifier");
    entry["n_source_successes"] = t.n_source_successes;
    entry["n_transferred"] = t.n_transferred;
    entry["asr"] = optional_json(t.asr);
    entry["mean_mc"] = optional_json(t.mean_mc);
    classifiers.push_back(std::move(entry));
  }
  return {{"schema", "advtransfer/1"},
          {"iou_top_k_fraction", report.iou_top_k_fraction},
          {"master_seed", report.master_seed},
          {"interpreter_transfer", interpreters},
          {"classifier_transfer", classifiers}};
}

json defense_to_json(const DefenseRecord& record, const DefenseConfig& config,
                     const DefenseExperiment& experiment) {
  return {{"asr_before", record.asr_before},
          {"asr_after", record.asr_after},
          {"acc_before", record.acc_before},
          {"acc_after", record.acc_after},
          {"config",
           {{"augmentation_rate", config.augmentation_rate},
            {"chars_per_record", config.chars_per_record},
            {"seed", config.seed},
            {"classifier", to_string(experiment.classifier)},
            {"interpreter", to_string(experiment.interpreter)},
            {"attack", to_string(experiment.attack)},
            {"char_budget", experiment.attack_config.char_budget},
            {"similarity_threshold", experiment.attack_config.similarity_threshold},
            {"master_seed", experiment.master_seed},
            {"train_size", record.train_size},
            {"augmented_train_size", record.augmented_train_size},
            {"test_size", record.test_size}}}};
}

std::string heatmap_html(const NormalizedMap& map, const std::string& title) {
  return page(title, "<p>interpreter: " + std::string(to_string(map.interpreter)) +
                         ", class " + std::to_string(map.target_class) + "</p>\n" +
                         heatmap_row(map));
}

std::string heatmap_pair_html(const NormalizedMap& benign, const NormalizedMap& adversarial,
                              const std::string& title) {
  return page(title, "<h2>benign</h2>\n" + heatmap_row(benign) + "<h2>adversarial</h2>\n" +
                         heatmap_row(adversarial));
}

}  // namespace glyphshift
