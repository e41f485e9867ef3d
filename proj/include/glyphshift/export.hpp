#ifndef GLYPHSHIFT_EXPORT_HPP
#define GLYPHSHIFT_EXPORT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "glyphshift/attack.hpp"
#include "glyphshift/defense.hpp"
#include "glyphshift/eval.hpp"
#include "glyphshift/interpret.hpp"
#include "json.hpp"

namespace glyphshift {

inline constexpr const char* kTraceSchema = "advtrace/1";

nlohmann::json explanation_to_json(const InterpretationMap& map, std::uint64_t seed);

nlohmann::json trace_to_json(const AttackOutcome& outcome);

nlohmann::json report_to_json(const ExperimentReport& report);

/// One row per (classifier, interpreter, attack); absent means are empty.
std::string report_to_csv(const ExperimentReport& report);

/// Header `tl,mc,qc_attack,qc_interp,pa,success`.
std::string per_input_csv(const std::vector<AttackOutcome>& outcomes);

nlohmann::json correlation_to_json(const CorrelationTable& table);

nlohmann::json transfer_to_json(const TransferReport& report);

nlohmann::json defense_to_json(const DefenseRecord& record, const DefenseConfig& config,
                               const DefenseExperiment& experiment);

/// Standalone HTML; each token shaded white -> red by normalized score.
std::string heatmap_html(const NormalizedMap& map, const std::string& title);

/// Benign and adversarial maps stacked for comparison.
std::string heatmap_pair_html(const NormalizedMap& benign, const NormalizedMap& adversarial,
                              const std::string& title);

/// Serialization used for every JSON artifact: 2-space indent, sorted keys,
/// trailing newline.
std::string dump(const nlohmann::json& document);

}  // namespace glyphshift

#endif  // GLYPHSHIFT_EXPORT_HPP
