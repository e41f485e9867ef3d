#include "glyphshift/attack.hpp"

#include <algorithm>

#include "glyphshift/error.hpp"
#include "glyphshift/metrics.hpp"
#include "glyphshift/rng.hpp"
#include "glyphshift/utf8.hpp"

namespace glyphshift {

const char* to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::advchar: return "advchar";
    case AttackKind::textbugger: return "textbugger";
    case AttackKind::random: return "random";
  }
  return "unknown";
}

AttackKind parse_attack_kind(std::string_view name) {
  if (name == "advchar") return AttackKind::advchar;
  if (name == "textbugger" || name == "baseline") return AttackKind::textbugger;
  if (name == "random") return AttackKind::random;
  throw Error(ErrorKind::configuration, "unknown attack '" + std::string(name) + "'");
}

const char* to_string(EditOp op) {
  switch (op) {
    case EditOp::substitute: return "substitute";
    case EditOp::swap: return "swap";
    case EditOp::remove: return "delete";
    case EditOp::insert_space: return "insert-space";
  }
  return "unknown";
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::label_flipped: return "label-flipped";
    case StopReason::similarity_exceeded: return "similarity-exceeded";
    case StopReason::budget_exhausted: return "budget-exhausted";
    case StopReason::tokens_exhausted: return "tokens-exhausted";
  }
  return "unknown";
}

void validate(const AttackConfig& config) {
  if (!(config.similarity_threshold >= 0.0)) {
    throw Error(ErrorKind::parameter, "similarity threshold must be >= 0");
  }
  if (config.char_budget < 1) throw Error(ErrorKind::parameter, "char budget must be >= 1");
  if (config.resim_every < 1) throw Error(ErrorKind::parameter, "resim_every must be >= 1");
}

double similarity(const NormalizedMap& benign, const NormalizedMap& adversarial) {
  if (benign.size() != adversarial.size() ||
      benign.scores.size() != adversarial.scores.size()) {
    throw Error(ErrorKind::alignment, "interpretation maps differ in token count");
  }
  return rank_displacement(benign.scores, adversarial.scores);
}

InterpretationMap explain_aligned(const Interpreter& interpreter, const TextClassifier& model,
                                  const TokenizedText& benign,
                                  const std::vector<std::string>& perturbed, std::size_t label,
                                  QueryLedger& ledger) {
  const auto adversarial = tokenize(RawText(benign.with_tokens(perturbed)));
  auto map = interpreter.explain(model, adversarial, label, ledger);
  if (adversarial.token_texts() == perturbed) return map;

  // Code-point span of each benign token inside the adversarial text.
  const auto source = benign.source().code_points();
  std::vector<Span> owner_spans;
  std::size_t shift = 0;
  for (std::size_t i = 0; i < benign.size(); ++i) {
    const auto length = utf8::decode(perturbed[i])->size();
    const std::size_t begin = benign[i].span.begin + shift;
    owner_spans.push_back({begin, begin + length});
    shift = begin + length - benign[i].span.end;
  }
  Eigen::VectorXd folded = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(benign.size()));
  std::size_t owner = 0;
  for (std::size_t j = 0; j < adversarial.size(); ++j) {
    const auto& span = adversarial[j].span;
    while (owner < owner_spans.size() && owner_spans[owner].end <= span.begin) ++owner;
    if (owner == owner_spans.size() || span.begin < owner_spans[owner].begin ||
        span.end > owner_spans[owner].end) {
      throw Error(ErrorKind::alignment, "adversarial token does not map onto a benign token");
    }
    folded(static_cast<Eigen::Index>(owner)) += map.scores(static_cast<Eigen::Index>(j));
  }
  return {perturbed, folded, map.interpreter, map.target_class};
}

namespace {

double benign_probability(const PredictionResult& p, std::size_t label) {
  return p.probabilities(static_cast<Eigen::Index>(label));
}

struct Session {
  const TextClassifier& model;
  const TokenizedText& tokens;
  std::size_t benign_label;
  QueryLedger ledger;
  std::vector<std::string> current;
  AttackOutcome outcome;
  PredictionResult last;

  Session(const TextClassifier& m, const TokenizedText& t, std::size_t label, AttackKind kind)
      : model(m), tokens(t), benign_label(label), current(t.token_texts()) {
    outcome.attack = kind;
    outcome.benign_text = t.source().content();
    outcome.benign_label = label;
    outcome.token_count = t.size();
  }

  std::string text_with(std::size_t index, const std::string& replacement) const {
    auto copy = current;
    copy[index] = replacement;
    return tokens.with_tokens(copy);
  }

  PredictionResult query(const std::string& text) {
    return predict(model, text, ledger, Channel::attack);
  }

  void check_precondition() {
    if (benign_label >= model.label_count()) {
      throw Error(ErrorKind::invalid_input, "benign label out of range");
    }
    last = query(tokens.source().content());
    outcome.setup_queries = 1;
    if (last.label != benign_label) {
      throw Error(ErrorKind::invalid_input,
                  "input is already misclassified (predicted " + std::to_string(last.label) +
                      ", expected " + std::to_string(benign_label) + ")");
    }
  }

  void apply(TraceStep step, std::string replacement, PredictionResult result,
             std::size_t queries) {
    current[step.token_index] = std::move(replacement);
    step.token_after = current[step.token_index];
    step.label_after = result.label;
    step.probabilities_after = result.probabilities;
    step.attack_queries = queries;
    outcome.trace.push_back(std::move(step));
    last = std::move(result);
  }

  bool flipped() const { return last.label != benign_label; }

  AttackOutcome finish(bool success, StopReason reason) {
    outcome.success = success;
    outcome.stop_reason = reason;
    outcome.final_tokens = current;
    outcome.final_text = tokens.with_tokens(current);
    if (success) outcome.adversarial_text = outcome.final_text;
    outcome.final_label = last.label;
    outcome.misclassification_confidence =
        100.0 * last.probabilities(static_cast<Eigen::Index>(last.label));
    outcome.attack_queries = ledger.attack_queries();
    outcome.interpreter_queries = ledger.interpreter_queries();
    outcome.perturbed_chars = outcome.trace.size();
    return std::move(outcome);
  }
};

// Post-hoc similarity for attacks that do not consult an interpreter. Runs
// on its own ledger so the attack's query counts stay its own.
void measure_similarity(AttackOutcome& outcome, const TextClassifier& model,
                        const TokenizedText& tokens, const Interpreter* measure) {
  if (measure == nullptr) return;
  outcome.interpreter = measure->kind;
  outcome.interpreter_seed = measure->config.seed;
  QueryLedger scratch;
  auto benign = normalize_scores(measure->explain(model, tokens, outcome.benign_label, scratch));
  auto adversarial = normalize_scores(explain_aligned(*measure, model, tokens, outcome.final_tokens,
                                                      outcome.benign_label, scratch));
  outcome.final_similarity = similarity(benign, adversarial);
  outcome.benign_map = std::move(benign);
  outcome.adversarial_map = std::move(adversarial);
}

}  // namespace

AttackOutcome advchar_attack(const TextClassifier& model, const Interpreter& interpreter,
                             const RawText& text, std::size_t benign_label,
                             const AttackConfig& config) {
  validate(config);
  const auto tokens = tokenize(text);
  Session s(model, tokens, benign_label, AttackKind::advchar);
  s.outcome.interpreter = interpreter.kind;
  s.outcome.interpreter_seed = interpreter.config.seed;
  s.check_precondition();

  const auto benign_map =
      normalize_scores(interpreter.explain(model, tokens, benign_label, s.ledger));
  s.outcome.benign_map = benign_map;
  const auto order = rank_tokens(benign_map);

  for (std::size_t index : order) {
    if (s.outcome.trace.size() >= config.char_budget) {
      return s.finish(false, StopReason::budget_exhausted);
    }
    const auto& token = s.current[index];
    const auto positions = candidate_positions(token, config.table, config.policy);
    if (positions.empty()) continue;

    std::size_t chosen = positions.front();
    std::string replacement;
    PredictionResult result;
    std::size_t queries = 0;
    if (config.policy.strategy == SubstitutionStrategy::scan_best) {
      double best_drop = 0.0;
      const double before = benign_probability(s.last, benign_label);
      for (std::size_t p : positions) {
        auto candidate = substitute_char(token, p, config.table, 0);
        auto r = s.query(s.text_with(index, candidate));
        ++queries;
        const double drop = before - benign_probability(r, benign_label);
        if (replacement.empty() || drop > best_drop) {
          best_drop = drop;
          chosen = p;
          replacement = std::move(candidate);
          result = std::move(r);
        }
      }
    } else {
      replacement = substitute_char(token, chosen, config.table, 0);
      result = s.query(s.text_with(index, replacement));
      queries = 1;
    }

    const auto cps = *utf8::decode(token);
    TraceStep step;
    step.token_index = index;
    step.position = chosen;
    step.op = EditOp::substitute;
    step.old_char = cps[chosen];
    step.new_char = config.table.replacements(cps[chosen]).front();
    s.apply(std::move(step), std::move(replacement), std::move(result), queries);

    const bool flipped = s.flipped();
    if (flipped || s.outcome.trace.size() % config.resim_every == 0) {
      auto adversarial_map = normalize_scores(
          interpreter.explain(model, tokenize(RawText(tokens.with_tokens(s.current))),
                              benign_label, s.ledger));
      const double score = similarity(benign_map, adversarial_map);
      s.outcome.trace.back().similarity = score;
      s.outcome.final_similarity = score;
      s.outcome.adversarial_map = std::move(adversarial_map);
      if (score > config.similarity_threshold) {
        return s.finish(false, StopReason::similarity_exceeded);
      }
    }
    if (flipped) return s.finish(true, StopReason::label_flipped);
  }
  return s.finish(false, s.outcome.trace.size() >= config.char_budget
                             ? StopReason::budget_exhausted
                             : StopReason::tokens_exhausted);
}

namespace {

struct Edit {
  EditOp op;
  std::size_t position;
  char32_t old_char;
  char32_t new_char;
  std::string token;
};

// Every candidate edit of the token, in tie-break order: swaps, deletions,
// space insertions, then homoglyphs, each left to right.
std::vector<Edit> bug_edits(const std::string& token, const HomoglyphTable& table) {
  std::vector<Edit> edits;
  auto cps = *utf8::decode(token);
  const std::size_t len = cps.size();
  for (std::size_t a = 0; a + 1 < len; ++a) {
    if (cps[a] == cps[a + 1]) continue;
    auto swapped = cps;
    std::swap(swapped[a], swapped[a + 1]);
    edits.push_back({EditOp::swap, a, cps[a], cps[a + 1], utf8::encode(swapped)});
  }
  if (len >= 2) {
    for (std::size_t p = 0; p < len; ++p) {
      auto removed = cps;
      removed.erase(p, 1);
      edits.push_back({EditOp::remove, p, cps[p], 0, utf8::encode(removed)});
    }
    for (std::size_t at = 1; at < len; ++at) {
      auto spaced = cps;
      spaced.insert(at, 1, U' ');
      edits.push_back({EditOp::insert_space, at, 0, U' ', utf8::encode(spaced)});
    }
  }
  for (std::size_t p = 0; p < len; ++p) {
    if (!table.contains(cps[p])) continue;
    edits.push_back({EditOp::substitute, p, cps[p], table.replacements(cps[p]).front(),
                     substitute_char(token, p, table, 0)});
  }
  return edits;
}

}  // namespace

AttackOutcome baseline_bug_attack(const TextClassifier& model, const RawText& text,
                                  std::size_t benign_label, const AttackConfig& config,
                                  const Interpreter* measure) {
  validate(config);
  const auto tokens = tokenize(text);
  Session s(model, tokens, benign_label, AttackKind::textbugger);
  s.check_precondition();

  const double base = benign_probability(s.last, benign_label);
  Eigen::VectorXd drops(static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::vector<bool> keep(tokens.size(), true);
    keep[i] = false;
    const auto r = s.query(tokens.masked(keep, MaskMode::drop));
    drops(static_cast<Eigen::Index>(i)) = base - benign_probability(r, benign_label);
  }
  s.outcome.setup_queries += tokens.size();
  const auto order = rank_order(drops);

  StopReason reason = StopReason::tokens_exhausted;
  bool success = false;
  for (std::size_t index : order) {
    if (s.outcome.trace.size() >= config.char_budget) {
      reason = StopReason::budget_exhausted;
      break;
    }
    const auto edits = bug_edits(s.current[index], config.table);
    if (edits.empty()) continue;
    const double before = benign_probability(s.last, benign_label);
    std::size_t best = 0;
    double best_drop = 0.0;
    PredictionResult best_result;
    for (std::size_t e = 0; e < edits.size(); ++e) {
      auto r = s.query(s.text_with(index, edits[e].token));
      const double drop = before - benign_probability(r, benign_label);
      if (e == 0 || drop > best_drop) {
        best = e;
        best_drop = drop;
        best_result = std::move(r);
      }
    }
    const auto& edit = edits[best];
    TraceStep step;
    step.token_index = index;
    step.position = edit.position;
    step.op = edit.op;
    step.old_char = edit.old_char;
    step.new_char = edit.new_char;
    s.apply(std::move(step), edit.token, std::move(best_result), edits.size());
    if (s.flipped()) {
      success = true;
      reason = StopReason::label_flipped;
      break;
    }
  }
  if (!success && reason != StopReason::budget_exhausted &&
      s.outcome.trace.size() >= config.char_budget) {
    reason = StopReason::budget_exhausted;
  }
  auto outcome = s.finish(success, reason);
  measure_similarity(outcome, model, tokens, measure);
  return outcome;
}

AttackOutcome random_attack(const TextClassifier& model, const RawText& text,
                            std::size_t benign_label, const AttackConfig& config,
                            const Interpreter* measure) {
  validate(config);
  const auto tokens = tokenize(text);
  Session s(model, tokens, benign_label, AttackKind::random);
  s.check_precondition();

  std::vector<std::pair<std::size_t, std::size_t>> sites;
  const SubstitutionPolicy scan{SubstitutionStrategy::scan_best, 0};
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    for (std::size_t p : candidate_positions(tokens[t].text, config.table, scan)) {
      sites.emplace_back(t, p);
    }
  }
  Rng rng(config.seed);
  bool success = false;
  StopReason reason = StopReason::tokens_exhausted;
  while (!sites.empty()) {
    if (s.outcome.trace.size() >= config.char_budget) {
      reason = StopReason::budget_exhausted;
      break;
    }
    const auto pick = rng.uniform_index(sites.size());
    const auto [index, position] = sites[pick];
    sites.erase(sites.begin() + static_cast<std::ptrdiff_t>(pick));

    const auto cps = *utf8::decode(s.current[index]);
    auto replacement = substitute_char(s.current[index], position, config.table, 0);
    auto result = s.query(s.text_with(index, replacement));
    TraceStep step;
    step.token_index = index;
    step.position = position;
    step.old_char = cps[position];
    step.new_char = config.table.replacements(cps[position]).front();
    s.apply(std::move(step), std::move(replacement), std::move(result), 1);
    if (s.flipped()) {
      success = true;
      reason = StopReason::label_flipped;
      break;
    }
  }
  if (!success && s.outcome.trace.size() >= config.char_budget) {
    reason = StopReason::budget_exhausted;
  }
  auto outcome = s.finish(success, reason);
  measure_similarity(outcome, model, tokens, measure);
  return outcome;
}

AttackOutcome run_attack(AttackKind kind, const TextClassifier& model,
                         const Interpreter& interpreter, const RawText& text,
                         std::size_t benign_label, const AttackConfig& config) {
  switch (kind) {
    case AttackKind::advchar:
      return advchar_attack(model, interpreter, text, benign_label, config);
    case AttackKind::textbugger:
      return baseline_bug_attack(model, text, benign_label, config, &interpreter);
    case AttackKind::random:
      return random_attack(model, text, benign_label, config, &interpreter);
  }
  throw Error(ErrorKind::configuration, "unknown attack");
}

}  // namespace glyphshift
