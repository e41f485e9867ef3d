#include <cmath>

#include <gtest/gtest.h>

#include "glyphshift/error.hpp"
#include "glyphshift/eval.hpp"
#include "glyphshift/toy_corpus.hpp"
#include "toy_models.hpp"

namespace glyphshift {
namespace {

using testing::WordModel;

NormalizedMap nmap(std::initializer_list<double> values) {
  NormalizedMap m;
  for (double v : values) m.tokens.push_back("t");
  m.scores = Eigen::Map<const Eigen::VectorXd>(values.begin(), static_cast<Eigen::Index>(values.size()));
  return m;
}

AttackOutcome outcome(bool success, std::size_t tokens, double mc, std::size_t attack_q,
                      std::size_t interp_q, std::size_t pa) {
  AttackOutcome o;
  o.success = success;
  o.token_count = tokens;
  o.misclassification_confidence = mc;
  o.attack_queries = attack_q;
  o.interpreter_queries = interp_q;
  o.perturbed_chars = pa;
  return o;
}

std::shared_ptr<const Model> toy_model(std::uint64_t seed) {
  TrainConfig c;
  c.epochs = 8;
  c.seed = seed;
  return std::make_shared<Model>(
      train(make_toy_corpus(300, kToyTrainSeed), ModelKind::linear, c, {1, 3, 1 << 12}));
}

TEST(Iou, TopKSize) {
  EXPECT_EQ(iou_k(1, 0.2), 1u);
  EXPECT_EQ(iou_k(4, 0.2), 1u);
  EXPECT_EQ(iou_k(10, 0.2), 2u);
  EXPECT_EQ(iou_k(11, 0.2), 3u);
  EXPECT_EQ(iou_k(3, 1.0), 3u);
  EXPECT_DOUBLE_EQ(iou_topk(nmap({1, 0.8, 0.5, 0}), nmap({1, 0.3, 0.5, 0}), 2), 1.0 / 3.0);
}

TEST(Aggregate, SuccessConditionedMeans) {
  CellReport cell;
  cell.outcomes = {outcome(true, 5, 70, 10, 100, 1), outcome(false, 5, 60, 20, 200, 8),
                   outcome(true, 5, 90, 40, 400, 3)};
  cell.outcomes[0].benign_map = nmap({1, 0.8, 0.5, 0.2, 0});
  cell.outcomes[0].adversarial_map = nmap({0, 0.8, 0.5, 0.2, 1});
  cell.outcomes[2].benign_map = nmap({1, 0.8, 0.5, 0.2, 0});
  cell.outcomes[2].adversarial_map = nmap({1, 0.8, 0.5, 0.2, 0});
  aggregate(cell, 0.2);
  EXPECT_EQ(cell.n_attempted, 3u);
  EXPECT_EQ(cell.n_succeeded, 2u);
  EXPECT_DOUBLE_EQ(cell.asr, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*cell.mean_mc, 80.0);
  EXPECT_DOUBLE_EQ(*cell.mean_pa, 2.0);
  EXPECT_DOUBLE_EQ(*cell.mean_iou, 0.5);
  EXPECT_DOUBLE_EQ(cell.mean_attack_queries, 70.0 / 3.0);
  EXPECT_DOUBLE_EQ(cell.median_attack_queries, 20.0);
  EXPECT_DOUBLE_EQ(cell.median_interpreter_queries, 200.0);
  EXPECT_EQ(cell.ious[1], std::nullopt);
  EXPECT_EQ(cell.ious[0], 0.0);

  CellReport failures;
  failures.outcomes = {outcome(false, 3, 50, 1, 1, 1)};
  aggregate(failures, 0.2);
  EXPECT_EQ(failures.asr, 0.0);
  EXPECT_FALSE(failures.mean_mc);
  EXPECT_FALSE(failures.mean_iou);
}

TEST(EvaluateAttack, ReplaysFromPerInputSeeds) {
  ExperimentConfig config;
  config.classifiers = {{"lin", toy_model(0)}};
  config.interpreters = {InterpreterKind::lime};
  config.attacks = {AttackKind::advchar, AttackKind::random};
  config.sample_cap = 10;
  config.interpreter.sample_count = 120;
  config.master_seed = 42;
  const auto test = make_toy_corpus(kToyTestSize, kToyTestSeed);
  const auto report = evaluate_attack(config, test);
  ASSERT_EQ(report.cells.size(), 2u);
  const auto& cell = report.cells.at({"lin", "lime", "advchar"});
  ASSERT_GE(cell.outcomes.size(), 8u);
  ASSERT_LE(cell.outcomes.size(), 10u);
  for (std::size_t i = 0; i < cell.outcomes.size(); ++i) {
    const auto row = cell.input_indices[i];
    const auto seed = input_seed(42, row);
    Interpreter lime{InterpreterKind::lime, config.interpreter};
    lime.config.seed = seed;
    AttackConfig attack = config.attack;
    attack.seed = seed;
    attack.policy.seed = seed;
    const auto& r = test.records[row];
    const auto replay = advchar_attack(*config.classifiers[0].model, lime, r.text, r.label, attack);
    EXPECT_EQ(replay.final_text, cell.outcomes[i].final_text);
    EXPECT_EQ(replay.interpreter_queries, cell.outcomes[i].interpreter_queries);
    EXPECT_EQ(replay.success, cell.outcomes[i].success);
  }

  config.jobs = 4;
  const auto parallel = evaluate_attack(config, test);
  for (const auto& [key, c] : report.cells) {
    const auto& p = parallel.cells.at(key);
    ASSERT_EQ(p.outcomes.size(), c.outcomes.size());
    for (std::size_t i = 0; i < c.outcomes.size(); ++i) {
      EXPECT_EQ(p.outcomes[i].final_text, c.outcomes[i].final_text);
    }
    EXPECT_EQ(p.asr, c.asr);
    EXPECT_EQ(p.mean_iou, c.mean_iou);
  }
}

TEST(EvaluateAttack, RejectsBadConfiguration) {
  ExperimentConfig config;
  config.interpreters = {InterpreterKind::lime};
  config.attacks = {AttackKind::advchar};
  const auto test = make_toy_corpus(10, kToyTestSeed);
  EXPECT_THROW(evaluate_attack(config, test), Error);
  config.classifiers = {{"const", std::make_shared<testing::ConstantModel>(0.5)}};
  config.iou_top_k_fraction = 0.0;
  EXPECT_THROW(evaluate_attack(config, test), Error);
  config.iou_top_k_fraction = 0.2;
  // Always predicts label 0; rows labelled 1 are skipped, and a set of
  // only positives yields an empty report.
  Dataset positives{{}, 2, {}};
  for (const auto& r : test.records) {
    if (r.label == 1) positives.records.push_back(r);
  }
  try {
    evaluate_attack(config, positives);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::empty_report);
  }
}

TEST(Transfer, ClassifierTransferCountsFlips) {
  std::vector<AttackOutcome> outcomes(3);
  for (auto& o : outcomes) {
    o.success = true;
    o.benign_label = 1;
  }
  outcomes[0].adversarial_text = "g\xD0\xBEod film";
  outcomes[1].adversarial_text = "good f\xD1\x96lm";
  outcomes[2].success = false;
  const WordModel target({{"good", 0.3}, {"film", 0.05}}, 0.3);
  const auto t = transfer_classifiers(outcomes, 2, target);
  EXPECT_EQ(t.n_source_successes, 2u);
  EXPECT_EQ(t.n_transferred, 1u);
  EXPECT_DOUBLE_EQ(*t.asr, 0.5);
  EXPECT_NEAR(*t.mean_mc, 65.0, 1e-9);
  EXPECT_THROW(transfer_classifiers(outcomes, 3, target), Error);
}

TEST(Transfer, IdenticalTargetTransfersEverything) {
  ExperimentConfig config;
  const auto model = toy_model(0);
  const auto copy = std::make_shared<Model>(model->params());
  config.classifiers = {{"a", model}, {"b", copy}};
  config.interpreters = {InterpreterKind::kshap, InterpreterKind::saliency};
  config.attacks = {AttackKind::advchar};
  config.sample_cap = 12;
  const auto test = make_toy_corpus(kToyTestSize, kToyTestSeed);
  const auto report = evaluate_transfer(config, test);
  EXPECT_EQ(report.classifier_transfer.size(), 4u);
  EXPECT_EQ(report.interpreter_transfer.size(), 8u);
  for (const auto& [key, t] : report.classifier_transfer) {
    ASSERT_GT(t.n_source_successes, 0u) << key.classifier;
    EXPECT_EQ(*t.asr, 1.0);
  }
  // Re-explaining with the same interpreter and seed reproduces the cell IoUs.
  const auto source = evaluate_attack(config, test);
  for (const auto& [key, cell] : source.cells) {
    const auto& same = report.interpreter_transfer.at({key.interpreter, key.interpreter, key.classifier});
    ASSERT_EQ(same.n_inputs, cell.n_succeeded);
    EXPECT_NEAR(*same.mean_iou, *cell.mean_iou, 1e-12);
  }
}

TEST(Correlation, MatchesPearsonFormula) {
  std::vector<AttackOutcome> outcomes = {outcome(true, 4, 60, 10, 0, 1), outcome(true, 6, 70, 25, 0, 2),
                                         outcome(false, 9, 55, 40, 0, 5), outcome(true, 12, 95, 90, 0, 4)};
  const auto table = correlation_analysis(outcomes);
  EXPECT_EQ(table.rows.size(), 4u);
  EXPECT_EQ(table.entries.size(), 10u);
  const double tl[] = {4, 6, 9, 12}, pa[] = {1, 2, 5, 4};
  double mt = 0, mp = 0;
  for (int i = 0; i < 4; ++i) mt += tl[i] / 4, mp += pa[i] / 4;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (tl[i] - mt) * (pa[i] - mp);
    sxx += (tl[i] - mt) * (tl[i] - mt);
    syy += (pa[i] - mp) * (pa[i] - mp);
  }
  bool found = false;
  for (const auto& e : table.entries) {
    if (e.first == "tl" && e.second == "pa") {
      found = true;
      EXPECT_NEAR(*e.pearson, sxy / std::sqrt(sxx * syy), 1e-12);
      EXPECT_NEAR(*e.spearman, 0.8, 1e-12);  // ranks 1,2,4,3
    }
    if (e.first == e.second) EXPECT_NEAR(*e.pearson, 1.0, 1e-12);
  }
  EXPECT_TRUE(found);
}

TEST(Correlation, ZeroVarianceIsAbsent) {
  std::vector<AttackOutcome> outcomes = {outcome(true, 5, 60, 10, 0, 1), outcome(true, 5, 70, 20, 0, 2),
                                         outcome(true, 5, 80, 30, 0, 3)};
  for (const auto& e : correlation_analysis(outcomes).entries) {
    if (e.first == "tl" || e.second == "tl") {
      EXPECT_FALSE(e.pearson);
      EXPECT_FALSE(e.spearman);
    } else {
      EXPECT_TRUE(e.pearson);
    }
  }
  outcomes.pop_back();
  EXPECT_THROW(correlation_analysis(outcomes), Error);
}

}  // namespace
}  // namespace glyphshift
