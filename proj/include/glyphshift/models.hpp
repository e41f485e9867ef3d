#ifndef GLYPHSHIFT_MODELS_HPP
#define GLYPHSHIFT_MODELS_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "glyphshift/features.hpp"
#include "glyphshift/textcore.hpp"

namespace glyphshift {

enum class ModelKind { linear, mlp };

const char* to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

/// linear: one layer M x D. mlp: tanh hidden layer H x D, then M x H.
struct ModelParams {
  ModelKind kind = ModelKind::linear;
  FeatureConfig features;
  std::size_t label_count = 2;
  std::vector<DenseLayer> layers;

  std::size_t hidden_width() const;
};

bool operator==(const ModelParams& a, const ModelParams& b);

/// Zero-initialised parameters of the right shape.
ModelParams zero_params(ModelKind kind, const FeatureConfig& features,
                        std::size_t label_count, std::size_t hidden_width = 0);

void validate(const ModelParams& params);

struct PredictionResult {
  std::size_t label = 0;
  Eigen::VectorXd probabilities;
};

enum class Channel { attack, interpreter };

/// Per-attack query counters. Not synchronised; one ledger per worker.
class QueryLedger {
 public:
  void record(Channel channel) {
    if (channel == Channel::attack) ++attack_; else ++interpreter_;
  }
  std::size_t attack_queries() const noexcept { return attack_; }
  std::size_t interpreter_queries() const noexcept { return interpreter_; }
  std::size_t total() const noexcept { return attack_ + interpreter_; }

 private:
  std::size_t attack_ = 0;
  std::size_t interpreter_ = 0;
};

/// Black-box classifier surface: a probability vector per text.
class TextClassifier {
 public:
  virtual ~TextClassifier() = default;
  virtual std::size_t label_count() const = 0;
  virtual Eigen::VectorXd probabilities(std::string_view text) const = 0;
};

/// Lowest index wins ties.
template <typename Derived>
std::size_t argmax(const Eigen::MatrixBase<Derived>& values) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values(i) > values(best)) best = i;
  }
  return static_cast<std::size_t>(best);
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(
    const Eigen::MatrixBase<Derived>& logits) {
  using Vec = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;
  Vec shifted = logits.array() - logits.maxCoeff();
  Vec e = shifted.array().exp();
  return e / e.sum();
}

/// Queries the classifier and charges one call to `channel`.
PredictionResult predict(const TextClassifier& model, std::string_view text,
                         QueryLedger& ledger, Channel channel);

class Model final : public TextClassifier {
 public:
  explicit Model(ModelParams params);

  const ModelParams& params() const noexcept { return params_; }
  std::size_t label_count() const override { return params_.label_count; }
  Eigen::VectorXd probabilities(std::string_view text) const override;

 private:
  ModelParams params_;
};

Eigen::VectorXd logits(const ModelParams& params, const FeatureVector& x);
Eigen::VectorXd logits_dense(const ModelParams& params,
                             const Eigen::Ref<const Eigen::VectorXd>& x);

/// d(logit of `label`) / d(feature counts) at featurize(text); length D.
Eigen::VectorXd gradient_wrt_features(const ModelParams& params, std::string_view text,
                                      std::size_t label);
Eigen::VectorXd gradient_wrt_features(const ModelParams& params, const FeatureVector& x,
                                      std::size_t label);

struct TrainConfig {
  std::size_t epochs = 30;
  double learning_rate = 0.5;
  double l2 = 1e-4;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  std::size_t hidden_width = 32;
};

void validate(const TrainConfig& config);

/// Mini-batch gradient descent on softmax cross-entropy + (l2/2)|W|^2.
ModelParams train(const Dataset& dataset, ModelKind kind, const TrainConfig& config,
                  const FeatureConfig& features = {});

double accuracy(const TextClassifier& model, const Dataset& dataset);

std::string serialize_model(const ModelParams& params);
ModelParams deserialize_model(std::string_view bytes);
void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace glyphshift

#endif  // GLYPHSHIFT_MODELS_HPP
