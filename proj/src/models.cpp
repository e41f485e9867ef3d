#include "glyphshift/models.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "glyphshift/error.hpp"
#include "glyphshift/rng.hpp"

namespace glyphshift {

const char* to_string(ModelKind kind) {
  return kind == ModelKind::linear ? "linear" : "mlp";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "linear") return ModelKind::linear;
  if (name == "mlp") return ModelKind::mlp;
  throw Error(ErrorKind::configuration, "unknown model kind '" + std::string(name) + "'");
}

std::size_t ModelParams::hidden_width() const {
  return kind == ModelKind::mlp && !layers.empty()
             ? static_cast<std::size_t>(layers.front().weights.rows())
             : 0;
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  if (a.kind != b.kind || !(a.features == b.features) || a.label_count != b.label_count ||
      a.layers.size() != b.layers.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    const auto& la = a.layers[i];
    const auto& lb = b.layers[i];
    if (la.weights.rows() != lb.weights.rows() || la.weights.cols() != lb.weights.cols() ||
        la.bias.size() != lb.bias.size()) {
      return false;
    }
    // Bitwise comparison; NaN-safe and distinguishes -0.0.
    if (std::memcmp(la.weights.data(), lb.weights.data(),
                    sizeof(double) * static_cast<std::size_t>(la.weights.size())) != 0 ||
        std::memcmp(la.bias.data(), lb.bias.data(),
                    sizeof(double) * static_cast<std::size_t>(la.bias.size())) != 0) {
      return false;
    }
  }
  return true;
}

ModelParams zero_params(ModelKind kind, const FeatureConfig& features, std::size_t label_count,
                        std::size_t hidden_width) {
  validate(features);
  ModelParams params;
  params.kind = kind;
  params.features = features;
  params.label_count = label_count;
  const auto d = static_cast<Eigen::Index>(features.dimension);
  const auto m = static_cast<Eigen::Index>(label_count);
  if (kind == ModelKind::linear) {
    params.layers.push_back({Eigen::MatrixXd::Zero(m, d), Eigen::VectorXd::Zero(m)});
  } else {
    if (hidden_width == 0) throw Error(ErrorKind::parameter, "mlp hidden width must be >= 1");
    const auto h = static_cast<Eigen::Index>(hidden_width);
    params.layers.push_back({Eigen::MatrixXd::Zero(h, d), Eigen::VectorXd::Zero(h)});
    params.layers.push_back({Eigen::MatrixXd::Zero(m, h), Eigen::VectorXd::Zero(m)});
  }
  return params;
}

void validate(const ModelParams& params) {
  validate(params.features);
  if (params.label_count < 2) throw Error(ErrorKind::model_format, "label count must be >= 2");
  const auto d = static_cast<Eigen::Index>(params.features.dimension);
  const auto m = static_cast<Eigen::Index>(params.label_count);
  auto check = [](const DenseLayer& layer, Eigen::Index rows, Eigen::Index cols) {
    if (layer.weights.rows() != rows || layer.weights.cols() != cols ||
        layer.bias.size() != rows) {
      throw Error(ErrorKind::model_format, "layer shape mismatch");
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw Error(ErrorKind::model_format, "non-finite parameters");
    }
  };
  if (params.kind == ModelKind::linear) {
    if (params.layers.size() != 1) throw Error(ErrorKind::model_format, "linear model needs 1 layer");
    check(params.layers[0], m, d);
  } else {
    if (params.layers.size() != 2) throw Error(ErrorKind::model_format, "mlp needs 2 layers");
    const auto h = params.layers[0].weights.rows();
    if (h < 1) throw Error(ErrorKind::model_format, "mlp hidden width must be >= 1");
    check(params.layers[0], h, d);
    check(params.layers[1], m, h);
  }
}

PredictionResult predict(const TextClassifier& model, std::string_view text, QueryLedger& ledger,
                         Channel channel) {
  ledger.record(channel);
  PredictionResult result;
  result.probabilities = model.probabilities(text);
  result.label = argmax(result.probabilities);
  return result;
}

Model::Model(ModelParams params) : params_(std::move(params)) { validate(params_); }

Eigen::VectorXd Model::probabilities(std::string_view text) const {
  return softmax(logits(params_, featurize(text, params_.features)));
}

namespace {

// First-layer pre-activation W x + b for sparse x.
Eigen::VectorXd affine_sparse(const DenseLayer& layer, const FeatureVector& x) {
  Eigen::VectorXd out = layer.bias;
  for (std::size_t k = 0; k < x.nnz(); ++k) {
    out.noalias() += layer.weights.col(static_cast<Eigen::Index>(x.indices[k])) * x.counts[k];
  }
  return out;
}

}  // namespace

Eigen::VectorXd logits(const ModelParams& params, const FeatureVector& x) {
  Eigen::VectorXd first = affine_sparse(params.layers[0], x);
  if (params.kind == ModelKind::linear) return first;
  const Eigen::VectorXd hidden = first.array().tanh();
  return params.layers[1].weights * hidden + params.layers[1].bias;
}

Eigen::VectorXd logits_dense(const ModelParams& params,
                             const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd first = params.layers[0].weights * x + params.layers[0].bias;
  if (params.kind == ModelKind::linear) return first;
  const Eigen::VectorXd hidden = first.array().tanh();
  return params.layers[1].weights * hidden + params.layers[1].bias;
}

Eigen::VectorXd gradient_wrt_features(const ModelParams& params, const FeatureVector& x,
                                      std::size_t label) {
  if (label >= params.label_count) throw Error(ErrorKind::index, "class index out of range");
  const auto row = static_cast<Eigen::Index>(label);
  if (params.kind == ModelKind::linear) return params.layers[0].weights.row(row).transpose();
  const Eigen::VectorXd hidden = affine_sparse(params.layers[0], x).array().tanh();
  const Eigen::VectorXd upstream =
      params.layers[1].weights.row(row).transpose().cwiseProduct(
          (1.0 - hidden.array().square()).matrix());
  return params.layers[0].weights.transpose() * upstream;
}

Eigen::VectorXd gradient_wrt_features(const ModelParams& params, std::string_view text,
                                      std::size_t label) {
  return gradient_wrt_features(params, featurize(text, params.features), label);
}

void validate(const TrainConfig& config) {
  if (config.epochs < 1) throw Error(ErrorKind::parameter, "epochs must be >= 1");
  if (!(config.learning_rate > 0.0)) throw Error(ErrorKind::parameter, "learning rate must be > 0");
  if (!(config.l2 >= 0.0)) throw Error(ErrorKind::parameter, "l2 penalty must be >= 0");
  if (config.batch_size < 1) throw Error(ErrorKind::parameter, "batch size must be >= 1");
}

namespace {

struct SparseUpdate {
  std::size_t column;
  Eigen::VectorXd delta;
};

}  // namespace

ModelParams train(const Dataset& dataset, ModelKind kind, const TrainConfig& config,
                  const FeatureConfig& features) {
  validate(dataset);
  validate(config);
  validate(features);
  {
    std::set<std::size_t> labels;
    for (const auto& r : dataset.records) labels.insert(r.label);
    if (labels.size() < 2) {
      throw Error(ErrorKind::training, "training data must contain at least two classes");
    }
  }

  ModelParams params = zero_params(kind, features, dataset.label_count,
                                   kind == ModelKind::mlp ? config.hidden_width : 0);
  Rng rng(config.seed);
  if (kind == ModelKind::mlp) {
    auto& w1 = params.layers[0].weights;
    for (Eigen::Index c = 0; c < w1.cols(); ++c) {
      for (Eigen::Index r = 0; r < w1.rows(); ++r) w1(r, c) = rng.uniform(-0.1, 0.1);
    }
    auto& w2 = params.layers[1].weights;
    const double scale = 1.0 / std::sqrt(static_cast<double>(w2.cols()));
    for (Eigen::Index c = 0; c < w2.cols(); ++c) {
      for (Eigen::Index r = 0; r < w2.rows(); ++r) w2(r, c) = rng.uniform(-scale, scale);
    }
  }

  std::vector<FeatureVector> inputs;
  inputs.reserve(dataset.size());
  for (const auto& r : dataset.records) inputs.push_back(featurize(r.text.content(), features));

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const auto m = static_cast<Eigen::Index>(dataset.label_count);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double step = config.learning_rate / static_cast<double>(end - start);

      // Gradients are taken at the pre-batch parameters, then applied.
      std::vector<SparseUpdate> first_updates;
      Eigen::VectorXd first_bias = Eigen::VectorXd::Zero(params.layers[0].bias.size());
      Eigen::MatrixXd second_weights;
      Eigen::VectorXd second_bias;
      if (kind == ModelKind::mlp) {
        second_weights = Eigen::MatrixXd::Zero(m, params.layers[1].weights.cols());
        second_bias = Eigen::VectorXd::Zero(m);
      }

      for (std::size_t b = start; b < end; ++b) {
        const auto& x = inputs[order[b]];
        const auto label = static_cast<Eigen::Index>(dataset.records[order[b]].label);
        Eigen::VectorXd pre = affine_sparse(params.layers[0], x);
        Eigen::VectorXd first_delta;
        if (kind == ModelKind::linear) {
          Eigen::VectorXd p = softmax(pre);
          epoch_loss -= std::log(std::max(p(label), 1e-300));
          p(label) -= 1.0;
          first_delta = p;
        } else {
          const Eigen::VectorXd hidden = pre.array().tanh();
          const Eigen::VectorXd z = params.layers[1].weights * hidden + params.layers[1].bias;
          Eigen::VectorXd p = softmax(z);
          epoch_loss -= std::log(std::max(p(label), 1e-300));
          p(label) -= 1.0;
          second_weights.noalias() += p * hidden.transpose();
          second_bias += p;
          first_delta = (params.layers[1].weights.transpose() * p)
                            .cwiseProduct((1.0 - hidden.array().square()).matrix());
        }
        first_bias += first_delta;
        for (std::size_t k = 0; k < x.nnz(); ++k) {
          first_updates.push_back({x.indices[k], first_delta * x.counts[k]});
        }
      }

      const double decay = 1.0 - config.learning_rate * config.l2;
      params.layers[0].weights *= decay;
      for (const auto& u : first_updates) {
        params.layers[0].weights.col(static_cast<Eigen::Index>(u.column)) -= step * u.delta;
      }
      params.layers[0].bias -= step * first_bias;
      if (kind == ModelKind::mlp) {
        params.layers[1].weights *= decay;
        params.layers[1].weights -= step * second_weights;
        params.layers[1].bias -= step * second_bias;
      }
    }
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorKind::training, "training diverged at epoch " + std::to_string(epoch + 1));
    }
  }
  for (const auto& layer : params.layers) {
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw Error(ErrorKind::training, "training produced non-finite parameters");
    }
  }
  return params;
}

double accuracy(const TextClassifier& model, const Dataset& dataset) {
  if (dataset.records.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& r : dataset.records) {
    if (argmax(model.probabilities(r.text.content())) == r.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

// Persistence: "GSMODEL1", then little-endian u64 header fields
// (kind, ngram_min, ngram_max, dimension, label_count, layer_count), then per
// layer u64 rows, u64 cols, rows*cols f64 weights row-major, rows f64 bias.

namespace {

constexpr char kMagic[8] = {'G', 'S', 'M', 'O', 'D', 'E', 'L', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(out, bits);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    if (pos_ + 8 > bytes_.size()) throw Error(ErrorKind::model_format, "truncated model file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  double f64() {
    const auto bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const ModelParams& params) {
  validate(params);
  std::string out(kMagic, sizeof kMagic);
  put_u64(out, params.kind == ModelKind::linear ? 0 : 1);
  put_u64(out, params.features.ngram_min);
  put_u64(out, params.features.ngram_max);
  put_u64(out, params.features.dimension);
  put_u64(out, params.label_count);
  put_u64(out, params.layers.size());
  for (const auto& layer : params.layers) {
    put_u64(out, static_cast<std::uint64_t>(layer.weights.rows()));
    put_u64(out, static_cast<std::uint64_t>(layer.weights.cols()));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) put_f64(out, layer.weights(r, c));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) put_f64(out, layer.bias(r));
  }
  return out;
}

ModelParams deserialize_model(std::string_view bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorKind::model_format, "missing GSMODEL1 header");
  }
  Reader in(bytes.substr(sizeof kMagic));
  ModelParams params;
  const auto kind = in.u64();
  if (kind > 1) throw Error(ErrorKind::model_format, "unknown model kind");
  params.kind = kind == 0 ? ModelKind::linear : ModelKind::mlp;
  params.features.ngram_min = in.u64();
  params.features.ngram_max = in.u64();
  params.features.dimension = in.u64();
  params.label_count = in.u64();
  const auto layer_count = in.u64();
  if (layer_count > 2) throw Error(ErrorKind::model_format, "too many layers");
  for (std::uint64_t l = 0; l < layer_count; ++l) {
    const auto rows = in.u64();
    const auto cols = in.u64();
    if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1ull << 28) ||
        (rows * cols + rows) * 8 > in.remaining()) {
      throw Error(ErrorKind::model_format, "layer shape exceeds file size");
    }
    DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = in.f64();
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = in.f64();
    params.layers.push_back(std::move(layer));
  }
  if (in.remaining() != 0) throw Error(ErrorKind::model_format, "trailing bytes in model file");
  validate(params);
  return params;
}

void save_model(const ModelParams& params, const std::filesystem::path& path) {
  const auto bytes = serialize_model(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::data, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::model_format, "cannot open model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace glyphshift
