#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "clarifystl/detection/detection.hpp"
#include "clarifystl/llm/embedding.hpp"

namespace clarifystl::detection {

/// max(|a - p| - |a - n| + margin, 0) with Euclidean norms.
template <typename DA, typename DP, typename DN>
typename DA::Scalar triplet_loss(const Eigen::MatrixBase<DA>& anchor,
                                 const Eigen::MatrixBase<DP>& positive,
                                 const Eigen::MatrixBase<DN>& negative,
                                 typename DA::Scalar margin) {
  if (anchor.size() != positive.size() || anchor.size() != negative.size()) {
    throw DetectionError("triplet members differ in dimension");
  }
  if (!(margin > 0)) throw DetectionError("triplet margin must be positive");
  using S = typename DA::Scalar;
  const S v = (anchor - positive).norm() - (anchor - negative).norm() + margin;
  return v > S(0) ? v : S(0);
}

struct ModelDims {
  Eigen::Index input = 4096;
  Eigen::Index hidden = 1024;
  Eigen::Index output = 256;

  /// 4096 -> 1024 -> 256 scaled to `input`.
  static ModelDims scaled(Eigen::Index input);
  bool operator==(const ModelDims&) const = default;
};

struct Gradients;

/**
 * Projector (affine, ReLU, affine, L2 normalization) followed by a
 * two-logit head with softmax. Class 1 is "ambiguous".
 */
class AmbiguityModel {
 public:
  AmbiguityModel(ModelDims dims, double margin = 1.0, double threshold = 0.5);

  /// Small Gaussian initial weights, zero biases.
  static AmbiguityModel initialized(ModelDims dims, std::uint64_t seed, double margin = 1.0,
                                    double threshold = 0.5);

  const ModelDims& dims() const { return dims_; }
  double margin() const { return margin_; }
  double threshold() const { return threshold_; }

  /// Unit-norm projection of an input embedding.
  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Softmax over (not ambiguous, ambiguous).
  Eigen::Vector2d probabilities(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double p_ambiguous(const Eigen::Ref<const Eigen::VectorXd>& x) const { return probabilities(x)(1); }

  // Parameters. W1: hidden x input, W2: output x hidden, W3: 2 x output.
  Eigen::MatrixXd W1, W2, W3;
  Eigen::VectorXd b1, b2, b3;

  bool operator==(const AmbiguityModel& other) const;

  /// Little-endian `AMBM1` layout: magic, u32 input/hidden/output, f64
  /// margin and threshold, then W1 b1 W2 b2 W3 b3 as row-major f64.
  void save(std::ostream& out) const;
  static AmbiguityModel load(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static AmbiguityModel load(const std::filesystem::path& path);

 private:
  ModelDims dims_;
  double margin_;
  double threshold_;
};

/// Gradients of the per-example loss with respect to every parameter.
struct Gradients {
  Eigen::MatrixXd W1, W2, W3;
  Eigen::VectorXd b1, b2, b3;

  explicit Gradients(const ModelDims& d);
  void set_zero();
};

struct ExampleLoss {
  double triplet = 0.0;
  double cross_entropy = 0.0;
  double total() const { return triplet + cross_entropy; }
};

/// Triplet loss on the projections of (a, p, n) plus cross-entropy of the
/// head on `a` against `label`; accumulates gradients into `grads` when given.
ExampleLoss example_loss(const AmbiguityModel& model,
                         const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& p,
                         const Eigen::Ref<const Eigen::VectorXd>& n,
                         int label,
                         Gradients* grads);

struct TrainingConfig {
  int epochs = 10;
  int batch = 32;
  double lr = 5e-5;
  double margin = 1.0;
  /// Zero entries fall back to ModelDims::scaled(provider dimension).
  ModelDims dims{0, 0, 0};
  double dropout = 0.1;
  std::uint64_t seed = 0;
};

struct EpochLoss {
  double triplet = 0.0;
  double cross_entropy = 0.0;
  double total = 0.0;
};

struct TrainingLog {
  /// Mean triplet loss over one pass of freshly sampled triplets before any
  /// update; absent when no epoch ran.
  std::optional<double> initial_triplet;
  std::vector<EpochLoss> epochs;
};

struct TrainingResult {
  AmbiguityModel model;
  TrainingLog log;
};

/// Triplet + cross-entropy training (1:1) with Adam. The positive is a second
/// dropout mask over the anchor's embedding, the negative a uniformly drawn
/// opposite-class embedding. The provider is only queried, never changed.
TrainingResult train_ambiguity_model(const std::vector<std::pair<std::string, int>>& records,
                                     const llm::EmbeddingProvider& provider,
                                     const TrainingConfig& config);

/// Same, on precomputed embeddings (one column per example).
TrainingResult train_ambiguity_model(const Eigen::MatrixXd& embeddings,
                                     const std::vector<int>& labels,
                                     const TrainingConfig& config);

/// is_defective iff P(ambiguous) >= threshold; types {Semantic} when set.
DetectionResult classify_ambiguity(const AmbiguityModel& model,
                                   const std::string& text,
                                   const llm::EmbeddingProvider& provider);
DetectionResult classify_embedding(const AmbiguityModel& model,
                                   const Eigen::Ref<const Eigen::VectorXd>& embedding);

class ClassifierAmbiguityDetector : public Detector {
 public:
  ClassifierAmbiguityDetector(AmbiguityModel model, const llm::EmbeddingProvider& provider)
      : model_(std::move(model)), provider_(provider) {}
  DetectionResult detect(const std::string& requirement, int) override {
    return classify_ambiguity(model_, requirement, provider_);
  }

 private:
  AmbiguityModel model_;
  const llm::EmbeddingProvider& provider_;
};

} // namespace clarifystl::detection
