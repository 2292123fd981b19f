#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "clarifystl/error.hpp"
#include "clarifystl/llm/embedding.hpp"
#include "clarifystl/stl/syntax.hpp"

namespace clarifystl::metrics {

class MetricError : public Error {
 public:
  using Error::Error;
};

/// Positional agreement |{i : gen[i] == ref[i]}| / |ref|.
double positional_token_accuracy(const std::vector<stl::Token>& generated,
                                 const std::vector<stl::Token>& reference);

/// Token accuracy of canonical renderings. Unparseable `generated` scores 0;
/// an unparseable `reference` throws stl::ParseError.
double formula_accuracy(std::string_view generated, std::string_view reference);

/// As formula_accuracy, after abstracting names and numerals.
double template_accuracy(std::string_view generated, std::string_view reference);

/// Tokens used by the text metrics: STL tokens when the text parses as a
/// formula, whitespace-separated words otherwise.
std::vector<std::string> metric_tokens(std::string_view text);

/// BLEU-4 with uniform weights and the standard brevity penalty. A zero
/// n-gram precision m/c is replaced by (m + 1) / (c + 1).
double bleu(const std::vector<std::string>& generated, const std::vector<std::string>& reference);
/// Tokenizes both sides with STL tokens when both parse, words otherwise.
double bleu(std::string_view generated, std::string_view reference);

/// ROUGE-L F1 over whitespace tokens.
double rouge_l(std::string_view generated, std::string_view reference);

/// Greedy cosine matching of per-token embeddings, cosines clamped to [0, 1];
/// F1 of the precision and recall means.
double bert_style_score(std::string_view generated,
                        std::string_view reference,
                        const llm::EmbeddingProvider& provider);

struct ClassificationReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Binary metrics with 1 as the positive class; zero denominators give 0.
ClassificationReport classification_metrics(std::span<const int> predictions,
                                            std::span<const int> labels);

/**
 * Fleiss' kappa over an items x categories matrix of rater counts.
 * Every row must sum to the same rater count n >= 2. Returns 1 when the
 * expected agreement is 1 (a single category used exclusively).
 */
template <typename Derived>
double fleiss_kappa(const Eigen::MatrixBase<Derived>& counts) {
  using Eigen::Index;
  const Index items = counts.rows();
  if (items == 0 || counts.cols() == 0) throw MetricError("empty rating matrix");
  const Eigen::MatrixXd n_ij = counts.template cast<double>();
  if ((n_ij.array() < 0.0).any()) throw MetricError("rating counts must be non-negative");
  const Eigen::VectorXd per_item = n_ij.rowwise().sum();
  const double raters = per_item(0);
  if ((per_item.array() != raters).any()) {
    throw MetricError("every item must be rated by the same number of raters");
  }
  if (raters < 2.0) throw MetricError("fleiss_kappa needs at least two raters per item");

  const Eigen::RowVectorXd p_j = n_ij.colwise().sum() / (static_cast<double>(items) * raters);
  const Eigen::VectorXd p_i =
      (n_ij.array().square().rowwise().sum() - raters) / (raters * (raters - 1.0));
  const double p_bar = p_i.mean();
  const double p_e = p_j.squaredNorm();
  if (p_e >= 1.0) return 1.0;
  return (p_bar - p_e) / (1.0 - p_e);
}

} // namespace clarifystl::metrics
