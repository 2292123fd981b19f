#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "clarifystl/error.hpp"

namespace clarifystl::llm {

using EmbeddingVector = Eigen::VectorXd;

class EmbeddingError : public Error {
 public:
  using Error::Error;
};

/// Fixed-dimension text encoder. Stands in for a frozen sentence encoder.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual Eigen::Index dimension() const = 0;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
};

struct EmbeddingBatch {
  std::vector<EmbeddingVector> vectors;
  /// Set for inputs that produced the zero vector (e.g. empty text).
  std::vector<bool> zero;
};

/// One vector per text. Throws EmbeddingError on an empty list or a
/// provider returning the wrong dimension.
EmbeddingBatch embed(const std::vector<std::string>& texts, const EmbeddingProvider& provider);

/// Lower-cased word tokens: runs of letters, digits, '_' and '.'.
std::vector<std::string> word_tokens(std::string_view text);

/// Deterministic bag-of-tokens encoder: FNV-1a bucketed token counts,
/// L2-normalized. Text without word tokens maps to the zero vector.
class HashEmbeddingProvider : public EmbeddingProvider {
 public:
  static constexpr Eigen::Index kDefaultDimension = 256;

  explicit HashEmbeddingProvider(Eigen::Index dimension = kDefaultDimension);

  Eigen::Index dimension() const override { return dim_; }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  Eigen::Index dim_;
};

/// Exact-match table of precomputed vectors; unknown text is an error.
class LookupEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit LookupEmbeddingProvider(Eigen::Index dimension) : dim_(dimension) {}

  void insert(std::string text, EmbeddingVector v);

  Eigen::Index dimension() const override { return dim_; }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  Eigen::Index dim_;
  std::map<std::string, EmbeddingVector, std::less<>> table_;
};

} // namespace clarifystl::llm
