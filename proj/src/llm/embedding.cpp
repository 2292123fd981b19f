#include "clarifystl/llm/embedding.hpp"

#include <cctype>
#include <cstdint>

namespace clarifystl::llm {

EmbeddingBatch embed(const std::vector<std::string>& texts, const EmbeddingProvider& provider) {
  if (texts.empty()) throw EmbeddingError("nothing to embed");
  EmbeddingBatch batch;
  batch.vectors.reserve(texts.size());
  batch.zero.reserve(texts.size());
  for (const auto& t : texts) {
    EmbeddingVector v = provider.embed(t);
    if (v.size() != provider.dimension()) {
      throw EmbeddingError("provider returned dimension " + std::to_string(v.size()) +
                           ", expected " + std::to_string(provider.dimension()));
    }
    if (!v.allFinite()) throw EmbeddingError("provider returned non-finite values");
    batch.zero.push_back(v.isZero(0.0));
    batch.vectors.push_back(std::move(v));
  }
  return batch;
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '_' || c == '.') {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  // a trailing sentence period is not part of the word
  for (auto& w : out) {
    while (w.size() > 1 && w.back() == '.') w.pop_back();
  }
  return out;
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

} // namespace

HashEmbeddingProvider::HashEmbeddingProvider(Eigen::Index dimension) : dim_(dimension) {
  if (dimension <= 0) throw EmbeddingError("embedding dimension must be positive");
}

EmbeddingVector HashEmbeddingProvider::embed(std::string_view text) const {
  EmbeddingVector v = EmbeddingVector::Zero(dim_);
  for (const auto& tok : word_tokens(text)) {
    std::uint64_t h = fnv1a(tok);
    auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim_));
    v[bucket] += 1.0;
  }
  const double n = v.norm();
  if (n > 0.0) v /= n;
  return v;
}

void LookupEmbeddingProvider::insert(std::string text, EmbeddingVector v) {
  if (v.size() != dim_) throw EmbeddingError("lookup vector has the wrong dimension");
  table_[std::move(text)] = std::move(v);
}

EmbeddingVector LookupEmbeddingProvider::embed(std::string_view text) const {
  auto it = table_.find(text);
  if (it == table_.end()) throw EmbeddingError("no embedding for '" + std::string(text) + "'");
  return it->second;
}

} // namespace clarifystl::llm
