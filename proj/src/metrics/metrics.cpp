#include "clarifystl/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace clarifystl::metrics {

namespace {

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::vector<std::string> texts(const std::vector<stl::Token>& toks) {
  std::vector<std::string> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(t.text);
  return out;
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(const std::vector<std::string>& toks,
                                                             std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    ++counts[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                      toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

} // namespace

double positional_token_accuracy(const std::vector<stl::Token>& generated,
                                 const std::vector<stl::Token>& reference) {
  if (reference.empty()) throw MetricError("reference has no tokens");
  const std::size_t n = std::min(generated.size(), reference.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (generated[i] == reference[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(reference.size());
}

double formula_accuracy(std::string_view generated, std::string_view reference) {
  const auto ref = stl::tokenize(reference);
  if (!stl::check_syntax(generated).empty()) return 0.0;
  return positional_token_accuracy(stl::tokenize(generated), ref);
}

double template_accuracy(std::string_view generated, std::string_view reference) {
  const auto ref = stl::extract_template(stl::parse(reference));
  if (!stl::check_syntax(generated).empty()) return 0.0;
  const auto gen = stl::extract_template(stl::parse(generated));
  return positional_token_accuracy(gen.tokens, ref.tokens);
}

std::vector<std::string> metric_tokens(std::string_view text) {
  if (stl::check_syntax(text).empty()) return texts(stl::tokenize(text));
  return whitespace_tokens(text);
}

double bleu(const std::vector<std::string>& generated, const std::vector<std::string>& reference) {
  if (generated.empty() || reference.empty()) return 0.0;
  constexpr std::size_t kOrder = 4;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= kOrder; ++n) {
    const auto gen = ngram_counts(generated, n);
    const auto ref = ngram_counts(reference, n);
    std::size_t matched = 0;
    std::size_t total = 0;
    for (const auto& [gram, c] : gen) {
      total += c;
      auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(c, it->second);
    }
    double p = matched == 0 ? 1.0 / static_cast<double>(total + 1)
                            : static_cast<double>(matched) / static_cast<double>(total);
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(generated.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / static_cast<double>(kOrder));
}

double bleu(std::string_view generated, std::string_view reference) {
  if (stl::check_syntax(generated).empty() && stl::check_syntax(reference).empty()) {
    return bleu(texts(stl::tokenize(generated)), texts(stl::tokenize(reference)));
  }
  return bleu(whitespace_tokens(generated), whitespace_tokens(reference));
}

double rouge_l(std::string_view generated, std::string_view reference) {
  const auto g = whitespace_tokens(generated);
  const auto r = whitespace_tokens(reference);
  if (g.empty() || r.empty()) return 0.0;
  std::vector<std::size_t> prev(r.size() + 1, 0), cur(r.size() + 1, 0);
  for (std::size_t i = 1; i <= g.size(); ++i) {
    for (std::size_t j = 1; j <= r.size(); ++j) {
      cur[j] = g[i - 1] == r[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev[r.size()]);
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(g.size());
  const double rec = lcs / static_cast<double>(r.size());
  return 2.0 * p * rec / (p + rec);
}

double bert_style_score(std::string_view generated,
                        std::string_view reference,
                        const llm::EmbeddingProvider& provider) {
  const auto g = whitespace_tokens(generated);
  const auto r = whitespace_tokens(reference);
  if (g.empty() || r.empty()) return 0.0;

  auto unit_rows = [&](const std::vector<std::string>& toks) {
    const auto batch = llm::embed(toks, provider);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(toks.size()), provider.dimension());
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const auto& v = batch.vectors[i];
      const double n = v.norm();
      m.row(static_cast<Eigen::Index>(i)) = v.transpose();
      if (n > 0.0) m.row(static_cast<Eigen::Index>(i)) /= n;
    }
    return m;
  };
  const Eigen::MatrixXd eg = unit_rows(g);
  const Eigen::MatrixXd er = unit_rows(r);
  const Eigen::MatrixXd cos = (eg * er.transpose()).cwiseMax(0.0).cwiseMin(1.0);

  const double precision = cos.rowwise().maxCoeff().mean();
  const double recall = cos.colwise().maxCoeff().mean();
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

ClassificationReport classification_metrics(std::span<const int> predictions,
                                            std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw MetricError("predictions and labels differ in length");
  }
  if (predictions.empty()) throw MetricError("no predictions");
  double tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int p = predictions[i];
    const int y = labels[i];
    if ((p != 0 && p != 1) || (y != 0 && y != 1)) throw MetricError("labels must be 0 or 1");
    if (p == 1 && y == 1) ++tp;
    else if (p == 1) ++fp;
    else if (y == 1) ++fn;
    else ++tn;
  }
  auto ratio = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
  ClassificationReport r;
  r.accuracy = (tp + tn) / static_cast<double>(predictions.size());
  r.precision = ratio(tp, tp + fp);
  r.recall = ratio(tp, tp + fn);
  r.f1 = ratio(2.0 * r.precision * r.recall, r.precision + r.recall);
  return r;
}

} // namespace clarifystl::metrics
