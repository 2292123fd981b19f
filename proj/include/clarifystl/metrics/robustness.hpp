#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "clarifystl/error.hpp"
#include "clarifystl/stl/formula.hpp"
#include "clarifystl/stl/trace.hpp"

namespace clarifystl::metrics {

class TraceBudgetExhausted : public Error {
 public:
  using Error::Error;
};

struct TraceGenerationConfig {
  std::size_t count = 20;
  std::uint64_t seed = 0;
  /// Attempts allowed per requested trace.
  std::size_t budget_factor = 50;
  int max_segments = 6;
};

/**
 * Random step traces tailored to `reference`: breakpoints near the interval
 * endpoints of its temporal operators (jittered by 10% of the narrowest
 * interval), values a random multiple of delta = max(0.1, 0.1 |c|) above or
 * below each atom's pivot c. Horizon is the formula's temporal depth + 1.
 *
 * The result holds `count` traces, at least one satisfying and one
 * violating `reference` at t = 0. Throws TraceBudgetExhausted when
 * budget_factor * count attempts do not produce both verdicts.
 */
std::vector<stl::Trace> generate_traces(const stl::Formula& reference,
                                        const TraceGenerationConfig& config);

struct RobustnessReport {
  std::size_t n_traces = 0;
  std::size_t n_agree = 0;
  /// 100 * n_agree / n_traces, or 0 when no trace was usable.
  double score = 0.0;
  /// (reference verdict, generated verdict) per usable trace.
  std::vector<std::pair<bool, bool>> per_trace;
  /// Input index and reason for each trace left out.
  std::vector<std::pair<std::size_t, std::string>> excluded;
};

/// Verdict agreement at t = 0. An unparseable `generated` scores 0 on every
/// trace; traces on which either formula cannot be evaluated are excluded.
RobustnessReport semantic_robustness(std::string_view generated,
                                     std::string_view reference,
                                     const std::vector<stl::Trace>& traces);
RobustnessReport semantic_robustness(const stl::Formula& generated,
                                     const stl::Formula& reference,
                                     const std::vector<stl::Trace>& traces);

/// Trace record with fields variables, breakpoints, values, horizon.
nlohmann::ordered_json trace_to_json(const stl::Trace& trace);
stl::Trace trace_from_json(const nlohmann::json& j);

} // namespace clarifystl::metrics
