#include "clarifystl/metrics/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "clarifystl/rng.hpp"
#include "clarifystl/stl/monitor.hpp"
#include "clarifystl/stl/syntax.hpp"

namespace clarifystl::metrics {

namespace {

struct FormulaShape {
  std::vector<double> endpoints;
  double narrowest = std::numeric_limits<double>::infinity();
  std::map<std::string, std::vector<std::pair<double, double>>> pivots;  // (pivot, delta)
};

void survey(const stl::Formula& f, double off_lo, double off_hi, FormulaShape& shape) {
  using stl::Kind;
  switch (f.kind()) {
    case Kind::True:
    case Kind::False:
      return;
    case Kind::Atom: {
      const auto& a = f.as_atom();
      const double n = static_cast<double>(a.terms.size());
      for (const auto& t : a.terms) {
        double c = t.coefficient == 0.0 ? 0.0 : a.threshold / (t.coefficient * n);
        double delta = std::max(0.1, 0.1 * std::abs(c));
        shape.pivots[t.variable].emplace_back(c, delta);
      }
      return;
    }
    case Kind::Not:
      survey(f.operand(), off_lo, off_hi, shape);
      return;
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
      survey(f.lhs(), off_lo, off_hi, shape);
      survey(f.rhs(), off_lo, off_hi, shape);
      return;
    default: {
      const auto& i = f.interval();
      shape.narrowest = std::min(shape.narrowest, i.hi - i.lo);
      for (double p : {off_lo + i.lo, off_lo + i.hi, off_hi + i.lo, off_hi + i.hi}) {
        shape.endpoints.push_back(p);
      }
      if (f.kind() == Kind::Until) {
        survey(f.lhs(), off_lo, off_hi + i.hi, shape);
        survey(f.rhs(), off_lo + i.lo, off_hi + i.hi, shape);
      } else {
        survey(f.operand(), off_lo + i.lo, off_hi + i.hi, shape);
      }
    }
  }
}

stl::Trace sample_trace(const FormulaShape& shape,
                        const std::vector<std::string>& vars,
                        double horizon,
                        double jitter,
                        int max_segments,
                        bool steady,
                        Rng& rng) {
  const int segments = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(max_segments)));
  std::vector<double> cuts;
  for (int k = 0; k + 1 < segments; ++k) {
    double p = 0.0;
    if (!shape.endpoints.empty() && rng.coin(0.7)) {
      p = shape.endpoints[rng.index(shape.endpoints.size())] + rng.uniform(-jitter, jitter);
    } else {
      p = rng.uniform(0.0, horizon);
    }
    if (p > 0.0 && p < horizon) cuts.push_back(p);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<double> bp{0.0};
  bp.insert(bp.end(), cuts.begin(), cuts.end());
  bp.push_back(horizon);

  const auto rows = static_cast<Eigen::Index>(vars.size());
  const auto cols = static_cast<Eigen::Index>(bp.size() - 1);
  Eigen::MatrixXd values(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& pv = shape.pivots.at(vars[static_cast<std::size_t>(r)]);
    const double steady_sign = rng.coin() ? 1.0 : -1.0;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& [pivot, delta] = pv[rng.index(pv.size())];
      const double sign = steady ? steady_sign : (rng.coin() ? 1.0 : -1.0);
      values(r, c) = pivot + sign * delta * rng.uniform(0.5, 2.0);
    }
  }
  return stl::Trace(vars, std::move(bp), std::move(values));
}

} // namespace

std::vector<stl::Trace> generate_traces(const stl::Formula& reference,
                                        const TraceGenerationConfig& config) {
  if (config.count < 2) throw TraceBudgetExhausted("trace count must be at least 2");
  FormulaShape shape;
  survey(reference, 0.0, 0.0, shape);

  const auto names = stl::variables(reference);
  const std::vector<std::string> vars(names.begin(), names.end());
  if (vars.empty()) {
    throw TraceBudgetExhausted("formula mentions no signal; its verdict is constant");
  }
  const double horizon = stl::temporal_depth(reference) + 1.0;
  const double jitter = std::isfinite(shape.narrowest) ? 0.1 * shape.narrowest : 0.1;

  Rng rng(config.seed);
  std::vector<stl::Trace> found;
  std::vector<bool> verdicts;
  bool seen_sat = false;
  bool seen_vio = false;
  const std::size_t budget = config.budget_factor * config.count;
  for (std::size_t attempt = 0; attempt < budget; ++attempt) {
    stl::Trace tr = sample_trace(shape, vars, horizon, jitter, config.max_segments,
                                 attempt % 2 == 0, rng);
    const bool v = stl::evaluate(reference, tr, 0.0);
    seen_sat = seen_sat || v;
    seen_vio = seen_vio || !v;
    found.push_back(std::move(tr));
    verdicts.push_back(v);
    if (found.size() >= config.count && seen_sat && seen_vio) break;
  }
  if (!(seen_sat && seen_vio) || found.size() < config.count) {
    throw TraceBudgetExhausted("no " + std::string(seen_sat ? "violating" : "satisfying") +
                               " trace for '" + stl::render(reference) + "' within " +
                               std::to_string(budget) + " attempts");
  }

  std::vector<stl::Trace> out(found.begin(),
                              found.begin() + static_cast<std::ptrdiff_t>(config.count));
  const std::size_t n = config.count;
  const bool head_sat = std::find(verdicts.begin(), verdicts.begin() + static_cast<std::ptrdiff_t>(n),
                                  true) != verdicts.begin() + static_cast<std::ptrdiff_t>(n);
  const bool head_vio = std::find(verdicts.begin(), verdicts.begin() + static_cast<std::ptrdiff_t>(n),
                                  false) != verdicts.begin() + static_cast<std::ptrdiff_t>(n);
  if (!head_sat || !head_vio) {
    const bool missing = !head_sat;
    auto it = std::find(verdicts.begin() + static_cast<std::ptrdiff_t>(n), verdicts.end(), missing);
    out.back() = found[static_cast<std::size_t>(it - verdicts.begin())];
  }
  return out;
}

RobustnessReport semantic_robustness(const stl::Formula& generated,
                                     const stl::Formula& reference,
                                     const std::vector<stl::Trace>& traces) {
  RobustnessReport r;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    try {
      const bool ref = stl::evaluate(reference, traces[i], 0.0);
      const bool gen = stl::evaluate(generated, traces[i], 0.0);
      r.per_trace.emplace_back(ref, gen);
      if (ref == gen) ++r.n_agree;
    } catch (const stl::EvaluationError& e) {
      r.excluded.emplace_back(i, e.what());
    }
  }
  r.n_traces = r.per_trace.size();
  r.score = r.n_traces == 0 ? 0.0
                            : 100.0 * static_cast<double>(r.n_agree) /
                                  static_cast<double>(r.n_traces);
  return r;
}

RobustnessReport semantic_robustness(std::string_view generated,
                                     std::string_view reference,
                                     const std::vector<stl::Trace>& traces) {
  const stl::Formula ref = stl::parse(reference);
  if (!stl::check_syntax(generated).empty()) {
    RobustnessReport r;
    r.n_traces = traces.size();
    return r;
  }
  return semantic_robustness(stl::parse(generated), ref, traces);
}

nlohmann::ordered_json trace_to_json(const stl::Trace& trace) {
  nlohmann::ordered_json j;
  j["variables"] = trace.variables();
  j["breakpoints"] = trace.breakpoints();
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < trace.values().rows(); ++r) {
    std::vector<double> row(trace.values().row(r).begin(), trace.values().row(r).end());
    rows.push_back(row);
  }
  j["values"] = std::move(rows);
  j["horizon"] = trace.horizon();
  return j;
}

stl::Trace trace_from_json(const nlohmann::json& j) {
  try {
    auto vars = j.at("variables").get<std::vector<std::string>>();
    auto bp = j.at("breakpoints").get<std::vector<double>>();
    auto rows = j.at("values").get<std::vector<std::vector<double>>>();
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()),
                           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<Eigen::Index>(rows[r].size()) != values.cols()) {
        throw stl::InvalidTrace("ragged value matrix");
      }
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    stl::Trace tr(std::move(vars), std::move(bp), std::move(values));
    if (j.contains("horizon") && j["horizon"].get<double>() != tr.horizon()) {
      throw stl::InvalidTrace("horizon must equal the last breakpoint");
    }
    return tr;
  } catch (const nlohmann::json::exception& e) {
    throw stl::InvalidTrace(std::string("malformed trace record: ") + e.what());
  }
}

} // namespace clarifystl::metrics
