#include "clarifystl/stl/trace.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "clarifystl/stl/formula.hpp"

namespace clarifystl::stl {

Trace::Trace(std::vector<std::string> variables,
             std::vector<double> breakpoints,
             Eigen::MatrixXd values)
    : variables_(std::move(variables)),
      breakpoints_(std::move(breakpoints)),
      values_(std::move(values)) {
  if (breakpoints_.size() < 2) throw InvalidTrace("trace needs at least two breakpoints");
  if (breakpoints_.front() != 0.0) throw InvalidTrace("first breakpoint must be 0");
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    if (!std::isfinite(breakpoints_[i])) throw InvalidTrace("breakpoints must be finite");
    if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1])) {
      throw InvalidTrace("breakpoints must be strictly increasing");
    }
  }
  std::set<std::string> seen;
  for (const auto& v : variables_) {
    if (!is_identifier(v)) throw InvalidTrace("invalid variable name '" + v + "'");
    if (!seen.insert(v).second) throw InvalidTrace("duplicate variable '" + v + "'");
  }
  if (values_.rows() != static_cast<Eigen::Index>(variables_.size()) ||
      values_.cols() != static_cast<Eigen::Index>(breakpoints_.size() - 1)) {
    throw InvalidTrace("value matrix must be variables x segments");
  }
  if (!values_.allFinite()) throw InvalidTrace("trace values must be finite");
}

Trace Trace::constant(std::vector<std::string> variables,
                      const std::vector<double>& values,
                      double horizon) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = values[i];
  return Trace(std::move(variables), {0.0, horizon}, std::move(m));
}

std::optional<Eigen::Index> Trace::index_of(const std::string& variable) const {
  auto it = std::find(variables_.begin(), variables_.end(), variable);
  if (it == variables_.end()) return std::nullopt;
  return static_cast<Eigen::Index>(it - variables_.begin());
}

Eigen::Index Trace::segment_at(double t) const {
  // last breakpoint <= t, clamped so that t == horizon maps to the final segment
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  auto idx = static_cast<Eigen::Index>(it - breakpoints_.begin()) - 1;
  return std::clamp<Eigen::Index>(idx, 0, segment_count() - 1);
}

double Trace::value(Eigen::Index variable, double t) const {
  return values_(variable, segment_at(t));
}

bool Trace::operator==(const Trace& other) const {
  return variables_ == other.variables_ && breakpoints_ == other.breakpoints_ &&
         values_.rows() == other.values_.rows() && values_.cols() == other.values_.cols() &&
         values_ == other.values_;
}

} // namespace clarifystl::stl
