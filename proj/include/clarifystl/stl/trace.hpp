#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "clarifystl/error.hpp"

namespace clarifystl::stl {

class InvalidTrace : public Error {
 public:
  using Error::Error;
};

/**
 * Multi-variable right-continuous step signal over [0, horizon].
 *
 * Breakpoints t0 = 0 < t1 < ... < tm = horizon delimit m segments. Row v of
 * the value matrix holds variable v's value on each [ti, ti+1); the value
 * at the horizon itself is that of the last segment.
 */
class Trace {
 public:
  Trace(std::vector<std::string> variables,
        std::vector<double> breakpoints,
        Eigen::MatrixXd values);

  /// Constant signal: every variable keeps one value on [0, horizon].
  static Trace constant(std::vector<std::string> variables,
                        const std::vector<double>& values,
                        double horizon);

  const std::vector<std::string>& variables() const { return variables_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const Eigen::MatrixXd& values() const { return values_; }
  double horizon() const { return breakpoints_.back(); }
  Eigen::Index segment_count() const { return values_.cols(); }

  std::optional<Eigen::Index> index_of(const std::string& variable) const;
  /// Segment containing t; t must lie in [0, horizon].
  Eigen::Index segment_at(double t) const;
  double value(Eigen::Index variable, double t) const;

  bool operator==(const Trace& other) const;

 private:
  std::vector<std::string> variables_;
  std::vector<double> breakpoints_;
  Eigen::MatrixXd values_;
};

} // namespace clarifystl::stl
