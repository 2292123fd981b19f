#pragma once

// Seeded random formulas and integer-lattice step traces for property tests.

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "clarifystl/stl/formula.hpp"
#include "clarifystl/stl/trace.hpp"

namespace clarifystl::testing {

class FormulaGenerator {
 public:
  struct Options {
    int max_depth = 4;
    std::vector<std::string> variables{"x", "y", "z"};
    int max_bound = 3;
    bool affine = true;
    bool fractional = true;
  };

  FormulaGenerator(std::uint64_t seed, Options opt) : rng_(seed), opt_(std::move(opt)) {}
  explicit FormulaGenerator(std::uint64_t seed) : FormulaGenerator(seed, Options{}) {}

  stl::Formula formula() { return build(pick(0, opt_.max_depth)); }

  stl::Formula build(int depth) {
    using F = stl::Formula;
    if (depth <= 0) {
      int r = pick(0, 19);
      if (r == 0) return F::truth();
      if (r == 1) return F::falsity();
      return F::atom(atom());
    }
    switch (pick(0, 7)) {
      case 0: return F::negation(build(depth - 1));
      case 1: return F::conjunction(build(depth - 1), build(pick(0, depth - 1)));
      case 2: return F::disjunction(build(pick(0, depth - 1)), build(depth - 1));
      case 3: return F::implication(build(depth - 1), build(pick(0, depth - 1)));
      case 4: return F::globally(interval(), build(depth - 1));
      case 5: return F::eventually(interval(), build(depth - 1));
      case 6: return F::until(interval(), build(depth - 1), build(pick(0, depth - 1)));
      default: return F::atom(atom());
    }
  }

  stl::Interval interval() {
    int lo = pick(0, opt_.max_bound - 1);
    int hi = pick(lo + 1, opt_.max_bound);
    return stl::Interval::make(lo, hi);
  }

  stl::Atom atom() {
    std::vector<stl::Term> terms;
    int n = opt_.affine && pick(0, 4) == 0 ? 2 : 1;
    std::set<std::string> used;
    for (int k = 0; k < n; ++k) {
      std::string v = opt_.variables[static_cast<std::size_t>(
          pick(0, static_cast<int>(opt_.variables.size()) - 1))];
      if (!used.insert(v).second) continue;
      double coef = 1.0;
      if (opt_.affine && pick(0, 3) == 0) coef = static_cast<double>(pick(-3, 3));
      if (coef == 0.0) coef = 2.0;
      terms.push_back({coef, v});
    }
    auto cmp = static_cast<stl::Comparator>(pick(0, 3));
    double threshold = static_cast<double>(pick(-4, 4));
    if (opt_.fractional && pick(0, 2) == 0) threshold += 0.25 * pick(1, 3);
    return stl::Atom::make(std::move(terms), cmp, threshold);
  }

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
  Options opt_;
};

/// Random step trace with integer breakpoints and small integer values.
inline stl::Trace random_trace(std::mt19937_64& rng,
                               const std::vector<std::string>& variables,
                               int horizon,
                               int max_segments) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  int segments = std::min(pick(1, max_segments), horizon);
  std::set<int> cuts;
  while (static_cast<int>(cuts.size()) < segments - 1) cuts.insert(pick(1, horizon - 1));
  std::vector<double> bp{0.0};
  for (int c : cuts) bp.push_back(c);
  bp.push_back(horizon);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(variables.size()),
                         static_cast<Eigen::Index>(bp.size() - 1));
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) values(r, c) = pick(-5, 5);
  }
  return stl::Trace(variables, std::move(bp), std::move(values));
}

} // namespace clarifystl::testing
