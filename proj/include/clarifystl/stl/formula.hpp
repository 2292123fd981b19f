#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "clarifystl/error.hpp"

namespace clarifystl::stl {

/// Raised when constructing a node that violates an AST invariant.
class InvalidFormula : public Error {
 public:
  using Error::Error;
};

/// Closed, bounded, non-singular time interval [lo, hi] in seconds.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  /// Throws InvalidFormula unless 0 <= lo < hi < inf.
  static Interval make(double lo, double hi);

  bool operator==(const Interval&) const = default;
};

enum class Comparator { Less, LessEqual, Greater, GreaterEqual };

const char* to_string(Comparator c);

/// One `coefficient * variable` summand of an affine atom.
struct Term {
  double coefficient = 1.0;
  std::string variable;

  bool operator==(const Term&) const = default;
};

/// Affine predicate `sum(terms) <cmp> threshold`.
struct Atom {
  std::vector<Term> terms;
  Comparator comparator = Comparator::Greater;
  double threshold = 0.0;

  /// Validates identifiers and the non-empty term list.
  static Atom make(std::vector<Term> terms, Comparator cmp, double threshold);
  /// Shorthand for the single-variable atom `name <cmp> threshold`.
  static Atom make(std::string name, Comparator cmp, double threshold);

  bool operator==(const Atom&) const = default;
};

bool is_identifier(const std::string& s);

enum class Kind {
  Atom,
  True,
  False,
  Not,
  And,
  Or,
  Implies,
  Globally,
  Eventually,
  Until,
};

/**
 * Immutable STL formula. Copies share structure; equality is structural.
 *
 * Temporal operators always carry a bounded Interval. Or and Implies are
 * kept as their own node kinds (rather than being desugared on
 * construction) so that rendering reproduces what was parsed.
 */
class Formula {
 public:
  static Formula atom(Atom a);
  static Formula truth();
  static Formula falsity();
  static Formula negation(Formula f);
  static Formula conjunction(Formula lhs, Formula rhs);
  static Formula disjunction(Formula lhs, Formula rhs);
  static Formula implication(Formula lhs, Formula rhs);
  static Formula globally(Interval i, Formula f);
  static Formula eventually(Interval i, Formula f);
  static Formula until(Interval i, Formula lhs, Formula rhs);

  Kind kind() const;
  bool is_temporal() const;
  bool is_binary() const;

  /// Preconditions on the accessors below follow kind(); violating them
  /// throws std::logic_error.
  const Atom& as_atom() const;
  const Interval& interval() const;
  /// Operand of Not, Globally and Eventually.
  const Formula& operand() const;
  const Formula& lhs() const;
  const Formula& rhs() const;

  /// Stable address of the shared node, usable as a memoization key.
  const void* identity() const { return node_.get(); }

  bool operator==(const Formula& other) const;

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

/// Sorted set of variable names mentioned in the formula.
std::set<std::string> variables(const Formula& f);

/// Length of the time window needed to decide the formula at t = 0: the
/// sum of upper bounds along the deepest temporal nesting.
double temporal_depth(const Formula& f);

} // namespace clarifystl::stl
