#include "clarifystl/stl/formula.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace clarifystl::stl {

Interval Interval::make(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidFormula("interval bounds must be finite");
  }
  if (lo < 0.0) {
    throw InvalidFormula("interval bounds must be non-negative");
  }
  if (lo >= hi) {
    throw InvalidFormula("interval lower bound must be less than upper bound");
  }
  return Interval{lo, hi};
}

const char* to_string(Comparator c) {
  switch (c) {
    case Comparator::Less: return "<";
    case Comparator::LessEqual: return "<=";
    case Comparator::Greater: return ">";
    case Comparator::GreaterEqual: return ">=";
  }
  return "?";
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  return std::all_of(s.begin() + 1, s.end(), [](char ch) {
    auto c = static_cast<unsigned char>(ch);
    return std::isalnum(c) || c == '_';
  });
}

Atom Atom::make(std::vector<Term> terms, Comparator cmp, double threshold) {
  if (terms.empty()) throw InvalidFormula("atom needs at least one term");
  for (const auto& t : terms) {
    if (!is_identifier(t.variable)) {
      throw InvalidFormula("invalid signal identifier '" + t.variable + "'");
    }
    if (!std::isfinite(t.coefficient)) throw InvalidFormula("coefficient must be finite");
  }
  if (!std::isfinite(threshold)) throw InvalidFormula("threshold must be finite");
  return Atom{std::move(terms), cmp, threshold};
}

Atom Atom::make(std::string name, Comparator cmp, double threshold) {
  return make({Term{1.0, std::move(name)}}, cmp, threshold);
}

struct Formula::Node {
  Kind kind;
  Atom atom;
  Interval interval;
  std::vector<Formula> children;
};

Formula::Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Formula Formula::atom(Atom a) {
  return Formula(std::make_shared<const Node>(Node{Kind::Atom, std::move(a), {}, {}}));
}

Formula Formula::truth() {
  static const Formula t(std::make_shared<const Node>(Node{Kind::True, {}, {}, {}}));
  return t;
}

Formula Formula::falsity() {
  static const Formula f(std::make_shared<const Node>(Node{Kind::False, {}, {}, {}}));
  return f;
}

Formula Formula::negation(Formula f) {
  return Formula(std::make_shared<const Node>(Node{Kind::Not, {}, {}, {std::move(f)}}));
}

Formula Formula::conjunction(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::And, {}, {}, {std::move(lhs), std::move(rhs)}}));
}

Formula Formula::disjunction(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::Or, {}, {}, {std::move(lhs), std::move(rhs)}}));
}

Formula Formula::implication(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::Implies, {}, {}, {std::move(lhs), std::move(rhs)}}));
}

Formula Formula::globally(Interval i, Formula f) {
  i = Interval::make(i.lo, i.hi);
  return Formula(std::make_shared<const Node>(Node{Kind::Globally, {}, i, {std::move(f)}}));
}

Formula Formula::eventually(Interval i, Formula f) {
  i = Interval::make(i.lo, i.hi);
  return Formula(std::make_shared<const Node>(Node{Kind::Eventually, {}, i, {std::move(f)}}));
}

Formula Formula::until(Interval i, Formula lhs, Formula rhs) {
  i = Interval::make(i.lo, i.hi);
  return Formula(std::make_shared<const Node>(
      Node{Kind::Until, {}, i, {std::move(lhs), std::move(rhs)}}));
}

Kind Formula::kind() const { return node_->kind; }

bool Formula::is_temporal() const {
  auto k = kind();
  return k == Kind::Globally || k == Kind::Eventually || k == Kind::Until;
}

bool Formula::is_binary() const {
  auto k = kind();
  return k == Kind::And || k == Kind::Or || k == Kind::Implies || k == Kind::Until;
}

const Atom& Formula::as_atom() const {
  if (kind() != Kind::Atom) throw std::logic_error("formula is not an atom");
  return node_->atom;
}

const Interval& Formula::interval() const {
  if (!is_temporal()) throw std::logic_error("formula has no interval");
  return node_->interval;
}

const Formula& Formula::operand() const {
  auto k = kind();
  if (k != Kind::Not && k != Kind::Globally && k != Kind::Eventually) {
    throw std::logic_error("formula is not unary");
  }
  return node_->children.front();
}

const Formula& Formula::lhs() const {
  if (!is_binary()) throw std::logic_error("formula is not binary");
  return node_->children[0];
}

const Formula& Formula::rhs() const {
  if (!is_binary()) throw std::logic_error("formula is not binary");
  return node_->children[1];
}

bool Formula::operator==(const Formula& other) const {
  if (node_ == other.node_) return true;
  const Node& a = *node_;
  const Node& b = *other.node_;
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::Atom:
      return a.atom == b.atom;
    case Kind::True:
    case Kind::False:
      return true;
    case Kind::Globally:
    case Kind::Eventually:
    case Kind::Until:
      if (!(a.interval == b.interval)) return false;
      break;
    default:
      break;
  }
  return a.children == b.children;
}

namespace {

void collect_variables(const Formula& f, std::set<std::string>& out) {
  switch (f.kind()) {
    case Kind::Atom:
      for (const auto& t : f.as_atom().terms) out.insert(t.variable);
      return;
    case Kind::True:
    case Kind::False:
      return;
    case Kind::Not:
    case Kind::Globally:
    case Kind::Eventually:
      collect_variables(f.operand(), out);
      return;
    default:
      collect_variables(f.lhs(), out);
      collect_variables(f.rhs(), out);
  }
}

} // namespace

std::set<std::string> variables(const Formula& f) {
  std::set<std::string> out;
  collect_variables(f, out);
  return out;
}

double temporal_depth(const Formula& f) {
  switch (f.kind()) {
    case Kind::Atom:
    case Kind::True:
    case Kind::False:
      return 0.0;
    case Kind::Not:
      return temporal_depth(f.operand());
    case Kind::Globally:
    case Kind::Eventually:
      return f.interval().hi + temporal_depth(f.operand());
    case Kind::Until:
      return f.interval().hi + std::max(temporal_depth(f.lhs()), temporal_depth(f.rhs()));
    default:
      return std::max(temporal_depth(f.lhs()), temporal_depth(f.rhs()));
  }
}

} // namespace clarifystl::stl
