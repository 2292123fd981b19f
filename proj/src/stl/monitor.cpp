#include "clarifystl/stl/monitor.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "clarifystl/stl/syntax.hpp"

namespace clarifystl::stl {

namespace {

class Monitor {
 public:
  explicit Monitor(const Trace& trace) : trace_(trace) {}

  void bind_variables(const Formula& f) {
    for (const auto& name : variables(f)) {
      auto idx = trace_.index_of(name);
      if (!idx) throw EvaluationError("unknown variable '" + name + "'");
      index_[name] = *idx;
    }
  }

  bool eval(const Formula& f, double t) {
    switch (f.kind()) {
      case Kind::True:
        return true;
      case Kind::False:
        return false;
      case Kind::Atom:
        return eval_atom(f.as_atom(), t);
      case Kind::Not:
        return !eval(f.operand(), t);
      case Kind::And:
        return eval(f.lhs(), t) && eval(f.rhs(), t);
      case Kind::Or:
        return eval(f.lhs(), t) || eval(f.rhs(), t);
      case Kind::Implies:
        return !eval(f.lhs(), t) || eval(f.rhs(), t);
      case Kind::Eventually: {
        const Interval& i = window(f, t);
        return exists(f.operand(), t + i.lo, t + i.hi);
      }
      case Kind::Globally: {
        const Interval& i = window(f, t);
        return forall(f.operand(), t + i.lo, t + i.hi);
      }
      case Kind::Until:
        return eval_until(f, t);
    }
    return false;
  }

 private:
  const Interval& window(const Formula& f, double t) const {
    const Interval& i = f.interval();
    if (t + i.hi > trace_.horizon()) {
      throw HorizonExceeded("window [" + format_number(t + i.lo) + ", " +
                            format_number(t + i.hi) + "] exceeds horizon " +
                            format_number(trace_.horizon()));
    }
    return i;
  }

  bool eval_atom(const Atom& a, double t) {
    double lhs = 0.0;
    for (const auto& term : a.terms) {
      lhs += term.coefficient * trace_.value(index_.at(term.variable), t);
    }
    switch (a.comparator) {
      case Comparator::Less: return lhs < a.threshold;
      case Comparator::LessEqual: return lhs <= a.threshold;
      case Comparator::Greater: return lhs > a.threshold;
      case Comparator::GreaterEqual: return lhs >= a.threshold;
    }
    return false;
  }

  // Instants where the truth of f may change value. Between two consecutive
  // entries f is constant.
  const std::vector<double>& change_points(const Formula& f) {
    auto it = memo_.find(f.identity());
    if (it != memo_.end()) return it->second;

    std::vector<double> pts;
    const double horizon = trace_.horizon();
    auto keep = [&](double p) {
      if (p > 0.0 && p < horizon) pts.push_back(p);
    };
    switch (f.kind()) {
      case Kind::True:
      case Kind::False:
        break;
      case Kind::Atom: {
        const auto& bp = trace_.breakpoints();
        for (std::size_t k = 1; k + 1 < bp.size(); ++k) pts.push_back(bp[k]);
        break;
      }
      case Kind::Not:
        pts = change_points(f.operand());
        break;
      case Kind::And:
      case Kind::Or:
      case Kind::Implies: {
        const auto& a = change_points(f.lhs());
        const auto& b = change_points(f.rhs());
        pts.insert(pts.end(), a.begin(), a.end());
        pts.insert(pts.end(), b.begin(), b.end());
        break;
      }
      case Kind::Globally:
      case Kind::Eventually: {
        const Interval& i = f.interval();
        for (double p : change_points(f.operand())) {
          keep(p - i.lo);
          keep(p - i.hi);
        }
        break;
      }
      case Kind::Until: {
        const Interval& i = f.interval();
        std::vector<double> src = change_points(f.lhs());
        const auto& b = change_points(f.rhs());
        src.insert(src.end(), b.begin(), b.end());
        for (double p : src) {
          keep(p);
          keep(p - i.lo);
          keep(p - i.hi);
        }
        break;
      }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return memo_.emplace(f.identity(), std::move(pts)).first->second;
  }

  // Sample instants covering [lo, hi]: both ends, every change point of the
  // given sets strictly inside, and the midpoint of every gap in between.
  std::vector<double> samples(double lo, double hi,
                              std::initializer_list<const std::vector<double>*> sets) const {
    std::vector<double> cuts{lo};
    for (const auto* s : sets) {
      auto first = std::upper_bound(s->begin(), s->end(), lo);
      auto last = std::lower_bound(s->begin(), s->end(), hi);
      if (first < last) cuts.insert(cuts.end(), first, last);
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<double> out;
    out.reserve(cuts.size() * 2);
    for (std::size_t k = 0; k < cuts.size(); ++k) {
      out.push_back(cuts[k]);
      if (k + 1 < cuts.size()) out.push_back(0.5 * (cuts[k] + cuts[k + 1]));
    }
    return out;
  }

  bool exists(const Formula& f, double lo, double hi) {
    for (double s : samples(lo, hi, {&change_points(f)})) {
      if (eval(f, s)) return true;
    }
    return false;
  }

  bool forall(const Formula& f, double lo, double hi) {
    for (double s : samples(lo, hi, {&change_points(f)})) {
      if (!eval(f, s)) return false;
    }
    return true;
  }

  bool eval_until(const Formula& f, double t) {
    const Interval& i = window(f, t);
    const Formula& hold = f.lhs();
    const Formula& goal = f.rhs();
    const double lo = t + i.lo;
    const double hi = t + i.hi;

    if (!forall(hold, t, lo)) return false;
    // Within one gap of the combined partition both operands are constant,
    // so each sample stands for the whole gap it represents. Samples are
    // visited in time order: once lhs fails, no later witness can exist.
    for (double s : samples(lo, hi, {&change_points(hold), &change_points(goal)})) {
      if (!eval(hold, s)) return false;
      if (eval(goal, s)) return true;
    }
    return false;
  }

  const Trace& trace_;
  std::unordered_map<std::string, Eigen::Index> index_;
  std::unordered_map<const void*, std::vector<double>> memo_;
};

} // namespace

bool evaluate(const Formula& formula, const Trace& trace, double t) {
  if (!(t >= 0.0 && t <= trace.horizon())) {
    throw EvaluationError("evaluation time " + format_number(t) + " outside [0, " +
                          format_number(trace.horizon()) + "]");
  }
  Monitor m(trace);
  m.bind_variables(formula);
  return m.eval(formula, t);
}

} // namespace clarifystl::stl
