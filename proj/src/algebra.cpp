#include "skipstep/algebra.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <set>
#include <stdexcept>

#include "skipstep/engine.hpp"
#include "skipstep/errors.hpp"
#include "skipstep/trace.hpp"
#include "skipstep/util.hpp"

namespace skipstep::algebra {

namespace {

void validate_constraints(const GenerationConstraints& c, const GlyphMap& g) {
  if (c.depth_min < 0 || c.depth_max > 14 || c.depth_min > c.depth_max) {
    throw ConstraintError("depth range must lie within [0, 14]");
  }
  if (!(c.fresh_var_prob >= 0.0 && c.fresh_var_prob <= 1.0)) {
    throw ConstraintError("fresh_var_prob must lie within [0, 1]");
  }
  if (c.glyph_pool < 1 || c.glyph_pool > g.var_count()) {
    throw ConstraintError("glyph pool larger than the alphabet");
  }
}

VarId draw_fresh(Rng& rng, int pool, const std::vector<VarId>& used) {
  std::vector<VarId> available;
  for (VarId v = 1; v <= pool; ++v) {
    if (std::find(used.begin(), used.end(), v) == used.end()) {
      available.push_back(v);
    }
  }
  if (available.empty()) {
    throw ConstraintError("glyph prefix of " + std::to_string(pool) +
                          " too small for the requested fresh variables");
  }
  return available[rng.below(available.size())];
}

/// One primitive peel of the target side. With `corrupt` the operator is
/// carried over un-inverted.
void peel_once(ExprPtr& lhs, ExprPtr& rhs, bool corrupt) {
  const Op op = lhs->op;
  if (count_var(*lhs->left, kTarget) == 1) {
    rhs = make_bin(corrupt ? op : inverse(op), rhs, lhs->right);
    lhs = lhs->left;
    return;
  }
  const ExprPtr& v = lhs->left;
  if (corrupt) {
    rhs = make_bin(op, rhs, v);
  } else {
    switch (op) {
      case Op::plus: rhs = make_bin(Op::minus, rhs, v); break;
      case Op::times: rhs = make_bin(Op::divide, rhs, v); break;
      case Op::minus: rhs = make_bin(Op::minus, v, rhs); break;
      case Op::divide: rhs = make_bin(Op::divide, v, rhs); break;
    }
  }
  lhs = lhs->right;
}

Trace build_trace(std::vector<PeelStep> bodies, const GlyphMap& g) {
  Trace t;
  t.steps.reserve(bodies.size());
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    Step s;
    s.index = static_cast<int>(i);
    s.text = step_line(s.index, render_step_body(bodies[i], g));
    s.body = std::move(bodies[i]);
    t.steps.push_back(std::move(s));
  }
  return t;
}

void structural_key(const Expr& e, std::string& out) {
  if (e.is_var()) {
    out += 'v';
    out += std::to_string(e.var);
    return;
  }
  out += '(';
  structural_key(*e.left, out);
  out += static_cast<char>('0' + static_cast<int>(e.op));
  structural_key(*e.right, out);
  out += ')';
}

/// Fraction-free rational value; the denominator is never zero.
struct Frac {
  mpz_class num;
  mpz_class den;
};

bool evaluate(const Expr& e, const std::vector<mpz_class>& values, Frac& out) {
  if (e.is_var()) {
    out.num = values.at(e.var);
    out.den = 1;
    return true;
  }
  Frac a, b;
  if (!evaluate(*e.left, values, a) || !evaluate(*e.right, values, b)) {
    return false;
  }
  switch (e.op) {
    case Op::plus:
      out.num = a.num * b.den + b.num * a.den;
      out.den = a.den * b.den;
      break;
    case Op::minus:
      out.num = a.num * b.den - b.num * a.den;
      out.den = a.den * b.den;
      break;
    case Op::times:
      out.num = a.num * b.num;
      out.den = a.den * b.den;
      break;
    case Op::divide:
      if (sgn(b.num) == 0) return false;
      out.num = a.num * b.den;
      out.den = a.den * b.num;
      break;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------- generation

AlgebraPayload generate_payload(std::uint64_t seed,
                                const GenerationConstraints& c) {
  const GlyphMap& g = glyph_map(c.glyph_map_id);
  validate_constraints(c, g);
  Rng rng(seed);
  const int depth = static_cast<int>(rng.between(c.depth_min, c.depth_max));
  ExprPtr lhs = make_var(kTarget);
  std::vector<VarId> used;
  for (int i = 0; i < depth; ++i) {
    const Op op = kAllOps[rng.below(kAllOps.size())];
    VarId v;
    if (used.empty() || rng.chance(c.fresh_var_prob)) {
      v = draw_fresh(rng, c.glyph_pool, used);
      used.push_back(v);
    } else {
      v = used[rng.below(used.size())];
    }
    lhs = make_bin(op, lhs, make_var(v));
  }
  const VarId rhs_seed = draw_fresh(rng, c.glyph_pool, used);

  AlgebraPayload p;
  p.equation = {lhs, make_var(rhs_seed)};
  p.glyph_map_id = c.glyph_map_id;
  p.num_vars = static_cast<int>(used.size()) + 2;
  p.depth = depth;
  return p;
}

Question generate_instance(std::uint64_t seed, const GenerationConstraints& c) {
  AlgebraPayload p = generate_payload(seed, c);
  const int prefix = glyph_map(p.glyph_map_id).train_prefix;
  const SplitLabel split = classify_split(p, prefix).value_or(SplitLabel::train);
  return make_question(std::move(p), split);
}

// ---------------------------------------------------------------- solving

Trace realize(const AlgebraPayload& p, const std::vector<int>& widths,
              const std::vector<bool>& corrupt) {
  ExprPtr lhs = p.equation.lhs;
  ExprPtr rhs = p.equation.rhs;
  if (count_var(*lhs, kTarget) == 0) std::swap(lhs, rhs);
  std::vector<PeelStep> bodies;
  bodies.reserve(widths.size());
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const bool bad = i < corrupt.size() && corrupt[i];
    for (int j = 0; j < widths[i]; ++j) {
      if (lhs->is_var()) throw RangeError("plan covers more peels than depth");
      peel_once(lhs, rhs, bad && j == 0);
    }
    bodies.push_back({Equation{lhs, rhs}, widths[i]});
  }
  return build_trace(std::move(bodies), glyph_map(p.glyph_map_id));
}

Trace solve_full(const AlgebraPayload& p) {
  const int depth = target_depth(*p.equation.lhs);
  return realize(p, std::vector<int>(std::max(depth, 0), 1), {});
}

Trace merge_steps(const AlgebraPayload& p, const Trace& trace, int start,
                  int width) {
  const int n = static_cast<int>(trace.size());
  if (width < 2 || start < 0 || start + width > n) {
    throw RangeError("merge range [" + std::to_string(start) + ", " +
                     std::to_string(start + width) + ") invalid for " +
                     std::to_string(n) + " steps");
  }
  std::vector<PeelStep> bodies;
  for (int i = 0; i < n; ++i) {
    const auto& body = std::get<PeelStep>(trace.steps[i].body);
    if (i > start && i < start + width) {
      bodies.back().equation = body.equation;
      bodies.back().peeled_width += body.peeled_width;
    } else {
      bodies.push_back(body);
    }
  }
  return build_trace(std::move(bodies), glyph_map(p.glyph_map_id));
}

// ---------------------------------------------------------------- equivalence

struct EquivalenceChecker::Impl {
  struct Point {
    std::vector<mpz_class> values;
    bool reference_defined = false;
    Frac reference;
  };

  ExprPtr reference_rhs;
  int trials;
  Rng rng;
  std::vector<Point> points;

  const Point& point(std::size_t i) {
    while (points.size() <= i) {
      Point pt;
      // one value per possible variable id; unused ones are simply ignored
      pt.values.resize(kMaxVarId + 1);
      for (auto& v : pt.values) {
        const auto x = rng.between(2, (std::int64_t{1} << 31) - 1);
        v = mpz_class(static_cast<unsigned long>(x));
      }
      pt.reference_defined = evaluate(*reference_rhs, pt.values, pt.reference);
      points.push_back(std::move(pt));
    }
    return points[i];
  }

  static constexpr int kMaxVarId = 64;
};

EquivalenceChecker::EquivalenceChecker(const Equation& reference, int trials,
                                       std::uint64_t seed)
    : impl_(std::make_unique<Impl>(Impl{nullptr, trials, Rng(seed), {}})) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  auto iso = isolate(reference);
  if (!iso) {
    throw std::invalid_argument("reference must contain the target once");
  }
  if (!variables(**iso).empty() && variables(**iso).back() > Impl::kMaxVarId) {
    throw std::invalid_argument("variable id out of range");
  }
  impl_->reference_rhs = *iso;
}

EquivalenceChecker::~EquivalenceChecker() = default;

bool EquivalenceChecker::equivalent(const Equation& candidate) {
  auto iso = isolate(candidate);
  if (!iso) return false;
  const auto vars = variables(**iso);
  if (!vars.empty() && vars.back() > Impl::kMaxVarId) return false;

  int agreed = 0;
  int skipped = 0;
  Frac value;
  for (std::size_t i = 0; agreed < impl_->trials; ++i) {
    const auto& pt = impl_->point(i);
    if (!pt.reference_defined || !evaluate(**iso, pt.values, value)) {
      if (++skipped > kMaxRedraws) {
        throw DegenerateError("no admissible evaluation point after " +
                              std::to_string(kMaxRedraws) + " redraws");
      }
      continue;
    }
    if (value.num * pt.reference.den != pt.reference.num * value.den) {
      return false;
    }
    ++agreed;
  }
  return true;
}

bool check_equivalent(const Equation& a, const Equation& b, int trials,
                      std::optional<std::uint64_t> seed) {
  const auto total = [](const Equation& e) {
    return count_var(*e.lhs, kTarget) + count_var(*e.rhs, kTarget);
  };
  if (total(a) != 1 || total(b) != 1) {
    throw std::invalid_argument("equations must contain the target once");
  }
  if (!seed) {
    std::string key;
    structural_key(*a.lhs, key);
    key += '=';
    structural_key(*a.rhs, key);
    key += '|';
    structural_key(*b.lhs, key);
    key += '=';
    structural_key(*b.rhs, key);
    seed = fnv1a64(key);
  }
  EquivalenceChecker checker(a, trials, *seed);
  return checker.equivalent(b);
}

// ---------------------------------------------------------------- verification

Verdict verify_trace(const AlgebraPayload& p, std::string_view question_id,
                     const Trace& trace, bool strict_intermediates) {
  Verdict v;
  v.step_count = static_cast<int>(trace.size());
  v.steps_checked = strict_intermediates;
  for (const auto& s : trace.steps) v.step_widths.push_back(step_width(s));

  if (trace.empty()) {
    v.final_correct = is_isolated(p.equation);
    v.steps_valid = true;
    return v;
  }

  try {
    EquivalenceChecker checker(p.equation, EquivalenceChecker::kDefaultTrials,
                               fnv1a64(question_id));
    int prev_depth = target_depth(*p.equation.lhs);
    bool all_valid = true;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const auto* body = std::get_if<PeelStep>(&trace.steps[i].body);
      if (body == nullptr) return Verdict::invalid("not an algebra step");
      const Equation& eq = body->equation;
      const bool last = i + 1 == trace.size();
      const int depth = target_depth(*eq.lhs);
      const bool progress = depth >= 0 && depth < prev_depth &&
                            body->peeled_width == prev_depth - depth;
      if (depth >= 0) prev_depth = depth;

      bool equivalent = false;
      if (strict_intermediates || last) {
        equivalent = checker.equivalent(eq);
      }
      if (strict_intermediates) {
        const bool ok = progress && equivalent;
        v.step_correct.push_back(ok);
        all_valid = all_valid && ok;
      }
      if (last) v.final_correct = is_isolated(eq) && equivalent;
    }
    v.steps_valid = strict_intermediates && all_valid;
  } catch (const DegenerateError& e) {
    return Verdict::invalid(e.what());
  } catch (const std::invalid_argument& e) {
    return Verdict::invalid(e.what());
  }
  return v;
}

// ---------------------------------------------------------------- splits

int count_distinct_vars(const Equation& eq) {
  std::set<VarId> s;
  for (VarId x : variables(*eq.lhs)) s.insert(x);
  for (VarId x : variables(*eq.rhs)) s.insert(x);
  const bool has_target =
      count_var(*eq.lhs, kTarget) + count_var(*eq.rhs, kTarget) > 0;
  return static_cast<int>(s.size()) + (has_target ? 1 : 0);
}

std::optional<SplitLabel> classify_split(const AlgebraPayload& p,
                                         int glyph_prefix) {
  bool outside = false;
  for (const auto* side : {&p.equation.lhs, &p.equation.rhs}) {
    for (VarId x : variables(**side)) outside = outside || x > glyph_prefix;
  }
  if (p.num_vars <= 7 && p.depth <= 5 && !outside) return SplitLabel::train;
  if ((p.num_vars == 8 || p.num_vars == 9) && outside) {
    return SplitLabel::ood_easy;
  }
  if (p.num_vars >= 10 && p.num_vars <= 14 && p.depth >= 9 && outside) {
    return SplitLabel::ood_hard;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- text

std::string render_step_body(const PeelStep& s, const GlyphMap& g) {
  return render_equation(s.equation, g);
}

PeelStep parse_step_body(std::string_view body, const GlyphMap& g,
                         int prev_depth) {
  PeelStep s;
  s.equation = parse_equation(body, g);
  const int depth = target_depth(*s.equation.lhs);
  s.peeled_width = prev_depth - (depth < 0 ? 0 : depth);
  return s;
}

}  // namespace skipstep::algebra
