#pragma once

// Small question builders shared by the unit tests.

#include <string>
#include <vector>

#include "skipstep/algebra.hpp"
#include "skipstep/engine.hpp"
#include "skipstep/expr.hpp"
#include "skipstep/types.hpp"

namespace fixtures {

using namespace skipstep;

inline AlgebraPayload algebra_payload(const std::string& text) {
  AlgebraPayload p;
  p.equation = parse_equation(text, default_glyph_map());
  p.depth = target_depth(*p.equation.lhs);
  p.num_vars = algebra::count_distinct_vars(p.equation);
  return p;
}

inline Question algebra_q(const std::string& text,
                          SplitLabel split = SplitLabel::train) {
  return make_question(algebra_payload(text), split);
}

inline std::vector<int> digits(unsigned long long v) {
  std::string s = std::to_string(v);
  std::vector<int> out;
  for (char c : s) out.push_back(c - '0');
  return out;
}

inline Question addition_q(unsigned long long a, unsigned long long b,
                           SplitLabel split = SplitLabel::train) {
  return make_question(AdditionPayload{digits(a), digits(b)}, split);
}

inline Question direction_q(Heading h, std::vector<Action> actions,
                            SplitLabel split = SplitLabel::train) {
  return make_question(DirectionPayload{h, std::move(actions)}, split);
}

inline DatasetRecord record(const Question& q, const Trace& t,
                            Origin origin = Origin::full()) {
  DatasetRecord r;
  r.question_id = q.id;
  r.question = q;
  r.trace = t;
  r.instruction = StepInstruction::budgeted(static_cast<int>(t.size()));
  r.origin = origin;
  return r;
}

}  // namespace fixtures
