#include "skipstep/engine.hpp"

#include "skipstep/addition.hpp"
#include "skipstep/algebra.hpp"
#include "skipstep/direction.hpp"
#include "skipstep/errors.hpp"
#include "skipstep/trace.hpp"

namespace skipstep {

namespace {

template <typename... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <typename... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

}  // namespace

Question make_question(Payload payload, SplitLabel split) {
  Question q;
  q.task = task_of(payload);
  q.split = split;
  if (const auto* a = std::get_if<AlgebraPayload>(&payload)) {
    q.glyph_map_id = a->glyph_map_id;
  }
  q.id = question_id(payload);
  q.reference_trace = solve_full(payload);
  q.full_steps = static_cast<int>(q.reference_trace.size());
  q.payload = std::move(payload);
  return q;
}

Trace solve_full(const Payload& p) {
  return std::visit(
      overloaded{
          [](const AlgebraPayload& x) { return algebra::solve_full(x); },
          [](const AdditionPayload& x) { return addition::solve_full(x); },
          [](const DirectionPayload& x) { return direction::solve_full(x); }},
      p);
}

Trace merge_steps(const Question& q, const Trace& trace, int start, int width) {
  return std::visit(
      overloaded{[&](const AlgebraPayload& x) {
                   return algebra::merge_steps(x, trace, start, width);
                 },
                 [&](const AdditionPayload&) {
                   return addition::merge_steps(trace, start, width);
                 },
                 [&](const DirectionPayload&) {
                   return direction::merge_steps(trace, start, width);
                 }},
      q.payload);
}

Trace realize(const Question& q, const std::vector<int>& widths,
              const std::vector<bool>& corrupt) {
  return std::visit(
      overloaded{[&](const AlgebraPayload& x) {
                   return algebra::realize(x, widths, corrupt);
                 },
                 [&](const AdditionPayload& x) {
                   return addition::realize(x, widths, corrupt);
                 },
                 [&](const DirectionPayload& x) {
                   return direction::realize(x, widths, corrupt);
                 }},
      q.payload);
}

Verdict verify_trace(const Question& q, const Trace& trace, bool strict) {
  return std::visit(
      overloaded{[&](const AlgebraPayload& x) {
                   return algebra::verify_trace(x, q.id, trace, strict);
                 },
                 [&](const AdditionPayload& x) {
                   return addition::verify_trace(x, trace, strict);
                 },
                 [&](const DirectionPayload& x) {
                   return direction::verify_trace(x, trace, strict);
                 }},
      q.payload);
}

Verdict verify_text(const Question& q, std::string_view text, bool strict) {
  Trace trace;
  try {
    trace = parse_trace_text(text, q);
  } catch (const ParseError& e) {
    return Verdict::invalid("line " + std::to_string(e.position()) + ": " +
                            e.reason());
  }
  if (trace.empty()) return Verdict::invalid("no steps");
  return verify_trace(q, trace, strict);
}

std::optional<SplitLabel> classify_split(const Payload& p) {
  return std::visit(
      overloaded{[](const AlgebraPayload& x) {
                   return algebra::classify_split(
                       x, glyph_map(x.glyph_map_id).train_prefix);
                 },
                 [](const AdditionPayload& x) {
                   return addition::classify_split(x);
                 },
                 [](const DirectionPayload& x) {
                   return direction::classify_split(x);
                 }},
      p);
}

bool split_consistent(const Payload& p, SplitLabel label) {
  const auto c = classify_split(p);
  if (!c) return false;
  if (label == SplitLabel::in_domain_test) return *c == SplitLabel::train;
  return *c == label;
}

std::string render_step_body(const StepBody& body, const Question& q) {
  return std::visit(
      overloaded{[&](const PeelStep& s) {
                   return algebra::render_step_body(s,
                                                    glyph_map(q.glyph_map_id));
                 },
                 [](const ColumnStep& s) {
                   return addition::render_step_body(s);
                 },
                 [](const TurnStep& s) {
                   return direction::render_step_body(s);
                 }},
      body);
}

std::vector<std::string> check_record(const DatasetRecord& r, bool strict) {
  std::vector<std::string> why;
  const Question& q = r.question;
  if (r.question_id != q.id || question_id(q.payload) != q.id) {
    why.push_back("id does not match payload");
  }
  if (!split_consistent(q.payload, q.split)) {
    why.push_back("payload outside its split");
  }
  const int n = static_cast<int>(r.trace.size());
  if (r.instruction.is_budgeted() && r.instruction.budget() != n) {
    why.push_back("step count " + std::to_string(n) + " differs from budget " +
                  std::to_string(r.instruction.budget()));
  }
  switch (r.origin.kind) {
    case OriginKind::full:
      if (n != q.full_steps) why.push_back("full record skips steps");
      break;
    case OriginKind::warmstart_skip:
    case OriginKind::iter_skip:
      if (n >= q.full_steps) why.push_back("skip record skips nothing");
      if (r.origin.kind == OriginKind::iter_skip && r.origin.iter < 0) {
        why.push_back("negative iteration");
      }
      break;
  }
  const Verdict v = verify_trace(q, r.trace, strict);
  if (!v.well_formed) {
    why.push_back("malformed trace: " + v.error);
  } else {
    if (!v.final_correct) why.push_back("wrong final answer");
    if (strict && !v.steps_valid) why.push_back("invalid intermediate step");
  }
  return why;
}

}  // namespace skipstep
