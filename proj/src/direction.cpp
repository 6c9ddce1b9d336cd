#include "skipstep/direction.hpp"

#include "skipstep/engine.hpp"
#include "skipstep/errors.hpp"
#include "skipstep/trace.hpp"
#include "skipstep/util.hpp"

namespace skipstep::direction {

namespace {

constexpr Action kActions[] = {Action::left, Action::right, Action::around};

Trace build_trace(std::vector<TurnStep> bodies) {
  Trace t;
  t.steps.reserve(bodies.size());
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    Step s;
    s.index = static_cast<int>(i);
    s.text = step_line(s.index, render_step_body(bodies[i]));
    s.body = std::move(bodies[i]);
    t.steps.push_back(std::move(s));
  }
  return t;
}

void check_payload(const DirectionPayload& p) {
  if (p.actions.empty() || p.actions.size() > 30) {
    throw ConstraintError("direction questions need 1 to 30 actions");
  }
}

}  // namespace

DirectionPayload generate_payload(std::uint64_t seed, const LengthSpec& spec) {
  if (spec.len_min < 1 || spec.len_max > 30 || spec.len_min > spec.len_max) {
    throw ConstraintError("action count range must lie within [1, 30]");
  }
  if (spec.action_weights.size() != 3) {
    throw ConstraintError("action_weights needs one weight per action");
  }
  Rng rng(seed);
  DirectionPayload p;
  p.initial = static_cast<Heading>(rng.below(4));
  const auto len = rng.between(spec.len_min, spec.len_max);
  for (std::int64_t i = 0; i < len; ++i) {
    p.actions.push_back(kActions[rng.weighted(spec.action_weights)]);
  }
  return p;
}

Question generate_instance(std::uint64_t seed, const LengthSpec& spec) {
  DirectionPayload p = generate_payload(seed, spec);
  const SplitLabel split = classify_split(p).value_or(SplitLabel::train);
  return make_question(std::move(p), split);
}

Heading final_heading(const DirectionPayload& p) {
  return rotate(p.initial, net_rotation(p.actions));
}

Trace realize(const DirectionPayload& p, const std::vector<int>& widths,
              const std::vector<bool>& corrupt) {
  check_payload(p);
  std::vector<TurnStep> bodies;
  Heading h = p.initial;
  std::size_t next = 0;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    TurnStep s;
    s.from = h;
    for (int j = 0; j < widths[i]; ++j) {
      if (next >= p.actions.size()) {
        throw RangeError("plan covers more turns than the question has");
      }
      s.applied.push_back(p.actions[next++]);
    }
    const bool bad = i < corrupt.size() && corrupt[i];
    s.to = rotate(h, net_rotation(s.applied) + (bad ? 1 : 0));
    h = s.to;
    bodies.push_back(std::move(s));
  }
  return build_trace(std::move(bodies));
}

Trace solve_full(const DirectionPayload& p) {
  return realize(p, std::vector<int>(p.actions.size(), 1), {});
}

Trace merge_steps(const Trace& trace, int start, int width) {
  const int n = static_cast<int>(trace.size());
  if (width < 2 || start < 0 || start + width > n) {
    throw RangeError("merge range [" + std::to_string(start) + ", " +
                     std::to_string(start + width) + ") invalid for " +
                     std::to_string(n) + " steps");
  }
  std::vector<TurnStep> bodies;
  for (int i = 0; i < n; ++i) {
    const auto& b = std::get<TurnStep>(trace.steps[i].body);
    if (i > start && i < start + width) {
      auto& m = bodies.back();
      m.applied.insert(m.applied.end(), b.applied.begin(), b.applied.end());
      m.to = b.to;
    } else {
      bodies.push_back(b);
    }
  }
  return build_trace(std::move(bodies));
}

bool is_cancelling_pair(Action a, Action b) {
  return (a == Action::right && b == Action::left) ||
         (a == Action::left && b == Action::right) ||
         (a == Action::around && b == Action::around);
}

std::optional<DatasetRecord> make_cancellation_skip(const DatasetRecord& record,
                                                    std::uint64_t seed) {
  const auto* p = std::get_if<DirectionPayload>(&record.question.payload);
  if (p == nullptr) throw TaskMismatch("cancellation skips need a direction record");
  if (record.trace.size() != p->actions.size()) {
    throw RangeError("cancellation skips need a full-step record");
  }
  std::vector<int> pairs;
  for (std::size_t i = 0; i + 1 < p->actions.size(); ++i) {
    if (is_cancelling_pair(p->actions[i], p->actions[i + 1])) {
      pairs.push_back(static_cast<int>(i));
    }
  }
  if (pairs.empty()) return std::nullopt;
  Rng rng(seed);
  const int at = pairs[rng.below(pairs.size())];
  DatasetRecord out = record;
  out.trace = merge_steps(record.trace, at, 2);
  out.instruction = StepInstruction::budgeted(static_cast<int>(out.trace.size()));
  out.origin = Origin::warmstart();
  return out;
}

Verdict verify_trace(const DirectionPayload& p, const Trace& trace,
                     bool /*strict*/) {
  Verdict v;
  v.step_count = static_cast<int>(trace.size());
  std::vector<Action> covered;
  Heading h = p.initial;
  bool chained = true;
  bool all_correct = true;
  for (const auto& step : trace.steps) {
    const auto* s = std::get_if<TurnStep>(&step.body);
    if (s == nullptr) return Verdict::invalid("not a direction step");
    v.step_widths.push_back(static_cast<int>(s->applied.size()));
    chained = chained && s->from == h;
    h = s->to;
    const bool ok = !s->applied.empty() &&
                    s->to == rotate(s->from, net_rotation(s->applied));
    v.step_correct.push_back(ok);
    all_correct = all_correct && ok;
    covered.insert(covered.end(), s->applied.begin(), s->applied.end());
  }
  v.steps_valid =
      !trace.empty() && chained && all_correct && covered == p.actions;
  v.final_correct = !trace.empty() &&
                    std::get<TurnStep>(trace.steps.back().body).to ==
                        final_heading(p);
  return v;
}

std::optional<SplitLabel> classify_split(const DirectionPayload& p) {
  const auto n = p.actions.size();
  if (n >= 1 && n <= 10) return SplitLabel::train;
  if (n >= 11 && n <= 20) return SplitLabel::ood_easy;
  if (n >= 21 && n <= 30) return SplitLabel::ood_hard;
  return std::nullopt;
}

std::string render_step_body(const TurnStep& s) {
  std::string out = "facing ";
  out += to_string(s.from);
  out += ", turn ";
  for (std::size_t i = 0; i < s.applied.size(); ++i) {
    if (i) out += ',';
    out += to_string(s.applied[i]);
  }
  out += " -> facing ";
  out += to_string(s.to);
  return out;
}

TurnStep parse_step_body(std::string_view body) {
  body = trim(body);
  constexpr std::string_view kFacing = "facing ";
  constexpr std::string_view kTurn = ", turn ";
  constexpr std::string_view kArrow = " -> facing ";
  if (body.substr(0, kFacing.size()) != kFacing) {
    throw ParseError(0, "expected 'facing'");
  }
  const auto turn_at = body.find(kTurn);
  const auto arrow_at = body.find(kArrow);
  if (turn_at == std::string_view::npos || arrow_at == std::string_view::npos ||
      arrow_at < turn_at) {
    throw ParseError(0, "expected 'facing <h>, turn <actions> -> facing <h>'");
  }
  TurnStep s;
  const auto from = parse_heading(
      body.substr(kFacing.size(), turn_at - kFacing.size()));
  const auto to = parse_heading(body.substr(arrow_at + kArrow.size()));
  if (!from || !to) throw ParseError(0, "unknown heading");
  s.from = *from;
  s.to = *to;
  const auto list = body.substr(turn_at + kTurn.size(),
                                arrow_at - turn_at - kTurn.size());
  for (const auto& word : split(list, ',')) {
    const auto a = parse_action(trim(word));
    if (!a) throw ParseError(turn_at, "unknown action '" + word + "'");
    s.applied.push_back(*a);
  }
  return s;
}

}  // namespace skipstep::direction
