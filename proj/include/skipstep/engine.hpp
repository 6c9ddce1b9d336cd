#pragma once

// Task-independent entry points; each call dispatches to the engine that owns
// the question's payload.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skipstep/types.hpp"

namespace skipstep {

/// Builds a question with its id, reference trace and step count.
Question make_question(Payload payload, SplitLabel split);

Trace solve_full(const Payload& p);

Trace merge_steps(const Question& q, const Trace& trace, int start, int width);

/// Replays the question's primitive operations grouped by `widths`, with the
/// flagged steps corrupted in the task's characteristic way.
Trace realize(const Question& q, const std::vector<int>& widths,
              const std::vector<bool>& corrupt);

/// `strict` also checks every intermediate step.
Verdict verify_trace(const Question& q, const Trace& trace, bool strict);

/// Parses and verifies learner text; unparseable text is an invalid verdict.
Verdict verify_text(const Question& q, std::string_view text, bool strict);

/// Algebra uses the glyph map's train prefix.
std::optional<SplitLabel> classify_split(const Payload& p);

/// True when the label agrees with the payload (train and in-domain test share
/// one predicate).
bool split_consistent(const Payload& p, SplitLabel label);

std::string render_step_body(const StepBody& body, const Question& q);

/// Reasons a stored record breaks its invariants; empty when it is valid.
std::vector<std::string> check_record(const DatasetRecord& r, bool strict);

}  // namespace skipstep
