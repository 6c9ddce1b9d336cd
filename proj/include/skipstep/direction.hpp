#pragma once

// Directional reasoning: an initial compass heading and a list of turns
// (left, right, around). Headings form Z4 under the turn actions.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "skipstep/types.hpp"

namespace skipstep::direction {

struct LengthSpec {
  int len_min = 1;
  int len_max = 10;
  /// Relative weights of left, right, around.
  std::vector<double> action_weights = {1.0, 1.0, 1.0};
};

DirectionPayload generate_payload(std::uint64_t seed, const LengthSpec& spec);
Question generate_instance(std::uint64_t seed, const LengthSpec& spec);

/// Heading after all actions.
Heading final_heading(const DirectionPayload& p);

/// One step per action.
Trace solve_full(const DirectionPayload& p);

/// Actions grouped into macro-turns of `widths`. A corrupted step lands one
/// quarter turn clockwise of the true heading; later steps chain from there.
Trace realize(const DirectionPayload& p, const std::vector<int>& widths,
              const std::vector<bool>& corrupt);

Trace merge_steps(const Trace& trace, int start, int width);

/// True for right-left, left-right and around-around.
bool is_cancelling_pair(Action a, Action b);

/// Merges exactly one adjacent cancelling pair chosen uniformly by `seed`;
/// nullopt when the full-step record has none.
std::optional<DatasetRecord> make_cancellation_skip(const DatasetRecord& record,
                                                    std::uint64_t seed);

Verdict verify_trace(const DirectionPayload& p, const Trace& trace, bool strict);

std::optional<SplitLabel> classify_split(const DirectionPayload& p);

std::string render_step_body(const TurnStep& s);
TurnStep parse_step_body(std::string_view body);

}  // namespace skipstep::direction
