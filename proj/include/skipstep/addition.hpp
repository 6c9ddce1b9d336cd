#pragma once

// Multi-digit addition, solved column by column from the least significant
// digit. A skipped step adds a block of adjacent columns at once.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "skipstep/types.hpp"

namespace skipstep::addition {

struct DigitSpec {
  int len_a_min = 1;
  int len_a_max = 3;
  int len_b_min = 1;
  int len_b_max = 3;
};

/// Throws ConstraintError when a range leaves [1, 7].
AdditionPayload generate_payload(std::uint64_t seed, const DigitSpec& spec);
Question generate_instance(std::uint64_t seed, const DigitSpec& spec);

std::uint64_t value_of(const std::vector<int>& digits);
std::vector<int> digits_of(std::uint64_t v);

/// Digits of columns [lo, hi] of `digits` (zero beyond the number's length),
/// as an integer.
std::uint64_t slice(const std::vector<int>& digits, int lo, int hi);

/// One width-1 step per column; a final carry is folded into the last step.
Trace solve_full(const AdditionPayload& p);

/// Columns grouped into blocks of `widths`. A corrupted step writes its
/// lowest digit off by one; carries keep chaining from the stated values.
Trace realize(const AdditionPayload& p, const std::vector<int>& widths,
              const std::vector<bool>& corrupt);

Trace merge_steps(const Trace& trace, int start, int width);

/// Answer written by a trace: the final carry followed by every written digit,
/// most significant first. Leading zeros stripped.
std::string answer_of(const Trace& trace);

Verdict verify_trace(const AdditionPayload& p, const Trace& trace, bool strict);

std::optional<SplitLabel> classify_split(const AdditionPayload& p);

std::string render_step_body(const ColumnStep& s);
/// `col_lo` is the first column not covered by the previous steps.
ColumnStep parse_step_body(std::string_view body, int col_lo);

}  // namespace skipstep::addition
