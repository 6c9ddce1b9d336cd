#pragma once

// Analog-of-algebra task: equations over an unfamiliar glyph alphabet in which
// the target glyph must be isolated on the left of the equals glyph.
//
// Generated equations have the shape ((T op1 v1) op2 v2) ... = seed, so one
// full step peels exactly one wrapping operation by moving its inverse onto
// the right-hand side.

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "skipstep/types.hpp"

namespace skipstep::algebra {

struct GenerationConstraints {
  int depth_min = 1;
  int depth_max = 5;
  double fresh_var_prob = 0.7;
  /// Variables are drawn from the first `glyph_pool` entries of var_glyphs.
  int glyph_pool = 7;
  std::string glyph_map_id = "default";
};

/// Deterministic for a given seed. Throws ConstraintError when the pool runs
/// out of fresh glyphs or the constraints are out of range.
AlgebraPayload generate_payload(std::uint64_t seed,
                                const GenerationConstraints& c);

/// generate_payload plus the reference trace. The split label is the
/// classification under the map's train prefix; callers rejection-sample on
/// classify_split to target a split.
Question generate_instance(std::uint64_t seed, const GenerationConstraints& c);

/// One step per wrapping operation, outermost first.
Trace solve_full(const AlgebraPayload& p);

/// Replays the peels grouped into macro-steps of the given widths. A step
/// flagged in `corrupt` applies its first operator un-inverted; later steps
/// continue from the corrupted equation.
Trace realize(const AlgebraPayload& p, const std::vector<int>& widths,
              const std::vector<bool>& corrupt);

/// Replaces steps [start, start + width) by one step. RangeError when out of
/// bounds or width < 2.
Trace merge_steps(const AlgebraPayload& p, const Trace& trace, int start,
                  int width);

/// Randomized exact-rational identity test of isolated right-hand sides.
/// Evaluation points are shared across all candidates compared against the
/// same reference, so checking a whole trace costs one reference evaluation
/// per point.
class EquivalenceChecker {
 public:
  static constexpr int kDefaultTrials = 8;
  static constexpr int kMaxRedraws = 64;

  EquivalenceChecker(const Equation& reference, int trials, std::uint64_t seed);
  ~EquivalenceChecker();
  EquivalenceChecker(const EquivalenceChecker&) = delete;
  EquivalenceChecker& operator=(const EquivalenceChecker&) = delete;

  /// False when `candidate` does not hold the target exactly once or differs
  /// at some point. Throws DegenerateError after kMaxRedraws skipped points.
  bool equivalent(const Equation& candidate);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Both equations must contain the target exactly once (std::invalid_argument
/// otherwise). The seed defaults to one derived from the two equations.
bool check_equivalent(const Equation& a, const Equation& b,
                      int trials = EquivalenceChecker::kDefaultTrials,
                      std::optional<std::uint64_t> seed = std::nullopt);

Verdict verify_trace(const AlgebraPayload& p, std::string_view question_id,
                     const Trace& trace, bool strict_intermediates);

std::optional<SplitLabel> classify_split(const AlgebraPayload& p,
                                         int glyph_prefix);

/// Distinct variables including the target and the right-hand seed.
int count_distinct_vars(const Equation& eq);

std::string render_step_body(const PeelStep& s, const GlyphMap& g);

/// `prev_depth` is the target depth of the previous equation; the step's
/// peeled width is the decrease from it (non-positive for a step that makes
/// no progress).
PeelStep parse_step_body(std::string_view body, const GlyphMap& g,
                         int prev_depth);

}  // namespace skipstep::algebra
