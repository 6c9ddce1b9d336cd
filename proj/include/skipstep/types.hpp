#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "skipstep/expr.hpp"

namespace skipstep {

enum class TaskKind { algebra, addition, direction };

inline constexpr TaskKind kAllTasks[] = {TaskKind::algebra, TaskKind::addition,
                                         TaskKind::direction};

enum class SplitLabel { train, in_domain_test, ood_easy, ood_hard };

inline constexpr SplitLabel kAllSplits[] = {
    SplitLabel::train, SplitLabel::in_domain_test, SplitLabel::ood_easy,
    SplitLabel::ood_hard};

std::string_view to_string(TaskKind t);
std::string_view to_string(SplitLabel s);
/// Throw ConfigError on unknown names.
TaskKind parse_task(std::string_view name);
SplitLabel parse_split(std::string_view name);

// ---------------------------------------------------------------- directions

enum class Heading { north = 0, east = 1, south = 2, west = 3 };
enum class Action { left = -1, right = 1, around = 2 };

std::string_view to_string(Heading h);
std::string_view to_string(Action a);
std::optional<Heading> parse_heading(std::string_view s);
std::optional<Action> parse_action(std::string_view s);

/// Heading after turning by the net rotation of `actions`.
Heading rotate(Heading h, int quarter_turns);
int net_rotation(const std::vector<Action>& actions);

// ---------------------------------------------------------------- step bodies

/// One algebra step: the equation after peeling `peeled_width` wrapping
/// operations off the target side.
struct PeelStep {
  Equation equation;
  int peeled_width = 1;

  friend bool operator==(const PeelStep&, const PeelStep&) = default;
};

/// One addition step over columns [col_lo, col_hi], counted from the least
/// significant digit. `written` is most-significant first.
struct ColumnStep {
  int col_lo = 0;
  int col_hi = 0;
  std::uint64_t a_block = 0;
  std::uint64_t b_block = 0;
  int carry_in = 0;
  /// The sum as stated by the step; checked against the blocks.
  std::uint64_t sum = 0;
  std::vector<int> written;
  int carry_out = 0;

  int width() const { return col_hi - col_lo + 1; }
  friend bool operator==(const ColumnStep&, const ColumnStep&) = default;
};

struct TurnStep {
  Heading from = Heading::north;
  std::vector<Action> applied;
  Heading to = Heading::north;

  friend bool operator==(const TurnStep&, const TurnStep&) = default;
};

using StepBody = std::variant<PeelStep, ColumnStep, TurnStep>;

struct Step {
  int index = 0;
  StepBody body;
  /// Canonical line, "Step <index+1>: <body>".
  std::string text;

  friend bool operator==(const Step& a, const Step& b) {
    return a.index == b.index && a.body == b.body;
  }
};

struct Trace {
  std::vector<Step> steps;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Number of primitive operations a step covers.
int step_width(const Step& s);

// ---------------------------------------------------------------- payloads

struct AlgebraPayload {
  Equation equation;
  std::string glyph_map_id = "default";
  int num_vars = 2;
  int depth = 0;

  friend bool operator==(const AlgebraPayload&, const AlgebraPayload&) = default;
};

struct AdditionPayload {
  /// Most significant digit first.
  std::vector<int> a_digits;
  std::vector<int> b_digits;

  friend bool operator==(const AdditionPayload&,
                         const AdditionPayload&) = default;
};

struct DirectionPayload {
  Heading initial = Heading::north;
  std::vector<Action> actions;

  friend bool operator==(const DirectionPayload&,
                         const DirectionPayload&) = default;
};

using Payload = std::variant<AlgebraPayload, AdditionPayload, DirectionPayload>;

TaskKind task_of(const Payload& p);

struct Question {
  std::string id;
  TaskKind task = TaskKind::direction;
  Payload payload;
  Trace reference_trace;
  int full_steps = 0;
  SplitLabel split = SplitLabel::train;
  std::string glyph_map_id;

  friend bool operator==(const Question&, const Question&) = default;
};

// ---------------------------------------------------------------- records

/// Budgeted(n) asks for exactly n steps; standard carries no step clause.
class StepInstruction {
 public:
  static StepInstruction standard() { return StepInstruction(std::nullopt); }
  /// Throws RangeError for n < 1.
  static StepInstruction budgeted(int n);

  bool is_budgeted() const { return budget_.has_value(); }
  int budget() const { return *budget_; }
  std::string key() const;

  friend bool operator==(const StepInstruction&,
                         const StepInstruction&) = default;

 private:
  explicit StepInstruction(std::optional<int> b) : budget_(b) {}
  std::optional<int> budget_;
};

enum class OriginKind { full, warmstart_skip, iter_skip };

struct Origin {
  OriginKind kind = OriginKind::full;
  /// Index k of the skip set D'_k that produced the record; iter_skip only.
  int iter = 0;

  static Origin full() { return {OriginKind::full, 0}; }
  static Origin warmstart() { return {OriginKind::warmstart_skip, 0}; }
  static Origin iteration(int k) { return {OriginKind::iter_skip, k}; }

  friend bool operator==(const Origin&, const Origin&) = default;
};

std::string_view to_string(OriginKind o);

struct DatasetRecord {
  std::string question_id;
  Question question;
  Trace trace;
  StepInstruction instruction = StepInstruction::standard();
  Origin origin;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

using Dataset = std::vector<DatasetRecord>;

/// Result of checking a trace against its question.
struct Verdict {
  /// False when the trace text could not be parsed or checked at all.
  bool well_formed = true;
  bool final_correct = false;
  bool steps_valid = false;
  /// False when intermediate validity was not evaluated (lax algebra mode).
  bool steps_checked = true;
  int step_count = 0;
  std::vector<int> step_widths;
  /// Per-step individual correctness.
  std::vector<bool> step_correct;
  std::string error;

  bool accepted(bool strict) const {
    return well_formed && final_correct && (!strict || steps_valid);
  }

  static Verdict invalid(std::string why) {
    Verdict v;
    v.well_formed = false;
    v.steps_checked = false;
    v.error = std::move(why);
    return v;
  }

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

}  // namespace skipstep
