#pragma once

// Evaluation metrics over prediction files, and the report artifacts built
// from them. Percentages are in [0, 100]; values with no data are absent
// (nullopt, JSON null, empty CSV cell), never zero.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skipstep/types.hpp"

namespace skipstep {

struct PredictionRecord {
  std::string question_id;
  Question question;
  StepInstruction requested = StepInstruction::standard();
  /// Raw learner output; may be unparseable.
  std::string trace_text;
  Verdict verdict;
};

/// Verifies `text` (strictly) against the question.
PredictionRecord make_prediction(const Question& q,
                                 const StepInstruction& requested,
                                 std::string text);

/// {"id", "task", "split", "question", "payload", "requested", "trace",
///  "verdict"}; the verdict is informational and recomputed on read.
nlohmann::json prediction_to_json(const PredictionRecord& p);
PredictionRecord prediction_from_json(const nlohmann::json& j,
                                      std::size_t line_no = 0);
std::string serialize_predictions(const std::vector<PredictionRecord>& preds);
std::vector<PredictionRecord> parse_predictions(std::string_view text);

/// Step count credited to a prediction; 0 when unparseable.
int predicted_steps(const PredictionRecord& p);

struct EvalResult {
  std::size_t count = 0;
  double accuracy = 0;
  double avg_steps = 0;
  /// Only over budgeted requests; absent when there are none.
  std::optional<double> step_consistency;
};

/// Throws EmptyInput.
EvalResult evaluate(const std::vector<PredictionRecord>& preds);

struct SkipStats {
  double skipping_ratio = 0;
  /// Absent when nothing was skipped.
  std::optional<double> skipping_accuracy;
};

/// Throws EmptyInput.
SkipStats skipping_stats(const std::vector<PredictionRecord>& preds);

struct StepBin {
  int lo = 1;
  int hi = 1;
};

struct CurvePoint {
  StepBin bin;
  std::size_t count = 0;
  std::optional<double> accuracy;
  std::optional<double> skip_ratio;
};

/// Bins by the question's full step count. Without explicit bins, width-1
/// bins over [1, max observed].
std::vector<CurvePoint> accuracy_by_required_steps(
    const std::vector<PredictionRecord>& preds,
    std::optional<std::vector<StepBin>> bins = std::nullopt);

inline constexpr int kMaxDigits = 7;

/// Cells indexed [len_a - 1][len_b - 1]; widths indexed [w - 1].
struct AdditionMatrices {
  using Row = std::array<std::optional<double>, kMaxDigits>;
  using Grid = std::array<Row, kMaxDigits>;

  Grid question_accuracy{};
  std::array<std::array<std::size_t, kMaxDigits>, kMaxDigits> questions{};
  /// Share of steps of each width, over all predictions and per cell.
  Row width_share{};
  std::array<std::array<Row, kMaxDigits>, kMaxDigits> cell_width_share{};
  /// Share of width-w steps that are individually correct.
  Row step_accuracy{};
  std::array<std::size_t, kMaxDigits> steps_by_width{};
  std::array<std::size_t, kMaxDigits> correct_by_width{};
};

/// Throws TaskMismatch for non-addition predictions.
AdditionMatrices addition_matrices(const std::vector<PredictionRecord>& preds);

struct SplitMetrics {
  TaskKind task = TaskKind::algebra;
  SplitLabel split = SplitLabel::train;
  std::size_t count = 0;
  std::optional<double> accuracy;
  std::optional<double> avg_steps;
  std::optional<double> step_consistency;
  std::optional<double> skipping_ratio;
  std::optional<double> skipping_accuracy;
};

struct MetricsReport {
  /// Every (task, split) pair of the reported tasks, in enum order.
  std::vector<SplitMetrics> splits;
  /// Curves over the union of each task's test splits.
  std::map<TaskKind, std::vector<CurvePoint>> curves;
  std::optional<AdditionMatrices> addition;
};

/// Groups predictions by task and split. `tasks` lists the tasks to report
/// even when they have no predictions; tasks seen in `preds` are added.
MetricsReport build_report(const std::vector<PredictionRecord>& preds,
                           const std::vector<TaskKind>& tasks = {});

nlohmann::json report_to_json(const MetricsReport& r);

/// Writes report.json, metrics.csv, fig4_curve.csv, fig5_qacc.csv,
/// fig5_dist.csv, fig5_sacc.csv and fig6_skip.csv into `dir`.
void write_report(const MetricsReport& r, const std::string& dir);

}  // namespace skipstep
