#pragma once

// The initialization/iteration loop: D_init, budgeted skip attempts,
// filtering into D'_k, mixing D_k = D_0 ∪ D'_{k-1}, and training the
// step-conditioned and standard models of every round.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skipstep/config.hpp"
#include "skipstep/learner.hpp"
#include "skipstep/metrics.hpp"
#include "skipstep/types.hpp"

namespace skipstep {

/// Generated datasets of a run, per configured task.
struct RunData {
  /// Full-step training records of every task, in task order.
  Dataset d0;
  /// D_0 plus warm-start skips when start_mode is warm.
  Dataset d_init;
  /// Test splits (in_domain_test, ood_easy, ood_hard) of every task.
  Dataset tests;
};

/// Throws ConfigError for a warm start on algebra.
RunData build_initial_dataset(const RunConfig& config);

struct Candidate {
  Question question;
  int depth = 1;
  int budget = 1;
  /// False when n - depth <= 0 and the full budget was requested instead.
  bool skipping = true;
  /// Learner failure (InfeasibleBudget, protocol errors); empty on success.
  std::string failure;
  std::string text;
  /// Strict verdict of `text`.
  Verdict verdict;
};

struct DepthStats {
  std::size_t attempts = 0;
  std::size_t skipping = 0;
  std::size_t kept = 0;
  /// Skipping attempts whose output has exactly the requested step count.
  std::size_t consistent = 0;
};

struct AttemptResult {
  std::vector<Candidate> candidates;
  std::map<int, DepthStats> by_depth;
  /// "# Skipping": attempts with n - i > 0.
  std::size_t skipping = 0;
};

/// One attempt per (record, depth) in record order, depth order within a
/// record. Generation and verification fan out over `jobs` workers.
AttemptResult attempt_skips(Learner& learner, const ModelHandle& model,
                            const Dataset& d0, const std::vector<int>& depths,
                            int jobs = 1);

struct FilterResult {
  Dataset kept;
  /// Reject counts by reason.
  std::map<std::string, std::size_t> rejects;
};

/// Keeps correct candidates that meet a reduced budget exactly (and have
/// valid intermediate steps when strict), one per (question, budget). Kept
/// records carry origin iter_skip(`iter`).
FilterResult filter_candidates(const std::vector<Candidate>& candidates,
                               bool strict, int iter);

/// D_0 ∪ D' keyed by (question id, trace hash, instruction), D_0 first. With
/// include_full_steps off, D' alone.
Dataset mix_dataset(const Dataset& d0, const Dataset& skips,
                    bool include_full_steps, bool dedup = true);

/// Same records with the step clause dropped.
Dataset emit_standard_dataset(const Dataset& dk);

/// Seeded sample of `per_task_count` full-step records from every source
/// task plus `skip_count` one-step-shorter iter_skip records for every task
/// except the withheld one. Throws InsufficientRecords.
Dataset compose_multitask(const std::map<TaskKind, Dataset>& sources,
                          int per_task_count, int skip_count,
                          std::optional<TaskKind> withheld, std::uint64_t seed);

/// Standard-mode predictions of `model` on `questions`.
std::vector<PredictionRecord> predict(Learner& learner, const ModelHandle& model,
                                      const std::vector<Question>& questions,
                                      int jobs = 1);

struct RunOptions {
  /// Output directory; empty keeps everything in memory.
  std::string run_dir;
  int jobs = 1;
};

struct RunResult {
  /// manifest.json contents.
  nlohmann::json manifest;
  /// Step-conditioned model ids M_0..M_K (M_0 first).
  std::vector<std::string> step_models;
  /// Step-conditioned training sets D_1..D_K.
  std::vector<Dataset> mixed;
  std::vector<Dataset> skips;
  /// Predictions of the last standard model.
  std::vector<PredictionRecord> predictions;
};

/// Runs (or resumes, when run_dir already holds completed iterations of the
/// same config) the whole loop.
RunResult run_iterations(const RunConfig& config, Learner& learner,
                         const RunOptions& options);

}  // namespace skipstep
