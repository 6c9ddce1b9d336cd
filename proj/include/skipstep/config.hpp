#pragma once

// Run configuration. The JSON keys mirror the field names; omitted keys keep
// their defaults and unknown keys are rejected.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skipstep/dataset.hpp"
#include "skipstep/learner.hpp"

namespace skipstep {

enum class StartMode { cold, warm };

std::string_view to_string(StartMode m);

struct LearnerConfig {
  /// "builtin" or "remote".
  std::string backend = "builtin";
  Fidelity fidelity = Fidelity::oracle;
  std::string url;
  std::uint64_t tau = 3;
  double epsilon = 0.5;
  double gamma = 100.0;
  /// Forwarded to the learner; the builtin ignores it.
  int epochs = 2;
  double timeout_s = 30.0;
  int retries = 3;

  friend bool operator==(const LearnerConfig&, const LearnerConfig&) = default;
};

struct Seeds {
  std::uint64_t gen = 0;
  std::uint64_t learner = 0;

  friend bool operator==(const Seeds&, const Seeds&) = default;
};

struct RunConfig {
  std::vector<TaskKind> tasks = {TaskKind::algebra};
  StartMode start_mode = StartMode::cold;
  std::vector<int> skip_depths = {1, 2};
  int iterations = 5;
  bool strict_filter = true;
  bool include_full_steps = true;
  bool dedup = true;
  LearnerConfig learner;
  Seeds seeds;
  std::map<TaskKind, SplitSizes> dataset_sizes = {
      {TaskKind::algebra, default_split_sizes(TaskKind::algebra)},
      {TaskKind::addition, default_split_sizes(TaskKind::addition)},
      {TaskKind::direction, default_split_sizes(TaskKind::direction)}};
  /// When set, each task's training questions are sampled down to this many.
  std::optional<std::map<TaskKind, int>> multitask_mix;
  /// Task whose generated skips never enter D_k.
  std::optional<TaskKind> withheld_task;
  /// Worker threads; 0 means one per logical core. Not part of the run's
  /// identity, so it is not stored in the run directory.
  int jobs = 0;
  /// Probes the last step-conditioned model once more after the final
  /// iteration, so every iteration's model gets a skip count.
  bool final_probe = true;

  SplitSizes sizes(TaskKind task) const;
  /// Throws ConfigError.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::json config_to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);

/// "default" (or an empty name) yields the built-in defaults; anything else is
/// read as a JSON file.
RunConfig load_config(const std::string& name_or_path);

/// Applies "builtin:oracle", "builtin:stochastic" or "remote:<url>".
void apply_learner_spec(LearnerConfig& learner, std::string_view spec);
std::string learner_spec(const LearnerConfig& learner);

/// Learner described by the config.
std::unique_ptr<Learner> make_learner(const LearnerConfig& learner,
                                      std::uint64_t seed);

}  // namespace skipstep
