#pragma once

// Learner gateway: the interface the pipeline trains and prompts through, and
// the built-in synthetic learner that stands in for fine-tuning.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "skipstep/types.hpp"

namespace skipstep {

enum class ModelMode { step_conditioned, standard };
enum class Fidelity { oracle, stochastic };

std::string_view to_string(ModelMode m);
ModelMode parse_model_mode(std::string_view s);
std::string_view to_string(Fidelity f);

struct ModelHandle {
  /// "builtin" or "remote:<url>".
  std::string backend;
  std::string model_id;
  ModelMode mode = ModelMode::step_conditioned;

  friend bool operator==(const ModelHandle&, const ModelHandle&) = default;
};

struct TrainRequest {
  Dataset dataset;
  ModelMode mode = ModelMode::step_conditioned;
  int epochs = 2;
  std::optional<std::string> base_model;
};

/// Per task, how many training steps of each width a model lineage has seen.
class CompetenceTable {
 public:
  void add(TaskKind task, int width, std::uint64_t n = 1);
  std::uint64_t count(TaskKind task, int width) const;
  /// Widths with count >= tau, ascending.
  std::vector<int> learned(TaskKind task, std::uint64_t tau) const;
  /// Folds every step of every record.
  void ingest(const Dataset& records);

  nlohmann::json to_json() const;
  static CompetenceTable from_json(const nlohmann::json& j);

  friend bool operator==(const CompetenceTable&,
                         const CompetenceTable&) = default;

 private:
  std::array<std::map<int, std::uint64_t>, 3> counts_;
};

struct BuiltinParams {
  Fidelity fidelity = Fidelity::oracle;
  std::uint64_t tau = 3;
  double epsilon = 0.5;
  double gamma = 100.0;
  std::uint64_t seed = 0;
};

/// Probability that the stochastic learner corrupts one step of width `w`.
double p_err(const CompetenceTable& table, TaskKind task, int width,
             const BuiltinParams& params);

/// Step widths the built-in learner emits for a question of `primitives`
/// operations. Budgeted plans take the largest usable width that keeps the
/// rest feasible; when the learned widths cannot meet the budget, the oracle
/// may use any width and the stochastic learner tries one width past its
/// largest learned one. Throws InfeasibleBudget.
std::vector<int> plan_widths(const CompetenceTable& table, TaskKind task,
                             int primitives, const StepInstruction& instr,
                             const BuiltinParams& params);

class Learner {
 public:
  virtual ~Learner() = default;

  /// Throws EmptyDataset, ProtocolError.
  virtual ModelHandle train(const TrainRequest& request) = 0;

  /// Raw learner output for the prompt of (question, instruction). Throws
  /// InfeasibleBudget when the model cannot meet the budget.
  virtual std::string generate_text(const ModelHandle& model, const Question& q,
                                    const StepInstruction& instr) = 0;

  /// generate_text parsed into a trace; throws ParseError on malformed text.
  Trace generate(const ModelHandle& model, const Question& q,
                 const StepInstruction& instr);
};

class BuiltinLearner final : public Learner {
 public:
  explicit BuiltinLearner(BuiltinParams params);

  ModelHandle train(const TrainRequest& request) override;
  std::string generate_text(const ModelHandle& model, const Question& q,
                            const StepInstruction& instr) override;

  /// Throws ConfigError for unknown model ids.
  CompetenceTable table(const std::string& model_id) const;
  ModelMode mode(const std::string& model_id) const;
  const BuiltinParams& params() const { return params_; }

  /// Registers a model from a snapshot (as written by snapshot()).
  void restore(const nlohmann::json& snapshot);
  nlohmann::json snapshot(const std::string& model_id) const;

 private:
  struct Model {
    ModelMode mode;
    CompetenceTable table;
  };

  const Model& find(const std::string& model_id) const;

  BuiltinParams params_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, Model> models_;
};

/// Share of budgeted generations whose step count equals the budget.
/// budgets[i] applies to sample[i]; failures and unparseable text count as
/// mismatches. Throws EmptyInput for an empty sample.
double probe_step_consistency(Learner& learner, const ModelHandle& model,
                              const std::vector<Question>& sample,
                              const std::vector<int>& budgets);

}  // namespace skipstep
