#include "skipstep/learner.hpp"

#include <algorithm>
#include <mutex>

#include "skipstep/engine.hpp"
#include "skipstep/errors.hpp"
#include "skipstep/trace.hpp"
#include "skipstep/util.hpp"

namespace skipstep {

using nlohmann::json;

std::string_view to_string(ModelMode m) {
  return m == ModelMode::standard ? "standard" : "step_conditioned";
}

ModelMode parse_model_mode(std::string_view s) {
  if (s == "step_conditioned") return ModelMode::step_conditioned;
  if (s == "standard") return ModelMode::standard;
  throw ConfigError("unknown model mode '" + std::string(s) + "'");
}

std::string_view to_string(Fidelity f) {
  return f == Fidelity::oracle ? "oracle" : "stochastic";
}

// ---------------------------------------------------------------- competence

void CompetenceTable::add(TaskKind task, int width, std::uint64_t n) {
  if (width < 1) throw RangeError("step width must be positive");
  if (n == 0) return;
  counts_[static_cast<int>(task)][width] += n;
}

std::uint64_t CompetenceTable::count(TaskKind task, int width) const {
  const auto& m = counts_[static_cast<int>(task)];
  auto it = m.find(width);
  return it == m.end() ? 0 : it->second;
}

std::vector<int> CompetenceTable::learned(TaskKind task,
                                          std::uint64_t tau) const {
  std::vector<int> out;
  for (const auto& [w, c] : counts_[static_cast<int>(task)]) {
    if (c >= tau) out.push_back(w);
  }
  return out;
}

void CompetenceTable::ingest(const Dataset& records) {
  for (const auto& r : records) {
    for (const auto& s : r.trace.steps) add(r.question.task, step_width(s));
  }
}

json CompetenceTable::to_json() const {
  json j = json::object();
  for (TaskKind t : kAllTasks) {
    json row = json::object();
    for (const auto& [w, c] : counts_[static_cast<int>(t)]) {
      row[std::to_string(w)] = c;
    }
    j[std::string(to_string(t))] = std::move(row);
  }
  return j;
}

CompetenceTable CompetenceTable::from_json(const json& j) {
  CompetenceTable t;
  for (const auto& [task, row] : j.items()) {
    const TaskKind kind = parse_task(task);
    for (const auto& [w, c] : row.items()) {
      t.add(kind, std::stoi(w), c.get<std::uint64_t>());
    }
  }
  return t;
}

// ---------------------------------------------------------------- planning

double p_err(const CompetenceTable& table, TaskKind task, int width,
             const BuiltinParams& params) {
  if (width <= 1) return 0.0;
  const double c = static_cast<double>(table.count(task, width));
  const double p = params.epsilon * (width - 1) / (1.0 + c / params.gamma);
  return std::clamp(p, 0.0, 1.0);
}

namespace {

// reach[s][r]: r primitives can be split into exactly s steps of usable widths.
std::vector<std::vector<char>> reachability(const std::vector<int>& usable,
                                            int steps, int primitives) {
  std::vector<std::vector<char>> reach(
      steps + 1, std::vector<char>(primitives + 1, 0));
  reach[0][0] = 1;
  for (int s = 1; s <= steps; ++s) {
    for (int r = 1; r <= primitives; ++r) {
      for (int w : usable) {
        if (w <= r && reach[s - 1][r - w]) {
          reach[s][r] = 1;
          break;
        }
      }
    }
  }
  return reach;
}

std::optional<std::vector<int>> greedy_plan(std::vector<int> usable, int m,
                                            int n) {
  std::sort(usable.begin(), usable.end(), std::greater<>());
  const auto reach = reachability(usable, n, m);
  if (!reach[n][m]) return std::nullopt;
  std::vector<int> plan;
  int r = m;
  for (int s = n; s > 0; --s) {
    for (int w : usable) {
      if (w <= r && reach[s - 1][r - w]) {
        plan.push_back(w);
        r -= w;
        break;
      }
    }
  }
  return plan;
}

}  // namespace

std::vector<int> plan_widths(const CompetenceTable& table, TaskKind task,
                             int primitives, const StepInstruction& instr,
                             const BuiltinParams& params) {
  std::vector<int> usable = table.learned(task, params.tau);
  if (std::find(usable.begin(), usable.end(), 1) == usable.end()) {
    usable.insert(usable.begin(), 1);
  }
  const int m = primitives;

  if (!instr.is_budgeted()) {
    std::vector<int> plan;
    for (int r = m; r > 0;) {
      int w = 1;
      for (int u : usable) {
        if (u <= r) w = std::max(w, u);
      }
      plan.push_back(w);
      r -= w;
    }
    return plan;
  }

  const int n = instr.budget();
  if (n > m || n < 1) {
    throw InfeasibleBudget("budget " + std::to_string(n) + " for " +
                           std::to_string(m) + " primitive steps");
  }
  if (auto plan = greedy_plan(usable, m, n)) return *plan;

  if (params.fidelity == Fidelity::oracle) {
    usable.clear();
    for (int w = 1; w <= m; ++w) usable.push_back(w);
  } else {
    usable.push_back(*std::max_element(usable.begin(), usable.end()) + 1);
  }
  if (auto plan = greedy_plan(usable, m, n)) return *plan;
  throw InfeasibleBudget("no composition of " + std::to_string(m) +
                         " primitive steps into " + std::to_string(n));
}

// ---------------------------------------------------------------- learners

Trace Learner::generate(const ModelHandle& model, const Question& q,
                        const StepInstruction& instr) {
  return parse_trace_text(generate_text(model, q, instr), q);
}

BuiltinLearner::BuiltinLearner(BuiltinParams params) : params_(params) {
  if (params_.gamma <= 0) throw ConfigError("gamma must be positive");
  if (params_.epsilon < 0) throw ConfigError("epsilon must be non-negative");
}

ModelHandle BuiltinLearner::train(const TrainRequest& request) {
  if (request.dataset.empty()) throw EmptyDataset("training set is empty");
  if (request.epochs < 1) throw ConfigError("epochs must be positive");

  std::string key = request.base_model.value_or("");
  key += '\n';
  key += to_string(request.mode);
  key += '\n';
  key += dataset_hash(request.dataset);
  const std::string id = "m-" + sha256_hex(key).substr(0, 16);

  // The whole train call holds the write lock, so trains on one lineage
  // never interleave.
  std::unique_lock lock(mu_);
  Model model{request.mode, {}};
  if (request.base_model) {
    auto it = models_.find(*request.base_model);
    if (it == models_.end()) {
      throw ConfigError("unknown base model '" + *request.base_model + "'");
    }
    model.table = it->second.table;
  }
  model.table.ingest(request.dataset);
  models_.insert_or_assign(id, std::move(model));
  return {"builtin", id, request.mode};
}

const BuiltinLearner::Model& BuiltinLearner::find(
    const std::string& model_id) const {
  auto it = models_.find(model_id);
  if (it == models_.end()) {
    throw ConfigError("unknown model '" + model_id + "'");
  }
  return it->second;
}

std::string BuiltinLearner::generate_text(const ModelHandle& model,
                                          const Question& q,
                                          const StepInstruction& instr) {
  std::vector<int> widths;
  CompetenceTable table;
  {
    std::shared_lock lock(mu_);
    const Model& m = find(model.model_id);
    table = m.table;
    const StepInstruction effective =
        m.mode == ModelMode::standard ? StepInstruction::standard() : instr;
    widths = plan_widths(table, q.task, q.full_steps, effective, params_);
  }

  std::vector<bool> corrupt(widths.size(), false);
  if (params_.fidelity == Fidelity::stochastic) {
    // Draws depend on the question and the request, not on the model, so
    // successive models face the same draws and lower error rates can only
    // remove corruptions.
    Rng rng(mix_seed(mix_seed(params_.seed, q.id), instr.key()));
    for (std::size_t i = 0; i < widths.size(); ++i) {
      const double u = rng.unit();
      corrupt[i] = u < p_err(table, q.task, widths[i], params_);
    }
  }
  return render_trace_text(realize(q, widths, corrupt));
}

CompetenceTable BuiltinLearner::table(const std::string& model_id) const {
  std::shared_lock lock(mu_);
  return find(model_id).table;
}

ModelMode BuiltinLearner::mode(const std::string& model_id) const {
  std::shared_lock lock(mu_);
  return find(model_id).mode;
}

json BuiltinLearner::snapshot(const std::string& model_id) const {
  std::shared_lock lock(mu_);
  const Model& m = find(model_id);
  return {{"model_id", model_id},
          {"mode", to_string(m.mode)},
          {"competence", m.table.to_json()}};
}

void BuiltinLearner::restore(const json& snapshot) {
  Model m{parse_model_mode(snapshot.at("mode").get<std::string>()),
          CompetenceTable::from_json(snapshot.at("competence"))};
  std::unique_lock lock(mu_);
  models_.insert_or_assign(snapshot.at("model_id").get<std::string>(),
                           std::move(m));
}

double probe_step_consistency(Learner& learner, const ModelHandle& model,
                              const std::vector<Question>& sample,
                              const std::vector<int>& budgets) {
  if (sample.empty()) throw EmptyInput("probe sample is empty");
  if (budgets.size() != sample.size()) {
    throw RangeError("one budget per sampled question is required");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    try {
      const auto instr = StepInstruction::budgeted(budgets[i]);
      const Trace t = learner.generate(model, sample[i], instr);
      if (static_cast<int>(t.size()) == budgets[i]) ++hits;
    } catch (const InfeasibleBudget&) {
    } catch (const ParseError&) {
    } catch (const RangeError&) {
    }
  }
  return static_cast<double>(hits) / static_cast<double>(sample.size());
}

}  // namespace skipstep
