#include "skipstep/config.hpp"

#include <set>

#include "skipstep/errors.hpp"
#include "skipstep/protocol.hpp"
#include "skipstep/util.hpp"

namespace skipstep {

using nlohmann::json;

std::string_view to_string(StartMode m) {
  return m == StartMode::warm ? "warm" : "cold";
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string_view> ok(keys.begin(), keys.end());
  for (const auto& [k, _] : j.items()) {
    if (!ok.count(k)) throw ConfigError("unknown config key '" + where + k + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for config key '" + where + key + "'");
  }
}

Fidelity parse_fidelity(std::string_view s) {
  if (s == "oracle") return Fidelity::oracle;
  if (s == "stochastic") return Fidelity::stochastic;
  throw ConfigError("unknown fidelity '" + std::string(s) + "'");
}

json sizes_to_json(const SplitSizes& s) {
  json j = json::object();
  for (SplitLabel l : kAllSplits) j[std::string(to_string(l))] = s[static_cast<int>(l)];
  return j;
}

SplitSizes sizes_from_json(const json& j, SplitSizes base,
                           const std::string& where) {
  reject_unknown(j, {"train", "in_domain_test", "ood_easy", "ood_hard"}, where);
  for (SplitLabel l : kAllSplits) {
    read(j, std::string(to_string(l)).c_str(), base[static_cast<int>(l)], where);
  }
  return base;
}

}  // namespace

SplitSizes RunConfig::sizes(TaskKind task) const {
  auto it = dataset_sizes.find(task);
  return it == dataset_sizes.end() ? default_split_sizes(task) : it->second;
}

void RunConfig::validate() const {
  if (tasks.empty()) throw ConfigError("tasks must not be empty");
  std::set<TaskKind> seen(tasks.begin(), tasks.end());
  if (seen.size() != tasks.size()) throw ConfigError("tasks repeat");
  if (skip_depths.empty()) throw ConfigError("skip_depths must not be empty");
  for (int d : skip_depths) {
    if (d < 1) throw ConfigError("skip depths must be positive");
  }
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (jobs < 0) throw ConfigError("jobs must be non-negative");
  for (const auto& [task, s] : dataset_sizes) {
    for (int n : s) {
      if (n < 0) throw ConfigError("dataset sizes must be non-negative");
    }
  }
  if (multitask_mix) {
    for (const auto& [task, n] : *multitask_mix) {
      if (n < 0) throw ConfigError("multitask_mix counts must be non-negative");
    }
  }
  if (learner.backend != "builtin" && learner.backend != "remote") {
    throw ConfigError("learner backend must be builtin or remote");
  }
  if (learner.backend == "remote" && learner.url.empty()) {
    throw ConfigError("remote learner needs a url");
  }
  if (learner.epochs < 1) throw ConfigError("epochs must be positive");
  if (learner.gamma <= 0) throw ConfigError("gamma must be positive");
  if (learner.epsilon < 0) throw ConfigError("epsilon must be non-negative");
  if (learner.timeout_s <= 0) throw ConfigError("timeout_s must be positive");
  if (learner.retries < 0) throw ConfigError("retries must be non-negative");
}

json config_to_json(const RunConfig& c) {
  json tasks = json::array();
  for (TaskKind t : c.tasks) tasks.push_back(to_string(t));
  json sizes = json::object();
  for (const auto& [t, s] : c.dataset_sizes) {
    sizes[std::string(to_string(t))] = sizes_to_json(s);
  }
  json mix = nullptr;
  if (c.multitask_mix) {
    mix = json::object();
    for (const auto& [t, n] : *c.multitask_mix) mix[std::string(to_string(t))] = n;
  }
  return {
      {"tasks", tasks},
      {"start_mode", to_string(c.start_mode)},
      {"skip_depths", c.skip_depths},
      {"iterations", c.iterations},
      {"strict_filter", c.strict_filter},
      {"include_full_steps", c.include_full_steps},
      {"dedup", c.dedup},
      {"learner",
       {{"backend", c.learner.backend},
        {"fidelity", to_string(c.learner.fidelity)},
        {"url", c.learner.url},
        {"tau", c.learner.tau},
        {"epsilon", c.learner.epsilon},
        {"gamma", c.learner.gamma},
        {"epochs", c.learner.epochs},
        {"timeout_s", c.learner.timeout_s},
        {"retries", c.learner.retries}}},
      {"seeds", {{"gen", c.seeds.gen}, {"learner", c.seeds.learner}}},
      {"dataset_sizes", sizes},
      {"multitask_mix", mix},
      {"withheld_task", c.withheld_task ? json(to_string(*c.withheld_task))
                                        : json(nullptr)},
      {"final_probe", c.final_probe},
  };
}

RunConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"tasks", "start_mode", "skip_depths", "iterations",
                  "strict_filter", "include_full_steps", "dedup", "learner",
                  "seeds", "dataset_sizes", "multitask_mix", "withheld_task", "jobs",
                  "final_probe"},
                 "");
  RunConfig c;
  if (j.contains("tasks")) {
    std::vector<std::string> names;
    read(j, "tasks", names, "");
    c.tasks.clear();
    for (const auto& n : names) c.tasks.push_back(parse_task(n));
  }
  if (j.contains("start_mode")) {
    std::string m;
    read(j, "start_mode", m, "");
    if (m == "cold") {
      c.start_mode = StartMode::cold;
    } else if (m == "warm") {
      c.start_mode = StartMode::warm;
    } else {
      throw ConfigError("start_mode must be cold or warm");
    }
  }
  read(j, "skip_depths", c.skip_depths, "");
  read(j, "iterations", c.iterations, "");
  read(j, "strict_filter", c.strict_filter, "");
  read(j, "include_full_steps", c.include_full_steps, "");
  read(j, "dedup", c.dedup, "");
  read(j, "jobs", c.jobs, "");
  read(j, "final_probe", c.final_probe, "");
  if (j.contains("learner")) {
    const json& l = j["learner"];
    reject_unknown(l,
                   {"backend", "fidelity", "url", "tau", "epsilon", "gamma",
                    "epochs", "timeout_s", "retries"},
                   "learner.");
    read(l, "backend", c.learner.backend, "learner.");
    if (l.contains("fidelity")) {
      std::string f;
      read(l, "fidelity", f, "learner.");
      c.learner.fidelity = parse_fidelity(f);
    }
    read(l, "url", c.learner.url, "learner.");
    read(l, "tau", c.learner.tau, "learner.");
    read(l, "epsilon", c.learner.epsilon, "learner.");
    read(l, "gamma", c.learner.gamma, "learner.");
    read(l, "epochs", c.learner.epochs, "learner.");
    read(l, "timeout_s", c.learner.timeout_s, "learner.");
    read(l, "retries", c.learner.retries, "learner.");
  }
  if (j.contains("seeds")) {
    const json& s = j["seeds"];
    reject_unknown(s, {"gen", "learner"}, "seeds.");
    read(s, "gen", c.seeds.gen, "seeds.");
    read(s, "learner", c.seeds.learner, "seeds.");
  }
  if (j.contains("dataset_sizes")) {
    const json& s = j["dataset_sizes"];
    reject_unknown(s, {"algebra", "addition", "direction"}, "dataset_sizes.");
    for (const auto& [name, v] : s.items()) {
      const TaskKind t = parse_task(name);
      c.dataset_sizes[t] =
          sizes_from_json(v, c.sizes(t), "dataset_sizes." + name + ".");
    }
  }
  if (j.contains("multitask_mix") && !j["multitask_mix"].is_null()) {
    const json& m = j["multitask_mix"];
    reject_unknown(m, {"algebra", "addition", "direction"}, "multitask_mix.");
    std::map<TaskKind, int> mix;
    for (const auto& [name, v] : m.items()) {
      int n = 0;
      read(m, name.c_str(), n, "multitask_mix.");
      mix[parse_task(name)] = n;
    }
    c.multitask_mix = std::move(mix);
  }
  if (j.contains("withheld_task") && !j["withheld_task"].is_null()) {
    std::string t;
    read(j, "withheld_task", t, "");
    c.withheld_task = parse_task(t);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& name_or_path) {
  if (name_or_path.empty() || name_or_path == "default") return RunConfig{};
  json j;
  try {
    j = json::parse(read_file(name_or_path));
  } catch (const json::exception& e) {
    throw ConfigError("config " + name_or_path + " is not valid JSON: " +
                      e.what());
  }
  return config_from_json(j);
}

void apply_learner_spec(LearnerConfig& learner, std::string_view spec) {
  if (spec == "builtin:oracle" || spec == "builtin:stochastic") {
    learner.backend = "builtin";
    learner.fidelity = parse_fidelity(spec.substr(8));
    return;
  }
  constexpr std::string_view kRemote = "remote:";
  if (spec.substr(0, kRemote.size()) == kRemote &&
      spec.size() > kRemote.size()) {
    learner.backend = "remote";
    learner.url = std::string(spec.substr(kRemote.size()));
    return;
  }
  throw ConfigError("learner must be builtin:oracle, builtin:stochastic or "
                    "remote:<url>, got '" + std::string(spec) + "'");
}

std::string learner_spec(const LearnerConfig& learner) {
  if (learner.backend == "remote") return "remote:" + learner.url;
  return "builtin:" + std::string(to_string(learner.fidelity));
}

std::unique_ptr<Learner> make_learner(const LearnerConfig& learner,
                                      std::uint64_t seed) {
  if (learner.backend == "remote") {
    return std::make_unique<RemoteLearner>(learner.url, learner.timeout_s,
                                           learner.retries);
  }
  BuiltinParams p;
  p.fidelity = learner.fidelity;
  p.tau = learner.tau;
  p.epsilon = learner.epsilon;
  p.gamma = learner.gamma;
  p.seed = seed;
  return std::make_unique<BuiltinLearner>(p);
}

}  // namespace skipstep
