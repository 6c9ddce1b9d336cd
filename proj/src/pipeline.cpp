#include "skipstep/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <set>
#include <tuple>

#include "skipstep/dataset.hpp"
#include "skipstep/engine.hpp"
#include "skipstep/errors.hpp"
#include "skipstep/trace.hpp"
#include "skipstep/util.hpp"

namespace skipstep {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Indices of a seeded sample of k out of n, ascending.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                        std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

RunData build_initial_dataset(const RunConfig& config) {
  config.validate();
  if (config.start_mode == StartMode::warm) {
    for (TaskKind t : config.tasks) {
      if (t == TaskKind::algebra) {
        throw ConfigError("warm start is not defined for algebra; use cold");
      }
    }
  }
  RunData data;
  for (TaskKind t : config.tasks) {
    auto splits = generate_splits(t, config.sizes(t), config.seeds.gen);
    Dataset train = std::move(splits[static_cast<int>(SplitLabel::train)]);
    if (config.multitask_mix) {
      auto it = config.multitask_mix->find(t);
      if (it != config.multitask_mix->end()) {
        const auto want = static_cast<std::size_t>(it->second);
        if (want > train.size()) {
          throw InsufficientRecords("multitask_mix asks for " +
                                    std::to_string(want) + " " +
                                    std::string(to_string(t)) +
                                    " records, train has " +
                                    std::to_string(train.size()));
        }
        Dataset picked;
        for (std::size_t i : sample_indices(
                 train.size(), want,
                 mix_seed(config.seeds.gen, "mix/" + std::string(to_string(t))))) {
          picked.push_back(std::move(train[i]));
        }
        train = std::move(picked);
      }
    }
    data.d0.insert(data.d0.end(), train.begin(), train.end());
    for (SplitLabel s : {SplitLabel::in_domain_test, SplitLabel::ood_easy,
                         SplitLabel::ood_hard}) {
      auto& split = splits[static_cast<int>(s)];
      data.tests.insert(data.tests.end(), split.begin(), split.end());
    }
  }
  data.d_init = config.start_mode == StartMode::warm
                    ? add_warmstart_skips(data.d0,
                                          mix_seed(config.seeds.gen, "warm"))
                    : data.d0;
  return data;
}

AttemptResult attempt_skips(Learner& learner, const ModelHandle& model,
                            const Dataset& d0, const std::vector<int>& depths,
                            int jobs) {
  if (model.mode != ModelMode::step_conditioned) {
    throw ConfigError("skip attempts need a step-conditioned model");
  }
  AttemptResult out;
  out.candidates.resize(d0.size() * depths.size());
  for (std::size_t r = 0; r < d0.size(); ++r) {
    const Question& q = d0[r].question;
    for (std::size_t d = 0; d < depths.size(); ++d) {
      Candidate& c = out.candidates[r * depths.size() + d];
      c.question = q;
      c.depth = depths[d];
      c.skipping = q.full_steps - depths[d] > 0;
      c.budget = c.skipping ? q.full_steps - depths[d] : q.full_steps;
    }
  }

  parallel_for(out.candidates.size(), jobs, [&](std::size_t i) {
    Candidate& c = out.candidates[i];
    if (c.budget < 1) {
      c.failure = "question needs no steps";
      c.verdict = Verdict::invalid(c.failure);
      return;
    }
    try {
      c.text = learner.generate_text(model, c.question,
                                     StepInstruction::budgeted(c.budget));
      c.verdict = verify_text(c.question, c.text, true);
    } catch (const Error& e) {
      c.failure = e.what();
      c.verdict = Verdict::invalid(c.failure);
    }
  });

  for (const Candidate& c : out.candidates) {
    DepthStats& s = out.by_depth[c.depth];
    ++s.attempts;
    if (!c.skipping) continue;
    ++s.skipping;
    ++out.skipping;
    if (c.failure.empty() && c.verdict.well_formed &&
        c.verdict.step_count == c.budget) {
      ++s.consistent;
    }
  }
  return out;
}

FilterResult filter_candidates(const std::vector<Candidate>& candidates,
                               bool strict, int iter) {
  FilterResult out;
  std::set<std::pair<std::string, int>> seen;
  const auto reject = [&](const char* why) { ++out.rejects[why]; };
  for (const Candidate& c : candidates) {
    if (!c.skipping) {
      reject("non_skipping");
      continue;
    }
    if (!c.failure.empty()) {
      reject("learner_error");
      continue;
    }
    const Verdict& v = c.verdict;
    if (!v.well_formed) {
      reject("unparseable");
      continue;
    }
    if (!v.final_correct) {
      reject("wrong_answer");
      continue;
    }
    if (v.step_count != c.budget) {
      reject("step_count");
      continue;
    }
    if (strict && !v.steps_valid) {
      reject("invalid_step");
      continue;
    }
    if (!seen.emplace(c.question.id, c.budget).second) {
      reject("duplicate");
      continue;
    }
    DatasetRecord r;
    r.question_id = c.question.id;
    r.question = c.question;
    r.trace = parse_trace_text(c.text, c.question);
    r.instruction = StepInstruction::budgeted(c.budget);
    r.origin = Origin::iteration(iter);
    out.kept.push_back(std::move(r));
  }
  return out;
}

Dataset mix_dataset(const Dataset& d0, const Dataset& skips,
                    bool include_full_steps, bool dedup) {
  Dataset out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  const auto add = [&](const Dataset& src) {
    for (const auto& r : src) {
      if (dedup && !seen.emplace(r.question_id, trace_hash(r.trace),
                                 r.instruction.key())
                        .second) {
        continue;
      }
      out.push_back(r);
    }
  };
  if (include_full_steps) add(d0);
  add(skips);
  return out;
}

Dataset emit_standard_dataset(const Dataset& dk) {
  Dataset out = dk;
  for (auto& r : out) r.instruction = StepInstruction::standard();
  return out;
}

Dataset compose_multitask(const std::map<TaskKind, Dataset>& sources,
                          int per_task_count, int skip_count,
                          std::optional<TaskKind> withheld, std::uint64_t seed) {
  if (per_task_count < 0 || skip_count < 0) {
    throw ConfigError("sample counts must be non-negative");
  }
  Dataset out;
  for (const auto& [task, records] : sources) {
    Dataset full;
    Dataset one_skip;
    for (const auto& r : records) {
      if (r.question.task != task) {
        throw TaskMismatch("source for " + std::string(to_string(task)) +
                           " holds a " +
                           std::string(to_string(r.question.task)) + " record");
      }
      if (r.origin.kind == OriginKind::full) {
        full.push_back(r);
      } else if (r.origin.kind == OriginKind::iter_skip &&
                 static_cast<int>(r.trace.size()) == r.question.full_steps - 1) {
        one_skip.push_back(r);
      }
    }
    const std::string name(to_string(task));
    if (full.size() < static_cast<std::size_t>(per_task_count)) {
      throw InsufficientRecords(name + " has " + std::to_string(full.size()) +
                                " full-step records, " +
                                std::to_string(per_task_count) + " requested");
    }
    for (std::size_t i : sample_indices(full.size(),
                                        static_cast<std::size_t>(per_task_count),
                                        mix_seed(seed, name + "/full"))) {
      out.push_back(full[i]);
    }
    if (withheld == task || skip_count == 0) continue;
    if (one_skip.size() < static_cast<std::size_t>(skip_count)) {
      throw InsufficientRecords(name + " has " +
                                std::to_string(one_skip.size()) +
                                " skip records, " + std::to_string(skip_count) +
                                " requested");
    }
    for (std::size_t i : sample_indices(one_skip.size(),
                                        static_cast<std::size_t>(skip_count),
                                        mix_seed(seed, name + "/skip"))) {
      out.push_back(one_skip[i]);
    }
  }
  return out;
}

std::vector<PredictionRecord> predict(Learner& learner, const ModelHandle& model,
                                      const std::vector<Question>& questions,
                                      int jobs) {
  std::vector<PredictionRecord> out(questions.size());
  const auto instr = StepInstruction::standard();
  parallel_for(questions.size(), jobs, [&](std::size_t i) {
    out[i] = make_prediction(questions[i], instr,
                             learner.generate_text(model, questions[i], instr));
  });
  return out;
}

// ---------------------------------------------------------------- runs

namespace {

json depth_stats_json(const AttemptResult& a, const Dataset& kept) {
  std::map<int, std::size_t> kept_by_depth;
  for (const auto& r : kept) {
    ++kept_by_depth[r.question.full_steps - static_cast<int>(r.trace.size())];
  }
  json j = json::object();
  for (const auto& [depth, s] : a.by_depth) {
    j[std::to_string(depth)] = {{"attempts", s.attempts},
                                {"skipping", s.skipping},
                                {"kept", kept_by_depth[depth]},
                                {"consistent", s.consistent}};
  }
  return j;
}

json probe_json(const AttemptResult& a, const FilterResult& f) {
  std::size_t consistent = 0;
  for (const auto& [_, s] : a.by_depth) consistent += s.consistent;
  json consistency = nullptr;
  if (a.skipping > 0) {
    consistency = 100.0 * static_cast<double>(consistent) /
                  static_cast<double>(a.skipping);
  }
  json rejects = json::object();
  for (const auto& [why, n] : f.rejects) rejects[why] = n;
  return {{"attempts", a.candidates.size()},
          {"skipping", a.skipping},
          {"valid_skips", f.kept.size()},
          {"step_consistency", consistency},
          {"by_depth", depth_stats_json(a, f.kept)},
          {"rejects", rejects}};
}

json split_metrics_json(const MetricsReport& r) {
  return report_to_json(r).at("splits");
}

class RunDir {
 public:
  explicit RunDir(std::string root) : root_(std::move(root)) {}

  bool enabled() const { return !root_.empty(); }
  std::string path(const std::string& rel) const {
    return (fs::path(root_) / rel).string();
  }
  bool exists(const std::string& rel) const {
    return enabled() && fs::exists(path(rel));
  }
  void put(const std::string& rel, std::string_view bytes) const {
    if (enabled()) write_file(path(rel), bytes);
  }
  void put_json(const std::string& rel, const json& j) const {
    put(rel, j.dump(2) + "\n");
  }
  json get_json(const std::string& rel) const {
    return json::parse(read_file(path(rel)));
  }

 private:
  std::string root_;
};

using Clock = std::chrono::steady_clock;

// How the learner is reached is not part of what is being run, so a remote
// run and a builtin run of the same experiment share one hash.
std::string experiment_hash(json config_json) {
  auto& l = config_json["learner"];
  for (const char* key : {"backend", "url", "timeout_s", "retries"}) l.erase(key);
  return sha256_hex(config_json.dump());
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

RunResult run_iterations(const RunConfig& config, Learner& learner,
                         const RunOptions& options) {
  config.validate();
  const int jobs = resolve_jobs(options.jobs);
  const RunDir dir(options.run_dir);
  auto* builtin = dynamic_cast<BuiltinLearner*>(&learner);

  const json config_json = config_to_json(config);
  if (dir.exists("config.json")) {
    if (dir.get_json("config.json") != config_json) {
      throw ConfigError("run directory " + options.run_dir +
                        " holds a different config");
    }
  } else {
    dir.put_json("config.json", config_json);
  }
  json timing = dir.exists("timing.json") ? dir.get_json("timing.json")
                                          : json::object();

  RunResult result;
  json& manifest = result.manifest;
  manifest["config_hash"] = experiment_hash(config_json);
  manifest["status"] = "complete";

  const auto flush = [&] {
    dir.put_json("manifest.json", manifest);
    dir.put_json("timing.json", timing);
  };

  // ------------------------------------------------------------ M_0
  auto t0 = Clock::now();
  const RunData data = build_initial_dataset(config);
  std::vector<Question> tests;
  tests.reserve(data.tests.size());
  for (const auto& r : data.tests) tests.push_back(r.question);

  ModelHandle prev;
  if (dir.exists("init/row.json") &&
      (builtin == nullptr || dir.exists("init/model.json"))) {
    const json row = dir.get_json("init/row.json");
    if (builtin) builtin->restore(dir.get_json("init/model.json"));
    prev = {"", row.at("model_id").get<std::string>(),
            ModelMode::step_conditioned};
    manifest["init"] = row;
  } else {
    TrainRequest req;
    req.dataset = data.d_init;
    req.mode = ModelMode::step_conditioned;
    req.epochs = config.learner.epochs;
    prev = learner.train(req);
    const json row = {{"d0_size", data.d0.size()},
                      {"d0_hash", dataset_hash(data.d0)},
                      {"d_init_size", data.d_init.size()},
                      {"d_init_hash", dataset_hash(data.d_init)},
                      {"warmstart_skips", data.d_init.size() - data.d0.size()},
                      {"model_id", prev.model_id}};
    if (dir.enabled()) {
      save_records(data.d0, dir.path("init/d0.jsonl"));
      save_records(data.d_init, dir.path("init/d_init.jsonl"));
      if (builtin) dir.put_json("init/model.json", builtin->snapshot(prev.model_id));
      dir.put_json("init/row.json", row);
    }
    manifest["init"] = row;
    timing["init_s"] = seconds_since(t0);
  }
  result.step_models.push_back(prev.model_id);
  manifest["iterations"] = json::array();
  flush();

  // ------------------------------------------------------------ M_1..M_K
  for (int k = 1; k <= config.iterations; ++k) {
    const std::string it = "iter" + std::to_string(k) + "/";
    if (dir.exists(it + "manifest_row.json") &&
        (builtin == nullptr || dir.exists(it + "model.json"))) {
      const json row = dir.get_json(it + "manifest_row.json");
      if (row.value("status", "") == "ok") {
        if (builtin) builtin->restore(dir.get_json(it + "model.json"));
        prev = {"", row.at("model_ids").at("step_conditioned").get<std::string>(),
                ModelMode::step_conditioned};
        result.step_models.push_back(prev.model_id);
        result.skips.push_back(load_records(dir.path(it + "skips.jsonl")));
        result.mixed.push_back(load_records(dir.path(it + "d_k.jsonl")));
        if (k == config.iterations) {
          result.predictions =
              parse_predictions(read_file(dir.path(it + "predictions.jsonl")));
        }
        manifest["iterations"].push_back(row);
        continue;
      }
    }

    t0 = Clock::now();
    try {
      const AttemptResult attempts =
          attempt_skips(learner, prev, data.d0, config.skip_depths, jobs);
      FilterResult filtered =
          filter_candidates(attempts.candidates, config.strict_filter, k - 1);
      if (config.withheld_task) {
        std::erase_if(filtered.kept, [&](const DatasetRecord& r) {
          const bool drop = r.question.task == *config.withheld_task;
          if (drop) ++filtered.rejects["withheld"];
          return drop;
        });
      }
      Dataset dk = mix_dataset(data.d0, filtered.kept,
                               config.include_full_steps, config.dedup);
      const std::size_t offered =
          (config.include_full_steps ? data.d0.size() : 0) + filtered.kept.size();

      TrainRequest step_req;
      step_req.dataset = dk;
      step_req.mode = ModelMode::step_conditioned;
      step_req.epochs = config.learner.epochs;
      step_req.base_model = prev.model_id;
      const ModelHandle mk = learner.train(step_req);

      TrainRequest std_req;
      std_req.dataset = emit_standard_dataset(dk);
      std_req.mode = ModelMode::standard;
      std_req.epochs = config.learner.epochs;
      const ModelHandle standard = learner.train(std_req);

      auto preds = predict(learner, standard, tests, jobs);
      const MetricsReport report = build_report(preds, config.tasks);

      json row = probe_json(attempts, filtered);
      row["iter"] = k;
      row["status"] = "ok";
      row["d0_size"] = data.d0.size();
      row["skips_size"] = filtered.kept.size();
      row["skips_hash"] = dataset_hash(filtered.kept);
      row["dk_size"] = dk.size();
      row["dataset_hash"] = dataset_hash(dk);
      row["duplicates"] = offered - dk.size();
      row["model_ids"] = {{"step_conditioned", mk.model_id},
                          {"standard", standard.model_id}};
      row["metrics"] = split_metrics_json(report);

      if (dir.enabled()) {
        save_records(filtered.kept, dir.path(it + "skips.jsonl"));
        save_records(dk, dir.path(it + "d_k.jsonl"));
        dir.put(it + "predictions.jsonl", serialize_predictions(preds));
        dir.put_json(it + "metrics.json", report_to_json(report));
        if (builtin) dir.put_json(it + "model.json", builtin->snapshot(mk.model_id));
        dir.put_json(it + "manifest_row.json", row);
      }
      manifest["iterations"].push_back(row);
      timing["iter" + std::to_string(k) + "_s"] = seconds_since(t0);
      flush();

      prev = mk;
      result.step_models.push_back(mk.model_id);
      result.skips.push_back(std::move(filtered.kept));
      result.mixed.push_back(std::move(dk));
      if (k == config.iterations) result.predictions = std::move(preds);
    } catch (const Error& e) {
      const json row = {{"iter", k}, {"status", "failed"}, {"error", e.what()}};
      dir.put_json(it + "manifest_row.json", row);
      manifest["iterations"].push_back(row);
      manifest["status"] = "failed";
      flush();
      return result;
    }
  }

  // ------------------------------------------------------------ probe M_K
  if (config.final_probe) {
    if (dir.exists("final_probe.json")) {
      manifest["final_probe"] = dir.get_json("final_probe.json");
    } else {
      t0 = Clock::now();
      const AttemptResult attempts =
          attempt_skips(learner, prev, data.d0, config.skip_depths, jobs);
      const FilterResult filtered = filter_candidates(
          attempts.candidates, config.strict_filter, config.iterations);
      json probe = probe_json(attempts, filtered);
      probe["model_id"] = prev.model_id;
      dir.put_json("final_probe.json", probe);
      manifest["final_probe"] = probe;
      timing["final_probe_s"] = seconds_since(t0);
    }
  } else {
    manifest["final_probe"] = nullptr;
  }
  flush();
  return result;
}

}  // namespace skipstep
