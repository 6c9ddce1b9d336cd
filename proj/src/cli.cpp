#include "skipstep/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "skipstep/config.hpp"
#include "skipstep/dataset.hpp"
#include "skipstep/engine.hpp"
#include "skipstep/errors.hpp"
#include "skipstep/metrics.hpp"
#include "skipstep/pipeline.hpp"
#include "skipstep/protocol.hpp"
#include "skipstep/trace.hpp"
#include "skipstep/util.hpp"

namespace skipstep {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Validation failures: bad flags, configs, or inputs. Everything else that
// escapes a subcommand is a runtime error.
bool is_validation(const std::exception& e) {
  return dynamic_cast<const ConfigError*>(&e) ||
         dynamic_cast<const SchemaError*>(&e) ||
         dynamic_cast<const ParseError*>(&e) ||
         dynamic_cast<const RangeError*>(&e) ||
         dynamic_cast<const ConstraintError*>(&e) ||
         dynamic_cast<const InsufficientRecords*>(&e) ||
         dynamic_cast<const TaskMismatch*>(&e) ||
         dynamic_cast<const EmptyDataset*>(&e) ||
         dynamic_cast<const EmptyInput*>(&e);
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("SKIP_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != std::string_view(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("SKIP_SEED is not an integer: ") + s);
  }
}

std::string env_run_root() {
  const char* s = std::getenv("SKIP_RUN_DIR");
  return (s == nullptr || *s == '\0') ? std::string("runs") : std::string(s);
}

std::vector<TaskKind> parse_tasks(const std::string& spec) {
  std::vector<TaskKind> out;
  for (const auto& name : split(spec, ',')) out.push_back(parse_task(trim(name)));
  return out;
}

std::vector<int> parse_depths(const std::string& spec) {
  std::vector<int> out;
  for (const auto& part : split(spec, ',')) {
    try {
      std::size_t used = 0;
      const std::string p(trim(part));
      out.push_back(std::stoi(p, &used));
      if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::exception&) {
      throw ConfigError("--skip-depths needs comma-separated integers, got '" +
                        spec + "'");
    }
  }
  return out;
}

// Flags shared by the subcommands that build a RunConfig.
struct CommonFlags {
  std::string config = "default";
  std::string task;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::string learner;

  RunConfig resolve() const {
    RunConfig c = load_config(config);
    if (!task.empty()) c.tasks = parse_tasks(task);
    auto s = seed ? seed : env_seed();
    if (s) c.seeds = {*s, *s};
    if (!learner.empty()) apply_learner_spec(c.learner, learner);
    c.jobs = jobs;
    c.validate();
    return c;
  }
};

void add_common(CLI::App* sub, CommonFlags& f, bool with_learner) {
  sub->add_option("--config", f.config, "config file or 'default'");
  sub->add_option("--task", f.task, "task, or comma-separated tasks");
  sub->add_option("--seed", f.seed, "seed for generation and the learner");
  sub->add_option("--jobs", f.jobs, "worker threads (0 = logical cores)")
      ->check(CLI::NonNegativeNumber);
  if (with_learner) {
    sub->add_option("--learner", f.learner,
                    "builtin:oracle | builtin:stochastic | remote:<url>");
  }
}

std::unique_ptr<Learner> learner_for(const RunConfig& c) {
  return make_learner(c.learner, c.seeds.learner);
}

// ---------------------------------------------------------------- gen

int run_gen(const CommonFlags& f, const std::string& out_dir, std::ostream& out) {
  const RunConfig c = f.resolve();
  const std::string root = out_dir.empty() ? "data" : out_dir;
  for (TaskKind t : c.tasks) {
    const auto splits = generate_splits(t, c.sizes(t), c.seeds.gen);
    for (SplitLabel s : kAllSplits) {
      const auto& records = splits[static_cast<int>(s)];
      const auto path = (fs::path(root) / std::string(to_string(t)) /
                         (std::string(to_string(s)) + ".jsonl"))
                            .string();
      save_records(records, path);
      out << path << ' ' << records.size() << '\n';
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------- warmstart

int run_warmstart(const std::string& in, const std::string& out_path,
                  std::optional<std::uint64_t> seed, std::ostream& out) {
  const Dataset records = load_records(in);
  const auto s = seed ? seed : env_seed();
  const Dataset aug = add_warmstart_skips(records, mix_seed(s.value_or(0), "warm"));
  save_records(aug, out_path);
  out << out_path << ' ' << records.size() << " records, "
      << aug.size() - records.size() << " warm-start skips\n";
  return kExitOk;
}

// ---------------------------------------------------------------- iterate

struct IterateFlags {
  std::string out;
  std::optional<int> iterations;
  std::string skip_depths;
  std::string start_mode;
  CLI::Option* strict = nullptr;
  bool strict_value = true;
  CLI::Option* full = nullptr;
  bool full_value = true;
  std::string withheld;
};

int run_iterate(const CommonFlags& f, const IterateFlags& it,
                std::ostream& out) {
  RunConfig c = f.resolve();
  if (it.iterations) c.iterations = *it.iterations;
  if (!it.skip_depths.empty()) c.skip_depths = parse_depths(it.skip_depths);
  if (!it.start_mode.empty()) {
    if (it.start_mode == "cold") {
      c.start_mode = StartMode::cold;
    } else if (it.start_mode == "warm") {
      c.start_mode = StartMode::warm;
    } else {
      throw ConfigError("--start-mode must be cold or warm");
    }
  }
  if (it.strict->count() > 0) c.strict_filter = it.strict_value;
  if (it.full->count() > 0) c.include_full_steps = it.full_value;
  if (!it.withheld.empty()) c.withheld_task = parse_task(it.withheld);
  c.validate();
  if (c.start_mode == StartMode::warm) build_initial_dataset(c);  // validates

  std::string run_dir = it.out;
  if (run_dir.empty()) {
    const std::string id =
        "run-" + sha256_hex(config_to_json(c).dump()).substr(0, 12);
    run_dir = (fs::path(env_run_root()) / id).string();
  }
  auto learner = learner_for(c);
  const RunResult r = run_iterations(c, *learner, {run_dir, c.jobs});
  out << run_dir << '\n';
  for (const auto& row : r.manifest.at("iterations")) {
    out << "iter " << row.at("iter").get<int>() << ": "
        << row.at("status").get<std::string>();
    if (row.contains("valid_skips")) {
      out << ", " << row.at("valid_skips").get<std::size_t>() << " of "
          << row.at("skipping").get<std::size_t>() << " skip attempts kept, |D_k| = "
          << row.at("dk_size").get<std::size_t>();
    }
    out << '\n';
  }
  return r.manifest.at("status") == "complete" ? kExitOk : kExitRuntime;
}

// ---------------------------------------------------------------- train-standard

int run_train_standard(const CommonFlags& f, const std::string& in,
                       const std::string& model_out, std::ostream& out) {
  const RunConfig c = f.resolve();
  const Dataset dk = load_records(in);
  auto learner = learner_for(c);
  TrainRequest req;
  req.dataset = emit_standard_dataset(dk);
  req.mode = ModelMode::standard;
  req.epochs = c.learner.epochs;
  const ModelHandle h = learner->train(req);
  if (!model_out.empty()) {
    auto* builtin = dynamic_cast<BuiltinLearner*>(learner.get());
    json j = builtin ? builtin->snapshot(h.model_id)
                     : json{{"model_id", h.model_id},
                            {"mode", to_string(h.mode)},
                            {"backend", h.backend}};
    write_file(model_out, j.dump(2) + "\n");
  }
  out << h.model_id << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- eval

int run_eval(const CommonFlags& f, const std::string& model_path,
             const std::string& in, const std::string& out_dir,
             std::optional<int> skip_depth, std::ostream& out) {
  const RunConfig c = f.resolve();
  const json snap = json::parse(read_file(model_path));
  auto learner = learner_for(c);
  if (auto* builtin = dynamic_cast<BuiltinLearner*>(learner.get())) {
    builtin->restore(snap);
  }
  const ModelHandle model{learner_spec(c.learner),
                          snap.at("model_id").get<std::string>(),
                          parse_model_mode(snap.at("mode").get<std::string>())};

  std::vector<Question> questions;
  if (!in.empty()) {
    for (const auto& r : load_records(in)) questions.push_back(r.question);
  } else {
    for (const auto& r : build_initial_dataset(c).tests) {
      questions.push_back(r.question);
    }
  }

  std::vector<PredictionRecord> preds(questions.size());
  parallel_for(questions.size(), resolve_jobs(c.jobs), [&](std::size_t i) {
    const Question& q = questions[i];
    StepInstruction instr = StepInstruction::standard();
    if (skip_depth && q.full_steps >= 1) {
      const int n = q.full_steps - *skip_depth;
      instr = StepInstruction::budgeted(n > 0 ? n : q.full_steps);
    }
    std::string text;
    try {
      text = learner->generate_text(model, q, instr);
    } catch (const InfeasibleBudget&) {
      // an unmet budget scores like unparseable output
    }
    preds[i] = make_prediction(q, instr, std::move(text));
  });

  const std::string dir = out_dir.empty() ? "eval" : out_dir;
  write_file((fs::path(dir) / "predictions.jsonl").string(),
             serialize_predictions(preds));
  const MetricsReport report = build_report(preds, c.tasks);
  write_report(report, dir);
  for (const auto& m : report.splits) {
    if (m.count == 0) continue;
    out << to_string(m.task) << ' ' << to_string(m.split) << ": accuracy "
        << format_double(*m.accuracy) << ", avg steps "
        << format_double(*m.avg_steps) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- verify

int run_verify(const std::string& in, bool strict, std::ostream& out) {
  const Dataset records = load_records(in);
  std::map<std::string, std::size_t> reasons;
  std::size_t rejects = 0;
  std::vector<std::vector<std::string>> found(records.size());
  parallel_for(records.size(), resolve_jobs(0), [&](std::size_t i) {
    found[i] = check_record(records[i], strict);
  });
  for (const auto& why : found) {
    if (!why.empty()) ++rejects;
    for (const auto& w : why) ++reasons[w];
  }
  out << in << ": " << records.size() << " records, " << rejects
      << " rejects\n";
  for (const auto& [why, n] : reasons) out << "  " << n << "  " << why << '\n';
  return rejects == 0 ? kExitOk : kExitValidation;
}

// ---------------------------------------------------------------- report

int run_report(const std::string& in, const std::string& out_dir,
               std::ostream& out) {
  const auto preds = parse_predictions(read_file(in));
  const std::string dir = out_dir.empty() ? "report" : out_dir;
  write_report(build_report(preds), dir);
  out << dir << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- serve-stub

int run_serve(const std::string& learner, std::optional<std::uint64_t> seed,
              const std::string& host, int port, std::ostream& out) {
  LearnerConfig lc;
  apply_learner_spec(lc, learner);
  if (lc.backend != "builtin") {
    throw ConfigError("serve-stub needs a builtin learner");
  }
  BuiltinParams p;
  p.fidelity = lc.fidelity;
  p.seed = (seed ? seed : env_seed()).value_or(0);
  StubServer server(p);
  const int bound = server.bind(host, port);
  out << "listening on " << host << ':' << bound << std::endl;
  server.serve();
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Step-skipping data generation, iteration and evaluation"};
  app.name("skipstep");
  app.require_subcommand(1);

  CommonFlags common;
  std::string out_path;
  std::string in_path;
  std::string model_path;
  std::optional<std::uint64_t> seed_only;
  std::optional<int> skip_depth;
  bool strict = true;
  std::string host = "127.0.0.1";
  int port = 8765;
  std::string serve_learner = "builtin:oracle";

  auto* gen = app.add_subcommand("gen", "write the four splits of each task");
  add_common(gen, common, false);
  gen->add_option("--out", out_path, "output directory (default data)");

  auto* warm = app.add_subcommand("warmstart", "append warm-start skip records");
  warm->add_option("--in", in_path, "full-step records")->required();
  warm->add_option("--out", out_path, "output file")->required();
  warm->add_option("--seed", seed_only, "seed for choosing merged pairs");

  IterateFlags it;
  auto* iterate = app.add_subcommand("iterate", "run the iteration loop");
  add_common(iterate, common, true);
  iterate->add_option("--out", it.out, "run directory");
  iterate->add_option("--iterations", it.iterations)->check(CLI::PositiveNumber);
  iterate->add_option("--skip-depths", it.skip_depths, "e.g. 1,2");
  iterate->add_option("--start-mode", it.start_mode, "cold or warm");
  it.strict = iterate->add_flag("--strict,!--lax", it.strict_value,
                                "check intermediate steps when filtering");
  it.full = iterate->add_flag("--include-full-steps,!--skips-only",
                              it.full_value, "mix D_0 into every D_k");
  iterate->add_option("--withheld-task", it.withheld,
                      "task whose generated skips stay out of D_k");

  auto* train_std = app.add_subcommand(
      "train-standard", "strip budgets from a dataset and train on it");
  add_common(train_std, common, true);
  train_std->add_option("--in", in_path, "D_k records")->required();
  train_std->add_option("--out", out_path, "model snapshot file");

  auto* eval = app.add_subcommand("eval", "predict and score test questions");
  add_common(eval, common, true);
  eval->add_option("--model", model_path, "model snapshot file")->required();
  eval->add_option("--in", in_path, "records to evaluate (default: test splits)");
  eval->add_option("--out", out_path, "report directory (default eval)");
  eval->add_option("--skip-depth", skip_depth,
                   "request n - i steps instead of a standard prompt")
      ->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "re-check every record of a file");
  verify->add_option("--in", in_path, "records")->required();
  verify->add_flag("--strict,!--lax", strict, "check intermediate steps");

  auto* report = app.add_subcommand("report", "rebuild report files");
  report->add_option("--in", in_path, "predictions file")->required();
  report->add_option("--out", out_path, "report directory (default report)");

  auto* serve = app.add_subcommand("serve-stub",
                                   "serve the learner protocol from the builtin");
  serve->add_option("--learner", serve_learner,
                    "builtin:oracle or builtin:stochastic");
  serve->add_option("--seed", seed_only, "learner seed");
  serve->add_option("--host", host);
  serve->add_option("--port", port, "0 picks a free port")
      ->check(CLI::Range(0, 65535));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (gen->parsed()) return run_gen(common, out_path, out);
    if (warm->parsed()) return run_warmstart(in_path, out_path, seed_only, out);
    if (iterate->parsed()) return run_iterate(common, it, out);
    if (train_std->parsed()) {
      return run_train_standard(common, in_path, out_path, out);
    }
    if (eval->parsed()) {
      return run_eval(common, model_path, in_path, out_path, skip_depth, out);
    }
    if (verify->parsed()) return run_verify(in_path, strict, out);
    if (report->parsed()) return run_report(in_path, out_path, out);
    if (serve->parsed()) {
      return run_serve(serve_learner, seed_only, host, port, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return is_validation(e) ? kExitValidation : kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace skipstep
