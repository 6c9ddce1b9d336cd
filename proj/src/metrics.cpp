#include "skipstep/metrics.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "skipstep/engine.hpp"
#include "skipstep/errors.hpp"
#include "skipstep/trace.hpp"
#include "skipstep/util.hpp"

namespace skipstep {

using nlohmann::json;

namespace {

double pct(std::size_t num, std::size_t den) {
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> pct_or_absent(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return pct(num, den);
}

json opt(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

json verdict_to_json(const Verdict& v) {
  std::vector<int> correct(v.step_correct.begin(), v.step_correct.end());
  return {{"well_formed", v.well_formed},     {"final_correct", v.final_correct},
          {"steps_valid", v.steps_valid},     {"step_count", v.step_count},
          {"step_widths", v.step_widths},     {"step_correct", correct},
          {"error", v.error}};
}

}  // namespace

PredictionRecord make_prediction(const Question& q,
                                 const StepInstruction& requested,
                                 std::string text) {
  PredictionRecord p;
  p.question_id = q.id;
  p.question = q;
  p.requested = requested;
  p.verdict = verify_text(q, text, true);
  p.trace_text = std::move(text);
  return p;
}

json prediction_to_json(const PredictionRecord& p) {
  return {{"id", p.question_id},
          {"task", to_string(p.question.task)},
          {"split", to_string(p.question.split)},
          {"question", question_text(p.question)},
          {"payload", payload_to_json(p.question.payload)},
          {"requested", instruction_to_json(p.requested)},
          {"trace", split_lines(p.trace_text)},
          {"verdict", verdict_to_json(p.verdict)}};
}

PredictionRecord prediction_from_json(const json& j, std::size_t line_no) {
  if (!j.is_object()) throw SchemaError(line_no, "<object>");
  for (const char* k :
       {"id", "task", "split", "payload", "requested", "trace"}) {
    if (!j.contains(k)) throw SchemaError(line_no, k);
  }
  TaskKind task;
  SplitLabel split;
  try {
    task = parse_task(j.at("task").get<std::string>());
    split = parse_split(j.at("split").get<std::string>());
  } catch (const std::exception&) {
    throw SchemaError(line_no, "task");
  }
  Question q = make_question(payload_from_json(task, j.at("payload"), line_no),
                             split);
  if (!j.at("id").is_string() || j.at("id").get<std::string>() != q.id) {
    throw SchemaError(line_no, "id");
  }
  std::vector<std::string> lines;
  try {
    lines = j.at("trace").get<std::vector<std::string>>();
  } catch (const json::exception&) {
    throw SchemaError(line_no, "trace");
  }
  return make_prediction(q, instruction_from_json(j.at("requested"), line_no),
                         join(lines, "\n"));
}

std::string serialize_predictions(const std::vector<PredictionRecord>& preds) {
  std::string out;
  for (const auto& p : preds) {
    out += prediction_to_json(p).dump();
    out += '\n';
  }
  return out;
}

std::vector<PredictionRecord> parse_predictions(std::string_view text) {
  std::vector<PredictionRecord> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::exception&) {
      throw SchemaError(i + 1, "<json>");
    }
    out.push_back(prediction_from_json(j, i + 1));
  }
  return out;
}

int predicted_steps(const PredictionRecord& p) {
  return p.verdict.well_formed ? p.verdict.step_count : 0;
}

// ---------------------------------------------------------------- metrics

EvalResult evaluate(const std::vector<PredictionRecord>& preds) {
  if (preds.empty()) throw EmptyInput("no predictions to evaluate");
  EvalResult r;
  r.count = preds.size();
  std::size_t correct = 0;
  std::size_t budgeted = 0;
  std::size_t consistent = 0;
  double steps = 0;
  for (const auto& p : preds) {
    const int n = predicted_steps(p);
    if (p.verdict.well_formed && p.verdict.final_correct) ++correct;
    steps += n;
    if (p.requested.is_budgeted()) {
      ++budgeted;
      if (p.verdict.well_formed && n == p.requested.budget()) ++consistent;
    }
  }
  r.accuracy = pct(correct, preds.size());
  r.avg_steps = steps / static_cast<double>(preds.size());
  r.step_consistency = pct_or_absent(consistent, budgeted);
  return r;
}

SkipStats skipping_stats(const std::vector<PredictionRecord>& preds) {
  if (preds.empty()) throw EmptyInput("no predictions to evaluate");
  std::size_t skipped = 0;
  std::size_t skipped_correct = 0;
  for (const auto& p : preds) {
    if (predicted_steps(p) < p.question.full_steps) {
      ++skipped;
      if (p.verdict.well_formed && p.verdict.final_correct) ++skipped_correct;
    }
  }
  return {pct(skipped, preds.size()), pct_or_absent(skipped_correct, skipped)};
}

std::vector<CurvePoint> accuracy_by_required_steps(
    const std::vector<PredictionRecord>& preds,
    std::optional<std::vector<StepBin>> bins) {
  if (!bins) {
    int hi = 0;
    for (const auto& p : preds) hi = std::max(hi, p.question.full_steps);
    bins.emplace();
    for (int n = 1; n <= hi; ++n) bins->push_back({n, n});
  }
  std::vector<CurvePoint> out;
  for (const StepBin& b : *bins) {
    std::vector<PredictionRecord> in_bin;
    for (const auto& p : preds) {
      if (p.question.full_steps >= b.lo && p.question.full_steps <= b.hi) {
        in_bin.push_back(p);
      }
    }
    CurvePoint c;
    c.bin = b;
    c.count = in_bin.size();
    if (!in_bin.empty()) {
      c.accuracy = evaluate(in_bin).accuracy;
      c.skip_ratio = skipping_stats(in_bin).skipping_ratio;
    }
    out.push_back(c);
  }
  return out;
}

AdditionMatrices addition_matrices(const std::vector<PredictionRecord>& preds) {
  AdditionMatrices m;
  std::array<std::array<std::size_t, kMaxDigits>, kMaxDigits> correct{};
  std::array<std::array<std::array<std::size_t, kMaxDigits>, kMaxDigits>,
             kMaxDigits>
      cell_steps{};
  std::size_t total_steps = 0;

  for (const auto& p : preds) {
    const auto* a = std::get_if<AdditionPayload>(&p.question.payload);
    if (a == nullptr) {
      throw TaskMismatch("addition matrices need addition predictions");
    }
    const int i = static_cast<int>(a->a_digits.size()) - 1;
    const int j = static_cast<int>(a->b_digits.size()) - 1;
    if (i < 0 || j < 0 || i >= kMaxDigits || j >= kMaxDigits) {
      throw RangeError("operand length outside [1, 7]");
    }
    ++m.questions[i][j];
    if (p.verdict.well_formed && p.verdict.final_correct) ++correct[i][j];
    if (!p.verdict.well_formed) continue;
    const auto& widths = p.verdict.step_widths;
    for (std::size_t s = 0; s < widths.size(); ++s) {
      const int w = widths[s];
      // wider than any operand only for malformed tiling; such steps are
      // clamped into the last width bucket
      const int wi = std::clamp(w, 1, kMaxDigits) - 1;
      ++total_steps;
      ++m.steps_by_width[wi];
      ++cell_steps[i][j][wi];
      if (s < p.verdict.step_correct.size() && p.verdict.step_correct[s]) {
        ++m.correct_by_width[wi];
      }
    }
  }

  for (int i = 0; i < kMaxDigits; ++i) {
    for (int j = 0; j < kMaxDigits; ++j) {
      m.question_accuracy[i][j] = pct_or_absent(correct[i][j], m.questions[i][j]);
      std::size_t steps = 0;
      for (std::size_t c : cell_steps[i][j]) steps += c;
      for (int w = 0; w < kMaxDigits; ++w) {
        m.cell_width_share[i][j][w] = pct_or_absent(cell_steps[i][j][w], steps);
      }
    }
  }
  for (int w = 0; w < kMaxDigits; ++w) {
    m.width_share[w] = pct_or_absent(m.steps_by_width[w], total_steps);
    m.step_accuracy[w] =
        pct_or_absent(m.correct_by_width[w], m.steps_by_width[w]);
  }
  return m;
}

// ---------------------------------------------------------------- reports

MetricsReport build_report(const std::vector<PredictionRecord>& preds,
                           const std::vector<TaskKind>& tasks) {
  std::vector<bool> wanted(3, false);
  for (TaskKind t : tasks) wanted[static_cast<int>(t)] = true;
  for (const auto& p : preds) wanted[static_cast<int>(p.question.task)] = true;

  MetricsReport r;
  std::vector<PredictionRecord> addition_test;
  for (TaskKind t : kAllTasks) {
    if (!wanted[static_cast<int>(t)]) continue;
    std::vector<PredictionRecord> test_union;
    for (SplitLabel s : kAllSplits) {
      std::vector<PredictionRecord> subset;
      for (const auto& p : preds) {
        if (p.question.task == t && p.question.split == s) subset.push_back(p);
      }
      SplitMetrics m;
      m.task = t;
      m.split = s;
      m.count = subset.size();
      if (!subset.empty()) {
        const EvalResult e = evaluate(subset);
        const SkipStats k = skipping_stats(subset);
        m.accuracy = e.accuracy;
        m.avg_steps = e.avg_steps;
        m.step_consistency = e.step_consistency;
        m.skipping_ratio = k.skipping_ratio;
        m.skipping_accuracy = k.skipping_accuracy;
      }
      r.splits.push_back(m);
      if (s != SplitLabel::train) {
        test_union.insert(test_union.end(), subset.begin(), subset.end());
      }
    }
    r.curves[t] = accuracy_by_required_steps(test_union);
    if (t == TaskKind::addition) addition_test = std::move(test_union);
  }
  if (wanted[static_cast<int>(TaskKind::addition)]) {
    r.addition = addition_matrices(addition_test);
  }
  return r;
}

namespace {

json row_json(const AdditionMatrices::Row& row) {
  json j = json::array();
  for (const auto& v : row) j.push_back(opt(v));
  return j;
}

json grid_json(const AdditionMatrices::Grid& g) {
  json j = json::array();
  for (const auto& row : g) j.push_back(row_json(row));
  return j;
}

}  // namespace

json report_to_json(const MetricsReport& r) {
  json splits = json::array();
  for (const auto& m : r.splits) {
    splits.push_back({{"task", to_string(m.task)},
                      {"split", to_string(m.split)},
                      {"count", m.count},
                      {"accuracy", opt(m.accuracy)},
                      {"avg_steps", opt(m.avg_steps)},
                      {"step_consistency", opt(m.step_consistency)},
                      {"skipping_ratio", opt(m.skipping_ratio)},
                      {"skipping_accuracy", opt(m.skipping_accuracy)}});
  }
  json curves = json::object();
  for (const auto& [t, points] : r.curves) {
    json arr = json::array();
    for (const auto& c : points) {
      arr.push_back({{"bin_lo", c.bin.lo},
                     {"bin_hi", c.bin.hi},
                     {"count", c.count},
                     {"accuracy", opt(c.accuracy)},
                     {"skip_ratio", opt(c.skip_ratio)}});
    }
    curves[std::string(to_string(t))] = std::move(arr);
  }
  json addition = nullptr;
  if (r.addition) {
    const auto& m = *r.addition;
    json cells = json::array();
    for (const auto& row : m.cell_width_share) {
      json jr = json::array();
      for (const auto& c : row) jr.push_back(row_json(c));
      cells.push_back(std::move(jr));
    }
    addition = {{"question_accuracy", grid_json(m.question_accuracy)},
                {"questions", m.questions},
                {"width_share", row_json(m.width_share)},
                {"cell_width_share", std::move(cells)},
                {"step_accuracy", row_json(m.step_accuracy)},
                {"steps_by_width", m.steps_by_width},
                {"correct_by_width", m.correct_by_width}};
  }
  return {{"splits", std::move(splits)},
          {"curves", std::move(curves)},
          {"addition", std::move(addition)}};
}

void write_report(const MetricsReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  const auto put = [&](const char* name, const std::string& text) {
    write_file((base / name).string(), text);
  };

  put("report.json", report_to_json(r).dump(2) + "\n");

  std::ostringstream metrics;
  metrics << "task,split,count,accuracy,avg_steps,step_consistency,"
             "skipping_ratio,skipping_accuracy\n";
  std::ostringstream fig6;
  fig6 << "task,split,count,skipping_ratio,skipping_accuracy\n";
  for (const auto& m : r.splits) {
    metrics << to_string(m.task) << ',' << to_string(m.split) << ',' << m.count
            << ',' << cell(m.accuracy) << ',' << cell(m.avg_steps) << ','
            << cell(m.step_consistency) << ',' << cell(m.skipping_ratio) << ','
            << cell(m.skipping_accuracy) << '\n';
    fig6 << to_string(m.task) << ',' << to_string(m.split) << ',' << m.count
         << ',' << cell(m.skipping_ratio) << ',' << cell(m.skipping_accuracy)
         << '\n';
  }
  put("metrics.csv", metrics.str());
  put("fig6_skip.csv", fig6.str());

  std::ostringstream fig4;
  fig4 << "task,bin_lo,bin_hi,count,accuracy,skip_ratio\n";
  for (const auto& [t, points] : r.curves) {
    for (const auto& c : points) {
      fig4 << to_string(t) << ',' << c.bin.lo << ',' << c.bin.hi << ','
           << c.count << ',' << cell(c.accuracy) << ',' << cell(c.skip_ratio)
           << '\n';
    }
  }
  put("fig4_curve.csv", fig4.str());

  const AdditionMatrices empty;
  const AdditionMatrices& m = r.addition ? *r.addition : empty;

  std::ostringstream qacc;
  qacc << "len_a";
  for (int j = 1; j <= kMaxDigits; ++j) qacc << ",len_b=" << j;
  qacc << '\n';
  for (int i = 0; i < kMaxDigits; ++i) {
    qacc << i + 1;
    for (int j = 0; j < kMaxDigits; ++j) qacc << ',' << cell(m.question_accuracy[i][j]);
    qacc << '\n';
  }
  put("fig5_qacc.csv", qacc.str());

  std::ostringstream dist;
  dist << "len_a,len_b";
  for (int w = 1; w <= kMaxDigits; ++w) dist << ",width=" << w;
  dist << '\n';
  dist << "all,all";
  for (const auto& v : m.width_share) dist << ',' << cell(v);
  dist << '\n';
  for (int i = 0; i < kMaxDigits; ++i) {
    for (int j = 0; j < kMaxDigits; ++j) {
      dist << i + 1 << ',' << j + 1;
      for (const auto& v : m.cell_width_share[i][j]) dist << ',' << cell(v);
      dist << '\n';
    }
  }
  put("fig5_dist.csv", dist.str());

  std::ostringstream sacc;
  sacc << "width,steps,correct,accuracy\n";
  for (int w = 0; w < kMaxDigits; ++w) {
    sacc << w + 1 << ',' << m.steps_by_width[w] << ',' << m.correct_by_width[w]
         << ',' << cell(m.step_accuracy[w]) << '\n';
  }
  put("fig5_sacc.csv", sacc.str());
}

}  // namespace skipstep
