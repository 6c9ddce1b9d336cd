#include "skipstep/trace.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "skipstep/addition.hpp"
#include "skipstep/algebra.hpp"
#include "skipstep/direction.hpp"
#include "skipstep/engine.hpp"
#include "skipstep/errors.hpp"
#include "skipstep/util.hpp"

namespace skipstep {

using nlohmann::json;

namespace {

constexpr std::string_view kClausePrefix = "\nSolve it in ";
constexpr std::string_view kClauseSuffix = " steps.";

std::string digits_text(const std::vector<int>& d) {
  std::string s;
  for (int x : d) s.push_back(static_cast<char>('0' + x));
  return s;
}

const json& field(const json& j, const char* name, std::size_t line_no) {
  auto it = j.find(name);
  if (it == j.end()) throw SchemaError(line_no, name);
  return *it;
}

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  std::size_t line_no, const std::string& where) {
  if (!j.is_object()) throw SchemaError(line_no, where);
  std::set<std::string_view> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw SchemaError(line_no, where + key);
  }
  for (const char* k : allowed) {
    if (!j.contains(k)) throw SchemaError(line_no, where + k);
  }
}

template <typename T>
T get_as(const json& j, const char* name, std::size_t line_no) {
  try {
    return field(j, name, line_no).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(line_no, name);
  }
}

std::vector<int> parse_decimal(const std::string& s, std::size_t line_no,
                               const char* name) {
  if (s.empty() || s.size() > 18 || (s.size() > 1 && s[0] == '0')) {
    throw SchemaError(line_no, name);
  }
  std::vector<int> d;
  for (char c : s) {
    if (c < '0' || c > '9') throw SchemaError(line_no, name);
    d.push_back(c - '0');
  }
  return d;
}

}  // namespace

std::string question_text(const Question& q) {
  return std::visit(
      [&](const auto& p) -> std::string {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, AlgebraPayload>) {
          return render_equation(p.equation, glyph_map(p.glyph_map_id));
        } else if constexpr (std::is_same_v<P, AdditionPayload>) {
          return digits_text(p.a_digits) + " + " + digits_text(p.b_digits);
        } else {
          std::string s = "Facing ";
          s += to_string(p.initial);
          s += ", turn: ";
          for (std::size_t i = 0; i < p.actions.size(); ++i) {
            if (i) s += ", ";
            s += to_string(p.actions[i]);
          }
          return s;
        }
      },
      q.payload);
}

std::string render_prompt(const Question& q, const StepInstruction& instr) {
  std::string s = question_text(q);
  if (instr.is_budgeted()) {
    s += kClausePrefix;
    s += std::to_string(instr.budget());
    s += kClauseSuffix;
  }
  return s;
}

StepInstruction instruction_from_prompt(std::string_view prompt) {
  const auto at = prompt.rfind(kClausePrefix);
  if (at == std::string_view::npos) return StepInstruction::standard();
  std::string_view rest = prompt.substr(at + kClausePrefix.size());
  if (rest.size() <= kClauseSuffix.size() ||
      rest.substr(rest.size() - kClauseSuffix.size()) != kClauseSuffix) {
    return StepInstruction::standard();
  }
  rest.remove_suffix(kClauseSuffix.size());
  int n = 0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
  if (ec != std::errc{} || ptr != rest.data() + rest.size() || n < 1) {
    return StepInstruction::standard();
  }
  return StepInstruction::budgeted(n);
}

std::size_t count_steps(const Trace& trace) { return trace.size(); }

std::string step_line(int index, std::string_view body) {
  std::string s = "Step ";
  s += std::to_string(index + 1);
  s += ": ";
  s += body;
  return s;
}

std::string render_trace_text(const Trace& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i) out += '\n';
    out += trace.steps[i].text;
  }
  return out;
}

Trace parse_trace_text(std::string_view text, const Question& q) {
  const auto lines = split_lines(text);
  Trace trace;
  int prev_depth = 0;
  const GlyphMap* glyphs = nullptr;
  if (const auto* p = std::get_if<AlgebraPayload>(&q.payload)) {
    glyphs = &glyph_map(p->glyph_map_id);
    prev_depth = std::max(target_depth(*p->equation.lhs), 0);
  }
  int next_col = 0;

  for (std::size_t line_no = 0; line_no < lines.size(); ++line_no) {
    std::string_view line = trim(lines[line_no]);
    if (line.empty()) continue;
    constexpr std::string_view kStep = "Step ";
    if (line.substr(0, kStep.size()) != kStep) {
      throw ParseError(line_no, "no step prefix");
    }
    std::size_t pos = kStep.size();
    const std::size_t digits_start = pos;
    while (pos < line.size() && line[pos] >= '0' && line[pos] <= '9') ++pos;
    if (pos == digits_start || pos >= line.size() || line[pos] != ':') {
      throw ParseError(line_no, "no step prefix");
    }
    const std::string_view body = trim(line.substr(pos + 1));

    Step step;
    step.index = static_cast<int>(trace.size());
    try {
      switch (q.task) {
        case TaskKind::algebra: {
          auto b = algebra::parse_step_body(body, *glyphs, prev_depth);
          prev_depth = std::max(target_depth(*b.equation.lhs), 0);
          step.body = std::move(b);
          break;
        }
        case TaskKind::addition: {
          auto b = addition::parse_step_body(body, next_col);
          next_col = b.col_hi + 1;
          step.body = std::move(b);
          break;
        }
        case TaskKind::direction:
          step.body = direction::parse_step_body(body);
          break;
      }
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.reason());
    }
    step.text = step_line(step.index, render_step_body(step.body, q));
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

std::string question_id(const Payload& p) {
  std::string key(to_string(task_of(p)));
  key += '\n';
  key += payload_to_json(p).dump();
  key += '\n';
  if (const auto* a = std::get_if<AlgebraPayload>(&p)) key += a->glyph_map_id;
  return sha256_hex(key).substr(0, 16);
}

json payload_to_json(const Payload& p) {
  return std::visit(
      [](const auto& x) -> json {
        using P = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<P, AlgebraPayload>) {
          return {{"equation",
                   render_equation(x.equation, glyph_map(x.glyph_map_id))},
                  {"glyph_map_id", x.glyph_map_id},
                  {"num_vars", x.num_vars},
                  {"depth", x.depth}};
        } else if constexpr (std::is_same_v<P, AdditionPayload>) {
          return {{"a", digits_text(x.a_digits)},
                  {"b", digits_text(x.b_digits)}};
        } else {
          json actions = json::array();
          for (Action a : x.actions) actions.push_back(to_string(a));
          return {{"initial", to_string(x.initial)}, {"actions", actions}};
        }
      },
      p);
}

Payload payload_from_json(TaskKind task, const json& j, std::size_t line_no) {
  switch (task) {
    case TaskKind::algebra: {
      require_keys(j, {"equation", "glyph_map_id", "num_vars", "depth"},
                   line_no, "payload.");
      AlgebraPayload p;
      p.glyph_map_id = get_as<std::string>(j, "glyph_map_id", line_no);
      const GlyphMap* g = nullptr;
      try {
        g = &glyph_map(p.glyph_map_id);
      } catch (const ConfigError&) {
        throw SchemaError(line_no, "payload.glyph_map_id");
      }
      try {
        p.equation =
            parse_equation(get_as<std::string>(j, "equation", line_no), *g);
      } catch (const ParseError&) {
        throw SchemaError(line_no, "payload.equation");
      }
      p.num_vars = get_as<int>(j, "num_vars", line_no);
      p.depth = get_as<int>(j, "depth", line_no);
      if (count_var(*p.equation.lhs, kTarget) != 1 ||
          count_var(*p.equation.rhs, kTarget) != 0) {
        throw SchemaError(line_no, "payload.equation");
      }
      if (p.depth != target_depth(*p.equation.lhs) || p.depth < 0) {
        throw SchemaError(line_no, "payload.depth");
      }
      if (p.num_vars != algebra::count_distinct_vars(p.equation) ||
          p.num_vars < 2) {
        throw SchemaError(line_no, "payload.num_vars");
      }
      return p;
    }
    case TaskKind::addition: {
      require_keys(j, {"a", "b"}, line_no, "payload.");
      AdditionPayload p;
      p.a_digits =
          parse_decimal(get_as<std::string>(j, "a", line_no), line_no, "payload.a");
      p.b_digits =
          parse_decimal(get_as<std::string>(j, "b", line_no), line_no, "payload.b");
      return p;
    }
    case TaskKind::direction: {
      require_keys(j, {"initial", "actions"}, line_no, "payload.");
      DirectionPayload p;
      const auto h = parse_heading(get_as<std::string>(j, "initial", line_no));
      if (!h) throw SchemaError(line_no, "payload.initial");
      p.initial = *h;
      for (const auto& s :
           get_as<std::vector<std::string>>(j, "actions", line_no)) {
        const auto a = parse_action(s);
        if (!a) throw SchemaError(line_no, "payload.actions");
        p.actions.push_back(*a);
      }
      if (p.actions.empty() || p.actions.size() > 30) {
        throw SchemaError(line_no, "payload.actions");
      }
      return p;
    }
  }
  throw SchemaError(line_no, "task");
}

json instruction_to_json(const StepInstruction& instr) {
  if (instr.is_budgeted()) return {{"mode", "budgeted"}, {"n", instr.budget()}};
  return {{"mode", "standard"}};
}

StepInstruction instruction_from_json(const json& j, std::size_t line_no) {
  if (!j.is_object()) throw SchemaError(line_no, "instruction");
  const auto mode = get_as<std::string>(j, "mode", line_no);
  if (mode == "standard") {
    require_keys(j, {"mode"}, line_no, "instruction.");
    return StepInstruction::standard();
  }
  if (mode == "budgeted") {
    require_keys(j, {"mode", "n"}, line_no, "instruction.");
    const int n = get_as<int>(j, "n", line_no);
    if (n < 1) throw SchemaError(line_no, "instruction.n");
    return StepInstruction::budgeted(n);
  }
  throw SchemaError(line_no, "instruction.mode");
}

json record_to_json(const DatasetRecord& r) {
  json trace = json::array();
  for (const auto& s : r.trace.steps) trace.push_back(s.text);
  json j;
  j["id"] = r.question_id;
  j["task"] = to_string(r.question.task);
  j["question"] = question_text(r.question);
  j["payload"] = payload_to_json(r.question.payload);
  j["trace"] = std::move(trace);
  j["instruction"] = instruction_to_json(r.instruction);
  j["origin"] = to_string(r.origin.kind);
  j["iter"] = r.origin.kind == OriginKind::iter_skip ? json(r.origin.iter)
                                                     : json(nullptr);
  j["split"] = to_string(r.question.split);
  return j;
}

DatasetRecord record_from_json(const json& j, std::size_t line_no) {
  require_keys(j,
               {"id", "task", "question", "payload", "trace", "instruction",
                "origin", "iter", "split"},
               line_no, "");
  DatasetRecord r;
  TaskKind task;
  SplitLabel split;
  try {
    task = parse_task(get_as<std::string>(j, "task", line_no));
  } catch (const ConfigError&) {
    throw SchemaError(line_no, "task");
  }
  try {
    split = parse_split(get_as<std::string>(j, "split", line_no));
  } catch (const ConfigError&) {
    throw SchemaError(line_no, "split");
  }
  r.question = make_question(payload_from_json(task, j.at("payload"), line_no),
                             split);
  r.question_id = get_as<std::string>(j, "id", line_no);
  if (r.question_id != r.question.id) throw SchemaError(line_no, "id");
  if (get_as<std::string>(j, "question", line_no) != question_text(r.question)) {
    throw SchemaError(line_no, "question");
  }

  const auto lines = get_as<std::vector<std::string>>(j, "trace", line_no);
  try {
    r.trace = parse_trace_text(join(lines, "\n"), r.question);
  } catch (const ParseError&) {
    throw SchemaError(line_no, "trace");
  }
  if (r.trace.size() != lines.size()) throw SchemaError(line_no, "trace");

  r.instruction = instruction_from_json(j.at("instruction"), line_no);

  const auto origin = get_as<std::string>(j, "origin", line_no);
  const json& iter = j.at("iter");
  if (origin == "full" || origin == "warmstart_skip") {
    if (!iter.is_null()) throw SchemaError(line_no, "iter");
    r.origin = origin == "full" ? Origin::full() : Origin::warmstart();
  } else if (origin == "iter_skip") {
    if (!iter.is_number_integer()) throw SchemaError(line_no, "iter");
    r.origin = Origin::iteration(iter.get<int>());
  } else {
    throw SchemaError(line_no, "origin");
  }
  return r;
}

json question_to_json(const Question& q, const StepInstruction& instr) {
  DatasetRecord r;
  r.question_id = q.id;
  r.question = q;
  r.trace = q.reference_trace;
  r.instruction = instr;
  r.origin = Origin::full();
  return record_to_json(r);
}

Question question_from_json(const json& j) {
  return record_from_json(j, 0).question;
}

void write_records(const Dataset& records, std::ostream& out) {
  for (const auto& r : records) {
    out << record_to_json(r).dump() << '\n';
  }
  if (!out) throw IoError("failed writing records");
}

Dataset read_records(std::istream& in) {
  Dataset out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw SchemaError(line_no, "<json>");
    }
    out.push_back(record_from_json(j, line_no));
  }
  if (in.bad()) throw IoError("failed reading records");
  return out;
}

std::string serialize_records(const Dataset& records) {
  std::ostringstream ss;
  write_records(records, ss);
  return ss.str();
}

Dataset parse_records(std::string_view text) {
  std::istringstream ss{std::string(text)};
  return read_records(ss);
}

Dataset load_records(const std::string& path) {
  return parse_records(read_file(path));
}

void save_records(const Dataset& records, const std::string& path) {
  write_file(path, serialize_records(records));
}

std::string dataset_hash(const Dataset& records) {
  return sha256_hex(serialize_records(records));
}

std::string trace_hash(const Trace& trace) {
  return sha256_hex(render_trace_text(trace));
}

}  // namespace skipstep
