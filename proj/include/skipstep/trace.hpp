#pragma once

// Shared trace plumbing: prompts, step counting, the step line grammar, and
// the JSONL dataset format.
//
// Record schema, one JSON object per line:
//   {"id": str, "task": "algebra"|"addition"|"direction", "question": str,
//    "payload": {...}, "trace": [str, ...],
//    "instruction": {"mode": "budgeted", "n": int} | {"mode": "standard"},
//    "origin": "full"|"warmstart_skip"|"iter_skip", "iter": int|null,
//    "split": "train"|"in_domain_test"|"ood_easy"|"ood_hard"}

#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "skipstep/types.hpp"

namespace skipstep {

/// Question text as shown to a learner.
std::string question_text(const Question& q);

/// "<question>\nSolve it in n steps." for budgeted(n), the bare question text
/// for standard. The clause is literal, including "1 steps".
std::string render_prompt(const Question& q, const StepInstruction& instr);

/// Inverse of the step clause of render_prompt: the budget encoded in a
/// prompt, or standard when it carries no clause.
StepInstruction instruction_from_prompt(std::string_view prompt);

std::size_t count_steps(const Trace& trace);

/// "Step <index + 1>: <body>".
std::string step_line(int index, std::string_view body);

/// Step lines joined by '\n'.
std::string render_trace_text(const Trace& trace);

/// Strict line grammar "Step <t>: <body>"; blank lines are skipped and step
/// indices are re-derived from order. Throws ParseError(line_no, reason) with
/// a 0-based line number.
Trace parse_trace_text(std::string_view text, const Question& q);

/// Content hash of (task, payload, glyph map id).
std::string question_id(const Payload& p);

nlohmann::json payload_to_json(const Payload& p);
/// Throws SchemaError(line_no, field).
Payload payload_from_json(TaskKind task, const nlohmann::json& j,
                          std::size_t line_no = 0);

nlohmann::json instruction_to_json(const StepInstruction& instr);
StepInstruction instruction_from_json(const nlohmann::json& j,
                                      std::size_t line_no = 0);

nlohmann::json record_to_json(const DatasetRecord& r);
/// Rebuilds the question (reference trace included) from its payload.
DatasetRecord record_from_json(const nlohmann::json& j, std::size_t line_no = 0);

/// A full-step record for `q` carrying `instr`; used as the question object of
/// the learner wire protocol.
nlohmann::json question_to_json(const Question& q, const StepInstruction& instr);
Question question_from_json(const nlohmann::json& j);

/// One record per line, in order. Throws IoError on stream failure.
void write_records(const Dataset& records, std::ostream& out);
/// Line numbers in SchemaError are 1-based.
Dataset read_records(std::istream& in);

std::string serialize_records(const Dataset& records);
Dataset parse_records(std::string_view text);
Dataset load_records(const std::string& path);
void save_records(const Dataset& records, const std::string& path);

/// SHA-256 of the serialized JSONL bytes.
std::string dataset_hash(const Dataset& records);
std::string trace_hash(const Trace& trace);

}  // namespace skipstep
