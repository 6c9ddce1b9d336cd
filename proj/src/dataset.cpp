#include "skipstep/dataset.hpp"

#include <string>
#include <unordered_set>

#include "skipstep/addition.hpp"
#include "skipstep/algebra.hpp"
#include "skipstep/direction.hpp"
#include "skipstep/engine.hpp"
#include "skipstep/errors.hpp"
#include "skipstep/util.hpp"

namespace skipstep {

namespace {

enum class Stream { in_domain, ood_easy, ood_hard };

Stream stream_of(SplitLabel s) {
  switch (s) {
    case SplitLabel::train:
    case SplitLabel::in_domain_test:
      return Stream::in_domain;
    case SplitLabel::ood_easy:
      return Stream::ood_easy;
    case SplitLabel::ood_hard:
      return Stream::ood_hard;
  }
  return Stream::in_domain;
}

std::string_view stream_name(Stream s) {
  switch (s) {
    case Stream::in_domain:
      return "in_domain";
    case Stream::ood_easy:
      return "ood_easy";
    case Stream::ood_hard:
      return "ood_hard";
  }
  return "";
}

// Generator settings per stream. Algebra OOD settings push the variable count
// past the training alphabet; the split predicate still has the final say.
Payload draw_payload(TaskKind task, Stream stream, std::uint64_t seed) {
  switch (task) {
    case TaskKind::algebra: {
      algebra::GenerationConstraints c;
      if (stream == Stream::ood_easy) {
        c = {6, 10, 0.6, 40, "default"};
      } else if (stream == Stream::ood_hard) {
        c = {9, 14, 0.8, 40, "default"};
      }
      return algebra::generate_payload(seed, c);
    }
    case TaskKind::addition: {
      addition::DigitSpec spec;
      if (stream == Stream::ood_easy) {
        const bool a_short = (mix_seed(seed, "short") & 1u) == 0;
        spec = a_short ? addition::DigitSpec{1, 3, 4, 7}
                       : addition::DigitSpec{4, 7, 1, 3};
      } else if (stream == Stream::ood_hard) {
        spec = {4, 7, 4, 7};
      }
      return addition::generate_payload(seed, spec);
    }
    case TaskKind::direction: {
      direction::LengthSpec spec;
      if (stream == Stream::ood_easy) {
        spec.len_min = 11;
        spec.len_max = 20;
      } else if (stream == Stream::ood_hard) {
        spec.len_min = 21;
        spec.len_max = 30;
      }
      return direction::generate_payload(seed, spec);
    }
  }
  throw ConfigError("unknown task");
}

SplitLabel stream_label(Stream s) {
  switch (s) {
    case Stream::in_domain:
      return SplitLabel::train;
    case Stream::ood_easy:
      return SplitLabel::ood_easy;
    case Stream::ood_hard:
      return SplitLabel::ood_hard;
  }
  return SplitLabel::train;
}

// Rejection-samples `count` distinct questions whose payload classifies into
// the stream's split.
std::vector<Question> draw_stream(TaskKind task, Stream stream, int count,
                                  std::uint64_t seed) {
  std::vector<Question> out;
  if (count <= 0) return out;
  out.reserve(static_cast<std::size_t>(count));
  const std::uint64_t base =
      mix_seed(seed, std::string(to_string(task)) + "/" +
                         std::string(stream_name(stream)));
  const SplitLabel want = stream_label(stream);
  const std::uint64_t max_draws = 1000ull * static_cast<std::uint64_t>(count);
  std::unordered_set<std::string> seen;
  for (std::uint64_t i = 0; static_cast<int>(out.size()) < count; ++i) {
    if (i >= max_draws) {
      throw ConstraintError("could not fill " + std::string(to_string(task)) +
                            " " + std::string(stream_name(stream)) +
                            " with distinct questions");
    }
    Payload p = draw_payload(task, stream, mix_seed(base, i));
    if (classify_split(p) != want) continue;
    Question q = make_question(std::move(p), want);
    if (!seen.insert(q.id).second) continue;
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace

SplitSizes default_split_sizes(TaskKind task) {
  switch (task) {
    case TaskKind::algebra:
      return {5770, 1000, 2000, 420};
    case TaskKind::addition:
      return {2885, 1000, 1200, 1600};
    case TaskKind::direction:
      return {2080, 1000, 500, 500};
  }
  return {};
}

DatasetRecord full_record(const Question& q) {
  DatasetRecord r;
  r.question_id = q.id;
  r.question = q;
  r.trace = q.reference_trace;
  r.instruction = q.full_steps >= 1 ? StepInstruction::budgeted(q.full_steps)
                                    : StepInstruction::standard();
  r.origin = Origin::full();
  return r;
}

Dataset generate_split(TaskKind task, SplitLabel split, const SplitSizes& sizes,
                       std::uint64_t seed) {
  for (int n : sizes) {
    if (n < 0) throw ConfigError("split sizes must be non-negative");
  }
  const Stream stream = stream_of(split);
  const int train_n = sizes[static_cast<int>(SplitLabel::train)];
  int skip = 0;
  const int take = sizes[static_cast<int>(split)];
  if (split == SplitLabel::in_domain_test) skip = train_n;
  auto questions = draw_stream(task, stream, skip + take, seed);
  Dataset out;
  out.reserve(static_cast<std::size_t>(take));
  for (int i = skip; i < skip + take; ++i) {
    Question& q = questions[static_cast<std::size_t>(i)];
    q.split = split;
    out.push_back(full_record(q));
  }
  return out;
}

std::array<Dataset, 4> generate_splits(TaskKind task, const SplitSizes& sizes,
                                       std::uint64_t seed) {
  for (int n : sizes) {
    if (n < 0) throw ConfigError("split sizes must be non-negative");
  }
  std::array<Dataset, 4> out;
  const int train_n = sizes[static_cast<int>(SplitLabel::train)];
  const int test_n = sizes[static_cast<int>(SplitLabel::in_domain_test)];
  auto in_domain = draw_stream(task, Stream::in_domain, train_n + test_n, seed);
  for (int i = 0; i < train_n + test_n; ++i) {
    Question& q = in_domain[static_cast<std::size_t>(i)];
    q.split = i < train_n ? SplitLabel::train : SplitLabel::in_domain_test;
    out[static_cast<int>(q.split)].push_back(full_record(q));
  }
  for (SplitLabel s : {SplitLabel::ood_easy, SplitLabel::ood_hard}) {
    for (auto& q : draw_stream(task, stream_of(s), sizes[static_cast<int>(s)],
                               seed)) {
      out[static_cast<int>(s)].push_back(full_record(q));
    }
  }
  return out;
}

std::optional<DatasetRecord> make_warmstart_skip(const DatasetRecord& record,
                                                 std::uint64_t seed) {
  switch (record.question.task) {
    case TaskKind::algebra:
      throw ConfigError("warm start has no manual skip rule for algebra");
    case TaskKind::direction:
      return direction::make_cancellation_skip(record, seed);
    case TaskKind::addition: {
      const int n = static_cast<int>(record.trace.size());
      if (n != record.question.full_steps) {
        throw RangeError("warm-start skips need a full-step record");
      }
      if (n < 2) return std::nullopt;
      Rng rng(seed);
      const int at = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
      DatasetRecord out = record;
      out.trace = addition::merge_steps(record.trace, at, 2);
      out.instruction = StepInstruction::budgeted(n - 1);
      out.origin = Origin::warmstart();
      return out;
    }
  }
  return std::nullopt;
}

Dataset add_warmstart_skips(const Dataset& records, std::uint64_t seed) {
  Dataset out = records;
  for (const auto& r : records) {
    if (auto skip = make_warmstart_skip(r, mix_seed(seed, r.question_id))) {
      out.push_back(std::move(*skip));
    }
  }
  return out;
}

}  // namespace skipstep
