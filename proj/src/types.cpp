#include "skipstep/types.hpp"

#include "skipstep/errors.hpp"

namespace skipstep {

std::string_view to_string(TaskKind t) {
  switch (t) {
    case TaskKind::algebra: return "algebra";
    case TaskKind::addition: return "addition";
    case TaskKind::direction: return "direction";
  }
  return "?";
}

std::string_view to_string(SplitLabel s) {
  switch (s) {
    case SplitLabel::train: return "train";
    case SplitLabel::in_domain_test: return "in_domain_test";
    case SplitLabel::ood_easy: return "ood_easy";
    case SplitLabel::ood_hard: return "ood_hard";
  }
  return "?";
}

TaskKind parse_task(std::string_view name) {
  for (TaskKind t : kAllTasks) {
    if (to_string(t) == name) return t;
  }
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

SplitLabel parse_split(std::string_view name) {
  for (SplitLabel s : kAllSplits) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

std::string_view to_string(Heading h) {
  switch (h) {
    case Heading::north: return "north";
    case Heading::east: return "east";
    case Heading::south: return "south";
    case Heading::west: return "west";
  }
  return "?";
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::left: return "left";
    case Action::right: return "right";
    case Action::around: return "around";
  }
  return "?";
}

std::optional<Heading> parse_heading(std::string_view s) {
  for (Heading h : {Heading::north, Heading::east, Heading::south,
                    Heading::west}) {
    if (to_string(h) == s) return h;
  }
  return std::nullopt;
}

std::optional<Action> parse_action(std::string_view s) {
  for (Action a : {Action::left, Action::right, Action::around}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

Heading rotate(Heading h, int quarter_turns) {
  const int v = ((static_cast<int>(h) + quarter_turns) % 4 + 4) % 4;
  return static_cast<Heading>(v);
}

int net_rotation(const std::vector<Action>& actions) {
  int net = 0;
  for (Action a : actions) net += static_cast<int>(a);
  return net;
}

int step_width(const Step& s) {
  return std::visit(
      [](const auto& b) -> int {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, PeelStep>) {
          return b.peeled_width;
        } else if constexpr (std::is_same_v<B, ColumnStep>) {
          return b.width();
        } else {
          return static_cast<int>(b.applied.size());
        }
      },
      s.body);
}

TaskKind task_of(const Payload& p) {
  switch (p.index()) {
    case 0: return TaskKind::algebra;
    case 1: return TaskKind::addition;
    default: return TaskKind::direction;
  }
}

StepInstruction StepInstruction::budgeted(int n) {
  if (n < 1) throw RangeError("step budget must be >= 1");
  return StepInstruction(n);
}

std::string StepInstruction::key() const {
  return budget_ ? "budgeted:" + std::to_string(*budget_) : "standard";
}

std::string_view to_string(OriginKind o) {
  switch (o) {
    case OriginKind::full: return "full";
    case OriginKind::warmstart_skip: return "warmstart_skip";
    case OriginKind::iter_skip: return "iter_skip";
  }
  return "?";
}

}  // namespace skipstep
