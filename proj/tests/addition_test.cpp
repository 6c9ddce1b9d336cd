#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "skipstep/addition.hpp"
#include "skipstep/errors.hpp"
#include "skipstep/trace.hpp"
#include "skipstep/util.hpp"

using namespace skipstep;
using fixtures::addition_q;

namespace {

std::vector<std::string> bodies(const Trace& t) {
  std::vector<std::string> out;
  for (const auto& s : t.steps) out.push_back(s.text.substr(s.text.find(": ") + 2));
  return out;
}

// every composition of n as a list of positive widths
void compositions(int n, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (n == 0) {
    out.push_back(cur);
    return;
  }
  for (int w = 1; w <= n; ++w) {
    cur.push_back(w);
    compositions(n - w, cur, out);
    cur.pop_back();
  }
}

std::vector<std::vector<int>> compositions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  compositions(n, cur, out);
  return out;
}

}  // namespace

TEST(Solve, ColumnsFromTheRight) {
  const Question q = addition_q(347, 589);
  EXPECT_EQ(bodies(q.reference_trace),
            (std::vector<std::string>{"7 + 9 + 0 = 16, write 6, carry 1",
                                      "4 + 8 + 1 = 13, write 3, carry 1",
                                      "3 + 5 + 1 = 9, write 9, carry 0"}));
  EXPECT_EQ(addition::answer_of(q.reference_trace), "936");
}

TEST(Solve, ZeroAndFinalCarry) {
  const Question z = addition_q(0, 0);
  EXPECT_EQ(bodies(z.reference_trace),
            std::vector<std::string>{"0 + 0 + 0 = 0, write 0, carry 0"});
  EXPECT_EQ(addition::answer_of(z.reference_trace), "0");
  const Question q = addition_q(999, 1);
  ASSERT_EQ(q.full_steps, 3);
  EXPECT_EQ(std::get<ColumnStep>(q.reference_trace.steps[2].body).carry_out, 1);
  EXPECT_EQ(addition::answer_of(q.reference_trace), "1000");
}

TEST(Merge, WorkedExamples) {
  const Question q = addition_q(347, 589);
  EXPECT_EQ(bodies(addition::merge_steps(q.reference_trace, 0, 2)),
            (std::vector<std::string>{"47 + 89 + 0 = 136, write 36, carry 1",
                                      "3 + 5 + 1 = 9, write 9, carry 0"}));
  EXPECT_EQ(bodies(addition::merge_steps(q.reference_trace, 0, 3)),
            std::vector<std::string>{"347 + 589 + 0 = 936, write 936, carry 0"});
  EXPECT_THROW(addition::merge_steps(q.reference_trace, 0, 1), RangeError);
  EXPECT_THROW(addition::merge_steps(q.reference_trace, 2, 2), RangeError);
}

TEST(Merge, ZeroPaddedBlocks) {
  const Question q = addition_q(1005, 7);
  const Trace m = addition::merge_steps(q.reference_trace, 0, 3);
  EXPECT_EQ(bodies(m)[0], "005 + 007 + 0 = 12, write 012, carry 0");
  EXPECT_TRUE(verify_trace(q, m, true).steps_valid);
  EXPECT_EQ(parse_trace_text(render_trace_text(m), q), m);
}

TEST(Verify, WorkedExamples) {
  const Question q = addition_q(347, 589);
  const Verdict ok = verify_trace(q, q.reference_trace, true);
  EXPECT_TRUE(ok.final_correct && ok.steps_valid);

  const Verdict wrong = verify_text(q,
                                    "Step 1: 7 + 9 + 0 = 15, write 5, carry 1\n"
                                    "Step 2: 4 + 8 + 1 = 13, write 3, carry 1\n"
                                    "Step 3: 3 + 5 + 1 = 9, write 9, carry 0",
                                    true);
  EXPECT_FALSE(wrong.final_correct);
  EXPECT_EQ(wrong.step_correct, (std::vector<bool>{false, true, true}));

  const Verdict merged = verify_trace(q, addition::merge_steps(q.reference_trace, 0, 2), true);
  EXPECT_TRUE(merged.final_correct && merged.steps_valid);
  EXPECT_EQ(merged.step_widths, (std::vector<int>{2, 1}));
}

TEST(Verify, GapsAndBrokenCarryChains) {
  const Question q = addition_q(347, 589);
  // column 1 dropped
  const Verdict gap = verify_text(q,
                                  "Step 1: 7 + 9 + 0 = 16, write 6, carry 1\n"
                                  "Step 2: 3 + 5 + 1 = 9, write 9, carry 0",
                                  true);
  EXPECT_FALSE(gap.steps_valid);
  EXPECT_FALSE(gap.final_correct);
  // carry not passed on
  const Verdict chain = verify_text(q,
                                    "Step 1: 7 + 9 + 0 = 16, write 6, carry 1\n"
                                    "Step 2: 4 + 8 + 0 = 12, write 2, carry 1\n"
                                    "Step 3: 3 + 5 + 1 = 9, write 9, carry 0",
                                    true);
  EXPECT_FALSE(chain.steps_valid);
  EXPECT_EQ(verify_text(q, "", true).well_formed, false);
}

TEST(Realize, CorruptedStepWritesOffByOne) {
  const Question q = addition_q(347, 589);
  const auto& p = std::get<AdditionPayload>(q.payload);
  const Trace t = addition::realize(p, {2, 1}, {true, false});
  const Verdict v = verify_trace(q, t, true);
  EXPECT_FALSE(v.final_correct);
  EXPECT_EQ(v.step_correct, (std::vector<bool>{false, true}));
  EXPECT_EQ(parse_trace_text(render_trace_text(t), q), t);
}

TEST(Exhaustive, AllPairsBelowHundred) {
  int checked = 0;
  for (unsigned a = 0; a < 100; ++a) {
    for (unsigned b = 0; b < 100; ++b) {
      const Question q = addition_q(a, b);
      ASSERT_EQ(addition::answer_of(q.reference_trace), std::to_string(a + b));
      const Verdict v = verify_trace(q, q.reference_trace, true);
      ASSERT_TRUE(v.final_correct && v.steps_valid) << a << "+" << b;
      const auto& p = std::get<AdditionPayload>(q.payload);
      for (const auto& widths : compositions(q.full_steps)) {
        const Trace t = addition::realize(p, widths, {});
        const Verdict vm = verify_trace(q, t, true);
        ASSERT_TRUE(vm.final_correct && vm.steps_valid) << a << "+" << b;
        ASSERT_EQ(vm.step_widths, widths);
        ASSERT_EQ(addition::answer_of(t), std::to_string(a + b));
      }
      ++checked;
    }
  }
  EXPECT_EQ(checked, 10000);
}

TEST(Exhaustive, MergePartitionsOnLongOperands) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto a = static_cast<unsigned long long>(rng.between(0, 9999999));
    const auto b = static_cast<unsigned long long>(rng.between(0, 9999999));
    const Question q = addition_q(a, b);
    const auto& p = std::get<AdditionPayload>(q.payload);
    for (const auto& widths : compositions(q.full_steps)) {
      const Trace t = addition::realize(p, widths, {});
      ASSERT_EQ(addition::answer_of(t), std::to_string(a + b));
      ASSERT_TRUE(verify_trace(q, t, true).steps_valid);
    }
    for (int start = 0; start < q.full_steps; ++start) {
      for (int w = 2; start + w <= q.full_steps; ++w) {
        const Trace m = addition::merge_steps(q.reference_trace, start, w);
        ASSERT_TRUE(verify_trace(q, m, true).accepted(true));
      }
    }
  }
}

TEST(Split, SplitPredicates) {
  const auto split = [](int la, int lb) {
    AdditionPayload p{std::vector<int>(la, 1), std::vector<int>(lb, 2)};
    return addition::classify_split(p);
  };
  EXPECT_EQ(split(3, 3), SplitLabel::train);
  EXPECT_EQ(split(2, 5), SplitLabel::ood_easy);
  EXPECT_EQ(split(4, 7), SplitLabel::ood_hard);
  EXPECT_EQ(split(8, 1), std::nullopt);
}

TEST(Generate, RangesAndDeterminism) {
  const Question a = addition::generate_instance(5, {1, 3, 1, 3});
  EXPECT_EQ(a, addition::generate_instance(5, {1, 3, 1, 3}));
  for (std::uint64_t s = 0; s < 200; ++s) {
    EXPECT_EQ(addition::generate_instance(s, {1, 3, 1, 3}).split, SplitLabel::train);
    const auto p = addition::generate_payload(s, {1, 3, 4, 7});
    EXPECT_EQ(addition::classify_split(p), SplitLabel::ood_easy);
    EXPECT_TRUE(p.b_digits.front() != 0);
  }
  EXPECT_THROW(addition::generate_payload(1, {0, 3, 1, 3}), ConstraintError);
  EXPECT_THROW(addition::generate_payload(1, {1, 8, 1, 3}), ConstraintError);
}

TEST(Digits, Helpers) {
  EXPECT_EQ(addition::digits_of(0), std::vector<int>{0});
  EXPECT_EQ(addition::digits_of(1203), (std::vector<int>{1, 2, 0, 3}));
  EXPECT_EQ(addition::value_of({1, 2, 0, 3}), 1203u);
  EXPECT_EQ(addition::slice({1, 2, 0, 3}, 1, 2), 20u);
  EXPECT_EQ(addition::slice({4, 7}, 1, 3), 4u);
}
