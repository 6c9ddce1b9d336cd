#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "poly_oracle.hpp"
#include "skipstep/algebra.hpp"
#include "skipstep/engine.hpp"
#include "skipstep/errors.hpp"
#include "skipstep/trace.hpp"
#include "skipstep/util.hpp"

using namespace skipstep;
using fixtures::algebra_payload;
using fixtures::algebra_q;

namespace {

const GlyphMap& g() { return default_glyph_map(); }
Equation eq(const std::string& s) { return parse_equation(s, g()); }
std::string text(const Equation& e) { return render_equation(e, g()); }

std::vector<std::string> step_texts(const Trace& t) {
  std::vector<std::string> out;
  for (const auto& s : t.steps) {
    out.push_back(text(std::get<PeelStep>(s.body).equation));
  }
  return out;
}

}  // namespace

TEST(Solve, PeelsOutermostFirst) {
  const auto p = algebra_payload("((♣ ♦ α) ♥ β) ↔ γ");
  EXPECT_EQ(step_texts(algebra::solve_full(p)),
            (std::vector<std::string>{"(♣ ♦ α) ↔ (γ ✿ β)", "♣ ↔ ((γ ✿ β) ♠ α)"}));
  EXPECT_TRUE(algebra::solve_full(algebra_payload("♣ ↔ α")).empty());
  EXPECT_EQ(step_texts(algebra::solve_full(algebra_payload("(♣ ♠ α) ↔ β"))),
            (std::vector<std::string>{"♣ ↔ (β ♦ α)"}));
}

TEST(Solve, FinalEquationHoldsUnderSubstitution) {
  const auto p = algebra_payload("((♣ ♦ α) ♥ β) ↔ γ");
  const Equation last =
      std::get<PeelStep>(algebra::solve_full(p).steps.back().body).equation;
  EXPECT_EQ(oracle::same_solution(p.equation, last), std::optional<bool>(true));
}

TEST(Equivalence, WorkedExamples) {
  EXPECT_TRUE(algebra::check_equivalent(eq("(♣ ♦ α) ↔ β"), eq("♣ ↔ (β ♠ α)")));
  EXPECT_FALSE(algebra::check_equivalent(eq("(♣ ♦ α) ↔ β"), eq("♣ ↔ (β ♦ α)")));
  const Equation e = eq("((♣ ✿ α) ♠ β) ↔ (γ ♥ δ)");
  EXPECT_TRUE(algebra::check_equivalent(e, e));
  EXPECT_THROW(algebra::check_equivalent(eq("α ↔ β"), e), std::invalid_argument);
}

TEST(Equivalence, CommutedOperandsAgree) {
  EXPECT_TRUE(algebra::check_equivalent(eq("(α ♦ ♣) ↔ β"), eq("♣ ↔ (β ♠ α)")));
  EXPECT_TRUE(algebra::check_equivalent(eq("(♣ ♥ α) ↔ β"), eq("♣ ↔ (β ✿ α)")));
  EXPECT_TRUE(
      algebra::check_equivalent(eq("♣ ↔ ((α ♦ β) ♥ γ)"), eq("♣ ↔ ((α ♥ γ) ♦ (β ♥ γ))")));
}

TEST(Equivalence, AgreesWithNormalFormOracle) {
  // candidates: every step of the reference, every step of corrupted
  // realizations, and every realization against a perturbed question
  int decided = 0;
  int disagreements = 0;
  int negatives = 0;
  int instances = 0;
  for (std::uint64_t i = 0; instances < 600; ++i) {
    algebra::GenerationConstraints c;
    c.depth_min = 1;
    c.depth_max = 4;
    c.glyph_pool = 6;
    c.fresh_var_prob = 0.5;
    const auto p = algebra::generate_payload(mix_seed(99, i), c);
    ++instances;
    Rng rng(mix_seed(7, i));
    std::vector<Equation> candidates;
    for (const auto& s : algebra::solve_full(p).steps) {
      candidates.push_back(std::get<PeelStep>(s.body).equation);
    }
    for (int r = 0; r < 3; ++r) {
      std::vector<bool> corrupt(p.depth);
      for (int k = 0; k < p.depth; ++k) corrupt[k] = rng.chance(0.5);
      const Trace t = algebra::realize(p, std::vector<int>(p.depth, 1), corrupt);
      for (const auto& s : t.steps) {
        candidates.push_back(std::get<PeelStep>(s.body).equation);
      }
    }
    for (const Equation& cand : candidates) {
      const auto truth = oracle::same_solution(p.equation, cand);
      if (!truth) continue;
      ++decided;
      negatives += *truth ? 0 : 1;
      bool got = false;
      try {
        got = algebra::check_equivalent(p.equation, cand);
      } catch (const DegenerateError&) {
        ++disagreements;
        continue;
      }
      if (got != *truth) {
        ++disagreements;
        ADD_FAILURE() << text(p.equation) << " vs " << text(cand);
      }
    }
  }
  EXPECT_EQ(disagreements, 0);
  EXPECT_GE(instances, 500);
  EXPECT_GT(negatives, 300);
  EXPECT_GT(decided - negatives, 300);
}

TEST(Merge, BothStepsGiveTheIsolatedForm) {
  const Question q = algebra_q("((♣ ♦ α) ♥ β) ↔ γ");
  const Trace m = merge_steps(q, q.reference_trace, 0, 2);
  ASSERT_EQ(m.size(), 1u);
  const auto& body = std::get<PeelStep>(m.steps[0].body);
  EXPECT_EQ(body.peeled_width, 2);
  EXPECT_EQ(body.equation,
            std::get<PeelStep>(q.reference_trace.steps.back().body).equation);
  const Verdict v = verify_trace(q, m, true);
  EXPECT_TRUE(v.final_correct);
  EXPECT_TRUE(v.steps_valid);
  EXPECT_EQ(v.step_count, 1);
  EXPECT_EQ(v.step_widths, std::vector<int>{2});
}

TEST(Merge, TotalMergeAndRanges) {
  const Question q = algebra_q("(((♣ ♦ α) ♥ β) ♠ γ) ↔ δ");
  const Trace m = merge_steps(q, q.reference_trace, 0, 3);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_TRUE(is_isolated(std::get<PeelStep>(m.steps[0].body).equation));
  EXPECT_THROW(merge_steps(q, q.reference_trace, 3, 2), RangeError);
  EXPECT_THROW(merge_steps(q, q.reference_trace, 0, 1), RangeError);
  EXPECT_THROW(merge_steps(q, q.reference_trace, 2, 2), RangeError);
}

TEST(Merge, EveryContiguousMergeVerifies) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    const Question q = algebra::generate_instance(mix_seed(5, i), {2, 6, 0.7, 7});
    const int n = q.full_steps;
    for (int start = 0; start < n; ++start) {
      for (int w = 2; start + w <= n; ++w) {
        const Trace m = merge_steps(q, q.reference_trace, start, w);
        const Verdict v = verify_trace(q, m, true);
        ASSERT_TRUE(v.final_correct && v.steps_valid) << question_text(q);
        ASSERT_EQ(v.step_count, n - w + 1);
      }
    }
  }
}

TEST(Verify, ReferenceWrongFinalAndLax) {
  const Question q = algebra_q("(♣ ♦ α) ↔ β");
  const Verdict ok = verify_trace(q, q.reference_trace, true);
  EXPECT_TRUE(ok.final_correct && ok.steps_valid);
  EXPECT_EQ(ok.step_count, 1);

  const Verdict bad = verify_text(q, "Step 1: ♣ ↔ (β ♦ α)", true);
  EXPECT_TRUE(bad.well_formed);
  EXPECT_FALSE(bad.final_correct);

  // corrupt middle step, correct last step: strict rejects, lax accepts
  const Question q3 = algebra_q("(((♣ ♦ α) ♥ β) ♠ γ) ↔ δ");
  Trace t = q3.reference_trace;
  const Trace corrupted = algebra::realize(std::get<AlgebraPayload>(q3.payload),
                                           {1, 1, 1}, {false, true, false});
  t.steps[1] = corrupted.steps[1];
  const Verdict strict = verify_trace(q3, t, true);
  EXPECT_TRUE(strict.final_correct);
  EXPECT_FALSE(strict.steps_valid);
  EXPECT_EQ(strict.step_correct, (std::vector<bool>{true, false, true}));
  const Verdict lax = verify_trace(q3, t, false);
  EXPECT_TRUE(lax.accepted(false));
  EXPECT_FALSE(lax.steps_checked);
}

TEST(Verify, CorruptionIsDetected) {
  const Question q = algebra_q("(((♣ ♦ α) ♥ β) ♠ γ) ↔ δ");
  const auto& p = std::get<AlgebraPayload>(q.payload);
  for (int k = 0; k < 3; ++k) {
    std::vector<bool> corrupt(3, false);
    corrupt[k] = true;
    const Verdict v = verify_trace(q, algebra::realize(p, {1, 1, 1}, corrupt), true);
    EXPECT_FALSE(v.final_correct) << k;
    EXPECT_FALSE(v.step_correct[k]);
  }
}

TEST(Verify, NoProgressStepIsInvalid) {
  const Question q = algebra_q("((♣ ♦ α) ♥ β) ↔ γ");
  const std::string first = q.reference_trace.steps[0].text.substr(8);
  const Verdict v = verify_text(
      q, "Step 1: " + first + "\nStep 2: " + first + "\n" +
             step_line(3, render_step_body(q.reference_trace.steps[1].body, q)),
      true);
  EXPECT_TRUE(v.final_correct);
  EXPECT_FALSE(v.steps_valid);
}

TEST(Split, SplitPredicates) {
  AlgebraPayload p = algebra_payload("((♣ ♦ α) ♥ β) ↔ γ");
  p.num_vars = 7;
  p.depth = 5;
  EXPECT_EQ(algebra::classify_split(p, 7), SplitLabel::train);
  // unseen glyph κ (id 10)
  AlgebraPayload e = algebra_payload("((♣ ♦ κ) ♥ β) ↔ γ");
  e.num_vars = 8;
  e.depth = 7;
  EXPECT_EQ(algebra::classify_split(e, 7), SplitLabel::ood_easy);
  e.num_vars = 10;
  e.depth = 8;
  EXPECT_EQ(algebra::classify_split(e, 7), std::nullopt);
  e.depth = 9;
  EXPECT_EQ(algebra::classify_split(e, 7), SplitLabel::ood_hard);
}

TEST(Generate, DeterministicAndWithinConstraints) {
  algebra::GenerationConstraints c;
  c.glyph_pool = 6;
  const Question a = algebra::generate_instance(11, c);
  EXPECT_EQ(a, algebra::generate_instance(11, c));
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto p = algebra::generate_payload(s, c);
    EXPECT_GE(p.depth, 1);
    EXPECT_LE(p.depth, 5);
    EXPECT_LE(p.num_vars, 7);
    EXPECT_EQ(p.num_vars, algebra::count_distinct_vars(p.equation));
  }
  algebra::GenerationConstraints hard{9, 12, 0.8, 40};
  int hits = 0;
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto p = algebra::generate_payload(s, hard);
    EXPECT_GE(p.depth, 9);
    if (algebra::classify_split(p, 7) == SplitLabel::ood_hard) {
      ++hits;
      EXPECT_GE(p.num_vars, 10);
      EXPECT_LE(p.num_vars, 14);
    }
  }
  EXPECT_GT(hits, 0);
}

TEST(Generate, ConstraintErrors) {
  EXPECT_THROW(algebra::generate_payload(1, {1, 15, 0.7, 7}), ConstraintError);
  EXPECT_THROW(algebra::generate_payload(1, {3, 2, 0.7, 7}), ConstraintError);
  EXPECT_THROW(algebra::generate_payload(1, {1, 5, 0.7, 41}), ConstraintError);
  // eight fresh glyphs do not fit a pool of three
  EXPECT_THROW(algebra::generate_payload(1, {8, 8, 1.0, 3}), ConstraintError);
}
