#include <gtest/gtest.h>

#include <json.hpp>

#include "skipstep/errors.hpp"
#include "skipstep/expr.hpp"
#include "skipstep/util.hpp"

using namespace skipstep;

namespace {

const GlyphMap& g() { return default_glyph_map(); }

Equation eq(const std::string& text) { return parse_equation(text, g()); }

}  // namespace

TEST(Render, FullyParenthesized) {
  const auto lhs = make_bin(Op::times, make_bin(Op::plus, make_var(kTarget), make_var(1)),
                            make_var(2));
  const Equation e{lhs, make_var(3)};
  EXPECT_EQ(render_equation(e, g()), "((♣ ♦ α) ♥ β) ↔ γ");
}

TEST(Parse, RoundTripsRenderedEquations) {
  for (const char* text :
       {"♣ ↔ α", "(♣ ✿ β) ↔ α", "((♣ ♠ α) ♦ α) ↔ γ",
        "(α ♠ (♣ ♥ β)) ↔ ((γ ♦ δ) ✿ ε)"}) {
    const Equation e = eq(text);
    EXPECT_EQ(render_equation(e, g()), text);
    EXPECT_EQ(eq(render_equation(e, g())), e);
  }
}

TEST(Parse, ErrorsCarryReasons) {
  const auto reason = [](const std::string& text) {
    try {
      parse_equation(text, g());
    } catch (const ParseError& e) {
      return e.reason();
    }
    return std::string("no error");
  };
  EXPECT_EQ(reason("(♣ ♦ x) ↔ α"), "unknown glyph 'x'");
  EXPECT_EQ(reason("(♣ ♦ α) α"), "expected equals glyph");
  EXPECT_EQ(reason("(♣ ♦ α ↔ β"), "unbalanced parentheses");
  EXPECT_EQ(reason("♣ ↔"), "unexpected end of input");
  EXPECT_EQ(reason("♣ ↔ α β"), "trailing input");
}

TEST(Expr, DepthCountsAndVariables) {
  const Equation e = eq("((♣ ♠ α) ♦ β) ↔ (γ ♥ α)");
  EXPECT_EQ(target_depth(*e.lhs), 2);
  EXPECT_EQ(target_depth(*e.rhs), -1);
  EXPECT_EQ(count_var(*e.lhs, kTarget), 1);
  EXPECT_EQ(variables(*e.rhs), (std::vector<VarId>{1, 3}));
}

TEST(Isolate, PeelsEitherOperandSide) {
  EXPECT_EQ(render_expr(**isolate(eq("((♣ ♠ α) ♦ β) ↔ γ")), g()),
            "((γ ♠ β) ♦ α)");
  // target as right operand: α - T = γ  ->  T = α - γ
  EXPECT_EQ(render_expr(**isolate(eq("(α ♠ ♣) ↔ γ")), g()), "(α ♠ γ)");
  // α / T = γ  ->  T = α / γ
  EXPECT_EQ(render_expr(**isolate(eq("(α ✿ ♣) ↔ γ")), g()), "(α ✿ γ)");
  // target on the right-hand side
  EXPECT_EQ(render_expr(**isolate(eq("γ ↔ (♣ ♥ α)")), g()), "(γ ✿ α)");
  EXPECT_FALSE(isolate(eq("α ↔ β")).has_value());
  EXPECT_FALSE(isolate(eq("(♣ ♦ ♣) ↔ β")).has_value());
}

TEST(Isolated, OnlyBareTargetOnTheLeft) {
  EXPECT_TRUE(is_isolated(eq("♣ ↔ (α ♦ β)")));
  EXPECT_FALSE(is_isolated(eq("(♣ ♦ α) ↔ β")));
  EXPECT_FALSE(is_isolated(eq("♣ ↔ (♣ ♦ β)")));
}

TEST(GlyphMap, DefaultIsValidAndDistinct) {
  EXPECT_NO_THROW(g().validate());
  EXPECT_EQ(g().var_count(), 40);
  EXPECT_EQ(g().train_prefix, 7);
}

TEST(GlyphMap, ValidationRejectsCollisions) {
  GlyphMap m = g();
  m.id = "broken";
  m.var_glyphs[3] = m.target_glyph;
  EXPECT_THROW(m.validate(), ConfigError);
  m = g();
  m.op_glyphs[0] = "(";
  EXPECT_THROW(m.validate(), ConfigError);
}

TEST(GlyphMap, ConfigFileMatchesBuiltIn) {
  const auto doc = nlohmann::json::parse(
      read_file(std::string(SKIPSTEP_CONFIG_DIR) + "/glyphs.json"));
  const auto& d = doc.at("default");
  EXPECT_EQ(d.at("target").get<std::string>(), g().target_glyph);
  EXPECT_EQ(d.at("vars").get<std::vector<std::string>>(), g().var_glyphs);
  EXPECT_EQ(d.at("ops").at("plus").get<std::string>(), g().glyph(Op::plus));
  EXPECT_EQ(d.at("ops").at("minus").get<std::string>(), g().glyph(Op::minus));
  EXPECT_EQ(d.at("ops").at("times").get<std::string>(), g().glyph(Op::times));
  EXPECT_EQ(d.at("ops").at("divide").get<std::string>(), g().glyph(Op::divide));
  EXPECT_EQ(d.at("ops").at("equals").get<std::string>(), g().equals_glyph());
  EXPECT_EQ(d.at("train_prefix").get<int>(), g().train_prefix);
  // re-registering identical content is accepted
  EXPECT_NO_THROW(load_glyph_config(doc.dump()));
}

TEST(GlyphMap, RegistryRejectsConflictingRedefinition) {
  GlyphMap alt = g();
  alt.id = "alt-test";
  std::swap(alt.var_glyphs[0], alt.var_glyphs[1]);
  register_glyph_map(alt);
  EXPECT_EQ(glyph_map("alt-test").var_glyphs[0], g().var_glyphs[1]);
  std::swap(alt.var_glyphs[0], alt.var_glyphs[1]);
  EXPECT_THROW(register_glyph_map(alt), ConfigError);
  EXPECT_THROW(glyph_map("missing"), ConfigError);
}
