#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace skipstep {

enum class Op { plus, minus, times, divide };

inline constexpr std::array<Op, 4> kAllOps = {Op::plus, Op::minus, Op::times,
                                              Op::divide};

/// plus <-> minus, times <-> divide.
Op inverse(Op op);

/// Variable ids: 0 is the target glyph, k >= 1 is var_glyphs[k - 1].
using VarId = int;
inline constexpr VarId kTarget = 0;

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression node. Leaves carry a variable; interior nodes carry
/// an operator and two children. Subtrees are shared between equations.
struct Expr {
  VarId var = -1;
  Op op = Op::plus;
  ExprPtr left;
  ExprPtr right;

  bool is_var() const { return left == nullptr; }
};

ExprPtr make_var(VarId v);
ExprPtr make_bin(Op op, ExprPtr left, ExprPtr right);

bool expr_equal(const Expr& a, const Expr& b);

/// Number of occurrences of `v` in the tree.
int count_var(const Expr& e, VarId v);

/// Number of interior nodes on the path from the root down to the target,
/// or -1 when the target does not occur.
int target_depth(const Expr& e);

/// Distinct non-target variables, ascending.
std::vector<VarId> variables(const Expr& e);

struct Equation {
  ExprPtr lhs;
  ExprPtr rhs;

  friend bool operator==(const Equation& a, const Equation& b) {
    return expr_equal(*a.lhs, *b.lhs) && expr_equal(*a.rhs, *b.rhs);
  }
};

/// Peels the whole lhs (or rhs, when the target sits there) until the target
/// stands alone, returning the expression it equals. nullopt when the target
/// does not occur exactly once.
std::optional<ExprPtr> isolate(const Equation& eq);

/// True when the equation reads `T = expr` with T absent from expr.
bool is_isolated(const Equation& eq);

/// Symbol alphabet for one analog-algebra surface language.
struct GlyphMap {
  std::string id;
  std::vector<std::string> var_glyphs;
  /// plus, minus, times, divide, equals
  std::array<std::string, 5> op_glyphs;
  std::string target_glyph;
  /// Training questions draw their variables from the first `train_prefix`
  /// entries of var_glyphs.
  int train_prefix = 7;

  const std::string& glyph(Op op) const {
    return op_glyphs[static_cast<int>(op)];
  }
  const std::string& equals_glyph() const { return op_glyphs[4]; }
  const std::string& var_glyph(VarId v) const {
    return v == kTarget ? target_glyph : var_glyphs.at(v - 1);
  }
  int var_count() const { return static_cast<int>(var_glyphs.size()); }

  /// Throws ConfigError unless every glyph is distinct, non-empty, and free of
  /// whitespace and parentheses.
  void validate() const;
};

/// Built-in alphabet, identical to the "default" entry of config/glyphs.json.
const GlyphMap& default_glyph_map();

/// Process-wide registry of glyph maps keyed by id. "default" is always
/// present.
const GlyphMap& glyph_map(std::string_view id);
void register_glyph_map(GlyphMap map);

/// Loads every map from a glyph config JSON document and registers it.
void load_glyph_config(std::string_view json_text);

std::string render_expr(const Expr& e, const GlyphMap& g);
std::string render_equation(const Equation& eq, const GlyphMap& g);

/// Fully parenthesized infix: expr := VAR | "(" expr OP expr ")".
/// Throws ParseError(byte offset, reason).
Equation parse_equation(std::string_view text, const GlyphMap& g);

}  // namespace skipstep
