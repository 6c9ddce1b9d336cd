#include "skipstep/expr.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

#include <json.hpp>

#include "skipstep/errors.hpp"

namespace skipstep {

Op inverse(Op op) {
  switch (op) {
    case Op::plus: return Op::minus;
    case Op::minus: return Op::plus;
    case Op::times: return Op::divide;
    case Op::divide: return Op::times;
  }
  return op;
}

ExprPtr make_var(VarId v) {
  auto e = std::make_shared<Expr>();
  e->var = v;
  return e;
}

ExprPtr make_bin(Op op, ExprPtr left, ExprPtr right) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->left = std::move(left);
  e->right = std::move(right);
  return e;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (&a == &b) return true;
  if (a.is_var() || b.is_var()) {
    return a.is_var() && b.is_var() && a.var == b.var;
  }
  return a.op == b.op && expr_equal(*a.left, *b.left) &&
         expr_equal(*a.right, *b.right);
}

int count_var(const Expr& e, VarId v) {
  if (e.is_var()) return e.var == v ? 1 : 0;
  return count_var(*e.left, v) + count_var(*e.right, v);
}

int target_depth(const Expr& e) {
  if (e.is_var()) return e.var == kTarget ? 0 : -1;
  const int l = target_depth(*e.left);
  if (l >= 0) return l + 1;
  const int r = target_depth(*e.right);
  return r >= 0 ? r + 1 : -1;
}

namespace {

void collect_vars(const Expr& e, std::set<VarId>& out) {
  if (e.is_var()) {
    if (e.var != kTarget) out.insert(e.var);
    return;
  }
  collect_vars(*e.left, out);
  collect_vars(*e.right, out);
}

}  // namespace

std::vector<VarId> variables(const Expr& e) {
  std::set<VarId> s;
  collect_vars(e, s);
  return {s.begin(), s.end()};
}

std::optional<ExprPtr> isolate(const Equation& eq) {
  ExprPtr lhs = eq.lhs;
  ExprPtr rhs = eq.rhs;
  if (count_var(*lhs, kTarget) == 0) std::swap(lhs, rhs);
  if (count_var(*lhs, kTarget) != 1 || count_var(*rhs, kTarget) != 0) {
    return std::nullopt;
  }
  while (!lhs->is_var()) {
    const Op op = lhs->op;
    if (count_var(*lhs->left, kTarget) == 1) {
      // (E op v) = r  ->  E = r inv(op) v
      rhs = make_bin(inverse(op), rhs, lhs->right);
      lhs = lhs->left;
      continue;
    }
    // (v op E) = r
    const ExprPtr& v = lhs->left;
    switch (op) {
      case Op::plus: rhs = make_bin(Op::minus, rhs, v); break;
      case Op::times: rhs = make_bin(Op::divide, rhs, v); break;
      case Op::minus: rhs = make_bin(Op::minus, v, rhs); break;
      case Op::divide: rhs = make_bin(Op::divide, v, rhs); break;
    }
    lhs = lhs->right;
  }
  return rhs;
}

bool is_isolated(const Equation& eq) {
  return eq.lhs->is_var() && eq.lhs->var == kTarget &&
         count_var(*eq.rhs, kTarget) == 0;
}

void GlyphMap::validate() const {
  if (id.empty()) throw ConfigError("glyph map without id");
  std::set<std::string> seen;
  auto check = [&](const std::string& g) {
    if (g.empty()) throw ConfigError("empty glyph in map " + id);
    for (char c : g) {
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '(' ||
          c == ')') {
        throw ConfigError("glyph '" + g + "' contains a reserved character");
      }
    }
    if (!seen.insert(g).second) {
      throw ConfigError("duplicate glyph '" + g + "' in map " + id);
    }
  };
  check(target_glyph);
  for (const auto& g : op_glyphs) check(g);
  for (const auto& g : var_glyphs) check(g);
  if (train_prefix < 1 || train_prefix > var_count()) {
    throw ConfigError("train_prefix out of range in map " + id);
  }
}

const GlyphMap& default_glyph_map() {
  static const GlyphMap g = [] {
    GlyphMap m;
    m.id = "default";
    m.target_glyph = "♣";
    m.op_glyphs = {"♦", "♠", "♥", "✿", "↔"};
    m.var_glyphs = {"α", "β", "γ", "δ", "ε", "ζ", "η", "θ", "ι", "κ",
                    "λ", "μ", "ν", "ξ", "π", "ρ", "σ", "τ", "υ", "φ",
                    "χ", "ψ", "ω", "ϑ", "★", "☆", "☀", "☁", "☂", "☃",
                    "☄", "☎", "☯", "☮", "♪", "♫", "⚓", "⚑", "✈", "✉"};
    m.train_prefix = 7;
    m.validate();
    return m;
  }();
  return g;
}

namespace {

struct Registry {
  Registry() { maps.emplace("default", default_glyph_map()); }

  std::mutex mu;
  // node-based map keeps references stable across insertions
  std::map<std::string, GlyphMap, std::less<>> maps;
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

const GlyphMap& glyph_map(std::string_view id) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  auto it = r.maps.find(id);
  if (it == r.maps.end()) {
    throw ConfigError("unknown glyph map '" + std::string(id) + "'");
  }
  return it->second;
}

void register_glyph_map(GlyphMap map) {
  map.validate();
  auto& r = registry();
  std::lock_guard lock(r.mu);
  auto it = r.maps.find(map.id);
  if (it != r.maps.end()) {
    const GlyphMap& old = it->second;
    if (old.var_glyphs != map.var_glyphs || old.op_glyphs != map.op_glyphs ||
        old.target_glyph != map.target_glyph ||
        old.train_prefix != map.train_prefix) {
      throw ConfigError("glyph map '" + map.id +
                        "' already registered with different glyphs");
    }
    return;
  }
  std::string id = map.id;
  r.maps.emplace(std::move(id), std::move(map));
}

void load_glyph_config(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("glyph config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("glyph config must be an object");
  for (const auto& [id, entry] : doc.items()) {
    try {
      GlyphMap m;
      m.id = id;
      m.target_glyph = entry.at("target").get<std::string>();
      const auto& ops = entry.at("ops");
      m.op_glyphs = {ops.at("plus").get<std::string>(),
                     ops.at("minus").get<std::string>(),
                     ops.at("times").get<std::string>(),
                     ops.at("divide").get<std::string>(),
                     ops.at("equals").get<std::string>()};
      m.var_glyphs = entry.at("vars").get<std::vector<std::string>>();
      m.train_prefix = entry.value("train_prefix", 7);
      register_glyph_map(std::move(m));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("glyph map '" + id + "': " + e.what());
    }
  }
}

namespace {

void render_into(const Expr& e, const GlyphMap& g, std::string& out) {
  if (e.is_var()) {
    out += g.var_glyph(e.var);
    return;
  }
  out += '(';
  render_into(*e.left, g, out);
  out += ' ';
  out += g.glyph(e.op);
  out += ' ';
  render_into(*e.right, g, out);
  out += ')';
}

enum class TokKind { lparen, rparen, var, op, equals, end };

struct Token {
  TokKind kind;
  std::size_t pos;
  VarId var = -1;
  Op op = Op::plus;
};

class EquationParser {
 public:
  EquationParser(std::string_view text, const GlyphMap& g)
      : text_(text), g_(g) {}

  Equation parse() {
    advance();
    Equation eq;
    eq.lhs = expr();
    expect(TokKind::equals, "expected equals glyph");
    eq.rhs = expr();
    if (tok_.kind != TokKind::end) {
      throw ParseError(tok_.pos, "trailing input");
    }
    return eq;
  }

 private:
  ExprPtr expr() {
    if (tok_.kind == TokKind::var) {
      auto v = make_var(tok_.var);
      advance();
      return v;
    }
    if (tok_.kind != TokKind::lparen) {
      throw ParseError(tok_.pos, tok_.kind == TokKind::end
                                     ? "unexpected end of input"
                                     : "expected variable or '('");
    }
    advance();
    auto left = expr();
    if (tok_.kind != TokKind::op) throw ParseError(tok_.pos, "expected operator");
    const Op op = tok_.op;
    advance();
    auto right = expr();
    expect(TokKind::rparen, "unbalanced parentheses");
    return make_bin(op, std::move(left), std::move(right));
  }

  void expect(TokKind kind, const char* reason) {
    if (tok_.kind != kind) throw ParseError(tok_.pos, reason);
    advance();
  }

  void advance() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t')) {
      ++pos_;
    }
    if (pos_ >= text_.size()) {
      tok_ = {TokKind::end, pos_};
      return;
    }
    const std::size_t start = pos_;
    if (text_[pos_] == '(') {
      ++pos_;
      tok_ = {TokKind::lparen, start};
      return;
    }
    if (text_[pos_] == ')') {
      ++pos_;
      tok_ = {TokKind::rparen, start};
      return;
    }
    while (pos_ < text_.size() && text_[pos_] != ' ' && text_[pos_] != '\t' &&
           text_[pos_] != '(' && text_[pos_] != ')') {
      ++pos_;
    }
    const std::string_view word = text_.substr(start, pos_ - start);
    if (word == g_.target_glyph) {
      tok_ = {TokKind::var, start, kTarget};
      return;
    }
    for (int i = 0; i < 4; ++i) {
      if (word == g_.op_glyphs[i]) {
        tok_ = {TokKind::op, start, -1, static_cast<Op>(i)};
        return;
      }
    }
    if (word == g_.equals_glyph()) {
      tok_ = {TokKind::equals, start};
      return;
    }
    for (int i = 0; i < g_.var_count(); ++i) {
      if (word == g_.var_glyphs[i]) {
        tok_ = {TokKind::var, start, i + 1};
        return;
      }
    }
    throw ParseError(start, "unknown glyph '" + std::string(word) + "'");
  }

  std::string_view text_;
  const GlyphMap& g_;
  std::size_t pos_ = 0;
  Token tok_{TokKind::end, 0};
};

}  // namespace

std::string render_expr(const Expr& e, const GlyphMap& g) {
  std::string out;
  render_into(e, g, out);
  return out;
}

std::string render_equation(const Equation& eq, const GlyphMap& g) {
  std::string out;
  render_into(*eq.lhs, g, out);
  out += ' ';
  out += g.equals_glyph();
  out += ' ';
  render_into(*eq.rhs, g, out);
  return out;
}

Equation parse_equation(std::string_view text, const GlyphMap& g) {
  return EquationParser(text, g).parse();
}

}  // namespace skipstep
