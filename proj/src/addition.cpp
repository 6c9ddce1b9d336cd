#include "skipstep/addition.hpp"

#include <algorithm>
#include <charconv>

#include "skipstep/engine.hpp"
#include "skipstep/errors.hpp"
#include "skipstep/trace.hpp"
#include "skipstep/util.hpp"

namespace skipstep::addition {

namespace {

constexpr int kMaxWidth = 18;

std::uint64_t pow10(int w) {
  std::uint64_t p = 1;
  for (int i = 0; i < w; ++i) p *= 10;
  return p;
}

std::vector<int> random_number(Rng& rng, int len) {
  std::vector<int> d(len);
  for (int i = 0; i < len; ++i) {
    const bool leading = i == 0 && len > 1;
    d[i] = static_cast<int>(rng.between(leading ? 1 : 0, 9));
  }
  return d;
}

std::string padded(std::uint64_t v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) {
    s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  }
  return s;
}

Trace build_trace(std::vector<ColumnStep> bodies) {
  Trace t;
  t.steps.reserve(bodies.size());
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    Step s;
    s.index = static_cast<int>(i);
    s.text = step_line(s.index, render_step_body(bodies[i]));
    s.body = std::move(bodies[i]);
    t.steps.push_back(std::move(s));
  }
  return t;
}

int num_columns(const AdditionPayload& p) {
  return static_cast<int>(std::max(p.a_digits.size(), p.b_digits.size()));
}

}  // namespace

std::uint64_t value_of(const std::vector<int>& digits) {
  std::uint64_t v = 0;
  for (int d : digits) v = v * 10 + static_cast<std::uint64_t>(d);
  return v;
}

std::vector<int> digits_of(std::uint64_t v) {
  std::vector<int> d;
  do {
    d.push_back(static_cast<int>(v % 10));
    v /= 10;
  } while (v != 0);
  std::reverse(d.begin(), d.end());
  return d;
}

std::uint64_t slice(const std::vector<int>& digits, int lo, int hi) {
  const int len = static_cast<int>(digits.size());
  std::uint64_t v = 0;
  for (int c = std::min(hi, len - 1); c >= lo; --c) {
    v = v * 10 + static_cast<std::uint64_t>(digits[len - 1 - c]);
  }
  return v;
}

AdditionPayload generate_payload(std::uint64_t seed, const DigitSpec& spec) {
  const auto in_range = [](int lo, int hi) {
    return lo >= 1 && hi <= 7 && lo <= hi;
  };
  if (!in_range(spec.len_a_min, spec.len_a_max) ||
      !in_range(spec.len_b_min, spec.len_b_max)) {
    throw ConstraintError("digit length ranges must lie within [1, 7]");
  }
  Rng rng(seed);
  const int la = static_cast<int>(rng.between(spec.len_a_min, spec.len_a_max));
  const int lb = static_cast<int>(rng.between(spec.len_b_min, spec.len_b_max));
  AdditionPayload p;
  p.a_digits = random_number(rng, la);
  p.b_digits = random_number(rng, lb);
  return p;
}

Question generate_instance(std::uint64_t seed, const DigitSpec& spec) {
  AdditionPayload p = generate_payload(seed, spec);
  const SplitLabel split = classify_split(p).value_or(SplitLabel::train);
  return make_question(std::move(p), split);
}

Trace realize(const AdditionPayload& p, const std::vector<int>& widths,
              const std::vector<bool>& corrupt) {
  std::vector<ColumnStep> bodies;
  int col = 0;
  int carry = 0;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const int w = widths[i];
    ColumnStep s;
    s.col_lo = col;
    s.col_hi = col + w - 1;
    s.a_block = slice(p.a_digits, s.col_lo, s.col_hi);
    s.b_block = slice(p.b_digits, s.col_lo, s.col_hi);
    s.carry_in = carry;
    s.sum = s.a_block + s.b_block + static_cast<std::uint64_t>(carry);
    const std::uint64_t base = pow10(w);
    s.carry_out = static_cast<int>(s.sum / base);
    const std::string low = padded(s.sum % base, w);
    for (char c : low) s.written.push_back(c - '0');
    if (i < corrupt.size() && corrupt[i]) {
      s.written.back() = (s.written.back() + 1) % 10;
    }
    carry = s.carry_out;
    col += w;
    bodies.push_back(std::move(s));
  }
  return build_trace(std::move(bodies));
}

Trace solve_full(const AdditionPayload& p) {
  return realize(p, std::vector<int>(num_columns(p), 1), {});
}

Trace merge_steps(const Trace& trace, int start, int width) {
  const int n = static_cast<int>(trace.size());
  if (width < 2 || start < 0 || start + width > n) {
    throw RangeError("merge range [" + std::to_string(start) + ", " +
                     std::to_string(start + width) + ") invalid for " +
                     std::to_string(n) + " steps");
  }
  std::vector<ColumnStep> bodies;
  for (int i = 0; i < n; ++i) {
    const auto& b = std::get<ColumnStep>(trace.steps[i].body);
    if (i > start && i < start + width) {
      ColumnStep& m = bodies.back();
      const std::uint64_t shift = pow10(b.col_lo - m.col_lo);
      m.a_block += b.a_block * shift;
      m.b_block += b.b_block * shift;
      m.col_hi = b.col_hi;
      m.written.insert(m.written.begin(), b.written.begin(), b.written.end());
      m.carry_out = b.carry_out;
      m.sum = m.a_block + m.b_block + static_cast<std::uint64_t>(m.carry_in);
    } else {
      bodies.push_back(b);
    }
  }
  return build_trace(std::move(bodies));
}

std::string answer_of(const Trace& trace) {
  std::string out;
  if (trace.empty()) return out;
  const auto& last = std::get<ColumnStep>(trace.steps.back().body);
  if (last.carry_out != 0) out += std::to_string(last.carry_out);
  for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
    for (int d : std::get<ColumnStep>(it->body).written) {
      out.push_back(static_cast<char>('0' + d));
    }
  }
  const auto nz = out.find_first_not_of('0');
  return nz == std::string::npos ? "0" : out.substr(nz);
}

Verdict verify_trace(const AdditionPayload& p, const Trace& trace,
                     bool /*strict*/) {
  Verdict v;
  v.step_count = static_cast<int>(trace.size());
  const int n = num_columns(p);
  int expected_col = 0;
  int prev_carry = 0;
  bool tiled = true;
  bool chained = true;
  bool all_correct = true;
  for (const auto& step : trace.steps) {
    const auto* s = std::get_if<ColumnStep>(&step.body);
    if (s == nullptr) return Verdict::invalid("not an addition step");
    const int w = s->width();
    v.step_widths.push_back(w);
    if (w < 1 || w > kMaxWidth || static_cast<int>(s->written.size()) != w) {
      return Verdict::invalid("malformed column block");
    }
    tiled = tiled && s->col_lo == expected_col;
    expected_col = s->col_hi + 1;
    chained = chained && s->carry_in == prev_carry;
    prev_carry = s->carry_out;

    const bool operands = s->a_block == slice(p.a_digits, s->col_lo, s->col_hi) &&
                          s->b_block == slice(p.b_digits, s->col_lo, s->col_hi);
    const bool carries = (s->carry_in == 0 || s->carry_in == 1) &&
                         (s->carry_out == 0 || s->carry_out == 1);
    const bool arithmetic =
        carries &&
        s->sum == s->a_block + s->b_block + static_cast<std::uint64_t>(s->carry_in) &&
        s->sum == static_cast<std::uint64_t>(s->carry_out) * pow10(w) +
                      value_of(s->written);
    const bool ok = operands && arithmetic;
    v.step_correct.push_back(ok);
    all_correct = all_correct && ok;
  }
  tiled = tiled && expected_col == n;
  v.steps_valid = !trace.empty() && tiled && chained && all_correct;
  v.final_correct =
      !trace.empty() &&
      answer_of(trace) ==
          std::to_string(value_of(p.a_digits) + value_of(p.b_digits));
  return v;
}

std::optional<SplitLabel> classify_split(const AdditionPayload& p) {
  const int la = static_cast<int>(p.a_digits.size());
  const int lb = static_cast<int>(p.b_digits.size());
  const int lo = std::min(la, lb);
  const int hi = std::max(la, lb);
  if (hi <= 3) return SplitLabel::train;
  if (lo <= 3 && hi >= 4 && hi <= 7) return SplitLabel::ood_easy;
  if (lo >= 4 && hi <= 7) return SplitLabel::ood_hard;
  return std::nullopt;
}

std::string render_step_body(const ColumnStep& s) {
  const int w = s.width();
  std::string out = padded(s.a_block, w);
  out += " + ";
  out += padded(s.b_block, w);
  out += " + ";
  out += std::to_string(s.carry_in);
  out += " = ";
  out += std::to_string(s.sum);
  out += ", write ";
  for (int d : s.written) out.push_back(static_cast<char>('0' + d));
  out += ", carry ";
  out += std::to_string(s.carry_out);
  return out;
}

namespace {

class BodyReader {
 public:
  explicit BodyReader(std::string_view s) : s_(s) {}

  std::string_view digits() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
    if (pos_ == start) throw ParseError(start, "expected digits");
    if (pos_ - start > kMaxWidth) throw ParseError(start, "number too long");
    return s_.substr(start, pos_ - start);
  }

  std::uint64_t number() {
    const auto d = digits();
    std::uint64_t v = 0;
    std::from_chars(d.data(), d.data() + d.size(), v);
    return v;
  }

  void literal(std::string_view lit) {
    if (s_.substr(pos_, lit.size()) != lit) {
      throw ParseError(pos_, "expected '" + std::string(lit) + "'");
    }
    pos_ += lit.size();
  }

  bool done() const { return pos_ == s_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

ColumnStep parse_step_body(std::string_view body, int col_lo) {
  // carries outside {0, 1} are kept (saturated) so verification can flag them
  const auto small = [](std::uint64_t v) {
    return static_cast<int>(std::min<std::uint64_t>(v, 1000));
  };
  BodyReader r(trim(body));
  ColumnStep s;
  s.a_block = r.number();
  r.literal(" + ");
  s.b_block = r.number();
  r.literal(" + ");
  s.carry_in = small(r.number());
  r.literal(" = ");
  s.sum = r.number();
  r.literal(", write ");
  for (char c : r.digits()) s.written.push_back(c - '0');
  r.literal(", carry ");
  s.carry_out = small(r.number());
  if (!r.done()) throw ParseError(r.pos(), "trailing input");
  s.col_lo = col_lo;
  s.col_hi = col_lo + static_cast<int>(s.written.size()) - 1;
  return s;
}

}  // namespace skipstep::addition
