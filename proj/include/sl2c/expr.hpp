#pragma once

// A small arithmetic expression language for Hamiltonians, f-functions and
// potentials.
//
//   precedence (high to low)   associativity
//   ^                          right
//   unary -                    prefix
//   * /                        left
//   + -                        left
//
// Functions take exactly one argument: exp sinh cosh tanh log sqrt sinhc.
// Numbers are decimal literals with an optional exponent.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sl2c/errors.hpp"
#include "sl2c/scalar.hpp"

namespace sl2c::expr {

// ---------------------------------------------------------------------------
// Tokens

enum class TokenKind { number, identifier, op, lparen, rparen, comma, end };

struct Token {
  TokenKind kind;
  std::string lexeme;
  std::size_t position;  // byte offset into the source
};

inline std::string describe(const Token& t) {
  return t.kind == TokenKind::end ? std::string("end of input") : "'" + t.lexeme + "'";
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  const auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  const auto is_ident_start = [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      while (i < src.size() && is_digit(src[i])) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && is_digit(src[i])) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && is_digit(src[j])) {
          i = j;
          while (i < src.size() && is_digit(src[i])) ++i;
        } else {
          throw ParseError("malformed exponent in numeric literal at position " + std::to_string(j), j,
                           {"digit"});
        }
      }
      out.push_back({TokenKind::number, std::string(src.substr(start, i - start)), start});
    } else if (is_ident_start(c)) {
      while (i < src.size() && (is_ident_start(src[i]) || is_digit(src[i]))) ++i;
      out.push_back({TokenKind::identifier, std::string(src.substr(start, i - start)), start});
    } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      out.push_back({TokenKind::op, std::string(1, c), start});
      ++i;
    } else if (c == '(') {
      out.push_back({TokenKind::lparen, "(", start});
      ++i;
    } else if (c == ')') {
      out.push_back({TokenKind::rparen, ")", start});
      ++i;
    } else if (c == ',') {
      out.push_back({TokenKind::comma, ",", start});
      ++i;
    } else {
      throw ParseError("unexpected character '" + std::string(1, c) + "' at position " + std::to_string(i),
                       i);
    }
  }
  out.push_back({TokenKind::end, "", src.size()});
  return out;
}

// ---------------------------------------------------------------------------
// Syntax tree

enum class NodeKind { constant, symbol, negate, binary, call };
enum class BinaryOp : char { add = '+', sub = '-', mul = '*', div = '/', pow = '^' };
enum class Function { exp, sinh, cosh, tanh, log, sqrt, sinhc };

inline constexpr std::array<std::pair<std::string_view, Function>, 7> kFunctions{{
    {"exp", Function::exp},
    {"sinh", Function::sinh},
    {"cosh", Function::cosh},
    {"tanh", Function::tanh},
    {"log", Function::log},
    {"sqrt", Function::sqrt},
    {"sinhc", Function::sinhc},
}};

inline std::optional<Function> lookup_function(std::string_view name) {
  for (const auto& [n, f] : kFunctions)
    if (n == name) return f;
  return std::nullopt;
}

inline std::string_view function_name(Function f) {
  for (const auto& [n, g] : kFunctions)
    if (g == f) return n;
  return "?";
}

struct Node;
using Ast = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::constant;
  double value = 0.0;      // constant
  std::string name;        // symbol
  BinaryOp op{};           // binary
  Function fn{};           // call
  Ast lhs;                 // negate/call operand, binary left
  Ast rhs;                 // binary right
};

inline Ast constant(double v) {
  Node n;
  n.kind = NodeKind::constant;
  n.value = v;
  return std::make_shared<const Node>(std::move(n));
}
inline Ast symbol(std::string name) {
  Node n;
  n.kind = NodeKind::symbol;
  n.name = std::move(name);
  return std::make_shared<const Node>(std::move(n));
}
inline Ast negate(Ast a) {
  Node n;
  n.kind = NodeKind::negate;
  n.lhs = std::move(a);
  return std::make_shared<const Node>(std::move(n));
}
inline Ast binary(BinaryOp op, Ast a, Ast b) {
  Node n;
  n.kind = NodeKind::binary;
  n.op = op;
  n.lhs = std::move(a);
  n.rhs = std::move(b);
  return std::make_shared<const Node>(std::move(n));
}
inline Ast call(Function f, Ast a) {
  Node n;
  n.kind = NodeKind::call;
  n.fn = f;
  n.lhs = std::move(a);
  return std::make_shared<const Node>(std::move(n));
}

inline bool structurally_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::constant: return a.value == b.value;
    case NodeKind::symbol: return a.name == b.name;
    case NodeKind::negate: return structurally_equal(*a.lhs, *b.lhs);
    case NodeKind::binary:
      return a.op == b.op && structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
    case NodeKind::call: return a.fn == b.fn && structurally_equal(*a.lhs, *b.lhs);
  }
  return false;
}

/// Fully parenthesized rendering; parse(to_string(a)) is structurally equal to a.
inline std::string to_string(const Node& n) {
  switch (n.kind) {
    case NodeKind::constant: {
      std::array<char, 32> buf{};
      auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
      return std::string(buf.data(), end);
    }
    case NodeKind::symbol: return n.name;
    case NodeKind::negate: return "(-" + to_string(*n.lhs) + ")";
    case NodeKind::binary:
      return "(" + to_string(*n.lhs) + " " + static_cast<char>(n.op) + " " + to_string(*n.rhs) + ")";
    case NodeKind::call: return std::string(function_name(n.fn)) + "(" + to_string(*n.lhs) + ")";
  }
  return {};
}
inline std::string to_string(const Ast& a) { return to_string(*a); }

inline void collect_symbols(const Node& n, std::set<std::string>& out) {
  if (n.kind == NodeKind::symbol) out.insert(n.name);
  if (n.lhs) collect_symbols(*n.lhs, out);
  if (n.rhs) collect_symbols(*n.rhs, out);
}

inline std::set<std::string> symbols(const Ast& a) {
  std::set<std::string> out;
  collect_symbols(*a, out);
  return out;
}

/// Replaces every occurrence of symbol `name` by `replacement`.
inline Ast substitute(const Ast& a, const std::string& name, const Ast& replacement) {
  switch (a->kind) {
    case NodeKind::constant: return a;
    case NodeKind::symbol: return a->name == name ? replacement : a;
    case NodeKind::negate: return negate(substitute(a->lhs, name, replacement));
    case NodeKind::binary:
      return binary(a->op, substitute(a->lhs, name, replacement), substitute(a->rhs, name, replacement));
    case NodeKind::call: return call(a->fn, substitute(a->lhs, name, replacement));
  }
  return a;
}

// ---------------------------------------------------------------------------
// Parser: recursive descent, one function per precedence level.

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(tokenize(src)) {}

  Ast parse_all() {
    Ast e = parse_additive();
    if (peek().kind != TokenKind::end) fail({"operator", "end of input"});
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }
  bool peek_op(char c) const { return peek().kind == TokenKind::op && peek().lexeme[0] == c; }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    std::string msg = "syntax error at position " + std::to_string(t.position) + ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) msg += i + 1 == expected.size() ? " or " : ", ";
      msg += expected[i];
    }
    msg += " but found " + describe(t);
    throw ParseError(msg, t.position, std::move(expected));
  }

  Ast parse_additive() {
    Ast lhs = parse_multiplicative();
    while (peek_op('+') || peek_op('-')) {
      const auto op = static_cast<BinaryOp>(next().lexeme[0]);
      lhs = binary(op, lhs, parse_multiplicative());
    }
    return lhs;
  }

  Ast parse_multiplicative() {
    Ast lhs = parse_unary();
    while (peek_op('*') || peek_op('/')) {
      const auto op = static_cast<BinaryOp>(next().lexeme[0]);
      lhs = binary(op, lhs, parse_unary());
    }
    return lhs;
  }

  Ast parse_unary() {
    if (peek_op('-')) {
      next();
      return negate(parse_unary());
    }
    return parse_power();
  }

  // The exponent is parsed at unary level, which makes ^ right-associative
  // and lets "2^-x" through.
  Ast parse_power() {
    Ast base = parse_primary();
    if (peek_op('^')) {
      next();
      return binary(BinaryOp::pow, base, parse_unary());
    }
    return base;
  }

  Ast parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::number: {
        next();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(t.lexeme.data(), t.lexeme.data() + t.lexeme.size(), v);
        if (ec != std::errc() || !std::isfinite(v))
          throw ParseError("numeric literal out of range at position " + std::to_string(t.position),
                           t.position);
        return constant(v);
      }
      case TokenKind::identifier: {
        next();
        if (peek().kind != TokenKind::lparen) return symbol(t.lexeme);
        const auto fn = lookup_function(t.lexeme);
        if (!fn)
          throw ParseError("unknown function '" + t.lexeme + "' at position " + std::to_string(t.position) +
                               "; known functions: exp, sinh, cosh, tanh, log, sqrt, sinhc",
                           t.position, {"exp", "sinh", "cosh", "tanh", "log", "sqrt", "sinhc"});
        next();
        Ast arg = parse_additive();
        if (peek().kind != TokenKind::rparen) fail({"')'"});
        next();
        return call(*fn, arg);
      }
      case TokenKind::lparen: {
        next();
        Ast inner = parse_additive();
        if (peek().kind != TokenKind::rparen) fail({"')'"});
        next();
        return inner;
      }
      default: fail({"number", "identifier", "'('", "'-'"});
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Ast parse(std::string_view source) { return detail::Parser(source).parse_all(); }

// ---------------------------------------------------------------------------
// Evaluation

template <class S>
S apply(Function f, const S& x) {
  using std::cosh;
  using std::exp;
  using std::log;
  using std::sinh;
  using std::sqrt;
  using std::tanh;
  switch (f) {
    case Function::exp: return exp(x);
    case Function::sinh: return sinh(x);
    case Function::cosh: return cosh(x);
    case Function::tanh: return tanh(x);
    case Function::log:
      if (value_of(x) < 0.0) throw DomainError("log of negative argument " + std::to_string(value_of(x)));
      return log(x);
    case Function::sqrt:
      if (value_of(x) < 0.0) throw DomainError("sqrt of negative argument " + std::to_string(value_of(x)));
      return sqrt(x);
    case Function::sinhc: return sinhc(x);
  }
  return x;
}

template <class S>
S power(const S& base, const S& exponent) {
  const double b = value_of(base);
  const double e = value_of(exponent);
  if (b < 0.0 && (!is_constant(exponent) || std::trunc(e) != e))
    throw DomainError("non-integral power of negative base " + std::to_string(b));
  return pow(base, exponent);
}

/// An expression flattened to postfix form, with symbols resolved to slots.
/// Build once, evaluate many times with any scalar kind.
class Program {
 public:
  Program() = default;

  /// Symbols are resolved against `slots`; any symbol missing from it is reported.
  Program(const Ast& ast, std::vector<std::string> slots) : slots_(std::move(slots)) {
    std::vector<std::string> missing;
    for (const auto& s : symbols(ast))
      if (std::find(slots_.begin(), slots_.end(), s) == slots_.end()) missing.push_back(s);
    if (!missing.empty()) throw UnboundSymbolError(std::move(missing));
    std::size_t depth = 0;
    emit(*ast, depth);
  }

  /// Slots are the sorted set of symbols appearing in the expression.
  explicit Program(const Ast& ast) : Program(ast, sorted_symbols(ast)) {}

  const std::vector<std::string>& slots() const noexcept { return slots_; }

  bool uses(std::string_view name) const {
    for (const auto& in : code_)
      if (in.op == Op::slot && slots_[in.index] == name) return true;
    return false;
  }

  template <class S>
  S operator()(std::span<const S> values) const {
    std::vector<S> stack;
    stack.reserve(max_depth_);
    for (const auto& in : code_) {
      switch (in.op) {
        case Op::constant: stack.emplace_back(in.value); break;
        case Op::slot: stack.push_back(values[in.index]); break;
        case Op::negate: stack.back() = -stack.back(); break;
        case Op::call: stack.back() = apply(in.fn, stack.back()); break;
        default: {
          S rhs = stack.back();
          stack.pop_back();
          S& lhs = stack.back();
          switch (in.op) {
            case Op::add: lhs = lhs + rhs; break;
            case Op::sub: lhs = lhs - rhs; break;
            case Op::mul: lhs = lhs * rhs; break;
            case Op::div: lhs = lhs / rhs; break;
            case Op::pow: lhs = power(lhs, rhs); break;
            default: break;
          }
        }
      }
    }
    return stack.back();
  }

 private:
  enum class Op { constant, slot, negate, call, add, sub, mul, div, pow };
  struct Instr {
    Op op;
    double value = 0.0;
    std::size_t index = 0;
    Function fn{};
  };

  static std::vector<std::string> sorted_symbols(const Ast& ast) {
    auto s = symbols(ast);
    return {s.begin(), s.end()};
  }

  void emit(const Node& n, std::size_t& depth) {
    switch (n.kind) {
      case NodeKind::constant:
        code_.push_back({Op::constant, n.value});
        bump(depth);
        return;
      case NodeKind::symbol: {
        const auto it = std::find(slots_.begin(), slots_.end(), n.name);
        code_.push_back({Op::slot, 0.0, static_cast<std::size_t>(it - slots_.begin())});
        bump(depth);
        return;
      }
      case NodeKind::negate:
        emit(*n.lhs, depth);
        code_.push_back({Op::negate});
        return;
      case NodeKind::call:
        emit(*n.lhs, depth);
        code_.push_back({Op::call, 0.0, 0, n.fn});
        return;
      case NodeKind::binary: {
        emit(*n.lhs, depth);
        emit(*n.rhs, depth);
        Op op = Op::add;
        switch (n.op) {
          case BinaryOp::add: op = Op::add; break;
          case BinaryOp::sub: op = Op::sub; break;
          case BinaryOp::mul: op = Op::mul; break;
          case BinaryOp::div: op = Op::div; break;
          case BinaryOp::pow: op = Op::pow; break;
        }
        code_.push_back({op});
        --depth;
        return;
      }
    }
  }

  void bump(std::size_t& depth) { max_depth_ = std::max(max_depth_, ++depth); }

  std::vector<std::string> slots_;
  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
};

/// One-shot evaluation with named bindings.
template <class S>
S eval(const Ast& ast, const std::map<std::string, S>& bindings) {
  std::vector<std::string> names;
  std::vector<S> values;
  for (const auto& [k, v] : bindings) {
    names.push_back(k);
    values.push_back(v);
  }
  const Program prog(ast, std::move(names));
  return prog(std::span<const S>(values));
}

}  // namespace sl2c::expr
