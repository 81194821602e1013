#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "stolz/error.hpp"
#include "stolz/sequence.hpp"

namespace stolz {

/// Node of a parsed arithmetic expression over the index variable `j`.
struct ExprNode {
  enum class Kind { Number, Index, Param, Negate, Add, Sub, Mul, Div, Pow, Call };

  Kind kind = Kind::Number;
  double number = 0.0;             // Number
  std::string name;                // Param / Call
  std::vector<ExprNode> args;      // operands, left to right

  bool operator==(const ExprNode&) const = default;
};

/// Immutable expression tree plus the set of named parameters it uses.
class ExprTree {
 public:
  ExprTree(ExprNode root, std::set<std::string> parameters)
      : root_(std::make_shared<const ExprNode>(std::move(root))),
        parameters_(std::move(parameters)) {}

  const ExprNode& root() const noexcept { return *root_; }
  const std::set<std::string>& parameters() const noexcept { return parameters_; }

  friend bool operator==(const ExprTree& a, const ExprTree& b) {
    return *a.root_ == *b.root_ && a.parameters_ == b.parameters_;
  }

 private:
  std::shared_ptr<const ExprNode> root_;
  std::set<std::string> parameters_;
};

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(s.front())) return false;
  for (char c : s) {
    if (!alpha(c) && !digit(c)) return false;
  }
  return true;
}

namespace detail {

struct BuiltinFunction {
  std::string_view name;
  std::size_t min_args;
  std::size_t max_args;
};

inline constexpr std::array<BuiltinFunction, 6> kBuiltins{{
    {"ln", 1, 1},
    {"exp", 1, 1},
    {"sqrt", 1, 1},
    {"abs", 1, 1},
    {"min", 2, static_cast<std::size_t>(-1)},
    {"max", 2, static_cast<std::size_t>(-1)},
}};

inline const BuiltinFunction* find_builtin(std::string_view name) {
  for (const auto& f : kBuiltins) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

inline bool is_index_name(std::string_view name) {
  return name == "j" || name == "n";
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  ExprTree run() {
    skip_space();
    ExprNode root = parse_expr();
    skip_space();
    if (pos_ != src_.size()) {
      fail("unexpected character '" + std::string(1, src_[pos_]) + "'",
           {"+", "-", "*", "/", "^", "end of input"});
    }
    return {std::move(root), std::move(params_)};
  }

 private:
  [[noreturn]] void fail(const std::string& msg,
                         std::vector<std::string> expected) const {
    std::string what = msg + " at offset " + std::to_string(pos_);
    if (!expected.empty()) {
      what += "; expected one of:";
      for (const auto& e : expected) what += " '" + e + "'";
    }
    throw ParseError(what, pos_, std::move(expected));
  }

  void skip_space() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
            src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool peek(char c) {
    skip_space();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  static ExprNode binary(ExprNode::Kind kind, ExprNode lhs, ExprNode rhs) {
    ExprNode node;
    node.kind = kind;
    node.args.push_back(std::move(lhs));
    node.args.push_back(std::move(rhs));
    return node;
  }

  // expr := term (("+"|"-") term)*
  ExprNode parse_expr() {
    ExprNode lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(ExprNode::Kind::Add, std::move(lhs), parse_term());
      } else if (accept('-')) {
        lhs = binary(ExprNode::Kind::Sub, std::move(lhs), parse_term());
      } else {
        return lhs;
      }
    }
  }

  // term := unary (("*"|"/") unary)*
  ExprNode parse_term() {
    ExprNode lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary(ExprNode::Kind::Mul, std::move(lhs), parse_unary());
      } else if (accept('/')) {
        lhs = binary(ExprNode::Kind::Div, std::move(lhs), parse_unary());
      } else {
        return lhs;
      }
    }
  }

  // unary := "-" unary | power
  ExprNode parse_unary() {
    if (accept('-')) {
      ExprNode node;
      node.kind = ExprNode::Kind::Negate;
      node.args.push_back(parse_unary());
      return node;
    }
    return parse_power();
  }

  // power := atom ("^" unary)?
  ExprNode parse_power() {
    ExprNode base = parse_atom();
    if (accept('^')) {
      return binary(ExprNode::Kind::Pow, std::move(base), parse_unary());
    }
    return base;
  }

  // atom := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"
  ExprNode parse_atom() {
    skip_space();
    if (pos_ >= src_.size()) {
      fail("unexpected end of input", {"number", "identifier", "(", "-"});
    }
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      ExprNode inner = parse_expr();
      if (!accept(')')) fail("unbalanced parenthesis", {")"});
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (is_identifier(std::string_view(&c, 1))) return parse_identifier();
    fail("unexpected character '" + std::string(1, c) + "'",
         {"number", "identifier", "(", "-"});
  }

  ExprNode parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t count = 0;
      while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') {
        ++pos_;
        ++count;
      }
      return count;
    };
    std::size_t mantissa_digits = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa_digits += digits();
    }
    if (mantissa_digits == 0) fail("malformed number", {"digit"});
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail("malformed exponent", {"digit"});
    }
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc{} || ptr != src_.data() + pos_ || !std::isfinite(value)) {
      pos_ = start;
      fail("numeric literal out of range", {});
    }
    ExprNode node;
    node.kind = ExprNode::Kind::Number;
    node.number = value;
    return node;
  }

  ExprNode parse_identifier() {
    const std::size_t start = pos_++;
    auto ident_char = [](char c) {
      return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
             (c >= '0' && c <= '9') || c == '_';
    };
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    const BuiltinFunction* builtin = find_builtin(name);

    if (peek('(')) {
      if (builtin == nullptr) {
        pos_ = start;
        fail("unknown function '" + name + "'", {});
      }
      ++pos_;
      ExprNode call;
      call.kind = ExprNode::Kind::Call;
      call.name = name;
      call.args.push_back(parse_expr());
      while (accept(',')) call.args.push_back(parse_expr());
      if (!accept(')')) fail("unterminated argument list", {",", ")"});
      if (call.args.size() < builtin->min_args ||
          call.args.size() > builtin->max_args) {
        pos_ = start;
        fail("wrong number of arguments to '" + name + "'", {});
      }
      return call;
    }
    if (builtin != nullptr) {
      fail("function '" + name + "' must be called", {"("});
    }

    ExprNode node;
    if (is_index_name(name)) {
      node.kind = ExprNode::Kind::Index;
    } else {
      node.kind = ExprNode::Kind::Param;
      node.name = name;
      params_.insert(name);
    }
    return node;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::set<std::string> params_;
};

inline int precedence(const ExprNode& node) {
  switch (node.kind) {
    case ExprNode::Kind::Number:
      // Negative literals only arise from substitution and print like negation.
      return std::signbit(node.number) ? 3 : 5;
    case ExprNode::Kind::Add:
    case ExprNode::Kind::Sub:
      return 1;
    case ExprNode::Kind::Mul:
    case ExprNode::Kind::Div:
      return 2;
    case ExprNode::Kind::Negate:
      return 3;
    case ExprNode::Kind::Pow:
      return 4;
    default:
      return 5;
  }
}

inline std::string format_number(double x) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

inline void print_node(const ExprNode& node, std::string& out);

inline void print_child(const ExprNode& child, bool parens, std::string& out) {
  if (parens) out += '(';
  print_node(child, out);
  if (parens) out += ')';
}

inline void print_node(const ExprNode& node, std::string& out) {
  using K = ExprNode::Kind;
  const int prec = precedence(node);
  switch (node.kind) {
    case K::Number:
      out += format_number(node.number);
      return;
    case K::Index:
      out += 'j';
      return;
    case K::Param:
      out += node.name;
      return;
    case K::Negate:
      out += '-';
      print_child(node.args[0], precedence(node.args[0]) < 3, out);
      return;
    case K::Pow:
      // The base is an atom; the exponent is a unary.
      print_child(node.args[0], precedence(node.args[0]) < 5, out);
      out += '^';
      print_child(node.args[1], precedence(node.args[1]) < 3, out);
      return;
    case K::Call:
      out += node.name;
      out += '(';
      for (std::size_t i = 0; i < node.args.size(); ++i) {
        if (i > 0) out += ", ";
        print_node(node.args[i], out);
      }
      out += ')';
      return;
    default: {
      const char* op = node.kind == K::Add   ? " + "
                       : node.kind == K::Sub ? " - "
                       : node.kind == K::Mul ? "*"
                                             : "/";
      print_child(node.args[0], precedence(node.args[0]) < prec, out);
      out += op;
      print_child(node.args[1], precedence(node.args[1]) <= prec, out);
      return;
    }
  }
}

}  // namespace detail

/// Parses an expression. Precedence, tightest first: `^` (right-assoc),
/// unary minus, `* /`, `+ -`. `n` is accepted as an alias of `j`.
inline ExprTree parse(std::string_view source) {
  return detail::Parser(source).run();
}

/// Prints with the minimum parentheses needed to re-parse to the same tree.
inline std::string print(const ExprTree& tree) {
  std::string out;
  detail::print_node(tree.root(), out);
  return out;
}

/// Named parameter values for expression evaluation.
class ParamBindings {
 public:
  ParamBindings() = default;
  ParamBindings(std::initializer_list<std::pair<const std::string, double>> init) {
    for (const auto& [name, value] : init) bind(name, value);
  }

  void bind(const std::string& name, double value) {
    if (!is_identifier(name)) {
      throw InvalidArgument("parameter name '" + name + "' is not an identifier");
    }
    if (detail::is_index_name(name) || detail::find_builtin(name) != nullptr) {
      throw InvalidArgument("parameter name '" + name + "' is reserved");
    }
    if (!values_.emplace(name, value).second) {
      throw InvalidArgument("parameter '" + name + "' bound twice");
    }
  }

  const double* find(const std::string& name) const {
    const auto it = values_.find(name);
    return it == values_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, double>& values() const noexcept { return values_; }

 private:
  std::map<std::string, double> values_;
};

namespace detail {

inline double real_power(double base, double exponent) {
  if (base < 0.0 && exponent != std::trunc(exponent)) {
    throw EvaluationError(EvaluationError::Kind::Domain,
                          "non-integer power of a negative base");
  }
  if (base == 0.0 && exponent < 0.0) {
    throw EvaluationError(EvaluationError::Kind::DivisionByZero,
                          "zero raised to a negative power");
  }
  return std::pow(base, exponent);
}

inline double call_builtin(const std::string& name, const std::vector<double>& x) {
  using EK = EvaluationError::Kind;
  if (name == "ln") {
    if (!(x[0] > 0.0)) throw EvaluationError(EK::Domain, "ln of a non-positive value");
    return std::log(x[0]);
  }
  if (name == "exp") return std::exp(x[0]);
  if (name == "sqrt") {
    if (x[0] < 0.0) throw EvaluationError(EK::Domain, "sqrt of a negative value");
    return std::sqrt(x[0]);
  }
  if (name == "abs") return std::fabs(x[0]);
  double r = x[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    r = name == "min" ? std::fmin(r, x[i]) : std::fmax(r, x[i]);
  }
  return r;
}

inline double eval_node(const ExprNode& node, double j, const ParamBindings& params) {
  using K = ExprNode::Kind;
  switch (node.kind) {
    case K::Number:
      return node.number;
    case K::Index:
      return j;
    case K::Param: {
      const double* v = params.find(node.name);
      if (v == nullptr) {
        throw EvaluationError(EvaluationError::Kind::UnboundParameter,
                              "unbound parameter '" + node.name + "'");
      }
      return *v;
    }
    case K::Negate:
      return -eval_node(node.args[0], j, params);
    case K::Add:
      return eval_node(node.args[0], j, params) + eval_node(node.args[1], j, params);
    case K::Sub:
      return eval_node(node.args[0], j, params) - eval_node(node.args[1], j, params);
    case K::Mul:
      return eval_node(node.args[0], j, params) * eval_node(node.args[1], j, params);
    case K::Div: {
      const double num = eval_node(node.args[0], j, params);
      const double den = eval_node(node.args[1], j, params);
      if (den == 0.0) {
        throw EvaluationError(EvaluationError::Kind::DivisionByZero, "division by zero");
      }
      return num / den;
    }
    case K::Pow:
      return real_power(eval_node(node.args[0], j, params),
                        eval_node(node.args[1], j, params));
    case K::Call: {
      std::vector<double> x;
      x.reserve(node.args.size());
      for (const auto& a : node.args) x.push_back(eval_node(a, j, params));
      return call_builtin(node.name, x);
    }
  }
  return 0.0;
}

inline ExprNode substitute(const ExprNode& node, const ParamBindings& params) {
  if (node.kind == ExprNode::Kind::Param) {
    ExprNode lit;
    lit.kind = ExprNode::Kind::Number;
    lit.number = *params.find(node.name);
    return lit;
  }
  ExprNode copy = node;
  for (auto& a : copy.args) a = substitute(a, params);
  return copy;
}

}  // namespace detail

inline double evaluate(const ExprTree& tree, Index j, const ParamBindings& params) {
  return detail::eval_node(tree.root(), static_cast<double>(j), params);
}

inline void require_bound(const ExprTree& tree, const ParamBindings& params) {
  for (const auto& name : tree.parameters()) {
    if (params.find(name) == nullptr) {
      throw EvaluationError(EvaluationError::Kind::UnboundParameter,
                            "unbound parameter '" + name + "'");
    }
  }
}

/// Binds parameters now and returns a pure Sequence j -> tree(j).
inline Sequence to_sequence(const ExprTree& tree, const ParamBindings& params) {
  require_bound(tree, params);
  auto bound = std::make_shared<const ExprNode>(detail::substitute(tree.root(), params));
  const ParamBindings none;
  return {[bound, none](Index j) {
            return detail::eval_node(*bound, static_cast<double>(j), none);
          },
          print(tree)};
}

}  // namespace stolz
