#include "qpot/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace qpot {
namespace {

AstPtr node(ExprAst::Number n) { return std::make_shared<const ExprAst>(ExprAst{n}); }
AstPtr node(ExprAst::Var n) { return std::make_shared<const ExprAst>(ExprAst{n}); }
AstPtr node(ExprAst::Builtin n) { return std::make_shared<const ExprAst>(ExprAst{n}); }
AstPtr node(ExprAst::Symbol n) { return std::make_shared<const ExprAst>(ExprAst{std::move(n)}); }
AstPtr node(ExprAst::Unary n) { return std::make_shared<const ExprAst>(ExprAst{std::move(n)}); }
AstPtr node(ExprAst::Binary n) { return std::make_shared<const ExprAst>(ExprAst{std::move(n)}); }

struct FunctionEntry {
  const char* name;
  UnaryOp op;
};
constexpr FunctionEntry kFunctions[] = {
    {"exp", UnaryOp::Exp}, {"log", UnaryOp::Log},   {"sin", UnaryOp::Sin},
    {"cos", UnaryOp::Cos}, {"sqrt", UnaryOp::Sqrt}, {"abs", UnaryOp::Abs},
};

const FunctionEntry* find_function(const std::string& name) {
  for (const auto& f : kFunctions)
    if (name == f.name) return &f;
  return nullptr;
}

bool builtin_const(const std::string& name, BuiltinConst* out) {
  if (name == "hbar") *out = BuiltinConst::Hbar;
  else if (name == "m") *out = BuiltinConst::Mass;
  else if (name == "pi") *out = BuiltinConst::Pi;
  else if (name == "e") *out = BuiltinConst::Euler;
  else return false;
  return true;
}

class Parser {
 public:
  Parser(std::string_view src, const std::set<std::string>& symbols)
      : src_(src), symbols_(symbols) {}

  AstPtr run() {
    if (src_.find_first_not_of(" \t\r\n") == std::string_view::npos)
      throw ParseError("empty expression", 0);
    AstPtr e = expr();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  AstPtr expr() {
    AstPtr lhs = term();
    for (;;) {
      skip_ws();
      if (accept('+')) lhs = node(ExprAst::Binary{BinaryOp::Add, lhs, term()});
      else if (accept('-')) lhs = node(ExprAst::Binary{BinaryOp::Sub, lhs, term()});
      else return lhs;
    }
  }

  AstPtr term() {
    AstPtr lhs = factor();
    for (;;) {
      skip_ws();
      if (accept('*')) lhs = node(ExprAst::Binary{BinaryOp::Mul, lhs, factor()});
      else if (accept('/')) lhs = node(ExprAst::Binary{BinaryOp::Div, lhs, factor()});
      else return lhs;
    }
  }

  AstPtr factor() {
    skip_ws();
    if (accept('-')) return node(ExprAst::Unary{UnaryOp::Neg, power()});
    return power();
  }

  AstPtr power() {
    AstPtr base = atom();
    skip_ws();
    if (accept('^')) return node(ExprAst::Binary{BinaryOp::Pow, base, factor()});
    return base;
  }

  AstPtr atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
    char c = src_[pos_];
    if (accept('(')) {
      AstPtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  AstPtr number() {
    const char* begin = src_.data() + pos_;
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin) throw ParseError("malformed number", pos_);
    if (!std::isfinite(value)) throw ParseError("numeric literal overflows", pos_);
    pos_ += static_cast<std::size_t>(end - begin);
    return node(ExprAst::Number{value});
  }

  AstPtr identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string name(src_.substr(start, pos_ - start));

    skip_ws();
    const FunctionEntry* fn = find_function(name);
    if (peek('(')) {
      if (!fn) throw ParseError("'" + name + "' is not a function", start);
      accept('(');
      AstPtr arg = expr();
      expect(')');
      return node(ExprAst::Unary{fn->op, arg});
    }
    if (fn) throw ParseError("function '" + name + "' needs an argument list", start);

    if (name == "x" || name == "t") return node(ExprAst::Var{name[0]});
    BuiltinConst bc;
    if (builtin_const(name, &bc)) return node(ExprAst::Builtin{bc});
    if (symbols_.count(name)) return node(ExprAst::Symbol{name});
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool peek(char c) const { return pos_ < src_.size() && src_[pos_] == c; }
  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }
  void expect(char c) {
    skip_ws();
    if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
  }

  std::string_view src_;
  const std::set<std::string>& symbols_;
  std::size_t pos_ = 0;
};

double apply_unary(UnaryOp op, double a) {
  switch (op) {
    case UnaryOp::Neg: return -a;
    case UnaryOp::Exp: {
      double r = std::exp(a);
      if (!std::isfinite(r)) throw EvalError("exp overflows");
      return r;
    }
    case UnaryOp::Log:
      if (!(a > 0.0)) throw EvalError("log of a non-positive value");
      return std::log(a);
    case UnaryOp::Sin: return std::sin(a);
    case UnaryOp::Cos: return std::cos(a);
    case UnaryOp::Sqrt:
      if (a < 0.0) throw EvalError("sqrt of a negative value");
      return std::sqrt(a);
    case UnaryOp::Abs: return std::fabs(a);
  }
  throw EvalError("unknown unary operator");
}

double apply_binary(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::Add: {
      double r = a + b;
      if (!std::isfinite(r)) throw EvalError("addition overflows");
      return r;
    }
    case BinaryOp::Sub: {
      double r = a - b;
      if (!std::isfinite(r)) throw EvalError("subtraction overflows");
      return r;
    }
    case BinaryOp::Mul: {
      double r = a * b;
      if (!std::isfinite(r)) throw EvalError("multiplication overflows");
      return r;
    }
    case BinaryOp::Div:
      if (b == 0.0) throw EvalError("division by zero");
      {
        double r = a / b;
        if (!std::isfinite(r)) throw EvalError("division overflows");
        return r;
      }
    case BinaryOp::Pow: {
      if (a < 0.0 && b != std::rint(b))
        throw EvalError("negative base with a non-integer exponent");
      if (a == 0.0 && b < 0.0) throw EvalError("zero raised to a negative power");
      double r = std::pow(a, b);
      if (!std::isfinite(r)) throw EvalError("power overflows");
      return r;
    }
  }
  throw EvalError("unknown binary operator");
}

double eval_node(const ExprAst& ast, double x, double t, const PhysParams& consts) {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprAst::Number>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, ExprAst::Var>) {
          return n.name == 'x' ? x : t;
        } else if constexpr (std::is_same_v<T, ExprAst::Builtin>) {
          switch (n.which) {
            case BuiltinConst::Hbar: return consts.hbar;
            case BuiltinConst::Mass: return consts.m;
            case BuiltinConst::Pi: return M_PI;
            case BuiltinConst::Euler: return M_E;
          }
          throw EvalError("unknown builtin constant");
        } else if constexpr (std::is_same_v<T, ExprAst::Symbol>) {
          throw EvalError("unbound identifier '" + n.name + "'");
        } else if constexpr (std::is_same_v<T, ExprAst::Unary>) {
          return apply_unary(n.op, eval_node(*n.arg, x, t, consts));
        } else {
          return apply_binary(n.op, eval_node(*n.lhs, x, t, consts),
                              eval_node(*n.rhs, x, t, consts));
        }
      },
      ast.node);
}

const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Log: return "log";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Abs: return "abs";
  }
  return "?";
}

char binary_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return '+';
    case BinaryOp::Sub: return '-';
    case BinaryOp::Mul: return '*';
    case BinaryOp::Div: return '/';
    case BinaryOp::Pow: return '^';
  }
  return '?';
}

void serialize_node(const ExprAst& ast, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprAst::Number>) {
          char buf[40];
          std::snprintf(buf, sizeof buf, "%.17g", n.value);
          // strtod round-trips %.17g, so parse(serialize()) is value-exact
          out += buf;
        } else if constexpr (std::is_same_v<T, ExprAst::Var>) {
          out += n.name;
        } else if constexpr (std::is_same_v<T, ExprAst::Builtin>) {
          switch (n.which) {
            case BuiltinConst::Hbar: out += "hbar"; break;
            case BuiltinConst::Mass: out += "m"; break;
            case BuiltinConst::Pi: out += "pi"; break;
            case BuiltinConst::Euler: out += "e"; break;
          }
        } else if constexpr (std::is_same_v<T, ExprAst::Symbol>) {
          out += n.name;
        } else if constexpr (std::is_same_v<T, ExprAst::Unary>) {
          if (n.op == UnaryOp::Neg) {
            out += "(-";
            serialize_node(*n.arg, out);
            out += ')';
          } else {
            out += unary_name(n.op);
            out += '(';
            serialize_node(*n.arg, out);
            out += ')';
          }
        } else {
          out += '(';
          serialize_node(*n.lhs, out);
          out += binary_symbol(n.op);
          serialize_node(*n.rhs, out);
          out += ')';
        }
      },
      ast.node);
}

void collect_symbols(const ExprAst& ast, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprAst::Symbol>) {
          out.insert(n.name);
        } else if constexpr (std::is_same_v<T, ExprAst::Unary>) {
          collect_symbols(*n.arg, out);
        } else if constexpr (std::is_same_v<T, ExprAst::Binary>) {
          collect_symbols(*n.lhs, out);
          collect_symbols(*n.rhs, out);
        }
      },
      ast.node);
}

AstPtr substitute(const AstPtr& ast, const std::map<std::string, double>& bindings) {
  return std::visit(
      [&](const auto& n) -> AstPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprAst::Symbol>) {
          auto it = bindings.find(n.name);
          if (it == bindings.end()) return ast;
          return node(ExprAst::Number{it->second});
        } else if constexpr (std::is_same_v<T, ExprAst::Unary>) {
          AstPtr arg = substitute(n.arg, bindings);
          if (arg == n.arg) return ast;
          return node(ExprAst::Unary{n.op, arg});
        } else if constexpr (std::is_same_v<T, ExprAst::Binary>) {
          AstPtr lhs = substitute(n.lhs, bindings);
          AstPtr rhs = substitute(n.rhs, bindings);
          if (lhs == n.lhs && rhs == n.rhs) return ast;
          return node(ExprAst::Binary{n.op, lhs, rhs});
        } else {
          return ast;
        }
      },
      ast->node);
}

}  // namespace

AstPtr parse(std::string_view source, const std::set<std::string>& symbols) {
  return Parser(source, symbols).run();
}

AstPtr parse(std::string_view source) {
  static const std::set<std::string> kNone;
  return parse(source, kNone);
}

double eval(const ExprAst& ast, double x, double t, const PhysParams& consts) {
  return eval_node(ast, x, t, consts);
}

Field eval_field(const ExprAst& ast, const SpaceTimeGrid& grid, const PhysParams& consts) {
  grid.validate();
  Field out(grid);
  for (int j = 0; j < grid.nt; ++j) {
    double tj = grid.t(j);
    for (int i = 0; i < grid.nx; ++i) {
      double xi = grid.x(i);
      try {
        out.at(j, i) = eval_node(ast, xi, tj, consts);
      } catch (const EvalError& e) {
        if (e.has_point) throw;
        throw EvalError(e.what(), xi, tj);
      }
    }
  }
  return out;
}

AstPtr bind_constants(const AstPtr& ast, const std::map<std::string, double>& bindings) {
  if (!ast) throw EvalError("bind_constants: null expression");
  AstPtr bound = substitute(ast, bindings);
  std::set<std::string> remaining;
  collect_symbols(*bound, remaining);
  if (!remaining.empty())
    throw EvalError("unbound identifier '" + *remaining.begin() + "'");
  return bound;
}

std::string serialize(const ExprAst& ast) {
  std::string out;
  serialize_node(ast, out);
  return out;
}

bool equal(const ExprAst& a, const ExprAst& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& na) -> bool {
        using T = std::decay_t<decltype(na)>;
        const auto& nb = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, ExprAst::Number>) {
          return na.value == nb.value;
        } else if constexpr (std::is_same_v<T, ExprAst::Var>) {
          return na.name == nb.name;
        } else if constexpr (std::is_same_v<T, ExprAst::Builtin>) {
          return na.which == nb.which;
        } else if constexpr (std::is_same_v<T, ExprAst::Symbol>) {
          return na.name == nb.name;
        } else if constexpr (std::is_same_v<T, ExprAst::Unary>) {
          return na.op == nb.op && equal(*na.arg, *nb.arg);
        } else {
          return na.op == nb.op && equal(*na.lhs, *nb.lhs) && equal(*na.rhs, *nb.rhs);
        }
      },
      a.node);
}

std::set<std::string> free_symbols(const ExprAst& ast) {
  std::set<std::string> out;
  collect_symbols(ast, out);
  return out;
}

AstPtr make_number(double value) { return node(ExprAst::Number{value}); }

}  // namespace qpot
