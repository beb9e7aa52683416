// Small arithmetic expression language for user-supplied scalar functions of
// (x, t). Grammar (also documented in the README):
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('-')? power
//   power  := atom ('^' factor)?          // '^' is right-associative
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//
// Unary minus binds tighter than '*' and applies to a whole power, so
// "-x^2" is -(x^2). Functions: exp, log, sin, cos, sqrt, abs. Built-in
// constants: hbar, m (from PhysParams), pi, e. Free identifiers are only
// accepted when listed at parse time and must be bound via bind_constants
// before evaluation. There is no implicit multiplication.

#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>

#include "qpot/grid.hpp"

namespace qpot {

enum class UnaryOp { Neg, Exp, Log, Sin, Cos, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class BuiltinConst { Hbar, Mass, Pi, Euler };

struct ExprAst;
using AstPtr = std::shared_ptr<const ExprAst>;

/// Immutable expression tree. Nodes are shared_ptr-linked so subtrees can be
/// shared freely across threads after construction.
struct ExprAst {
  struct Number {
    double value;
  };
  struct Var {
    char name;  // 'x' or 't'
  };
  struct Builtin {
    BuiltinConst which;
  };
  struct Symbol {
    std::string name;  // free identifier, must be bound before evaluation
  };
  struct Unary {
    UnaryOp op;
    AstPtr arg;
  };
  struct Binary {
    BinaryOp op;
    AstPtr lhs, rhs;
  };

  std::variant<Number, Var, Builtin, Symbol, Unary, Binary> node;
};

/// Parses source text. Identifiers other than x, t, the built-ins and the
/// function names are rejected unless listed in `symbols`.
AstPtr parse(std::string_view source, const std::set<std::string>& symbols);
AstPtr parse(std::string_view source);

/// Evaluates at a point. Throws EvalError on domain errors (log/sqrt of a
/// negative, zero divisor, negative base with fractional exponent), on
/// overflow to a non-finite value, and on unbound symbols.
double eval(const ExprAst& ast, double x, double t, const PhysParams& consts);

/// Samples eval at every grid node; all values finite or an EvalError with
/// the offending (x, t) attached.
Field eval_field(const ExprAst& ast, const SpaceTimeGrid& grid, const PhysParams& consts);

/// Substitutes numeric values for free symbols. The result is closed (only
/// x, t and built-ins remain); throws EvalError naming any symbol that would
/// remain unbound.
AstPtr bind_constants(const AstPtr& ast, const std::map<std::string, double>& bindings);

/// Fully parenthesized text form; parse(serialize(a)) is structurally equal
/// to a and evaluates bit-identically.
std::string serialize(const ExprAst& ast);

bool equal(const ExprAst& a, const ExprAst& b);
std::set<std::string> free_symbols(const ExprAst& ast);

/// Convenience nodes used by builders and tests.
AstPtr make_number(double value);

}  // namespace qpot
