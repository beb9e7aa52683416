#include <cmath>
#include <cstring>
#include <random>
#include <thread>

#include "doctest.h"
#include "qpot/expr.hpp"

using namespace qpot;

namespace {

const PhysParams kUnit{1.0, 1.0};

double ev(const std::string& src, double x = 0.0, double t = 0.0,
          const PhysParams& c = kUnit) {
  return eval(*parse(src), x, t, c);
}

// Random closed ASTs built from safe wrappers (log/sqrt arguments are pushed
// positive, divisors away from zero) so most evaluations succeed.
AstPtr random_ast(std::mt19937_64& rng, int depth) {
  auto num = [&](double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return make_number(d(rng));
  };
  std::uniform_int_distribution<int> pick_leaf(0, 3), pick_op(0, 8);
  if (depth == 0) {
    switch (pick_leaf(rng)) {
      case 0: return num(-3.0, 3.0);
      case 1: return parse("x");
      case 2: return parse("t");
      default: return parse("pi");
    }
  }
  AstPtr a = random_ast(rng, depth - 1);
  AstPtr b = random_ast(rng, depth - 1);
  auto wrap = [&](const char* tmpl, const AstPtr& arg) {
    // build via structural composition: serialize+parse keeps this simple
    return parse(std::string(tmpl) + "(" + serialize(*arg) + ")");
  };
  switch (pick_op(rng)) {
    case 0: return parse("(" + serialize(*a) + ")+(" + serialize(*b) + ")");
    case 1: return parse("(" + serialize(*a) + ")-(" + serialize(*b) + ")");
    case 2: return parse("(" + serialize(*a) + ")*(" + serialize(*b) + ")");
    case 3: return parse("(" + serialize(*a) + ")/(abs(" + serialize(*b) + ")+0.5)");
    case 4: {
      std::uniform_int_distribution<int> e(0, 3);
      return parse("(" + serialize(*a) + ")^" + std::to_string(e(rng)));
    }
    case 5: return wrap("sin", a);
    case 6: return wrap("cos", a);
    case 7: return parse("log(abs(" + serialize(*a) + ")+0.5)");
    default: return parse("sqrt(abs(" + serialize(*a) + "))");
  }
}

}  // namespace

TEST_SUITE("expr") {

TEST_CASE("expr: basic arithmetic and built-in constants") {
  CHECK(ev("2*x + exp(-t)", 1.0, 0.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(ev("hbar^2/(2*m)") == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ev("0", 3.0, -2.0) == 0.0);
  CHECK(ev("pi") == doctest::Approx(M_PI));
  CHECK(ev("e") == doctest::Approx(M_E));
  PhysParams c(2.0, 3.0);
  CHECK(eval(*parse("hbar*m"), 0, 0, c) == doctest::Approx(6.0));
}

TEST_CASE("expr: precedence and associativity") {
  CHECK(ev("2+3*4") == 14.0);
  CHECK(ev("-x^2", 2.0, 0.0) == -4.0);  // unary minus applies to the power
  CHECK(ev("2^3^2") == 512.0);          // '^' is right-associative
  CHECK(ev("2*-3") == -6.0);            // unary minus binds tighter than '*'
  CHECK(ev("2^-1") == 0.5);
  CHECK(ev("(2+3)*4") == 20.0);
  CHECK(ev("6/3/2") == 1.0);  // left-associative '/'
}

TEST_CASE("expr: unknown identifiers are parse errors unless declared") {
  CHECK_THROWS_AS(parse("cos(k*x)"), ParseError);
  try {
    parse("cos(k*x)");
  } catch (const ParseError& e) {
    CHECK(e.offset == 4);
  }
  CHECK_NOTHROW(parse("cos(k*x)", {"k"}));
}

TEST_CASE("expr: syntax errors carry byte offsets") {
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("   "), ParseError);
  CHECK_THROWS_AS(parse("2x"), ParseError);  // no implicit multiplication
  CHECK_THROWS_AS(parse("1+"), ParseError);
  CHECK_THROWS_AS(parse("(1+2"), ParseError);
  CHECK_THROWS_AS(parse("sin 3"), ParseError);   // function without arguments
  CHECK_THROWS_AS(parse("pi(3)"), ParseError);   // constant used as function
  try {
    parse("1 + @");
  } catch (const ParseError& e) {
    CHECK(e.offset == 4);
  }
}

TEST_CASE("expr: evaluation domain errors") {
  AstPtr f = bind_constants(parse("exp(c*t)", {"c"}), {{"c", 0.5}});
  CHECK(eval(*f, 0.0, 2.0, kUnit) == doctest::Approx(2.718281828).epsilon(1e-9));

  CHECK_THROWS_AS(ev("x*t/(x*t)", 0.0, 1.0), EvalError);  // 0/0 is loud
  CHECK_THROWS_AS(ev("1/0"), EvalError);
  CHECK_THROWS_AS(ev("log(-1)"), EvalError);
  CHECK_THROWS_AS(ev("log(0)"), EvalError);
  CHECK_THROWS_AS(ev("sqrt(-2)"), EvalError);
  CHECK_THROWS_AS(ev("(-8)^0.5"), EvalError);  // fractional power of negative base
  CHECK(ev("(-2)^2") == 4.0);
  CHECK_THROWS_AS(ev("0^-1"), EvalError);
  CHECK_THROWS_AS(ev("exp(1e9)"), EvalError);  // overflow is an error, not inf
  CHECK_THROWS_AS(ev("1e308*10"), EvalError);
}

TEST_CASE("expr: eval_field samples the grid and reports coordinates") {
  SpaceTimeGrid g(0.0, 1.0, 3, 0.0, 1.0, 2);
  Field zero = eval_field(*parse("0"), g, kUnit);
  for (double v : zero.v) CHECK(v == 0.0);

  Field xs = eval_field(*parse("x"), g, kUnit);
  CHECK(xs.at(0, 0) == 0.0);
  CHECK(xs.at(0, 1) == 0.5);
  CHECK(xs.at(1, 2) == 1.0);

  PhysParams c(1.0, 0.5);
  Field k = eval_field(*parse("(hbar^2)*1/(2*m)"), g, c);
  for (double v : k.v) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));

  // the whole t=0 slice is singular for this expression; the error carries
  // the first offending node
  try {
    eval_field(*parse("x*t/(x*t)"), g, kUnit);
    CHECK(false);
  } catch (const EvalError& e) {
    CHECK(e.has_point);
    CHECK(e.x == 0.0);
    CHECK(e.t == 0.0);
  }
}

TEST_CASE("expr: bind_constants closes the tree") {
  AstPtr cx = parse("c*x", {"c"});
  AstPtr bound = bind_constants(cx, {{"c", 2.0}});
  CHECK(equal(*bound, *parse("2*x")));

  AstPtr ab = bind_constants(parse("a*x+b", {"a", "b"}), {{"a", 0.0}, {"b", 1.0}});
  for (double x : {-1.0, 0.0, 2.5}) CHECK(eval(*ab, x, 0.0, kUnit) == 1.0);

  CHECK_THROWS_AS(bind_constants(parse("c*x", {"c"}), {}), EvalError);
  CHECK_THROWS_AS(eval(*cx, 1.0, 1.0, kUnit), EvalError);  // unbound symbol at eval
}

TEST_CASE("expr: serialize/parse round trip evaluates bit-identically") {
  std::mt19937_64 rng(20240817);
  std::uniform_real_distribution<double> coord(-2.0, 3.0);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    AstPtr ast = random_ast(rng, 3);
    AstPtr again = parse(serialize(*ast));
    CHECK(equal(*ast, *again));
    for (int pt = 0; pt < 100; ++pt) {
      double x = coord(rng), t = coord(rng);
      double a = 0.0, b = 0.0;
      bool a_threw = false, b_threw = false;
      try {
        a = eval(*ast, x, t, kUnit);
      } catch (const EvalError&) {
        a_threw = true;
      }
      try {
        b = eval(*again, x, t, kUnit);
      } catch (const EvalError&) {
        b_threw = true;
      }
      REQUIRE(a_threw == b_threw);
      if (!a_threw) {
        REQUIRE(std::memcmp(&a, &b, sizeof a) == 0);  // bit-identical
        ++checked;
      }
    }
  }
  CHECK(checked > 3000);  // the generator keeps most points in-domain
}

TEST_CASE("expr: eval is pure and thread-safe") {
  AstPtr ast = parse("sin(3*x)*exp(-t)+x^3/(abs(t)+1)");
  double ref = eval(*ast, 0.7, 1.3, kUnit);
  CHECK(eval(*ast, 0.7, 1.3, kUnit) == ref);

  SpaceTimeGrid g(-1.0, 1.0, 101, 0.0, 1.0, 11);
  Field base = eval_field(*ast, g, kUnit);
  std::vector<Field> results(4, Field(g));
  std::vector<std::thread> threads;
  for (int w = 0; w < 4; ++w)
    threads.emplace_back([&, w] { results[w] = eval_field(*ast, g, kUnit); });
  for (auto& th : threads) th.join();
  for (const auto& r : results) CHECK(r.v == base.v);
}

}  // TEST_SUITE
