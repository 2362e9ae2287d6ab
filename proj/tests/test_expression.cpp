#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "varker/expression.hpp"

using namespace varker;

namespace {

SymbolTable table() {
  SymbolTable s;
  s.variable("x", 2).variable("y", 2).variable("t", 1).parameter("f", {1.0, 2.0}).parameter("c", {0.5});
  return s;
}

double eval(const std::string& src, std::vector<double> in) {
  return Expression::parse(src, table()).evaluate(in);
}

// Random well-typed, everywhere-defined expressions. Scalars and 2-vectors over x, y, t.
class ExprGen {
 public:
  explicit ExprGen(std::uint64_t seed) : gen_(seed) {}

  std::string scalar(int depth) {
    if (depth == 0) {
      switch (gen_.integer(0, 3)) {
        case 0: return "t";
        case 1: return number();
        case 2: return "c";
        default: return "norm(" + vector(0) + ")";
      }
    }
    switch (gen_.integer(0, 10)) {
      case 0: return "(" + scalar(depth - 1) + " + " + scalar(depth - 1) + ")";
      case 1: return "(" + scalar(depth - 1) + " - " + scalar(depth - 1) + ")";
      case 2: return scalar(depth - 1) + "*" + scalar(depth - 1);
      case 3: return scalar(depth - 1) + "/(1.5 + (" + scalar(depth - 1) + ")^2)";
      case 4: return "sin(" + scalar(depth - 1) + ")";
      case 5: return "cos(" + scalar(depth - 1) + ")";
      case 6: return "exp(0.3*" + scalar(depth - 1) + ")";
      case 7: return "log(1 + (" + scalar(depth - 1) + ")^2)";
      case 8: return "dot(" + vector(depth - 1) + ", " + vector(depth - 1) + ")";
      case 9: return "tanh(" + scalar(depth - 1) + ")";
      default: return "-" + scalar(depth - 1);
    }
  }

  std::string vector(int depth) {
    if (depth == 0) {
      switch (gen_.integer(0, 3)) {
        case 0: return "x";
        case 1: return "y";
        case 2: return "f";
        default: return "[" + number() + ", t]";
      }
    }
    switch (gen_.integer(0, 3)) {
      case 0: return "(" + vector(depth - 1) + " + " + vector(depth - 1) + ")";
      case 1: return "(" + vector(depth - 1) + " - " + vector(depth - 1) + ")";
      case 2: return scalar(depth - 1) + "*" + vector(depth - 1);
      default: return "[" + scalar(depth - 1) + ", " + scalar(depth - 1) + "]";
    }
  }

  std::string number() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", gen_.uniform(-2, 2));
    std::string s = buf;
    return s[0] == '-' ? "(" + s + ")" : s;
  }

  oracle::Gen& rng() { return gen_; }

 private:
  oracle::Gen gen_;
};

}  // namespace

TEST_CASE("evaluation examples") {
  CHECK(eval("dot(x, x)", {3, 4, 0, 0, 0}) == 25.0);
  CHECK(eval("norm(x)", {3, 4, 0, 0, 0}) == 5.0);
  CHECK(eval("1 + 2*3^2", {0, 0, 0, 0, 0}) == 19.0);
  CHECK(eval("2^3^2", {0, 0, 0, 0, 0}) == 512.0);
  CHECK(eval("-2^2", {0, 0, 0, 0, 0}) == -4.0);
  CHECK(eval("dot(f, x) + c*t", {1, 1, 0, 0, 4}) == 5.0);
  CHECK(eval("norm(x - y)^2 / 2", {1, 2, 4, 6, 0}) == doctest::Approx(12.5));
  CHECK(eval("norm(t*[1, 2])", {0, 0, 0, 0, 2}) == doctest::Approx(std::sqrt(20.0)));
  CHECK(eval("abs(-t) + sqrt(4) + exp(0) + log(1) + tan(0)", {0, 0, 0, 0, 3}) == doctest::Approx(6.0));
  CHECK(eval("1e-3 * 2.5E2", {0, 0, 0, 0, 0}) == doctest::Approx(0.25));
}

TEST_CASE("typing errors") {
  const SymbolTable s = table();
  CHECK_THROWS_AS(Expression::parse("sin(x)", s), ParseError);
  CHECK_THROWS_AS(Expression::parse("x * y", s), ParseError);
  CHECK_THROWS_AS(Expression::parse("x + t", s), ParseError);
  CHECK_THROWS_AS(Expression::parse("t / x", s), ParseError);
  CHECK_THROWS_AS(Expression::parse("x ^ 2", s), ParseError);
  CHECK_THROWS_AS(Expression::parse("dot(x, [1, 2, 3])", s), ParseError);
  CHECK_THROWS_AS(Expression::parse("norm(x, y)", s), ParseError);
  CHECK_THROWS_AS(Expression::parse("foo(t)", s), ParseError);
  CHECK_THROWS_AS(Expression::parse("z + 1", s), ParseError);
  CHECK_THROWS_AS(Expression::parse("[x, t]", s), ParseError);
  // a vector-valued expression parses but cannot be evaluated as a scalar
  const Expression v = Expression::parse("2*x", s);
  CHECK_FALSE(v.is_scalar());
  CHECK_THROWS(v.evaluate(std::vector<double>{1, 1, 1, 1, 1}));
}

TEST_CASE("syntax errors carry the column") {
  const SymbolTable s = table();
  for (auto [src, col] : {std::pair<const char*, size_t>{"t +", 3}, {"(t", 2}, {"t $ 2", 2}, {"t t", 2}, {"", 0},
                          {"dot(x,)", 6}, {"1e999", 0}}) {
    INFO(src);
    try {
      Expression::parse(src, s);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.position() == col);
      CHECK(std::string(e.what()).find("column " + std::to_string(col + 1)) != std::string::npos);
    }
  }
}

TEST_CASE("domain errors") {
  const Expression lg = Expression::parse("log(t)", table());
  CHECK_THROWS_AS(lg.evaluate(std::vector<double>{0, 0, 0, 0, 0}), DomainError);
  CHECK_THROWS_AS(lg.evaluate(std::vector<double>{0, 0, 0, 0, -1}), DomainError);
  const Expression sq = Expression::parse("sqrt(t)", table());
  CHECK_THROWS_AS(sq.evaluate(std::vector<double>{0, 0, 0, 0, -1}), DomainError);
  const Expression dv = Expression::parse("1/t", table());
  CHECK_THROWS_AS(dv.evaluate(std::vector<double>{0, 0, 0, 0, 0}), DomainError);
  const Expression pw = Expression::parse("t^0.5", table());
  CHECK_THROWS_AS(pw.evaluate(std::vector<double>{0, 0, 0, 0, -2}), DomainError);
  CHECK(Expression::parse("t^3", table()).evaluate(std::vector<double>{0, 0, 0, 0, -2}) == -8.0);
}

TEST_CASE("zero subgradient selection at kinks") {
  const Expression e = Expression::parse("norm(x)^1.5 + abs(t) + norm(y)", table());
  std::vector<double> in{0, 0, 0, 0, 0};
  std::vector<double> g(5);
  CHECK(e.evaluate_with_gradient(in, 0, g) == 0.0);
  for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("references and widths") {
  const Expression e = Expression::parse("dot(f, y) + t", table());
  CHECK(e.references("y"));
  CHECK(e.references("t"));
  CHECK_FALSE(e.references("x"));
  CHECK(e.input_width() == 5);
}

TEST_CASE("property: print round trip") {
  ExprGen g(41);
  const SymbolTable s = table();
  for (int trial = 0; trial < 100; ++trial) {
    const std::string src = g.scalar(g.rng().integer(1, 4));
    INFO(src);
    const Expression e = Expression::parse(src, s);
    const Expression r = Expression::parse(e.to_string(), s);
    CHECK(r.to_string() == e.to_string());
    for (int k = 0; k < 5; ++k) {
      const std::vector<double> in = g.rng().vector(5, -2, 2);
      const double a = e.evaluate(in), b = r.evaluate(in);
      CHECK(std::abs(a - b) <= 1e-12 * (1 + std::abs(a)));
    }
  }
}

TEST_CASE("property: forward-mode gradient matches central differences") {
  ExprGen g(43);
  const SymbolTable s = table();
  for (int trial = 0; trial < 200; ++trial) {
    const std::string src = g.scalar(g.rng().integer(1, 4));
    INFO(src);
    const Expression e = Expression::parse(src, s);
    std::vector<double> in = g.rng().vector(5, -2, 2);
    std::vector<double> grad(5);
    e.evaluate_with_gradient(in, 0, grad);
    for (int k = 0; k < 5; ++k) {
      const double h = 1e-5;
      std::vector<double> lo = in, hi = in;
      lo[static_cast<size_t>(k)] -= h;
      hi[static_cast<size_t>(k)] += h;
      const double fd = (e.evaluate(hi) - e.evaluate(lo)) / (2 * h);
      CHECK(std::abs(fd - grad[static_cast<size_t>(k)]) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("partial gradient window") {
  const Expression e = Expression::parse("dot(x, y) + t^2", table());
  std::vector<double> in{1, 2, 3, 4, 5};
  std::vector<double> g(2);
  CHECK(e.evaluate_with_gradient(in, 2, g) == 36.0);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == 2.0);
}
