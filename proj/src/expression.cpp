#include "varker/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace varker {

SymbolTable& SymbolTable::variable(std::string name, int width) {
  if (width < 1) throw InputError("symbol '" + name + "': width must be >= 1");
  if (find_variable(name) || find_parameter(name)) throw InputError("symbol '" + name + "' declared twice");
  variables_.push_back({std::move(name), input_width_, width});
  input_width_ += width;
  return *this;
}

SymbolTable& SymbolTable::parameter(std::string name, std::vector<double> value) {
  if (value.empty()) throw InputError("parameter '" + name + "' has no value");
  for (double v : value) {
    if (!std::isfinite(v)) throw InputError("parameter '" + name + "' is not finite");
  }
  if (find_variable(name) || find_parameter(name)) throw InputError("symbol '" + name + "' declared twice");
  parameters_.emplace(std::move(name), std::move(value));
  return *this;
}

const SymbolTable::Variable* SymbolTable::find_variable(std::string_view name) const {
  for (const auto& v : variables_) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

const std::vector<double>* SymbolTable::find_parameter(std::string_view name) const {
  auto it = parameters_.find(name);
  return it == parameters_.end() ? nullptr : &it->second;
}

enum class Op { number, variable, parameter, neg, add, sub, mul, div, pow, call, vector };
enum class Fn { norm, dot, sin, cos, tan, exp, log, sqrt, abs, tanh };

struct Expression::Node {
  Op op = Op::number;
  int width = 1;
  int out = 0;  // workspace offset
  std::vector<int> args;
  double number = 0.0;
  int input = 0;  // input offset for variables
  std::vector<double> value;  // parameter value
  std::string name;
  Fn fn = Fn::norm;
};

namespace {

using Node = Expression::Node;

struct Dual {
  double v = 0.0;
  double d = 0.0;
};

Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
Dual operator-(Dual a) { return {-a.v, -a.d}; }
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }

double value_of(double x) { return x; }
double value_of(Dual x) { return x.v; }
double slope_of(double) { return 0.0; }
double slope_of(Dual x) { return x.d; }

[[noreturn]] void domain(const std::string& what) { throw DomainError(what); }

double power_const(double a, double e) {
  const double r = std::pow(a, e);
  if (std::isnan(r)) domain("power: negative base with non-integer exponent");
  return r;
}
Dual power_const(Dual a, double e) {
  const double r = power_const(a.v, e);
  if (a.d == 0.0 || e == 0.0) return {r, 0.0};
  if (a.v == 0.0) return {r, e == 1.0 ? a.d : 0.0};
  return {r, e * std::pow(a.v, e - 1.0) * a.d};
}

double power(double a, double b) { return power_const(a, b); }
Dual power(Dual a, Dual b) {
  if (b.d == 0.0) return power_const(a, b.v);
  if (a.v < 0.0) domain("power: negative base with variable exponent");
  if (a.v == 0.0) {
    if (b.v <= 0.0) domain("power: zero base with non-positive exponent");
    return {0.0, 0.0};
  }
  const double r = std::pow(a.v, b.v);
  return {r, r * (b.d * std::log(a.v) + b.v * a.d / a.v)};
}

double apply_fn(Fn f, double x) {
  switch (f) {
    case Fn::sin: return std::sin(x);
    case Fn::cos: return std::cos(x);
    case Fn::tan: return std::tan(x);
    case Fn::exp: return std::exp(x);
    case Fn::log:
      if (!(x > 0.0)) domain("log of a non-positive value");
      return std::log(x);
    case Fn::sqrt:
      if (x < 0.0) domain("sqrt of a negative value");
      return std::sqrt(x);
    case Fn::abs: return std::abs(x);
    case Fn::tanh: return std::tanh(x);
    default: return 0.0;
  }
}

Dual apply_fn(Fn f, Dual x) {
  const double v = apply_fn(f, x.v);
  double s = 0.0;
  switch (f) {
    case Fn::sin: s = std::cos(x.v); break;
    case Fn::cos: s = -std::sin(x.v); break;
    case Fn::tan: s = 1.0 + v * v; break;
    case Fn::exp: s = v; break;
    case Fn::log: s = 1.0 / x.v; break;
    case Fn::sqrt: s = v > 0.0 ? 0.5 / v : 0.0; break;
    case Fn::abs: s = x.v > 0.0 ? 1.0 : (x.v < 0.0 ? -1.0 : 0.0); break;
    case Fn::tanh: s = 1.0 - v * v; break;
    default: break;
  }
  return {v, x.d == 0.0 ? 0.0 : s * x.d};
}

template <class T>
T norm_of(const T* x, int width) {
  double sq = 0.0;
  for (int i = 0; i < width; ++i) sq += value_of(x[i]) * value_of(x[i]);
  const double r = std::sqrt(sq);
  if constexpr (std::is_same_v<T, double>) {
    return r;
  } else {
    if (r == 0.0) return Dual{0.0, 0.0};
    double d = 0.0;
    for (int i = 0; i < width; ++i) d += x[i].v * x[i].d;
    return Dual{r, d / r};
  }
}

template <class T>
void run(const std::vector<Node>& nodes, std::span<const T> in, std::vector<T>& ws) {
  for (const Node& n : nodes) {
    T* out = ws.data() + n.out;
    auto arg = [&](int k) { return ws.data() + nodes[static_cast<size_t>(n.args[static_cast<size_t>(k)])].out; };
    auto arg_width = [&](int k) { return nodes[static_cast<size_t>(n.args[static_cast<size_t>(k)])].width; };
    switch (n.op) {
      case Op::number: out[0] = T(n.number); break;
      case Op::variable:
        for (int i = 0; i < n.width; ++i) out[i] = in[static_cast<size_t>(n.input + i)];
        break;
      case Op::parameter:
        for (int i = 0; i < n.width; ++i) out[i] = T(n.value[static_cast<size_t>(i)]);
        break;
      case Op::neg:
        for (int i = 0; i < n.width; ++i) out[i] = -arg(0)[i];
        break;
      case Op::add:
        for (int i = 0; i < n.width; ++i) out[i] = arg(0)[i] + arg(1)[i];
        break;
      case Op::sub:
        for (int i = 0; i < n.width; ++i) out[i] = arg(0)[i] - arg(1)[i];
        break;
      case Op::mul: {
        const T* x = arg(0);
        const T* y = arg(1);
        const bool xs = arg_width(0) == 1;
        const bool ys = arg_width(1) == 1;
        for (int i = 0; i < n.width; ++i) out[i] = x[xs ? 0 : i] * y[ys ? 0 : i];
        break;
      }
      case Op::div: {
        const T* x = arg(0);
        const T y = arg(1)[0];
        if (value_of(y) == 0.0) domain("division by zero");
        for (int i = 0; i < n.width; ++i) out[i] = x[i] / y;
        break;
      }
      case Op::pow: out[0] = power(arg(0)[0], arg(1)[0]); break;
      case Op::vector:
        for (int i = 0; i < n.width; ++i) out[i] = arg(i)[0];
        break;
      case Op::call:
        if (n.fn == Fn::norm) {
          out[0] = norm_of(arg(0), arg_width(0));
        } else if (n.fn == Fn::dot) {
          T s = T(0.0);
          for (int i = 0; i < arg_width(0); ++i) s = s + arg(0)[i] * arg(1)[i];
          out[0] = s;
        } else {
          out[0] = apply_fn(n.fn, arg(0)[0]);
        }
        break;
    }
  }
}

struct FunctionInfo {
  const char* name;
  Fn fn;
  int arity;
};
constexpr FunctionInfo kFunctions[] = {
    {"norm", Fn::norm, 1}, {"dot", Fn::dot, 2}, {"sin", Fn::sin, 1},   {"cos", Fn::cos, 1},  {"tan", Fn::tan, 1},
    {"exp", Fn::exp, 1},   {"log", Fn::log, 1}, {"sqrt", Fn::sqrt, 1}, {"abs", Fn::abs, 1}, {"tanh", Fn::tanh, 1},
};

class Parser {
 public:
  Parser(std::string_view src, const SymbolTable& symbols) : src_(src), symbols_(symbols) {}

  std::vector<Node> parse() {
    expr();
    skip_space();
    if (pos_ < src_.size()) fail(std::string("unexpected '") + src_[pos_] + "'");
    return std::move(nodes_);
  }

 private:
  std::string_view src_;
  const SymbolTable& symbols_;
  size_t pos_ = 0;
  std::vector<Node> nodes_;

  [[noreturn]] void fail(const std::string& msg, size_t at) const { throw ParseError(msg, at); }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  int width(int id) const { return nodes_[static_cast<size_t>(id)].width; }

  int push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int binary(Op op, int lhs, int rhs, size_t at) {
    Node n;
    n.op = op;
    n.args = {lhs, rhs};
    const int wl = width(lhs);
    const int wr = width(rhs);
    switch (op) {
      case Op::add:
      case Op::sub:
        if (wl != wr) fail("type error: operands of '" + std::string(op == Op::add ? "+" : "-") + "' have widths " +
                               std::to_string(wl) + " and " + std::to_string(wr), at);
        n.width = wl;
        break;
      case Op::mul:
        if (wl != 1 && wr != 1) fail("type error: product of two vectors (use dot)", at);
        n.width = std::max(wl, wr);
        break;
      case Op::div:
        if (wr != 1) fail("type error: division by a vector", at);
        n.width = wl;
        break;
      case Op::pow:
        if (wl != 1 || wr != 1) fail("type error: '^' needs scalar operands (use norm)", at);
        break;
      default:
        break;
    }
    return push(std::move(n));
  }

  int expr() {
    int lhs = term();
    for (;;) {
      skip_space();
      const size_t at = pos_;
      if (accept('+')) {
        lhs = binary(Op::add, lhs, term(), at);
      } else if (accept('-')) {
        lhs = binary(Op::sub, lhs, term(), at);
      } else {
        return lhs;
      }
    }
  }

  int term() {
    int lhs = unary();
    for (;;) {
      skip_space();
      const size_t at = pos_;
      if (accept('*')) {
        lhs = binary(Op::mul, lhs, unary(), at);
      } else if (accept('/')) {
        lhs = binary(Op::div, lhs, unary(), at);
      } else {
        return lhs;
      }
    }
  }

  int unary() {
    if (accept('-')) {
      const int a = unary();
      Node n;
      n.op = Op::neg;
      n.args = {a};
      n.width = width(a);
      return push(std::move(n));
    }
    if (accept('+')) return unary();
    return power_expr();
  }

  int power_expr() {
    const int base = primary();
    skip_space();
    const size_t at = pos_;
    if (accept('^')) return binary(Op::pow, base, unary(), at);
    return base;
  }

  int number() {
    const size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      size_t k = pos_ + 1;
      if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
      if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
        pos_ = k;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    const std::string lexeme(src_.substr(start, pos_ - start));
    if (lexeme == ".") fail("malformed number", start);
    const double v = std::strtod(lexeme.c_str(), nullptr);
    if (!std::isfinite(v)) fail("number out of range", start);
    Node n;
    n.op = Op::number;
    n.number = v;
    return push(std::move(n));
  }

  std::vector<int> arguments(char close) {
    std::vector<int> out{expr()};
    while (accept(',')) out.push_back(expr());
    expect(close);
    return out;
  }

  int call(const std::string& name, size_t at) {
    const FunctionInfo* info = nullptr;
    for (const auto& f : kFunctions) {
      if (name == f.name) info = &f;
    }
    if (!info) fail("unknown function '" + name + "'", at);
    std::vector<int> args = arguments(')');
    if (static_cast<int>(args.size()) != info->arity) {
      fail(name + " takes " + std::to_string(info->arity) + " argument(s), got " + std::to_string(args.size()), at);
    }
    if (info->fn == Fn::dot && width(args[0]) != width(args[1])) {
      fail("type error: dot of vectors with widths " + std::to_string(width(args[0])) + " and " +
               std::to_string(width(args[1])), at);
    }
    if (info->fn != Fn::norm && info->fn != Fn::dot && width(args[0]) != 1) {
      fail("type error: " + name + " of a vector", at);
    }
    Node n;
    n.op = Op::call;
    n.fn = info->fn;
    n.name = name;
    n.args = std::move(args);
    return push(std::move(n));
  }

  int primary() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    const size_t at = pos_;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (accept('(')) {
      const int inner = expr();
      expect(')');
      return inner;
    }
    if (accept('[')) {
      std::vector<int> items = arguments(']');
      for (int id : items) {
        if (width(id) != 1) fail("type error: vector literal entries must be scalars", at);
      }
      Node n;
      n.op = Op::vector;
      n.width = static_cast<int>(items.size());
      n.args = std::move(items);
      return push(std::move(n));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      const std::string name(src_.substr(at, pos_ - at));
      if (accept('(')) return call(name, at);
      Node n;
      n.name = name;
      if (const auto* v = symbols_.find_variable(name)) {
        n.op = Op::variable;
        n.input = v->offset;
        n.width = v->width;
      } else if (const auto* p = symbols_.find_parameter(name)) {
        n.op = Op::parameter;
        n.value = *p;
        n.width = static_cast<int>(p->size());
      } else {
        fail("unknown name '" + name + "'", at);
      }
      return push(std::move(n));
    }
    fail(std::string("unexpected '") + c + "'");
  }
};

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string print(const std::vector<Node>& nodes, int id) {
  const Node& n = nodes[static_cast<size_t>(id)];
  auto sub = [&](int k) { return print(nodes, n.args[static_cast<size_t>(k)]); };
  switch (n.op) {
    case Op::number: return format_number(n.number);
    case Op::variable:
    case Op::parameter: return n.name;
    case Op::neg: return "(-" + sub(0) + ")";
    case Op::add: return "(" + sub(0) + " + " + sub(1) + ")";
    case Op::sub: return "(" + sub(0) + " - " + sub(1) + ")";
    case Op::mul: return "(" + sub(0) + " * " + sub(1) + ")";
    case Op::div: return "(" + sub(0) + " / " + sub(1) + ")";
    case Op::pow: return "(" + sub(0) + " ^ " + sub(1) + ")";
    case Op::call:
    case Op::vector: {
      std::string s = n.op == Op::call ? n.name + "(" : "[";
      for (size_t k = 0; k < n.args.size(); ++k) {
        if (k) s += ", ";
        s += sub(static_cast<int>(k));
      }
      return s + (n.op == Op::call ? ")" : "]");
    }
  }
  return {};
}

template <class T>
T finish(const std::vector<Node>& nodes, const std::vector<T>& ws) {
  const T r = ws[static_cast<size_t>(nodes.back().out)];
  if (!std::isfinite(value_of(r)) || !std::isfinite(slope_of(r))) domain("expression evaluated to a non-finite value");
  return r;
}

}  // namespace

Expression Expression::parse(std::string_view source, const SymbolTable& symbols) {
  std::vector<Node> nodes = Parser(source, symbols).parse();
  Expression e;
  e.source_ = std::string(source);
  e.input_width_ = symbols.input_width();
  int offset = 0;
  for (Node& n : nodes) {
    n.out = offset;
    offset += n.width;
    if (n.op == Op::variable) {
      e.variable_offsets_[n.name] = n.input;
      e.variable_widths_[n.name] = n.width;
    }
  }
  e.workspace_ = offset;
  e.nodes_ = std::make_shared<const std::vector<Node>>(std::move(nodes));
  return e;
}

bool Expression::is_scalar() const { return nodes_->back().width == 1; }

bool Expression::references(std::string_view variable) const { return variable_offsets_.count(variable) > 0; }

double Expression::evaluate(std::span<const double> inputs) const {
  if (static_cast<int>(inputs.size()) != input_width_) throw InputError("expression: wrong number of inputs");
  if (!is_scalar()) throw InputError("expression '" + source_ + "' is not scalar-valued");
  std::vector<double> ws(static_cast<size_t>(workspace_));
  run<double>(*nodes_, inputs, ws);
  return finish(*nodes_, ws);
}

double Expression::evaluate_with_gradient(std::span<const double> inputs, int first,
                                          std::span<double> gradient) const {
  const double value = evaluate(inputs);
  const int count = static_cast<int>(gradient.size());
  if (first < 0 || first + count > input_width_) throw InputError("expression: gradient range out of bounds");
  std::vector<Dual> in(inputs.size());
  for (size_t i = 0; i < inputs.size(); ++i) in[i] = {inputs[i], 0.0};
  std::vector<Dual> ws(static_cast<size_t>(workspace_));
  for (int k = 0; k < count; ++k) {
    const int slot = first + k;
    bool used = false;
    for (const auto& [name, off] : variable_offsets_) {
      if (slot >= off && slot < off + variable_widths_.at(name)) used = true;
    }
    if (!used) {
      gradient[static_cast<size_t>(k)] = 0.0;
      continue;
    }
    in[static_cast<size_t>(slot)].d = 1.0;
    run<Dual>(*nodes_, std::span<const Dual>(in), ws);
    in[static_cast<size_t>(slot)].d = 0.0;
    gradient[static_cast<size_t>(k)] = finish(*nodes_, ws).d;
  }
  return value;
}

std::string Expression::to_string() const { return print(*nodes_, static_cast<int>(nodes_->size()) - 1); }

}  // namespace varker
