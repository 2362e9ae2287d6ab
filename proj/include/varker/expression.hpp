#pragma once

#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "varker/grid.hpp"

namespace varker {

/// Syntax or typing error; `position` is the 0-based column in the source string.
class ParseError : public InputError {
 public:
  ParseError(const std::string& message, size_t position)
      : InputError(message + " (at column " + std::to_string(position + 1) + ")"), position_(position) {}
  size_t position() const { return position_; }

 private:
  size_t position_;
};

/// Evaluation outside the domain of an elementary function (log of a non-positive value, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named inputs of an expression. Each variable occupies `width` consecutive slots of the input
/// vector in declaration order; width 1 is a scalar.
class SymbolTable {
 public:
  SymbolTable& variable(std::string name, int width);
  SymbolTable& parameter(std::string name, std::vector<double> value);

  struct Variable {
    std::string name;
    int offset = 0;
    int width = 1;
  };

  const Variable* find_variable(std::string_view name) const;
  const std::vector<double>* find_parameter(std::string_view name) const;
  int input_width() const { return input_width_; }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::map<std::string, std::vector<double>, std::less<>>& parameters() const { return parameters_; }

 private:
  std::vector<Variable> variables_;
  std::map<std::string, std::vector<double>, std::less<>> parameters_;
  int input_width_ = 0;
};

/// Parsed, type-checked expression.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('-' | '+') unary | power
///   power   := primary ('^' unary)?
///   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')' | '[' expr (',' expr)* ']'
///
/// Functions: norm, dot, sin, cos, tan, exp, log, sqrt, abs, tanh. Values are scalars or vectors;
/// vectors support +, -, scaling by a scalar, division by a scalar, norm and dot.
class Expression {
 public:
  static Expression parse(std::string_view source, const SymbolTable& symbols);

  const std::string& source() const { return source_; }
  int input_width() const { return input_width_; }
  bool is_scalar() const;
  /// True if any slot of the named variable is read.
  bool references(std::string_view variable) const;

  double evaluate(std::span<const double> inputs) const;
  /// Value plus d/d(inputs[k]) for k in [first, first + gradient.size()), one forward pass per
  /// seeded slot. Non-differentiable points (norm at 0) use the zero selection.
  double evaluate_with_gradient(std::span<const double> inputs, int first, std::span<double> gradient) const;

  /// Fully parenthesised form that re-parses to the same tree.
  std::string to_string() const;

  struct Node;

 private:
  std::string source_;
  std::shared_ptr<const std::vector<Node>> nodes_;
  int input_width_ = 0;
  int workspace_ = 0;
  std::map<std::string, int, std::less<>> variable_offsets_;
  std::map<std::string, int, std::less<>> variable_widths_;
};

}  // namespace varker
