#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ncps {

class ExpressionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A compiled arithmetic expression over a fixed list of named variables.
///
/// Grammar (whitespace-insensitive):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := '-' unary | power
///     power   := primary ('^' unary)?
///     primary := number | name | func '(' expr ')' | '(' expr ')' | '|' expr '|'
///     func    := sqrt | coth | abs
///
/// Constants `pi` and `e` are recognised. Compiled to a postfix program, so
/// evaluation is a single pass over a small value stack.
class Expression {
 public:
  Expression() = default;

  static Expression parse(std::string_view source, std::vector<std::string> variables);

  double operator()(std::span<const double> args) const;
  double operator()(double x) const { return (*this)(std::span<const double>(&x, 1)); }
  double operator()(double x, double y) const {
    const double args[2] = {x, y};
    return (*this)(std::span<const double>(args, 2));
  }

  const std::string& source() const { return source_; }
  const std::vector<std::string>& variables() const { return variables_; }
  bool empty() const { return program_.empty(); }

  enum class Op : unsigned char { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sqrt, Coth, Abs };
  struct Instr {
    Op op;
    double value = 0.0;  // Const
    int index = 0;       // Var
  };

 private:
  std::string source_;
  std::vector<std::string> variables_;
  std::vector<Instr> program_;
  int max_depth_ = 0;
};

}  // namespace ncps
