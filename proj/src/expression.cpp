#include "ncps/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

namespace ncps {
namespace {

using Op = Expression::Op;
using Instr = Expression::Instr;

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

  std::vector<Instr> run() {
    expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return std::move(out_);
  }

 private:
  void expr() {
    term();
    for (;;) {
      if (accept('+')) {
        term();
        emit(Op::Add);
      } else if (accept('-')) {
        term();
        emit(Op::Sub);
      } else {
        return;
      }
    }
  }

  void term() {
    unary();
    for (;;) {
      if (accept('*')) {
        unary();
        emit(Op::Mul);
      } else if (accept('/')) {
        unary();
        emit(Op::Div);
      } else {
        return;
      }
    }
  }

  void unary() {
    if (accept('-')) {
      unary();
      emit(Op::Neg);
      return;
    }
    if (accept('+')) {
      unary();
      return;
    }
    power();
  }

  void power() {
    primary();
    if (accept('^')) {
      unary();
      emit(Op::Pow);
    }
  }

  void primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      number();
      return;
    }
    if (c == '(') {
      ++pos_;
      expr();
      expect(')');
      return;
    }
    if (c == '|') {
      ++pos_;
      expr();
      expect('|');
      emit(Op::Abs);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::string name = identifier();
      if (name == "sqrt" || name == "coth" || name == "abs") {
        expect('(');
        expr();
        expect(')');
        emit(name == "sqrt" ? Op::Sqrt : name == "coth" ? Op::Coth : Op::Abs);
        return;
      }
      for (std::size_t k = 0; k < vars_.size(); ++k) {
        if (vars_[k] == name) {
          out_.push_back({Op::Var, 0.0, static_cast<int>(k)});
          return;
        }
      }
      if (name == "pi") {
        out_.push_back({Op::Const, std::numbers::pi, 0});
        return;
      }
      if (name == "e") {
        out_.push_back({Op::Const, std::numbers::e, 0});
        return;
      }
      fail("unknown identifier '" + name + "'");
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  void number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      fail("malformed number '" + text + "'");
    }
    if (used != text.size()) fail("malformed number '" + text + "'");
    out_.push_back({Op::Const, v, 0});
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  void emit(Op op) { out_.push_back({op, 0.0, 0}); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ExpressionError("expression '" + std::string(src_) + "': " + msg + " at offset " +
                          std::to_string(pos_));
  }

  std::string_view src_;
  const std::vector<std::string>& vars_;
  std::vector<Instr> out_;
  std::size_t pos_ = 0;
};

int stack_depth(const std::vector<Instr>& program) {
  int depth = 0, max_depth = 0;
  for (const auto& ins : program) {
    switch (ins.op) {
      case Op::Const:
      case Op::Var:
        ++depth;
        break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
      case Op::Pow:
        --depth;
        break;
      default:
        break;
    }
    max_depth = std::max(max_depth, depth);
  }
  return max_depth;
}

}  // namespace

Expression Expression::parse(std::string_view source, std::vector<std::string> variables) {
  Expression e;
  e.source_ = std::string(source);
  e.variables_ = std::move(variables);
  e.program_ = Parser(e.source_, e.variables_).run();
  e.max_depth_ = stack_depth(e.program_);
  return e;
}

double Expression::operator()(std::span<const double> args) const {
  if (program_.empty()) throw ExpressionError("evaluating an empty expression");
  if (args.size() < variables_.size())
    throw ExpressionError("expression '" + source_ + "' needs " +
                          std::to_string(variables_.size()) + " arguments");
  // Small fixed stack covers every config-sized expression; fall back to the heap otherwise.
  double local[32];
  std::vector<double> heap;
  double* stack = local;
  if (max_depth_ > 32) {
    heap.resize(static_cast<std::size_t>(max_depth_));
    stack = heap.data();
  }
  int top = 0;
  for (const auto& ins : program_) {
    switch (ins.op) {
      case Op::Const:
        stack[top++] = ins.value;
        break;
      case Op::Var:
        stack[top++] = args[static_cast<std::size_t>(ins.index)];
        break;
      case Op::Add:
        --top;
        stack[top - 1] += stack[top];
        break;
      case Op::Sub:
        --top;
        stack[top - 1] -= stack[top];
        break;
      case Op::Mul:
        --top;
        stack[top - 1] *= stack[top];
        break;
      case Op::Div:
        --top;
        stack[top - 1] /= stack[top];
        break;
      case Op::Pow:
        --top;
        stack[top - 1] = std::pow(stack[top - 1], stack[top]);
        break;
      case Op::Neg:
        stack[top - 1] = -stack[top - 1];
        break;
      case Op::Sqrt:
        stack[top - 1] = std::sqrt(stack[top - 1]);
        break;
      case Op::Coth:
        stack[top - 1] = 1.0 / std::tanh(stack[top - 1]);
        break;
      case Op::Abs:
        stack[top - 1] = std::abs(stack[top - 1]);
        break;
    }
  }
  return stack[0];
}

}  // namespace ncps
