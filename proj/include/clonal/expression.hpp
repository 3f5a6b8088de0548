#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace clonal {

/// Arithmetic expression in one variable `x`.
///
/// Grammar: numbers, `x`, `+ - * /`, unary minus, parentheses and `^` with a
/// nonnegative integer literal exponent. Enough for polynomial initial data
/// such as "1000 - 500*x" or "1000*x^2".
class Expression {
 public:
  // Throws ConfigError with the offending column on malformed input.
  static Expression parse(std::string_view text);

  double operator()(double x) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  Expression() = default;

  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace clonal
