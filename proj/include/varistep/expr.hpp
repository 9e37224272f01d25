#pragma once

// Scalar expression language for potentials and Hamiltonians.
//
// Grammar (whitespace is insignificant):
//
//   expr     := term (('+' | '-') term)*
//   term     := unary (('*' | '/') unary)*
//   unary    := '-' unary | power
//   power    := primary ('^' exponent)*
//   exponent := ['-'] INTEGER | '(' ['-'] INTEGER ')'
//   primary  := NUMBER | VARIABLE | FUNCTION '(' expr ')' | '(' expr ')'
//
// FUNCTION is one of sin, cos, exp, log, sqrt. Binary operators of equal
// precedence associate to the left. Exponents are integers; fractional powers
// are written with exp/log.
//
// Canonical printed form: '+' and '-' are surrounded by single spaces, all
// other operators are printed tight, numbers use the shortest decimal that
// round-trips, and only the parentheses required by precedence are kept, plus
// parentheses around a negated right operand and a negative exponent, e.g.
//
//   p^2/2 + (1 - cos(q))*(1 - 0.1*sin(0.02*t))

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace varistep::dsl {

/// Ordered set of declared variable names. The position of a name is its
/// slot in the evaluation binding.
class VariableSet {
 public:
  VariableSet() = default;
  explicit VariableSet(std::vector<std::string> names);

  /// q, p, t for one degree of freedom; q_1..q_n, p_1..p_n, t otherwise.
  static VariableSet canonical(int dimension);

  std::optional<int> slot(std::string_view name) const;
  const std::string& name(int slot) const { return names_.at(slot); }
  int size() const noexcept { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
};

enum class NodeKind { Number, Variable, Negate, Add, Subtract, Multiply, Divide, Power, Call };
enum class Function { Sin, Cos, Exp, Log, Sqrt };

std::string_view function_name(Function f);

struct Node;

/// Immutable expression tree with value semantics (nodes are shared).
class Expr {
 public:
  static Expr number(double value);
  static Expr variable(std::string name, int slot);
  static Expr negate(Expr operand);
  static Expr binary(NodeKind kind, Expr lhs, Expr rhs);
  static Expr power(Expr base, int exponent);
  static Expr call(Function f, Expr argument);

  NodeKind kind() const;
  double number_value() const;
  const std::string& variable_name() const;
  int variable_slot() const;
  int exponent() const;
  Function function() const;
  const Expr& lhs() const;  // also the operand of Negate, Power and Call
  const Expr& rhs() const;

  /// Numeric value if the tree is a literal or a negated literal.
  std::optional<double> constant() const;
  bool is_constant(double value) const;
  bool depends_on(int slot) const;

  /// Structural equality (numbers compared exactly).
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Node {
  NodeKind kind = NodeKind::Number;
  double value = 0.0;
  std::string name;
  int slot = -1;
  int exponent = 0;
  Function function = Function::Sin;
  std::optional<Expr> lhs;
  std::optional<Expr> rhs;
};

/// Throws ParseError (with byte offset and expected-token set) on syntax
/// errors and NameError for identifiers outside `vars` and the function table.
Expr parse_expression(std::string_view source, const VariableSet& vars);

/// Canonical text; parse(print(e)) reproduces e structurally.
std::string print(const Expr& e);

/// Constant folding and 0/1 identities; collects numeric factors of products.
Expr simplify(const Expr& e);

/// Exact derivative with respect to variable slot `slot`, `times` in 1..3,
/// simplified after each differentiation.
Expr differentiate(const Expr& e, int slot, int times = 1);

/// Replace every occurrence of a variable slot with `replacement`.
Expr substitute(const Expr& e, int slot, const Expr& replacement);

/// Fast evaluation with one value per declared slot. Throws EvalError on
/// domain errors (log of a non-positive value, sqrt of a negative value,
/// division by zero).
double evaluate(const Expr& e, std::span<const double> slots);

/// Evaluation with named bindings. Throws NameError for unbound variables.
double evaluate(const Expr& e, const std::map<std::string, double, std::less<>>& binding);

}  // namespace varistep::dsl
