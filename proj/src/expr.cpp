#include <charconv>
#include <cmath>
#include <stdexcept>

#include "varistep/error.hpp"
#include "varistep/expr.hpp"

namespace varistep::dsl {

VariableSet::VariableSet(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (names_[i] == names_[j]) throw InvalidInput("duplicate variable '" + names_[i] + "'");
    }
  }
}

VariableSet VariableSet::canonical(int dimension) {
  if (dimension < 1) throw InvalidInput("dimension must be positive");
  if (dimension == 1) return VariableSet({"q", "p", "t"});
  std::vector<std::string> names;
  for (int i = 1; i <= dimension; ++i) names.push_back("q_" + std::to_string(i));
  for (int i = 1; i <= dimension; ++i) names.push_back("p_" + std::to_string(i));
  names.emplace_back("t");
  return VariableSet(std::move(names));
}

std::optional<int> VariableSet::slot(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::string_view function_name(Function f) {
  switch (f) {
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sqrt: return "sqrt";
  }
  return "?";
}

Expr Expr::number(double value) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Number;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(std::string name, int slot) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Variable;
  n->name = std::move(name);
  n->slot = slot;
  return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Negate;
  n->lhs = std::move(operand);
  return Expr(std::move(n));
}

Expr Expr::binary(NodeKind kind, Expr lhs, Expr rhs) {
  if (kind != NodeKind::Add && kind != NodeKind::Subtract && kind != NodeKind::Multiply &&
      kind != NodeKind::Divide) {
    throw std::logic_error("Expr::binary with non-binary kind");
  }
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return Expr(std::move(n));
}

Expr Expr::power(Expr base, int exponent) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Power;
  n->lhs = std::move(base);
  n->exponent = exponent;
  return Expr(std::move(n));
}

Expr Expr::call(Function f, Expr argument) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Call;
  n->function = f;
  n->lhs = std::move(argument);
  return Expr(std::move(n));
}

NodeKind Expr::kind() const { return node_->kind; }
double Expr::number_value() const { return node_->value; }
const std::string& Expr::variable_name() const { return node_->name; }
int Expr::variable_slot() const { return node_->slot; }
int Expr::exponent() const { return node_->exponent; }
Function Expr::function() const { return node_->function; }
const Expr& Expr::lhs() const { return *node_->lhs; }
const Expr& Expr::rhs() const { return *node_->rhs; }

std::optional<double> Expr::constant() const {
  if (kind() == NodeKind::Number) return number_value();
  if (kind() == NodeKind::Negate && lhs().kind() == NodeKind::Number) return -lhs().number_value();
  return std::nullopt;
}

bool Expr::is_constant(double value) const {
  const auto c = constant();
  return c && *c == value;
}

bool Expr::depends_on(int slot) const {
  switch (kind()) {
    case NodeKind::Number: return false;
    case NodeKind::Variable: return variable_slot() == slot;
    case NodeKind::Negate:
    case NodeKind::Power:
    case NodeKind::Call: return lhs().depends_on(slot);
    default: return lhs().depends_on(slot) || rhs().depends_on(slot);
  }
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case NodeKind::Number: return a.number_value() == b.number_value();
    case NodeKind::Variable: return a.variable_name() == b.variable_name();
    case NodeKind::Negate: return a.lhs() == b.lhs();
    case NodeKind::Power: return a.exponent() == b.exponent() && a.lhs() == b.lhs();
    case NodeKind::Call: return a.function() == b.function() && a.lhs() == b.lhs();
    default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

namespace {

// Binding strength used by the printer. Atoms bind tightest.
int precedence(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Add:
    case NodeKind::Subtract: return 1;
    case NodeKind::Multiply:
    case NodeKind::Divide: return 2;
    case NodeKind::Negate: return 3;
    case NodeKind::Power: return 4;
    case NodeKind::Number: return e.number_value() < 0 ? 3 : 5;
    default: return 5;
  }
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void print_into(const Expr& e, std::string& out);

void print_child(const Expr& child, bool parens, std::string& out) {
  if (parens) out += '(';
  print_into(child, out);
  if (parens) out += ')';
}

void print_into(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case NodeKind::Number:
      out += format_number(e.number_value());
      return;
    case NodeKind::Variable:
      out += e.variable_name();
      return;
    case NodeKind::Negate:
      out += '-';
      print_child(e.lhs(), precedence(e.lhs()) < 4, out);
      return;
    case NodeKind::Power:
      print_child(e.lhs(), precedence(e.lhs()) < 5, out);
      out += '^';
      if (e.exponent() < 0) {
        out += '(' + std::to_string(e.exponent()) + ')';
      } else {
        out += std::to_string(e.exponent());
      }
      return;
    case NodeKind::Call:
      out += function_name(e.function());
      out += '(';
      print_into(e.lhs(), out);
      out += ')';
      return;
    default: {
      const int p = precedence(e);
      print_child(e.lhs(), precedence(e.lhs()) < p, out);
      switch (e.kind()) {
        case NodeKind::Add: out += " + "; break;
        case NodeKind::Subtract: out += " - "; break;
        case NodeKind::Multiply: out += '*'; break;
        default: out += '/'; break;
      }
      const int rp = precedence(e.rhs());
      print_child(e.rhs(), rp <= p || rp == 3, out);
      return;
    }
  }
}

double eval_node(const Expr& e, std::span<const double> slots) {
  switch (e.kind()) {
    case NodeKind::Number: return e.number_value();
    case NodeKind::Variable: return slots[static_cast<std::size_t>(e.variable_slot())];
    case NodeKind::Negate: return -eval_node(e.lhs(), slots);
    case NodeKind::Add: return eval_node(e.lhs(), slots) + eval_node(e.rhs(), slots);
    case NodeKind::Subtract: return eval_node(e.lhs(), slots) - eval_node(e.rhs(), slots);
    case NodeKind::Multiply: return eval_node(e.lhs(), slots) * eval_node(e.rhs(), slots);
    case NodeKind::Divide: {
      const double den = eval_node(e.rhs(), slots);
      if (den == 0.0) throw EvalError("division by zero");
      return eval_node(e.lhs(), slots) / den;
    }
    case NodeKind::Power: {
      const double base = eval_node(e.lhs(), slots);
      if (base == 0.0 && e.exponent() < 0) throw EvalError("zero raised to a negative power");
      return std::pow(base, e.exponent());
    }
    case NodeKind::Call: {
      const double x = eval_node(e.lhs(), slots);
      switch (e.function()) {
        case Function::Sin: return std::sin(x);
        case Function::Cos: return std::cos(x);
        case Function::Exp: return std::exp(x);
        case Function::Log:
          if (!(x > 0.0)) throw EvalError("log of non-positive value");
          return std::log(x);
        case Function::Sqrt:
          if (x < 0.0) throw EvalError("sqrt of negative value");
          return std::sqrt(x);
      }
    }
  }
  throw std::logic_error("unreachable expression kind");
}

void collect_slots(const Expr& e, std::vector<const Expr*>& vars) {
  switch (e.kind()) {
    case NodeKind::Number: return;
    case NodeKind::Variable: vars.push_back(&e); return;
    case NodeKind::Negate:
    case NodeKind::Power:
    case NodeKind::Call: collect_slots(e.lhs(), vars); return;
    default:
      collect_slots(e.lhs(), vars);
      collect_slots(e.rhs(), vars);
  }
}

}  // namespace

std::string print(const Expr& e) {
  std::string out;
  print_into(e, out);
  return out;
}

double evaluate(const Expr& e, std::span<const double> slots) { return eval_node(e, slots); }

double evaluate(const Expr& e, const std::map<std::string, double, std::less<>>& binding) {
  std::vector<const Expr*> vars;
  collect_slots(e, vars);
  int max_slot = -1;
  for (const Expr* v : vars) max_slot = std::max(max_slot, v->variable_slot());
  std::vector<double> slots(static_cast<std::size_t>(max_slot + 1), 0.0);
  for (const Expr* v : vars) {
    const auto it = binding.find(v->variable_name());
    if (it == binding.end()) throw NameError("unbound variable '" + v->variable_name() + "'");
    slots[static_cast<std::size_t>(v->variable_slot())] = it->second;
  }
  return eval_node(e, slots);
}

}  // namespace varistep::dsl
