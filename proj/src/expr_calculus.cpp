#include <cmath>

#include "varistep/error.hpp"
#include "varistep/expr.hpp"

namespace varistep::dsl {
namespace {

// Literals are kept non-negative; a negative constant is Negate(Number).
Expr make_constant(double v) {
  if (v < 0.0 || (v == 0.0 && std::signbit(v))) {
    return v == 0.0 ? Expr::number(0.0) : Expr::negate(Expr::number(-v));
  }
  return Expr::number(v);
}

Expr add(const Expr& a, const Expr& b);
Expr sub(const Expr& a, const Expr& b);
Expr mul(const Expr& a, const Expr& b);
Expr div(const Expr& a, const Expr& b);
Expr neg(const Expr& a);
Expr pow(const Expr& a, int n);
Expr call(Function f, const Expr& a);

Expr scale(double c, const std::optional<Expr>& x);

Expr neg(const Expr& a) {
  if (const auto c = a.constant()) return make_constant(-*c);
  if (a.kind() == NodeKind::Negate) return a.lhs();
  if (a.kind() == NodeKind::Multiply) {
    if (const auto c = a.lhs().constant()) return scale(-*c, a.rhs());
  }
  return Expr::negate(a);
}

Expr add(const Expr& a, const Expr& b) {
  const auto ca = a.constant();
  const auto cb = b.constant();
  if (ca && cb) return make_constant(*ca + *cb);
  if (ca && *ca == 0.0) return b;
  if (cb && *cb == 0.0) return a;
  if (b.kind() == NodeKind::Negate) return sub(a, b.lhs());
  return Expr::binary(NodeKind::Add, a, b);
}

Expr sub(const Expr& a, const Expr& b) {
  const auto ca = a.constant();
  const auto cb = b.constant();
  if (ca && cb) return make_constant(*ca - *cb);
  if (cb && *cb == 0.0) return a;
  if (ca && *ca == 0.0) return neg(b);
  if (b.kind() == NodeKind::Negate) return add(a, b.lhs());
  if (a == b) return Expr::number(0.0);
  return Expr::binary(NodeKind::Subtract, a, b);
}

// Splits c*x into (c, x) when the left factor is a literal.
std::pair<double, std::optional<Expr>> split_coefficient(const Expr& e) {
  if (const auto c = e.constant()) return {*c, std::nullopt};
  if (e.kind() == NodeKind::Multiply) {
    if (const auto c = e.lhs().constant()) return {*c, e.rhs()};
  }
  return {1.0, e};
}

Expr scale(double c, const std::optional<Expr>& x) {
  if (!x) return make_constant(c);
  if (c == 0.0) return Expr::number(0.0);
  if (c == 1.0) return *x;
  if (c == -1.0) return neg(*x);
  return Expr::binary(NodeKind::Multiply, make_constant(c), *x);
}

Expr mul(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::number(0.0);
  if (a.kind() == NodeKind::Negate && !a.constant()) return neg(mul(a.lhs(), b));
  if (b.kind() == NodeKind::Negate && !b.constant()) return neg(mul(a, b.lhs()));
  auto [ca, xa] = split_coefficient(a);
  auto [cb, xb] = split_coefficient(b);
  const double c = ca * cb;
  if (!xa) return scale(c, xb);
  if (!xb) return scale(c, xa);
  return scale(c, Expr::binary(NodeKind::Multiply, *xa, *xb));
}

Expr div(const Expr& a, const Expr& b) {
  const auto cb = b.constant();
  if (a.is_constant(0.0) && !(cb && *cb == 0.0)) return Expr::number(0.0);
  if (cb && *cb != 0.0) {
    auto [ca, xa] = split_coefficient(a.kind() == NodeKind::Negate && !a.constant()
                                          ? a.lhs()
                                          : a);
    const double sign = (a.kind() == NodeKind::Negate && !a.constant()) ? -1.0 : 1.0;
    return scale(sign * ca / *cb, xa);
  }
  if (a == b) return Expr::number(1.0);
  return Expr::binary(NodeKind::Divide, a, b);
}

Expr pow(const Expr& a, int n) {
  if (n == 0) return Expr::number(1.0);
  if (n == 1) return a;
  if (const auto c = a.constant()) {
    if (!(*c == 0.0 && n < 0)) return make_constant(std::pow(*c, n));
  }
  if (a.kind() == NodeKind::Power) {
    const long long e = static_cast<long long>(a.exponent()) * n;
    if (e > -1000000 && e < 1000000) return pow(a.lhs(), static_cast<int>(e));
  }
  return Expr::power(a, n);
}

Expr call(Function f, const Expr& a) {
  if (const auto c = a.constant()) {
    switch (f) {
      case Function::Sin: return make_constant(std::sin(*c));
      case Function::Cos: return make_constant(std::cos(*c));
      case Function::Exp: return make_constant(std::exp(*c));
      case Function::Log:
        if (*c > 0.0) return make_constant(std::log(*c));
        break;
      case Function::Sqrt:
        if (*c >= 0.0) return make_constant(std::sqrt(*c));
        break;
    }
  }
  return Expr::call(f, a);
}

Expr derivative(const Expr& e, int slot) {
  if (!e.depends_on(slot)) return Expr::number(0.0);
  switch (e.kind()) {
    case NodeKind::Number: return Expr::number(0.0);
    case NodeKind::Variable: return Expr::number(e.variable_slot() == slot ? 1.0 : 0.0);
    case NodeKind::Negate: return neg(derivative(e.lhs(), slot));
    case NodeKind::Add: return add(derivative(e.lhs(), slot), derivative(e.rhs(), slot));
    case NodeKind::Subtract: return sub(derivative(e.lhs(), slot), derivative(e.rhs(), slot));
    case NodeKind::Multiply:
      return add(mul(derivative(e.lhs(), slot), e.rhs()), mul(e.lhs(), derivative(e.rhs(), slot)));
    case NodeKind::Divide: {
      const Expr& u = e.lhs();
      const Expr& v = e.rhs();
      if (!v.depends_on(slot)) return div(derivative(u, slot), v);
      return div(sub(mul(derivative(u, slot), v), mul(u, derivative(v, slot))), pow(v, 2));
    }
    case NodeKind::Power: {
      const int n = e.exponent();
      return mul(mul(Expr::number(static_cast<double>(n)), pow(e.lhs(), n - 1)),
                 derivative(e.lhs(), slot));
    }
    case NodeKind::Call: {
      const Expr& u = e.lhs();
      const Expr du = derivative(u, slot);
      switch (e.function()) {
        case Function::Sin: return mul(call(Function::Cos, u), du);
        case Function::Cos: return neg(mul(call(Function::Sin, u), du));
        case Function::Exp: return mul(call(Function::Exp, u), du);
        case Function::Log: return div(du, u);
        case Function::Sqrt:
          return div(du, mul(Expr::number(2.0), call(Function::Sqrt, u)));
      }
    }
  }
  return Expr::number(0.0);
}

}  // namespace

Expr simplify(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Number: return make_constant(e.number_value());
    case NodeKind::Variable: return e;
    case NodeKind::Negate: return neg(simplify(e.lhs()));
    case NodeKind::Add: return add(simplify(e.lhs()), simplify(e.rhs()));
    case NodeKind::Subtract: return sub(simplify(e.lhs()), simplify(e.rhs()));
    case NodeKind::Multiply: return mul(simplify(e.lhs()), simplify(e.rhs()));
    case NodeKind::Divide: return div(simplify(e.lhs()), simplify(e.rhs()));
    case NodeKind::Power: return pow(simplify(e.lhs()), e.exponent());
    case NodeKind::Call: return call(e.function(), simplify(e.lhs()));
  }
  return e;
}

Expr differentiate(const Expr& e, int slot, int times) {
  if (times < 1 || times > 3) throw InvalidInput("derivative order must be 1, 2 or 3");
  Expr d = simplify(e);
  for (int i = 0; i < times; ++i) d = simplify(derivative(d, slot));
  return d;
}

Expr substitute(const Expr& e, int slot, const Expr& replacement) {
  switch (e.kind()) {
    case NodeKind::Number: return e;
    case NodeKind::Variable: return e.variable_slot() == slot ? replacement : e;
    case NodeKind::Negate: return Expr::negate(substitute(e.lhs(), slot, replacement));
    case NodeKind::Power: return Expr::power(substitute(e.lhs(), slot, replacement), e.exponent());
    case NodeKind::Call: return Expr::call(e.function(), substitute(e.lhs(), slot, replacement));
    default:
      return Expr::binary(e.kind(), substitute(e.lhs(), slot, replacement),
                          substitute(e.rhs(), slot, replacement));
  }
}

}  // namespace varistep::dsl
