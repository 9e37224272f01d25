#include <limits>

#include "varistep/error.hpp"
#include "varistep/expr.hpp"
#include "varistep/model.hpp"

namespace varistep {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class ExpressionHamiltonian final : public HamiltonianModel {
 public:
  ExpressionHamiltonian(std::string_view source, int dimension)
      : n_(dimension), vars_(dsl::VariableSet::canonical(dimension)) {
    h_ = dsl::simplify(dsl::parse_expression(source, vars_));
    text_ = dsl::print(h_);
    for (int i = 0; i < n_; ++i) {
      dp_.push_back(dsl::differentiate(h_, p_slot(i)));
      dq_.push_back(dsl::differentiate(h_, q_slot(i)));
    }
    dt_ = dsl::differentiate(h_, t_slot());
    autonomous_ = dt_.is_constant(0.0);
    detect_separable();
  }

  int dimension() const override { return n_; }
  std::string name() const override { return "hamiltonian_expr(" + text_ + ")"; }
  bool autonomous() const override { return autonomous_; }
  std::optional<double> inverse_mass() const override { return c_; }
  unsigned potential_capabilities() const override {
    return c_ && n_ == 1 ? potential::all : 0u;
  }

 protected:
  HamiltonianEval do_evaluate(const PhasePoint& x, unsigned request) const override {
    std::vector<double> slots(static_cast<std::size_t>(vars_.size()));
    for (int i = 0; i < n_; ++i) {
      slots[q_slot(i)] = x.q[i];
      slots[p_slot(i)] = x.p[i];
    }
    slots[t_slot()] = x.t;
    HamiltonianEval out{kNaN, {}, {}, kNaN};
    if (request & partial::value) out.value = dsl::evaluate(h_, slots);
    if (request & partial::grad_p) {
      out.grad_p.resize(n_);
      for (int i = 0; i < n_; ++i) out.grad_p[i] = dsl::evaluate(dp_[i], slots);
    }
    if (request & partial::grad_q) {
      out.grad_q.resize(n_);
      for (int i = 0; i < n_; ++i) out.grad_q[i] = dsl::evaluate(dq_[i], slots);
    }
    if (request & partial::time) out.time = dsl::evaluate(dt_, slots);
    return out;
  }

  PotentialEval do_potential(double q, double t, unsigned request) const override {
    std::vector<double> slots(static_cast<std::size_t>(vars_.size()), 0.0);
    slots[q_slot(0)] = q;
    slots[t_slot()] = t;
    auto eval = [&](unsigned bit, const dsl::Expr& e) {
      return (request & bit) ? dsl::evaluate(e, slots) : kNaN;
    };
    return {eval(potential::V, v_[0]),   eval(potential::V1, v_[1]),
            eval(potential::V2, v_[2]),  eval(potential::V3, v_[3]),
            eval(potential::V1t, v_[4]), eval(potential::V2t, v_[5]),
            eval(potential::Vt, v_[6])};
  }

 private:
  int q_slot(int i) const { return i; }
  int p_slot(int i) const { return n_ + i; }
  int t_slot() const { return 2 * n_; }

  // H is separable when every dH/dp_i depends on p_i alone, is linear in it
  // with one common positive slope c, and vanishes at p_i = 0.
  void detect_separable() {
    std::optional<double> common;
    for (int i = 0; i < n_; ++i) {
      for (int s = 0; s < vars_.size(); ++s) {
        if (s != p_slot(i) && dp_[i].depends_on(s)) return;
      }
      const auto slope = dsl::differentiate(dp_[i], p_slot(i)).constant();
      if (!slope || !(*slope > 0.0)) return;
      if (common && *common != *slope) return;
      common = slope;
      if (!dsl::simplify(dsl::substitute(dp_[i], p_slot(i), dsl::Expr::number(0.0)))
               .is_constant(0.0)) {
        return;
      }
    }
    c_ = common;
    dsl::Expr v = h_;
    for (int i = 0; i < n_; ++i) v = dsl::substitute(v, p_slot(i), dsl::Expr::number(0.0));
    v = dsl::simplify(v);
    if (n_ == 1) {
      const int q = q_slot(0);
      const int t = t_slot();
      v_ = {v,
            dsl::differentiate(v, q, 1),
            dsl::differentiate(v, q, 2),
            dsl::differentiate(v, q, 3),
            dsl::differentiate(dsl::differentiate(v, q, 1), t),
            dsl::differentiate(dsl::differentiate(v, q, 2), t),
            dsl::differentiate(v, t)};
    }
  }

  int n_;
  dsl::VariableSet vars_;
  dsl::Expr h_ = dsl::Expr::number(0.0);
  std::string text_;
  std::vector<dsl::Expr> dp_;
  std::vector<dsl::Expr> dq_;
  dsl::Expr dt_ = dsl::Expr::number(0.0);
  bool autonomous_ = false;
  std::optional<double> c_;
  std::vector<dsl::Expr> v_;  // V, V1, V2, V3, V1t, V2t, Vt
};

}  // namespace

ModelPtr expression_model(std::string_view source, int dimension) {
  return std::make_shared<ExpressionHamiltonian>(source, dimension);
}

}  // namespace varistep
