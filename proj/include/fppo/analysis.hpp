#ifndef FPPO_ANALYSIS_HPP_
#define FPPO_ANALYSIS_HPP_

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "fppo/core.hpp"
#include "fppo/fidelity.hpp"
#include "fppo/operators.hpp"
#include "fppo/solvers.hpp"

namespace fppo {

/// Joint primal-dual point w = (v, u).
struct JointPoint {
  DualField v;
  Image u;
};

/// Norm machinery of the convergence analysis: ||w||_{lambda,Q} and the
/// semi-norm weight M = I - lambda B Q^{-1} B^T on dual fields.
struct WeightedNorms {
  double lambda = 0.125;
  SpectralOperator Q;

  // M v = v - lambda B Q^{-1} B^T v
  DualField apply_M(const DualField& v) const {
    DualField m = v;
    axpy(-lambda, grad(q_inverse_apply(Q, grad_adjoint(v))), m);
    return m;
  }

  // (I - M) v = lambda B Q^{-1} B^T v
  DualField apply_I_minus_M(const DualField& v) const {
    DualField r = grad(q_inverse_apply(Q, grad_adjoint(v)));
    for (size_t i = 0; i < r.size(); ++i) {
      r.channel_x[i] *= lambda;
      r.channel_y[i] *= lambda;
    }
    return r;
  }

  double seminorm_M_sq(const DualField& v) const {
    return std::max(0.0, dot(v, apply_M(v)));
  }

  double seminorm_I_minus_M_sq(const DualField& v) const {
    return std::max(0.0, dot(v, apply_I_minus_M(v)));
  }

  // ||x||^2 with weight 2 beta I - Q^{-1}
  double seminorm_2beta_minus_Qinv_sq(const Image& x, double beta) const {
    double s = 2.0 * beta * dot(x, x) - dot(x, q_inverse_apply(Q, x));
    return std::max(0.0, s);
  }
};

inline double norm_lambda_Q(const JointPoint& w, const WeightedNorms& n) {
  return joint_norm(w.u, w.v, n.Q, n.lambda);
}

/// The fixed-point map: exactly one quasi-Newton step applied to (u, v).
/// Shares the solver's candidate computation, so the two agree bit for bit.
inline JointPoint operator_T(const JointPoint& w, const Fidelity& fid,
                             const SpectralOperator& Q, double lambda,
                             double mu) {
  SolverState s{w.u, w.v, 0};
  SolverState next = detail::qn_candidate(s, fid, Q, lambda, mu);
  return JointPoint{std::move(next.v), std::move(next.u)};
}

struct ContractionReport {
  bool applicable = false;  // 2 beta precondition satisfied
  bool pass = false;
  double lhs = 0.0;  // ||T w1 - T w2||^2
  double rhs = 0.0;  // ||w1 - w2||^2 minus the three deficit terms
  double gap = 0.0;  // rhs - lhs, nonnegative when the inequality holds
  double deficit_grad = 0.0;
  double deficit_v = 0.0;
  double deficit_T1 = 0.0;
};

/// Evaluates both sides of the contraction inequality
///   ||T w1 - T w2||^2_{lambda,Q} <= ||w1 - w2||^2_{lambda,Q}
///     - ||grad f2(u1) - grad f2(u2)||^2_{2beta - Q^{-1}}
///     - ||v1 - v2||^2_{I-M}
///     - lambda ||T1 w1 - T1 w2 - (v1 - v2)||^2_M
/// Applicable only when ||Q^{-1}||_2 < 2 beta; otherwise reported as such.
inline ContractionReport contraction_check(const JointPoint& w1, const JointPoint& w2,
                                 const Fidelity& fid, const WeightedNorms& n,
                                 double mu, double beta,
                                 double slack = 1e-9) {
  ContractionReport rep;
  double qinv_norm = 1.0 / n.Q.min_real_transfer();
  rep.applicable = qinv_norm < 2.0 * beta;

  JointPoint tw1 = operator_T(w1, fid, n.Q, n.lambda, mu);
  JointPoint tw2 = operator_T(w2, fid, n.Q, n.lambda, mu);

  Image du = subtract(w1.u, w2.u);
  DualField dv = subtract(w1.v, w2.v);
  Image dtu = subtract(tw1.u, tw2.u);
  DualField dtv = subtract(tw1.v, tw2.v);

  double lhs = joint_norm(dtu, dtv, n.Q, n.lambda);
  double rhs_base = joint_norm(du, dv, n.Q, n.lambda);
  rep.lhs = lhs * lhs;

  Image dg = subtract(fidelity_gradient(fid, w1.u), fidelity_gradient(fid, w2.u));
  rep.deficit_grad = n.seminorm_2beta_minus_Qinv_sq(dg, beta);
  rep.deficit_v = n.seminorm_I_minus_M_sq(dv);
  DualField dt1_minus_dv = subtract(dtv, dv);
  rep.deficit_T1 = n.lambda * n.seminorm_M_sq(dt1_minus_dv);

  rep.rhs = rhs_base * rhs_base - rep.deficit_grad - rep.deficit_v - rep.deficit_T1;
  rep.gap = rep.rhs - rep.lhs;
  double scale = std::max(1.0, rhs_base * rhs_base);
  rep.pass = rep.gap >= -slack * scale;
  return rep;
}

struct ConditionEntry {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  double margin = 0.0;
};

struct ConditionsReport {
  double qinv_norm = 0.0;
  double beta = 0.0;
  double lambda_bound = 0.0;  // 1 / lambda_max(B Q^{-1} B^T)
  std::vector<ConditionEntry> entries;

  bool all_pass() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
};

/// Convergence hypotheses, measured and reported (never asserted):
/// ||Q^{-1}||_2 < 2 beta and lambda <= 1 / lambda_max(B Q^{-1} B^T).
inline ConditionsReport conditions_check(const SpectralOperator& Q,
                                         const Fidelity& fid, double lambda) {
  ConditionsReport rep;
  rep.qinv_norm = 1.0 / Q.min_real_transfer();
  rep.beta = estimate_beta(fid);
  rep.lambda_bound = 1.0 / lambda_max_BQinvBT_exact(Q);

  ConditionEntry c1;
  c1.name = "qinv_norm_lt_2beta";
  c1.value = rep.qinv_norm;
  c1.threshold = 2.0 * rep.beta;
  c1.pass = rep.qinv_norm < c1.threshold;
  c1.margin = c1.threshold - c1.value;
  rep.entries.push_back(c1);

  ConditionEntry c2;
  c2.name = "lambda_le_bound";
  c2.value = lambda;
  c2.threshold = rep.lambda_bound;
  c2.pass = lambda <= c2.threshold * (1.0 + 1e-12);
  c2.margin = c2.threshold - c2.value;
  rep.entries.push_back(c2);
  return rep;
}

inline void write_conditions_text(std::ostream& os, const ConditionsReport& rep) {
  os << "condition report\n";
  for (const auto& e : rep.entries) {
    os << "  " << e.name << ": value=" << e.value << " threshold=" << e.threshold
       << " margin=" << e.margin << " -> " << (e.pass ? "pass" : "fail") << '\n';
  }
}

inline void write_conditions_csv(std::ostream& os, const ConditionsReport& rep) {
  os << "condition,value,threshold,pass,margin\n";
  for (const auto& e : rep.entries) {
    os << e.name << ',' << e.value << ',' << e.threshold << ','
       << (e.pass ? "pass" : "fail") << ',' << e.margin << '\n';
  }
}

}  // namespace fppo

#endif  // FPPO_ANALYSIS_HPP_
