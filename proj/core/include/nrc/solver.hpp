#pragma once

#include <optional>
#include <vector>

#include "nrc/fidelity.hpp"
#include "nrc/gme.hpp"
#include "nrc/linops.hpp"
#include "nrc/proxlib.hpp"
#include "nrc/types.hpp"

namespace nrc {

/// Upper bounds on the operator norms entering the step-size rule. All come
/// from power iteration with a safety factor, so they never have to be tight,
/// only valid.
struct OperatorBounds {
  double a_op_sq = 0.0;    // ‖A‖²
  double b_op_sq = 0.0;    // ‖B‖²
  double bl_op_sq = 0.0;   // ‖B∘L‖²  (equals ‖L*B*B L‖)
  double bbl_op_sq = 0.0;  // ‖B*B∘L‖²
  double lc_eig = 0.0;     // ‖L*L + C*C‖
};

/// Constrained model  min f(Ax) + mu·psi_B(Lx)  s.t.  Cmap x ∈ C.
///
/// Assembled through make_problem, which validates dimension chains, certifies
/// a feasible point, and precomputes the fused operators and norm bounds the
/// iteration needs. Immutable afterwards; concurrent solves may share it.
struct NrcProblem {
  LinearMap A;
  SmoothFidelity f;
  GmeRegularizer reg;
  LinearMap Cmap;
  ProxFunction Cset;
  double beta = 0.0;  // Lipschitz bound for the gradient of the smooth part
  OperatorBounds bounds;

  // Fused products, algebraically simplified and compacted at build time.
  LinearMap kbl;     // B*B∘L
  LinearMap qbl_mu;  // mu·L*B*B∘L
  LinearMap btb;     // B*B

  double mu() const { return reg.mu; }
  Index dim_x() const { return A.in_dim(); }
  Index dim_z() const { return reg.L.out_dim(); }
  Index dim_c() const { return Cmap.out_dim(); }
};

NrcProblem make_problem(LinearMap A, SmoothFidelity f, GmeRegularizer reg, LinearMap Cmap,
                        ProxFunction Cset, std::optional<Vec> feasible_point = std::nullopt,
                        std::optional<OperatorBounds> bounds = std::nullopt);

/// Step parameters of the fixed-point operator. sigma and tau satisfy the
/// spectral inequality that makes the iteration metric positive definite and
/// the operator averaged with parameter 2/(4-theta), theta ∈ (0, 2).
struct StepParams {
  double rho = 0.0;
  double sigma = 0.0;
  double tau = 0.0;
  double theta = 0.0;
};

/// rho = 1 / max(beta, mu‖B‖²).
double compute_rho(const NrcProblem& p);

/// tau = kappa/(2 rho) and sigma = 1.001 × (mu‖L*L + C*C‖ +
/// (2 rho mu²‖B*B L‖² + tau)/(2 rho tau - 1)), kappa > 1. Throws if the
/// derived parameters fail their own certificates (cannot happen when the
/// norm bounds are valid).
StepParams choose_sigma_tau(const NrcProblem& p, double kappa = 5.0);

/// Point of the product space X × Z × Z × Zc the iteration walks in.
struct SolverState {
  Vec x, v, w, z;
  long iteration = 0;
  double residual_sq = kInf;
};

SolverState zero_state(const NrcProblem& p);

/// ⟨h, P h⟩ for the block metric
///   sigma‖x‖² + tau‖v‖² + mu‖w‖² + mu‖z‖²
///   - 2mu⟨BLx, Bv⟩ - 2mu⟨Lx, w⟩ - 2mu⟨Cx, z⟩.
double p_norm_sq(const NrcProblem& p, const StepParams& s, const SolverState& h);

/// Gradient of the smooth part d(x) = f(Ax) - (mu/2)‖BLx‖².
Vec grad_d(const NrcProblem& p, const Vec& x);

/// One application of the averaged fixed-point operator.
SolverState apply_T(const NrcProblem& p, const StepParams& s, const SolverState& h);

struct TraceRow {
  long iteration = 0;
  double res_h_sq = 0.0;
  double res_p_sq = 0.0;
  double objective = 0.0;
  bool has_objective = false;
};

struct KmOptions {
  bool record_trace = true;
  bool log_objective = false;
  int objective_stride = 100;
  double objective_tol = 1e-8;
};

struct SolveResult {
  Vec x_star;
  bool converged = false;
  long iterations = 0;
  std::vector<TraceRow> trace;
  SolverState final_state;
};

/// Plain fixed-point iteration h_{k+1} = T(h_k), stopped when the squared
/// product-space residual ‖h_k - h_{k-1}‖² drops below tol_sq (the residual
/// in the iteration metric is logged alongside). Unconverged runs return the
/// best iterate flagged accordingly.
SolveResult km_solve(const NrcProblem& p, const StepParams& s, const SolverState& h0,
                     double tol_sq, long max_iter, const KmOptions& opts = {});

enum class CondStatus { Certified, NotCertified, Unavailable };

/// Which of the sufficient conditions for a minimizer to exist could be
/// certified for this instance.
struct ExistenceReport {
  CondStatus multipolyhedral = CondStatus::NotCertified;  // coercive f + polyhedral constraint
  CondStatus bounded_constraint = CondStatus::NotCertified;
  CondStatus coercive_null = CondStatus::NotCertified;  // coercive f + trivial joint null space
  bool f_coercive = false;
  bool null_trivial = false;
  bool any_certified = false;
};

ExistenceReport existence_diagnostics(const NrcProblem& p);

}  // namespace nrc
