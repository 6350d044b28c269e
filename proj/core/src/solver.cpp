#include "nrc/solver.hpp"

#include <cmath>
#include <utility>

namespace nrc {

namespace {

OperatorBounds estimate_bounds(const LinearMap& A, const GmeRegularizer& reg,
                               const LinearMap& Cmap, const LinearMap& kbl) {
  OperatorBounds b;
  b.a_op_sq = op_norm_sq_upper(A);
  b.b_op_sq = op_norm_sq_upper(reg.B);
  b.bl_op_sq = op_norm_sq_upper(LinearMap::compose(reg.B, reg.L));
  b.bbl_op_sq = op_norm_sq_upper(kbl);
  const LinearMap& L = reg.L;
  b.lc_eig = sym_eig_upper(
      [&](const Vec& x) { return Vec(L.adjoint(L.apply(x)) + Cmap.adjoint(Cmap.apply(x))); },
      L.in_dim());
  return b;
}

}  // namespace

NrcProblem make_problem(LinearMap A, SmoothFidelity f, GmeRegularizer reg, LinearMap Cmap,
                        ProxFunction Cset, std::optional<Vec> feasible_point,
                        std::optional<OperatorBounds> bounds) {
  if (A.in_dim() != reg.L.in_dim() || A.in_dim() != Cmap.in_dim()) {
    throw std::invalid_argument("make_problem: A, L and Cmap must share a domain");
  }
  if (f.dim() != A.out_dim()) {
    throw std::invalid_argument("make_problem: fidelity dimension does not match A out_dim");
  }
  if (Cset.kind() != ProxKind::IndicatorBox) {
    throw std::invalid_argument("make_problem: constraint set must be a box indicator");
  }
  if (Cset.dim() != Cmap.out_dim()) {
    throw std::invalid_argument("make_problem: constraint box does not match Cmap out_dim");
  }

  Vec x0 = feasible_point.value_or(Vec::Zero(A.in_dim()));
  if (x0.size() != A.in_dim()) {
    throw std::invalid_argument("make_problem: feasible point has wrong dimension");
  }
  if (!std::isfinite(reg.psi.value(reg.L.apply(x0))) ||
      Cset.value(Cmap.apply(x0)) != 0.0) {
    throw std::invalid_argument(
        "make_problem: supplied point is infeasible; the model needs a point with Lx in "
        "dom(psi) and Cmap x in the box");
  }

  NrcProblem p{std::move(A),
               std::move(f),
               std::move(reg),
               std::move(Cmap),
               std::move(Cset),
               0.0,
               OperatorBounds{},
               LinearMap::identity(1),
               LinearMap::identity(1),
               LinearMap::identity(1)};

  // Fused chains; for a designed B the dct/inverse-dct pairs cancel
  // structurally, leaving diagonal or single-stage operators.
  const LinearMap badj = p.reg.B.adjoint_map();
  p.kbl = LinearMap::compose(badj, LinearMap::compose(p.reg.B, p.reg.L)).compact();
  p.qbl_mu = LinearMap::scaled(
                 p.reg.mu,
                 LinearMap::compose(p.reg.L.adjoint_map(),
                                    LinearMap::compose(badj, LinearMap::compose(p.reg.B, p.reg.L))))
                 .compact();
  p.btb = LinearMap::compose(badj, p.reg.B).compact();

  p.bounds = bounds ? *bounds : estimate_bounds(p.A, p.reg, p.Cmap, p.kbl);
  p.beta = p.bounds.a_op_sq * p.f.grad_lip_bound() + p.mu() * p.bounds.bl_op_sq;
  return p;
}

double compute_rho(const NrcProblem& p) {
  return 1.0 / std::max(p.beta, p.mu() * p.bounds.b_op_sq);
}

StepParams choose_sigma_tau(const NrcProblem& p, double kappa) {
  if (!(kappa > 1.0)) throw std::invalid_argument("choose_sigma_tau: kappa must exceed 1");
  StepParams s;
  s.rho = compute_rho(p);
  s.tau = kappa / (2.0 * s.rho);
  const double mu = p.mu();
  const double lc = p.bounds.lc_eig;
  const double bbl = p.bounds.bbl_op_sq;
  const double denom = 2.0 * s.rho * s.tau - 1.0;  // = kappa - 1
  s.sigma = 1.001 * (mu * lc + (2.0 * s.rho * mu * mu * bbl + s.tau) / denom);
  s.theta = (s.sigma + s.tau - mu * lc) / (s.rho * (s.sigma * s.tau - s.tau * mu * lc - mu * mu * bbl));
  if (!(s.theta > 0.0 && s.theta < 2.0)) {
    throw std::runtime_error("choose_sigma_tau: averagedness certificate failed (theta=" +
                             std::to_string(s.theta) + ")");
  }
  // Schur-complement certificate for the iteration metric.
  if (!(s.sigma > mu * lc + mu * mu * bbl / s.tau)) {
    throw std::runtime_error("choose_sigma_tau: iteration metric is not positive definite");
  }
  return s;
}

SolverState zero_state(const NrcProblem& p) {
  SolverState h;
  h.x = Vec::Zero(p.dim_x());
  h.v = Vec::Zero(p.dim_z());
  h.w = Vec::Zero(p.dim_z());
  h.z = Vec::Zero(p.dim_c());
  return h;
}

double p_norm_sq(const NrcProblem& p, const StepParams& s, const SolverState& h) {
  const double mu = p.mu();
  double acc = s.sigma * h.x.squaredNorm() + s.tau * h.v.squaredNorm() +
               mu * h.w.squaredNorm() + mu * h.z.squaredNorm();
  acc -= 2.0 * mu * h.v.dot(p.kbl.apply(h.x));
  acc -= 2.0 * mu * h.w.dot(p.reg.L.apply(h.x));
  acc -= 2.0 * mu * h.z.dot(p.Cmap.apply(h.x));
  return acc;
}

Vec grad_d(const NrcProblem& p, const Vec& x) {
  return p.A.adjoint(p.f.grad(p.A.apply(x))) - p.qbl_mu.apply(x);
}

namespace {

// Products of the current x-block that successive iterations can reuse
// (x_{k+1} equals the xi just computed, so its images under L, B*B∘L and
// Cmap are already known).
struct XCache {
  Vec lx;    // L x
  Vec kblx;  // B*B L x
  Vec cx;    // Cmap x
};

XCache make_cache(const NrcProblem& p, const Vec& x) {
  return XCache{p.reg.L.apply(x), p.kbl.apply(x), p.Cmap.apply(x)};
}

SolverState step(const NrcProblem& p, const StepParams& s, const SolverState& h,
                 const XCache& cache, XCache& next_cache) {
  const double mu = p.mu();
  const double inv_sigma = 1.0 / s.sigma;
  const double mu_tau = mu / s.tau;

  const Vec grad = p.A.adjoint(p.f.grad(p.A.apply(h.x))) - mu * p.reg.L.adjoint(cache.kblx);
  const Vec bbv = p.btb.apply(h.v);

  SolverState out;
  out.x = h.x - inv_sigma * grad - (mu * inv_sigma) * p.reg.L.adjoint(bbv + h.w) -
          (mu * inv_sigma) * p.Cmap.adjoint(h.z);

  next_cache.lx = p.reg.L.apply(out.x);
  next_cache.kblx = p.kbl.apply(out.x);
  next_cache.cx = p.Cmap.apply(out.x);

  out.v = p.reg.psi.prox(
      mu_tau, 2.0 * mu_tau * next_cache.kblx - mu_tau * cache.kblx + h.v - mu_tau * bbv);

  const Vec arg_w = 2.0 * next_cache.lx - cache.lx + h.w;
  out.w = arg_w - p.reg.psi.prox(1.0, arg_w);

  const Vec arg_z = 2.0 * next_cache.cx - cache.cx + h.z;
  out.z = arg_z - p.Cset.box().project(arg_z);

  out.iteration = h.iteration + 1;
  return out;
}

double objective_value(const NrcProblem& p, const Vec& x, double tol) {
  return p.f.value(p.A.apply(x)) + p.mu() * gme_value(p.reg, p.reg.L.apply(x), tol).value;
}

}  // namespace

SolverState apply_T(const NrcProblem& p, const StepParams& s, const SolverState& h) {
  XCache next;
  return step(p, s, h, make_cache(p, h.x), next);
}

SolveResult km_solve(const NrcProblem& p, const StepParams& s, const SolverState& h0,
                     double tol_sq, long max_iter, const KmOptions& opts) {
  if (!(tol_sq > 0.0)) throw std::invalid_argument("km_solve: tol_sq must be positive");
  if (max_iter < 1) throw std::invalid_argument("km_solve: max_iter must be at least 1");

  const double mu = p.mu();
  SolverState h = h0;
  XCache cache = make_cache(p, h.x);

  SolveResult res;
  if (opts.record_trace) res.trace.reserve(256);

  for (long k = 0; k < max_iter; ++k) {
    XCache next_cache;
    SolverState hn = step(p, s, h, cache, next_cache);

    const double res_h = (hn.x - h.x).squaredNorm() + (hn.v - h.v).squaredNorm() +
                         (hn.w - h.w).squaredNorm() + (hn.z - h.z).squaredNorm();
    // Residual in the iteration metric, assembled from the cached products.
    const Vec dx = hn.x - h.x;
    const Vec dv = hn.v - h.v;
    const double res_p = s.sigma * dx.squaredNorm() + s.tau * dv.squaredNorm() +
                         mu * (hn.w - h.w).squaredNorm() + mu * (hn.z - h.z).squaredNorm() -
                         2.0 * mu * dv.dot(next_cache.kblx - cache.kblx) -
                         2.0 * mu * (hn.w - h.w).dot(next_cache.lx - cache.lx) -
                         2.0 * mu * (hn.z - h.z).dot(next_cache.cx - cache.cx);

    hn.residual_sq = res_h;
    h = std::move(hn);
    cache = std::move(next_cache);

    const bool done = res_h < tol_sq || k + 1 == max_iter;
    if (opts.record_trace) {
      TraceRow row;
      row.iteration = h.iteration;
      row.res_h_sq = res_h;
      row.res_p_sq = res_p;
      if (opts.log_objective &&
          (h.iteration % std::max(1, opts.objective_stride) == 0 || done)) {
        row.objective = objective_value(p, h.x, opts.objective_tol);
        row.has_objective = true;
      }
      res.trace.push_back(row);
    }
    if (res_h < tol_sq) {
      res.converged = true;
      break;
    }
  }

  res.iterations = h.iteration;
  res.x_star = h.x;
  res.final_state = std::move(h);
  return res;
}

ExistenceReport existence_diagnostics(const NrcProblem& p) {
  ExistenceReport r;
  r.f_coercive = p.f.is_coercive();

  const bool c_identity = p.Cmap.kind() == MapKind::Identity;
  const Box& box = p.Cset.box();
  const bool box_bounded = box.bounded();
  const bool box_everything = !box.lower.allFinite() && !box.upper.allFinite() &&
                              (box.lower.array() == -kInf).all() &&
                              (box.upper.array() == kInf).all();

  if (c_identity && box_bounded) r.bounded_constraint = CondStatus::Certified;

  // Recognized polyhedral cases: an identity-composed box, or a constraint
  // that is the whole space.
  if (r.f_coercive && (c_identity || box_everything)) {
    r.multipolyhedral = CondStatus::Certified;
  }

  try {
    r.null_trivial = null_intersection_trivial(p.A, p.reg.L, 1e-10);
    if (r.f_coercive && r.null_trivial) r.coercive_null = CondStatus::Certified;
  } catch (const DiagnosticUnavailable&) {
    r.coercive_null = CondStatus::Unavailable;
  }

  r.any_certified = r.multipolyhedral == CondStatus::Certified ||
                    r.bounded_constraint == CondStatus::Certified ||
                    r.coercive_null == CondStatus::Certified;
  return r;
}

}  // namespace nrc
