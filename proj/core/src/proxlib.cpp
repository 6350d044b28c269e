#include "nrc/proxlib.hpp"

#include <cmath>

namespace nrc {

ProxFunction ProxFunction::l1(Index dim) { return ProxFunction(ProxKind::L1Norm, dim); }

ProxFunction ProxFunction::indicator_box(Box box) {
  if (box.dim() != box.upper.size()) throw std::invalid_argument("box: bound size mismatch");
  if ((box.lower.array() > box.upper.array()).any()) {
    throw std::invalid_argument("box: lower bound above upper bound");
  }
  ProxFunction f(ProxKind::IndicatorBox, box.dim());
  f.box_ = std::move(box);
  return f;
}

const Box& ProxFunction::box() const {
  if (kind_ != ProxKind::IndicatorBox) throw std::logic_error("box() on a non-indicator function");
  return box_;
}

double ProxFunction::value(const Vec& x) const {
  if (x.size() != dim_) throw std::invalid_argument("prox value: dimension mismatch");
  switch (kind_) {
    case ProxKind::L1Norm:
      return x.lpNorm<1>();
    case ProxKind::IndicatorBox:
      return box_.contains(x, 1e-12) ? 0.0 : kInf;
  }
  throw std::logic_error("unreachable prox kind");
}

Vec ProxFunction::prox(double gamma, const Vec& x) const {
  if (!(gamma > 0.0)) throw std::invalid_argument("prox: gamma must be positive");
  if (x.size() != dim_) throw std::invalid_argument("prox: dimension mismatch");
  switch (kind_) {
    case ProxKind::L1Norm:
      return x.array().sign() * (x.array().abs() - gamma).max(0.0);
    case ProxKind::IndicatorBox:
      return box_.project(x);
  }
  throw std::logic_error("unreachable prox kind");
}

InnerMinResult moreau_inner_min(const ProxFunction& psi, const LinearMap& B, const Vec& x,
                                double tol, int max_iter) {
  if (psi.kind() != ProxKind::L1Norm) {
    throw std::invalid_argument("moreau_inner_min: only the l1 seed is supported");
  }
  if (B.in_dim() != psi.dim() || x.size() != psi.dim()) {
    throw std::invalid_argument("moreau_inner_min: dimension mismatch");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("moreau_inner_min: tol must be positive");

  InnerMinResult res;
  const double bsq = op_norm_sq_upper(B);
  if (bsq == 0.0) {
    // The quadratic coupling vanishes and the inner objective is psi alone.
    res.minimizer = Vec::Zero(psi.dim());
    res.value = 0.0;
    res.converged = true;
    return res;
  }

  const double step = 1.0 / bsq;
  Vec v = Vec::Zero(psi.dim());
  for (int k = 0; k < max_iter; ++k) {
    // gradient of 0.5‖B(x - v)‖² in v
    const Vec g = B.adjoint(B.apply(v - x));
    const Vec vn = psi.prox(step, v - step * g);
    const double residual = (vn - v).norm() / step;
    v = vn;
    res.iterations = k + 1;
    if (residual < tol) {
      res.converged = true;
      break;
    }
  }
  res.minimizer = v;
  const Vec bx = B.apply(x - v);
  res.value = psi.value(v) + 0.5 * bx.squaredNorm();
  return res;
}

}  // namespace nrc
