#include "nrc/gme.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace nrc {

GmeRegularizer make_gme(ProxFunction psi, LinearMap L, LinearMap B, double mu) {
  if (psi.kind() != ProxKind::L1Norm) {
    throw std::invalid_argument("make_gme: seed must be the l1 norm (coercive, prox-friendly)");
  }
  if (psi.dim() != L.out_dim()) {
    throw std::invalid_argument("make_gme: seed dimension does not match L out_dim");
  }
  if (B.in_dim() != L.out_dim()) {
    throw std::invalid_argument("make_gme: B in_dim does not match L out_dim");
  }
  if (!(mu > 0.0)) throw std::invalid_argument("make_gme: mu must be positive");
  return GmeRegularizer{std::move(psi), std::move(L), std::move(B), mu};
}

LinearMap design_B_invertible(const LinearMap& L_inv, const Vec& lambda_diag, double mu,
                              double c) {
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("design_B: margin c must lie in (0,1)");
  if (!(mu > 0.0)) throw std::invalid_argument("design_B: mu must be positive");
  if (lambda_diag.size() != L_inv.out_dim()) {
    throw std::invalid_argument("design_B: curvature floor size does not match L_inv out_dim");
  }
  if ((lambda_diag.array() < 0.0).any()) {
    throw std::invalid_argument("design_B: curvature floor must be nonnegative");
  }
  if (lambda_diag.isZero(0.0)) {
    return LinearMap::zero(L_inv.out_dim(), L_inv.in_dim());
  }
  const Vec root = lambda_diag.cwiseSqrt();
  return LinearMap::scaled(std::sqrt(c / mu),
                           LinearMap::compose(LinearMap::diagonal(root), L_inv));
}

ConvexityCert overall_convexity_check(const LinearMap& A, const Vec& lambda_diag,
                                      const GmeRegularizer& reg, double tol, Index col_cap) {
  if (A.out_dim() != lambda_diag.size()) {
    throw std::invalid_argument("convexity check: curvature floor size mismatch");
  }
  if (A.in_dim() != reg.L.in_dim()) {
    throw std::invalid_argument("convexity check: A and L act on different spaces");
  }
  // Materializing the product B∘L first keeps the subtraction well scaled
  // when B is built from L's inverse.
  const Mat bl = LinearMap::compose(reg.B, reg.L).to_dense(col_cap);
  const Mat ad = A.to_dense(col_cap);
  Mat m = ad.transpose() * lambda_diag.asDiagonal() * ad - reg.mu * (bl.transpose() * bl);
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> eig(m, Eigen::EigenvaluesOnly);
  ConvexityCert cert;
  cert.min_eig = eig.eigenvalues().minCoeff();
  cert.pass = cert.min_eig >= -tol;
  return cert;
}

GmeValue gme_value(const GmeRegularizer& reg, const Vec& z, double tol, int max_iter) {
  const InnerMinResult inner = moreau_inner_min(reg.psi, reg.B, z, tol, max_iter);
  GmeValue out;
  out.value = reg.psi.value(z) - inner.value;
  out.converged = inner.converged;
  return out;
}

}  // namespace nrc
