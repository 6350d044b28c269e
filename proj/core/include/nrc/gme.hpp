#pragma once

#include "nrc/linops.hpp"
#include "nrc/proxlib.hpp"
#include "nrc/types.hpp"

namespace nrc {

/// Nonconvex enhancement of a convex seed: the penalty applied to Lx is
/// psi_B(z) = psi(z) - min_v [ psi(v) + ½‖B(z - v)‖² ], weighted by mu.
/// B = 0 reproduces the seed itself.
struct GmeRegularizer {
  ProxFunction psi;
  LinearMap L;
  LinearMap B;
  double mu = 1.0;
};

/// Validated assembly; the seed must be the (coercive) l1 norm and the
/// dimensions must chain L: X→Z, B: Z→Z~, psi on Z.
GmeRegularizer make_gme(ProxFunction psi, LinearMap L, LinearMap B, double mu);

/// B for an invertible sparsifying operator with given inverse:
/// B = sqrt(c/mu) · diag(sqrt(lambda)) · L⁻¹, with the margin c in (0, 1).
/// A curvature floor lambda of the fidelity then certifies convexity of the
/// whole model with margin (1 - c) whenever A*ΛA ⪰ Λ applies (A = Id).
LinearMap design_B_invertible(const LinearMap& L_inv, const Vec& lambda_diag, double mu, double c);

struct ConvexityCert {
  bool pass = false;
  double min_eig = 0.0;
};

/// Smallest eigenvalue of A*ΛA - mu·L*B*B·L, formed densely; pass iff it is
/// ≥ -tol. This certifies convexity of the smooth part of the model cost.
ConvexityCert overall_convexity_check(const LinearMap& A, const Vec& lambda_diag,
                                      const GmeRegularizer& reg, double tol,
                                      Index col_cap = kDenseCap);

struct GmeValue {
  double value = 0.0;
  bool converged = false;
};

/// psi_B(z) evaluated by running the inner minimization to tolerance `tol`.
/// Diagnostic accuracy O(tol); the flag reports inner-solver convergence.
GmeValue gme_value(const GmeRegularizer& reg, const Vec& z, double tol, int max_iter = 100000);

}  // namespace nrc
