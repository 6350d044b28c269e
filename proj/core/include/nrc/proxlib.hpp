#pragma once

#include "nrc/linops.hpp"
#include "nrc/types.hpp"

namespace nrc {

enum class ProxKind { L1Norm, IndicatorBox };

/// Prox-friendly convex function: the l1 norm or a box indicator.
class ProxFunction {
 public:
  static ProxFunction l1(Index dim);
  static ProxFunction indicator_box(Box box);

  Index dim() const { return dim_; }
  ProxKind kind() const { return kind_; }
  const Box& box() const;

  /// Function value; +inf outside the box for the indicator kind
  /// (membership decided with a 1e-12 absolute tolerance).
  double value(const Vec& x) const;

  /// prox_{gamma f}(x). Soft threshold for l1, box projection for the
  /// indicator (independent of gamma). gamma must be positive.
  Vec prox(double gamma, const Vec& x) const;

 private:
  ProxFunction(ProxKind k, Index d) : kind_(k), dim_(d) {}
  ProxKind kind_;
  Index dim_;
  Box box_;
};

struct InnerMinResult {
  Vec minimizer;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Approximately solves min_v  psi(v) + 0.5 ‖B(x - v)‖²  by proximal-gradient
/// iteration from v = 0 with step 1/‖B‖²_op, stopping when the prox-gradient
/// residual norm falls below tol. psi must be the l1 kind. Diagnostic use
/// only; the fixed-point solver never calls this.
InnerMinResult moreau_inner_min(const ProxFunction& psi, const LinearMap& B, const Vec& x,
                                double tol, int max_iter = 100000);

}  // namespace nrc
