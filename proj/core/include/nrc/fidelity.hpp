#pragma once

#include <memory>

#include "nrc/types.hpp"

namespace nrc {

enum class FidelityKind { Quadratic, ClippedGaussianNll, Extended };

enum class RowBranch { Interior, UpperClip, LowerClip };

/// Diagonal curvature floor of a separable fidelity together with a
/// Lipschitz constant for its gradient over the declared domain.
struct CurvatureProfile {
  Vec lambda_diag;
  double grad_lip = 0.0;
};

/// Smooth convex separable data-fidelity term f(u) = Σ_i f_i(u_i).
///
/// Three kinds: the plain quadratic ½‖y - u‖², the negative log-likelihood
/// of a Gaussian observation saturated at ±theta (quadratic on interior
/// samples, log-tail-integral on saturated ones), and a quadratic extension
/// of either that is exact on a box Π and second-order Taylor outside, which
/// makes the gradient Lipschitz over the whole space.
class SmoothFidelity {
 public:
  static SmoothFidelity quadratic(Vec y);
  static SmoothFidelity clipped_gaussian_nll(Vec y, double s, double theta);

  /// Quadratic extension of this fidelity outside Pi (exact on Pi).
  SmoothFidelity extend(const Box& pi) const;

  Index dim() const;
  FidelityKind kind() const;

  double value(const Vec& u) const;
  Vec grad(const Vec& u) const;

  /// Second derivative of row i at u (rows are independent).
  double row_curvature(Index i, double u) const;

  /// Curvature floor over the natural domain: saturated rows of the clipped
  /// kind get 0 (their curvature vanishes in the limit), interior rows 1/s².
  /// For the extended kind this scans the extension box, since the outside
  /// branches freeze the endpoint curvature.
  CurvatureProfile curvature_profile() const;

  /// Curvature floor and gradient-Lipschitz bound restricted to a box,
  /// computed per row from a 1e-3-spaced grid plus the endpoints.
  CurvatureProfile curvature_profile(const Box& domain) const;

  /// Cheap valid Lipschitz bound for the gradient (1/s² dominates every
  /// branch); used where the grid-scanned profile would be wasteful.
  double grad_lip_bound() const;

  bool is_coercive() const;

  RowBranch row_branch(Index i) const;
  double noise_sigma() const;
  double clip_level() const;

 private:
  struct Impl;
  explicit SmoothFidelity(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

}  // namespace nrc
