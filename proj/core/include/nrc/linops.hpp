#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "nrc/types.hpp"

namespace nrc {

/// Columns beyond which dense materialization of an operator is refused.
inline constexpr Index kDenseCap = 4096;

enum class MapKind { Dense, Identity, Diagonal, Dct, InverseDct, Composition, Scaled };

/// Immutable linear operator with an exact adjoint.
///
/// Values are cheap shared handles; apply/adjoint are pure, so a map can be
/// used concurrently from many workers. The DCT kind is the orthonormal
/// type-II transform (an isometry), realized through a precomputed dense
/// matrix; InverseDct applies its transpose.
class LinearMap {
 public:
  static LinearMap dense(Mat m);
  static LinearMap identity(Index n);
  static LinearMap diagonal(Vec d);
  static LinearMap dct(Index n);
  static LinearMap inverse_dct(Index n);
  static LinearMap scaled(double c, LinearMap inner);
  /// outer ∘ inner. Throws on a dimension mismatch. Adjacent stages that
  /// cancel or fuse exactly (dct/inverse_dct pairs, identities, diagonals,
  /// scalar factors) are simplified at construction.
  static LinearMap compose(LinearMap outer, LinearMap inner);
  /// All-zero map, stored as a Dense payload.
  static LinearMap zero(Index out, Index in);

  Index in_dim() const;
  Index out_dim() const;
  MapKind kind() const;

  Vec apply(const Vec& x) const;
  Vec adjoint(const Vec& y) const;

  /// The adjoint as a first-class map (shares payloads where possible).
  LinearMap adjoint_map() const;

  /// Dense matrix of the operator; throws DiagnosticUnavailable when
  /// in_dim exceeds col_cap.
  Mat to_dense(Index col_cap = kDenseCap) const;

  /// Collapses a multi-stage composition into a single dense map when that
  /// makes repeated application cheaper. Identity for everything else.
  LinearMap compact(Index col_cap = kDenseCap) const;

 private:
  struct Impl;
  explicit LinearMap(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// Upper estimate of ‖L‖²_op: power iteration on L*L (at most `iters` steps,
/// stopping early when the Rayleigh quotient stagnates below `tol` relative
/// change) followed by a fixed (1 + 1e-6) safety factor. Deterministic for a
/// fixed seed. A zero operator yields 0.
double op_norm_sq_upper(const LinearMap& L, int iters = 200, double tol = 1e-10,
                        std::uint64_t seed = 0x9e3779b97f4a7c15ull);

/// Same estimator for a self-adjoint positive-semidefinite operator given as
/// a callback x ↦ Sx.
double sym_eig_upper(const std::function<Vec(const Vec&)>& S, Index dim, int iters = 200,
                     double tol = 1e-10, std::uint64_t seed = 0x9e3779b97f4a7c15ull);

/// True iff null A ∩ null L = {0}, decided by a dense SVD of the stacked
/// matrix [A; L]: smallest singular value > tol * largest. Throws
/// DiagnosticUnavailable beyond the dense cap.
bool null_intersection_trivial(const LinearMap& A, const LinearMap& L, double tol,
                               Index col_cap = kDenseCap);

}  // namespace nrc
