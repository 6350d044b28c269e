#include "nrc/linops.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nrc {

namespace {

// Orthonormal type-II DCT matrices are shared between every map of the same
// size (dct and inverse_dct both reference the same storage).
std::shared_ptr<const Mat> dct_matrix(Index n) {
  static std::mutex mu;
  static std::map<Index, std::weak_ptr<const Mat>> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(n); it != cache.end()) {
    if (auto hit = it->second.lock()) return hit;
  }
  auto m = std::make_shared<Mat>(n, n);
  const double a0 = std::sqrt(1.0 / static_cast<double>(n));
  const double ak = std::sqrt(2.0 / static_cast<double>(n));
  for (Index k = 0; k < n; ++k) {
    const double amp = (k == 0) ? a0 : ak;
    for (Index j = 0; j < n; ++j) {
      (*m)(k, j) = amp * std::cos(M_PI * (2.0 * j + 1.0) * k / (2.0 * n));
    }
  }
  cache[n] = m;
  return m;
}

}  // namespace

struct LinearMap::Impl {
  MapKind kind;
  Index in = 0;
  Index out = 0;
  Mat dense;                        // Dense
  Vec diag;                         // Diagonal
  std::shared_ptr<const Mat> dctm;  // Dct / InverseDct
  double scale = 1.0;               // Scaled
  std::shared_ptr<const Impl> outer, inner;  // Composition (outer∘inner); Scaled uses inner
};

namespace {

using ImplPtr = std::shared_ptr<const LinearMap::Impl>;

ImplPtr make_impl(LinearMap::Impl v) {
  return std::make_shared<const LinearMap::Impl>(std::move(v));
}

Vec apply_impl(const LinearMap::Impl& m, const Vec& x) {
  switch (m.kind) {
    case MapKind::Dense:
      return m.dense * x;
    case MapKind::Identity:
      return x;
    case MapKind::Diagonal:
      return m.diag.cwiseProduct(x);
    case MapKind::Dct:
      return (*m.dctm) * x;
    case MapKind::InverseDct:
      return m.dctm->transpose() * x;
    case MapKind::Scaled:
      return m.scale * apply_impl(*m.inner, x);
    case MapKind::Composition:
      return apply_impl(*m.outer, apply_impl(*m.inner, x));
  }
  throw std::logic_error("unreachable map kind");
}

Vec adjoint_impl(const LinearMap::Impl& m, const Vec& y) {
  switch (m.kind) {
    case MapKind::Dense:
      return m.dense.transpose() * y;
    case MapKind::Identity:
      return y;
    case MapKind::Diagonal:
      return m.diag.cwiseProduct(y);
    case MapKind::Dct:
      return m.dctm->transpose() * y;
    case MapKind::InverseDct:
      return (*m.dctm) * y;
    case MapKind::Scaled:
      return m.scale * adjoint_impl(*m.inner, y);
    case MapKind::Composition:
      // (L2∘L1)* = L1*∘L2*
      return adjoint_impl(*m.inner, adjoint_impl(*m.outer, y));
  }
  throw std::logic_error("unreachable map kind");
}

// Flattens a composition tree into product order [s0, s1, ..., sK] where sK
// is applied first, pulling scalar factors out into `factor`.
void flatten(const ImplPtr& node, std::vector<ImplPtr>& chain, double& factor) {
  if (node->kind == MapKind::Scaled) {
    factor *= node->scale;
    flatten(node->inner, chain, factor);
  } else if (node->kind == MapKind::Composition) {
    flatten(node->outer, chain, factor);
    flatten(node->inner, chain, factor);
  } else {
    chain.push_back(node);
  }
}

bool cancels(const LinearMap::Impl& a, const LinearMap::Impl& b) {
  const bool pair = (a.kind == MapKind::Dct && b.kind == MapKind::InverseDct) ||
                    (a.kind == MapKind::InverseDct && b.kind == MapKind::Dct);
  return pair && a.in == b.in;
}

int heavy_stages(const LinearMap::Impl& m) {
  switch (m.kind) {
    case MapKind::Dense:
    case MapKind::Dct:
    case MapKind::InverseDct:
      return 1;
    case MapKind::Scaled:
      return heavy_stages(*m.inner);
    case MapKind::Composition:
      return heavy_stages(*m.outer) + heavy_stages(*m.inner);
    default:
      return 0;
  }
}

}  // namespace

LinearMap LinearMap::dense(Mat m) {
  Impl v;
  v.kind = MapKind::Dense;
  v.in = m.cols();
  v.out = m.rows();
  v.dense = std::move(m);
  return LinearMap(make_impl(std::move(v)));
}

LinearMap LinearMap::identity(Index n) {
  Impl v;
  v.kind = MapKind::Identity;
  v.in = v.out = n;
  return LinearMap(make_impl(std::move(v)));
}

LinearMap LinearMap::diagonal(Vec d) {
  Impl v;
  v.kind = MapKind::Diagonal;
  v.in = v.out = d.size();
  v.diag = std::move(d);
  return LinearMap(make_impl(std::move(v)));
}

LinearMap LinearMap::dct(Index n) {
  Impl v;
  v.kind = MapKind::Dct;
  v.in = v.out = n;
  v.dctm = dct_matrix(n);
  return LinearMap(make_impl(std::move(v)));
}

LinearMap LinearMap::inverse_dct(Index n) {
  Impl v;
  v.kind = MapKind::InverseDct;
  v.in = v.out = n;
  v.dctm = dct_matrix(n);
  return LinearMap(make_impl(std::move(v)));
}

LinearMap LinearMap::scaled(double c, LinearMap inner) {
  if (inner.impl_->kind == MapKind::Scaled) {
    // collapse nested scalars
    Impl v = *inner.impl_;
    v.scale *= c;
    return LinearMap(make_impl(std::move(v)));
  }
  Impl v;
  v.kind = MapKind::Scaled;
  v.in = inner.in_dim();
  v.out = inner.out_dim();
  v.scale = c;
  v.inner = inner.impl_;
  return LinearMap(make_impl(std::move(v)));
}

LinearMap LinearMap::zero(Index out, Index in) { return dense(Mat::Zero(out, in)); }

LinearMap LinearMap::compose(LinearMap outer, LinearMap inner) {
  if (outer.in_dim() != inner.out_dim()) {
    throw std::invalid_argument("compose: inner out_dim " + std::to_string(inner.out_dim()) +
                                " does not match outer in_dim " + std::to_string(outer.in_dim()));
  }
  const Index in = inner.in_dim();
  const Index out = outer.out_dim();

  double factor = 1.0;
  std::vector<ImplPtr> chain;
  flatten(outer.impl_, chain, factor);
  flatten(inner.impl_, chain, factor);

  // Drop identities, cancel exact inverse pairs, fuse adjacent diagonals.
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<ImplPtr> next;
    next.reserve(chain.size());
    for (std::size_t i = 0; i < chain.size(); ++i) {
      if (chain[i]->kind == MapKind::Identity) {
        changed = true;
        continue;
      }
      if (!next.empty()) {
        const auto& prev = next.back();
        if (cancels(*prev, *chain[i])) {
          next.pop_back();
          changed = true;
          continue;
        }
        if (prev->kind == MapKind::Diagonal && chain[i]->kind == MapKind::Diagonal) {
          Impl fused;
          fused.kind = MapKind::Diagonal;
          fused.in = fused.out = prev->in;
          fused.diag = prev->diag.cwiseProduct(chain[i]->diag);
          next.back() = make_impl(std::move(fused));
          changed = true;
          continue;
        }
      }
      next.push_back(chain[i]);
    }
    chain = std::move(next);
  }

  LinearMap result = [&] {
    if (chain.empty()) return identity(in);
    LinearMap acc(chain.back());
    for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it) {
      Impl v;
      v.kind = MapKind::Composition;
      v.in = acc.in_dim();
      v.out = (*it)->out;
      v.outer = *it;
      v.inner = acc.impl_;
      acc = LinearMap(make_impl(std::move(v)));
    }
    return acc;
  }();
  (void)out;
  if (factor != 1.0) result = scaled(factor, std::move(result));
  return result;
}

Index LinearMap::in_dim() const { return impl_->in; }
Index LinearMap::out_dim() const { return impl_->out; }
MapKind LinearMap::kind() const { return impl_->kind; }

Vec LinearMap::apply(const Vec& x) const {
  if (x.size() != impl_->in) {
    throw std::invalid_argument("apply: vector of length " + std::to_string(x.size()) +
                                " fed to operator with in_dim " + std::to_string(impl_->in));
  }
  return apply_impl(*impl_, x);
}

Vec LinearMap::adjoint(const Vec& y) const {
  if (y.size() != impl_->out) {
    throw std::invalid_argument("adjoint: vector of length " + std::to_string(y.size()) +
                                " fed to operator with out_dim " + std::to_string(impl_->out));
  }
  return adjoint_impl(*impl_, y);
}

LinearMap LinearMap::adjoint_map() const {
  const Impl& m = *impl_;
  switch (m.kind) {
    case MapKind::Dense:
      return dense(m.dense.transpose());
    case MapKind::Identity:
    case MapKind::Diagonal:
      return *this;
    case MapKind::Dct: {
      Impl v = m;
      v.kind = MapKind::InverseDct;
      return LinearMap(make_impl(std::move(v)));
    }
    case MapKind::InverseDct: {
      Impl v = m;
      v.kind = MapKind::Dct;
      return LinearMap(make_impl(std::move(v)));
    }
    case MapKind::Scaled:
      return scaled(m.scale, LinearMap(m.inner).adjoint_map());
    case MapKind::Composition:
      return compose(LinearMap(m.inner).adjoint_map(), LinearMap(m.outer).adjoint_map());
  }
  throw std::logic_error("unreachable map kind");
}

Mat LinearMap::to_dense(Index col_cap) const {
  if (in_dim() > col_cap || out_dim() > col_cap) {
    throw DiagnosticUnavailable("dense materialization refused: " + std::to_string(out_dim()) +
                                "x" + std::to_string(in_dim()) + " exceeds cap " +
                                std::to_string(col_cap));
  }
  switch (impl_->kind) {
    case MapKind::Dense:
      return impl_->dense;
    case MapKind::Identity:
      return Mat::Identity(impl_->out, impl_->in);
    case MapKind::Diagonal:
      return Mat(impl_->diag.asDiagonal());
    case MapKind::Dct:
      return *impl_->dctm;
    case MapKind::InverseDct:
      return impl_->dctm->transpose();
    default:
      break;
  }
  Mat out(out_dim(), in_dim());
  Vec e = Vec::Zero(in_dim());
  for (Index j = 0; j < in_dim(); ++j) {
    e[j] = 1.0;
    out.col(j) = apply_impl(*impl_, e);
    e[j] = 0.0;
  }
  return out;
}

LinearMap LinearMap::compact(Index col_cap) const {
  if (heavy_stages(*impl_) < 2) return *this;
  if (in_dim() > col_cap || out_dim() > col_cap) return *this;
  return dense(to_dense(col_cap));
}

double sym_eig_upper(const std::function<Vec(const Vec&)>& S, Index dim, int iters, double tol,
                     std::uint64_t seed) {
  if (dim == 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec q(dim);
  for (Index i = 0; i < dim; ++i) q[i] = gauss(rng);
  double qn = q.norm();
  if (qn == 0.0) {
    q.setZero();
    q[0] = 1.0;
    qn = 1.0;
  }
  q /= qn;

  double lambda = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vec sq = S(q);
    const double next = q.dot(sq);
    const double nrm = sq.norm();
    if (nrm == 0.0) return 0.0;  // q landed in the null space of a PSD operator
    const bool settled = k > 0 && std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next));
    lambda = next;
    if (settled) break;
    q = sq / nrm;
  }
  return std::max(lambda, 0.0) * (1.0 + 1e-6);
}

double op_norm_sq_upper(const LinearMap& L, int iters, double tol, std::uint64_t seed) {
  auto gram = [&L](const Vec& x) { return L.adjoint(L.apply(x)); };
  return sym_eig_upper(gram, L.in_dim(), iters, tol, seed);
}

bool null_intersection_trivial(const LinearMap& A, const LinearMap& L, double tol, Index col_cap) {
  if (A.in_dim() != L.in_dim()) {
    throw std::invalid_argument("null_intersection_trivial: operators act on different spaces");
  }
  if (A.in_dim() > col_cap || A.out_dim() > col_cap || L.out_dim() > col_cap) {
    throw DiagnosticUnavailable("null-space diagnostic beyond dense cap");
  }
  Mat stacked(A.out_dim() + L.out_dim(), A.in_dim());
  stacked.topRows(A.out_dim()) = A.to_dense(col_cap);
  stacked.bottomRows(L.out_dim()) = L.to_dense(col_cap);
  Eigen::BDCSVD<Mat> svd(stacked);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return false;
  return sv[sv.size() - 1] > tol * sv[0];
}

// -- Box ---------------------------------------------------------------

Box Box::uniform(Index n, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("box: lower bound above upper bound");
  Box b;
  b.lower = Vec::Constant(n, lo);
  b.upper = Vec::Constant(n, hi);
  return b;
}

bool Box::bounded() const {
  return lower.allFinite() && upper.allFinite();
}

bool Box::contains(const Vec& x, double tol) const {
  if (x.size() != dim()) return false;
  return ((x.array() >= lower.array() - tol) && (x.array() <= upper.array() + tol)).all();
}

Vec Box::project(const Vec& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

}  // namespace nrc
