#include "nrc/fidelity.hpp"

#include <cmath>
#include <vector>

#include "nrc/stdnorm.hpp"

namespace nrc {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727;
constexpr double kBranchTol = 1e-12;
constexpr double kGridStep = 1e-3;
}  // namespace

struct SmoothFidelity::Impl {
  FidelityKind kind;
  Vec y;
  double s = 1.0;
  double theta = 0.0;
  std::vector<RowBranch> branch;
  // Extended only:
  std::shared_ptr<const Impl> base;
  Box pi;
};

namespace {

using ImplPtr = std::shared_ptr<const SmoothFidelity::Impl>;

// Per-row value/derivative/curvature of the two non-extended kinds.
// Upper-clip rows see -log ∫_{theta-u}^∞ exp(-t²/2s²) dt, in terms of the
// standard normal tail with z = (theta-u)/s; lower-clip rows are the mirror
// image with z = (u+theta)/s.

double row_value(const SmoothFidelity::Impl& f, Index i, double u) {
  switch (f.kind) {
    case FidelityKind::Quadratic: {
      const double r = f.y[i] - u;
      return 0.5 * r * r;
    }
    case FidelityKind::ClippedGaussianNll: {
      switch (f.branch[i]) {
        case RowBranch::Interior: {
          const double r = (f.y[i] - u) / f.s;
          return 0.5 * r * r;
        }
        case RowBranch::UpperClip:
          return -(std::log(f.s) + kLogSqrt2Pi + stdnorm::log_tail((f.theta - u) / f.s));
        case RowBranch::LowerClip:
          return -(std::log(f.s) + kLogSqrt2Pi + stdnorm::log_tail((u + f.theta) / f.s));
      }
      break;
    }
    case FidelityKind::Extended:
      break;
  }
  throw std::logic_error("row_value: unexpected kind");
}

double row_grad(const SmoothFidelity::Impl& f, Index i, double u) {
  switch (f.kind) {
    case FidelityKind::Quadratic:
      return u - f.y[i];
    case FidelityKind::ClippedGaussianNll: {
      switch (f.branch[i]) {
        case RowBranch::Interior:
          return (u - f.y[i]) / (f.s * f.s);
        case RowBranch::UpperClip:
          return -stdnorm::hazard((f.theta - u) / f.s) / f.s;
        case RowBranch::LowerClip:
          return stdnorm::hazard((u + f.theta) / f.s) / f.s;
      }
      break;
    }
    case FidelityKind::Extended:
      break;
  }
  throw std::logic_error("row_grad: unexpected kind");
}

double row_curv(const SmoothFidelity::Impl& f, Index i, double u) {
  switch (f.kind) {
    case FidelityKind::Quadratic:
      return 1.0;
    case FidelityKind::ClippedGaussianNll: {
      const double ssq = f.s * f.s;
      switch (f.branch[i]) {
        case RowBranch::Interior:
          return 1.0 / ssq;
        case RowBranch::UpperClip:
          return stdnorm::hazard_slope((f.theta - u) / f.s) / ssq;
        case RowBranch::LowerClip:
          return stdnorm::hazard_slope((u + f.theta) / f.s) / ssq;
      }
      break;
    }
    case FidelityKind::Extended:
      break;
  }
  throw std::logic_error("row_curv: unexpected kind");
}

// Extended rows: exact inside Pi, second-order Taylor around the projection
// onto Pi outside. Value, slope and curvature all match at the boundary.
double ext_value(const SmoothFidelity::Impl& f, Index i, double u) {
  const double c = std::min(std::max(u, f.pi.lower[i]), f.pi.upper[i]);
  if (u == c) return row_value(*f.base, i, u);
  const double d = u - c;
  return row_value(*f.base, i, c) + row_grad(*f.base, i, c) * d +
         0.5 * row_curv(*f.base, i, c) * d * d;
}

double ext_grad(const SmoothFidelity::Impl& f, Index i, double u) {
  const double c = std::min(std::max(u, f.pi.lower[i]), f.pi.upper[i]);
  if (u == c) return row_grad(*f.base, i, u);
  return row_grad(*f.base, i, c) + row_curv(*f.base, i, c) * (u - c);
}

double ext_curv(const SmoothFidelity::Impl& f, Index i, double u) {
  const double c = std::min(std::max(u, f.pi.lower[i]), f.pi.upper[i]);
  return row_curv(*f.base, i, c);
}

// Min and max of f''_i over [lo, hi] from a fixed-step grid plus endpoints.
void scan_curvature(const SmoothFidelity::Impl& f, Index i, double lo, double hi, double& cmin,
                    double& cmax) {
  cmin = kInf;
  cmax = -kInf;
  const auto look = [&](double u) {
    const double c = row_curv(f, i, u);
    cmin = std::min(cmin, c);
    cmax = std::max(cmax, c);
  };
  look(lo);
  look(hi);
  const long steps = static_cast<long>(std::floor((hi - lo) / kGridStep));
  for (long k = 1; k < steps; ++k) look(lo + kGridStep * static_cast<double>(k));
}

}  // namespace

SmoothFidelity SmoothFidelity::quadratic(Vec y) {
  auto impl = std::make_shared<Impl>();
  impl->kind = FidelityKind::Quadratic;
  impl->branch.assign(static_cast<std::size_t>(y.size()), RowBranch::Interior);
  impl->y = std::move(y);
  return SmoothFidelity(std::move(impl));
}

SmoothFidelity SmoothFidelity::clipped_gaussian_nll(Vec y, double s, double theta) {
  if (!(s > 0.0)) throw std::invalid_argument("clipped fidelity: noise std must be positive");
  if (!(theta > 0.0)) throw std::invalid_argument("clipped fidelity: clip level must be positive");
  auto impl = std::make_shared<Impl>();
  impl->kind = FidelityKind::ClippedGaussianNll;
  impl->s = s;
  impl->theta = theta;
  impl->branch.resize(static_cast<std::size_t>(y.size()));
  for (Index i = 0; i < y.size(); ++i) {
    if (std::abs(y[i]) > theta + kBranchTol) {
      throw std::invalid_argument("clipped fidelity: observation " + std::to_string(i) +
                                  " lies outside [-theta, theta]");
    }
    if (y[i] >= theta - kBranchTol) {
      impl->branch[static_cast<std::size_t>(i)] = RowBranch::UpperClip;
    } else if (y[i] <= -theta + kBranchTol) {
      impl->branch[static_cast<std::size_t>(i)] = RowBranch::LowerClip;
    } else {
      impl->branch[static_cast<std::size_t>(i)] = RowBranch::Interior;
    }
  }
  impl->y = std::move(y);
  return SmoothFidelity(std::move(impl));
}

SmoothFidelity SmoothFidelity::extend(const Box& pi) const {
  if (impl_->kind == FidelityKind::Extended) {
    throw std::invalid_argument("extend: fidelity is already extended");
  }
  if (pi.dim() != dim()) throw std::invalid_argument("extend: box dimension mismatch");
  if ((pi.lower.array() > pi.upper.array()).any()) {
    throw std::invalid_argument("extend: empty box");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = FidelityKind::Extended;
  impl->y = impl_->y;
  impl->s = impl_->s;
  impl->theta = impl_->theta;
  impl->branch = impl_->branch;
  impl->base = impl_;
  impl->pi = pi;
  return SmoothFidelity(std::move(impl));
}

Index SmoothFidelity::dim() const { return impl_->y.size(); }
FidelityKind SmoothFidelity::kind() const { return impl_->kind; }
RowBranch SmoothFidelity::row_branch(Index i) const {
  return impl_->branch[static_cast<std::size_t>(i)];
}
double SmoothFidelity::noise_sigma() const { return impl_->s; }
double SmoothFidelity::clip_level() const { return impl_->theta; }

double SmoothFidelity::value(const Vec& u) const {
  if (u.size() != dim()) throw std::invalid_argument("fidelity value: dimension mismatch");
  double acc = 0.0;
  if (impl_->kind == FidelityKind::Extended) {
    for (Index i = 0; i < u.size(); ++i) acc += ext_value(*impl_, i, u[i]);
  } else {
    for (Index i = 0; i < u.size(); ++i) acc += row_value(*impl_, i, u[i]);
  }
  return acc;
}

Vec SmoothFidelity::grad(const Vec& u) const {
  if (u.size() != dim()) throw std::invalid_argument("fidelity grad: dimension mismatch");
  Vec g(u.size());
  if (impl_->kind == FidelityKind::Extended) {
    for (Index i = 0; i < u.size(); ++i) g[i] = ext_grad(*impl_, i, u[i]);
  } else {
    for (Index i = 0; i < u.size(); ++i) g[i] = row_grad(*impl_, i, u[i]);
  }
  return g;
}

double SmoothFidelity::row_curvature(Index i, double u) const {
  if (impl_->kind == FidelityKind::Extended) return ext_curv(*impl_, i, u);
  return row_curv(*impl_, i, u);
}

double SmoothFidelity::grad_lip_bound() const {
  if (impl_->kind == FidelityKind::Quadratic) return 1.0;
  return 1.0 / (impl_->s * impl_->s);
}

CurvatureProfile SmoothFidelity::curvature_profile() const {
  CurvatureProfile p;
  const Index m = dim();
  switch (impl_->kind) {
    case FidelityKind::Quadratic:
      p.lambda_diag = Vec::Ones(m);
      p.grad_lip = 1.0;
      return p;
    case FidelityKind::ClippedGaussianNll: {
      // Over the whole line, the saturated rows' curvature infimum is 0.
      const double interior = 1.0 / (impl_->s * impl_->s);
      p.lambda_diag = Vec::Zero(m);
      for (Index i = 0; i < m; ++i) {
        if (impl_->branch[static_cast<std::size_t>(i)] == RowBranch::Interior) {
          p.lambda_diag[i] = interior;
        }
      }
      p.grad_lip = interior;
      return p;
    }
    case FidelityKind::Extended:
      // Outside branches freeze endpoint curvatures, so the profile over the
      // whole line equals the base profile over the extension box.
      return SmoothFidelity(impl_->base).curvature_profile(impl_->pi);
  }
  throw std::logic_error("curvature_profile: unexpected kind");
}

CurvatureProfile SmoothFidelity::curvature_profile(const Box& domain) const {
  if (domain.dim() != dim()) throw std::invalid_argument("curvature_profile: box dim mismatch");
  const Impl& f = (impl_->kind == FidelityKind::Extended) ? *impl_->base : *impl_;
  CurvatureProfile p;
  p.lambda_diag = Vec::Zero(dim());
  p.grad_lip = 0.0;
  for (Index i = 0; i < dim(); ++i) {
    double cmin, cmax;
    if (f.kind == FidelityKind::Quadratic ||
        f.branch[static_cast<std::size_t>(i)] == RowBranch::Interior) {
      cmin = cmax = row_curv(f, i, domain.lower[i]);  // constant row curvature
    } else {
      scan_curvature(f, i, domain.lower[i], domain.upper[i], cmin, cmax);
    }
    p.lambda_diag[i] = cmin;
    p.grad_lip = std::max(p.grad_lip, cmax);
  }
  return p;
}

bool SmoothFidelity::is_coercive() const {
  switch (impl_->kind) {
    case FidelityKind::Quadratic:
      return true;
    case FidelityKind::ClippedGaussianNll:
      for (const RowBranch b : impl_->branch) {
        if (b != RowBranch::Interior) return false;  // tail rows flatten out
      }
      return true;
    case FidelityKind::Extended: {
      for (Index i = 0; i < dim(); ++i) {
        const RowBranch b = impl_->branch[static_cast<std::size_t>(i)];
        // Growth towards +inf: frozen curvature at the upper endpoint, or the
        // base row's own growth when the box is unbounded there.
        const bool up = std::isfinite(impl_->pi.upper[i])
                            ? row_curv(*impl_->base, i, impl_->pi.upper[i]) > 0.0
                            : b != RowBranch::UpperClip;
        const bool down = std::isfinite(impl_->pi.lower[i])
                              ? row_curv(*impl_->base, i, impl_->pi.lower[i]) > 0.0
                              : b != RowBranch::LowerClip;
        if (!up || !down) return false;
      }
      return true;
    }
  }
  throw std::logic_error("is_coercive: unexpected kind");
}

}  // namespace nrc
