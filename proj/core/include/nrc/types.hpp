#pragma once

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <string>

namespace nrc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown when a dense diagnostic would exceed the materialization cap.
class DiagnosticUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box, possibly with infinite bounds on some coordinates.
struct Box {
  Vec lower;
  Vec upper;

  static Box uniform(Index n, double lo, double hi);

  Index dim() const { return lower.size(); }
  bool bounded() const;
  bool contains(const Vec& x, double tol) const;
  Vec project(const Vec& x) const;
};

}  // namespace nrc
