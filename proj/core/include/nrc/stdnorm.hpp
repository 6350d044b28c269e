#pragma once

namespace nrc::stdnorm {

/// log of the standard normal upper tail Q(z) = ∫_z^∞ φ(t) dt, accurate for
/// all z. Uses erfc up to z = 8 and the asymptotic divergent series beyond,
/// so there is no underflow even for very large z.
double log_tail(double z);

/// Hazard rate φ(z)/Q(z).
double hazard(double z);

/// Derivative of the hazard rate, h(z)(h(z) - z) ∈ (0, 1). Evaluated in a
/// cancellation-free form for large z.
double hazard_slope(double z);

}  // namespace nrc::stdnorm
