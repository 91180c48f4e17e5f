#pragma once

#include <map>
#include <span>
#include <string>

namespace diraclat {

/// Scaled complementary error function exp(x^2) erfc(x).
///
/// Finite for every representable x >= 0 (no intermediate overflow). For
/// x < 0 the reflection exp(x^2) (2 - erfc(|x|)) is used, which overflows once
/// x^2 exceeds the exponent range, as the function does.
double erfcx(double x);

enum class TraceOrder { ExactSingleDelta, Born0, Born1 };

/// Heat-kernel trace contribution at proper time t (units a^2).
struct HeatKernelTrace {
  double t = 0.0;
  double value = 0.0;
  TraceOrder order = TraceOrder::Born0;
};

/// Non-volume part of the trace for one renormalized 3D delta of coupling g:
/// 1/2 exp(16 pi^2 t / g^2) erfc(4 pi sqrt(t) / g), evaluated as 1/2 erfcx(4 pi sqrt(t)/g).
HeatKernelTrace exact_single_delta_trace(double t, double g);

/// Free trace V / (4 pi t)^{3/2}.
HeatKernelTrace born0(double t, double volume);

/// First Born iterate of the two-sheet system, 2 N^2 g / ((4 pi)^{3/2} sqrt(t)),
/// with N = n_side sites along each edge of a sheet.
HeatKernelTrace born1(double t, double g, int n_side);

/// First Born iterate of a single delta centre, g / ((4 pi)^{3/2} sqrt(t)).
HeatKernelTrace born1_per_site(double t, double g);

/// Least-squares fit of log K against log t.
///
/// `slot` is n in the small-t expansion (4 pi t)^{-3/2} sum_n t^{n/2} a_{n/2},
/// i.e. n = 2 exponent + 3, and `a_coefficient` the matching a_{n/2}.
struct PowerLawFit {
  double exponent = 0.0;
  double coefficient = 0.0;
  double slot = 0.0;
  double a_coefficient = 0.0;
  double residual = 0.0;  ///< max |log K - fit| over the grid
};

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

/// Fits each implemented trace on t_grid (0 < t <= 0.1, at least 4 points).
/// Keys: "born0" (unit volume or `volume`), "born1", "born1_per_site",
/// "exact_single_delta".
std::map<std::string, PowerLawFit> hk_coefficient_report(std::span<const double> t_grid, double g,
                                                         int n_side, double volume = 1.0);

}  // namespace diraclat
