#pragma once

#include "diraclat/model.hpp"

#include <cstddef>

namespace diraclat {

enum class SumMethod { Direct, Ewald };

/// S(xi, q) = sum over n in Z^2 \ {0} of exp(-xi |n|) cos(q.n) / |n|.
struct ScreenedSum {
  double value = 0.0;
  double err_estimate = 0.0;  ///< truncation bound plus rounding estimate
  SumMethod method = SumMethod::Direct;
  std::size_t terms = 0;
};

/// Smallest screening accepted by direct_sum.
inline constexpr double kDirectMinXi = 0.5;
/// Above this screening the production path sums directly.
inline constexpr double kDirectPreferredXi = 5.0;
inline constexpr double kDefaultEta = 1.7724538509055160273;  // sqrt(pi)
inline constexpr double kMinEta = 0.5;
inline constexpr double kMaxEta = 4.0;

/// Shell-by-shell summation in increasing |n|^2 (lexicographic tie-break).
/// Requires xi >= kDirectMinXi, otherwise ConvergenceTooSlow.
ScreenedSum direct_sum(double xi, const Vec2& q, double tol);

/// Ewald split of exp(-xi r)/r at splitting parameter eta in [kMinEta, kMaxEta]:
/// an erfc-screened real-space sum plus the reciprocal images
/// (2 pi / kappa) erfc(kappa / 2 eta), kappa = sqrt(xi^2 + |q + 2 pi N|^2),
/// minus the analytic on-site term. Throws EwaldSingular at xi = 0, q = 0 (mod 2 pi).
ScreenedSum ewald_sum(double xi, const Vec2& q, double eta, double tol);

/// Production dispatcher: Ewald below kDirectPreferredXi, direct above.
ScreenedSum screened_sum(double xi, const Vec2& q, double tol);

/// phi~(xi, q) = 1/g + S(xi, q) / (4 pi): the Bloch transform of the
/// renormalized single-sheet matrix Phi_nn' = delta_nn'/g + G0(a_n - a_n').
double phi_tilde(const LatticeSystem& sys, double xi, const Vec2& q, const Tolerances& tol = {});

}  // namespace diraclat
