#pragma once

#include "diraclat/model.hpp"

#include <complex>
#include <cstddef>

namespace diraclat {

/// Inter-lattice reflection kernel at imaginary frequency xi and quasi-momentum q.
struct KernelValue {
  std::complex<double> h{0.0, 0.0};
  double h_abs2 = 0.0;
  std::size_t n_images = 0;
  double err_estimate = 0.0;  ///< absolute bound on |h - h_exact|
};

/// Gamma~ = sqrt(xi^2 + |q + 2 pi N|^2).
double axial_wavenumber(double xi, const Vec2& q, const IVec2& N);

/// h = -sum_N exp(-Gamma~_N b) exp(i 2 pi N.c) / (2 Gamma~_N phi~(xi, q)).
///
/// phi~ is evaluated once, images are summed in increasing Gamma~ over the
/// square shells |N|_inf <= L with L >= 1, and L grows until the bound on the
/// discarded shells is below sum_tol times min(1, |leading term|).
/// Throws GammaPointSingular at xi = 0, q = 0 and PhiTildePole when phi~
/// vanishes within its numerical resolution.
KernelValue reflection_kernel(const LatticeSystem& sys, double xi, const Vec2& q, const Tolerances& tol = {});

/// ln(1 - |h|^2); NonPhysicalKernel once |h|^2 >= 1.
double kernel_log_integrand(const LatticeSystem& sys, double xi, const Vec2& q, const Tolerances& tol = {});

}  // namespace diraclat
