#pragma once

#include "diraclat/model.hpp"

#include <Eigen/Core>

#include <array>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace diraclat {

/// Energy per lattice cell in units 1/a.
struct EnergyResult {
  double value = 0.0;
  double err_estimate = 0.0;
  std::map<std::string, double> diagnostics;
};

struct ThermalGrid {
  double Ta = 0.0;
  int n_max = 0;             ///< largest Matsubara index used at any quadrature node
  double tail_bound = 0.0;   ///< bound on the dropped part of Ta * sum_n
};

/// Fit of F(T) - E0 to c2 T^2 + c4 T^4.
struct LowTCoefficients {
  double c2 = 0.0;
  double c4 = 0.0;
  bool c4_valid = false;               ///< |c4 T^4| < 0.1 |c2 T^2| over the window
  std::array<double, 2> fit_window{};  ///< smallest and largest Ta
  double fit_residual = 0.0;           ///< max |data - fit|
  double propagated_error = 0.0;       ///< max quadrature error of the data
  double exponent = 0.0;               ///< slope of log |F - E0| against log T
};

/// F(T) - E0 on a list of temperatures, all evaluated on one set of nodes.
struct ThermalCorrections {
  std::vector<double> Ta;
  Eigen::ArrayXd delta;
  Eigen::ArrayXd err;
  EnergyResult vacuum;
};

/// The n = 0 Matsubara term and the rest of the sum, each with its own error.
struct MatsubaraSplit {
  EnergyResult zero_term;  ///< (T/2) int_BZ ln(1 - |h(0, q)|^2)
  EnergyResult remainder;  ///< T sum_{n >= 1} int_BZ ln(1 - |h(xi_n, q)|^2)
};

/// E0 = (1/2 pi) int_0^inf dxi int_BZ d^2q/(2pi)^2 ln(1 - |h(xi, q)|^2).
EnergyResult vacuum_energy(const LatticeSystem& sys, const Tolerances& tol = {});

/// F = Ta sum'_{n >= 0} int_BZ d^2q/(2pi)^2 ln(1 - |h(2 pi Ta n, q)|^2), half weight at n = 0.
std::pair<EnergyResult, ThermalGrid> free_energy(const LatticeSystem& sys, double Ta, const Tolerances& tol = {});

/// D(T) = F(T) - E0 computed directly per node (no subtraction of totals), to
/// relative accuracy tol.quad_rel_tol. A temperature that is an integer multiple
/// of a lower one in the list reuses its Matsubara frequencies.
ThermalCorrections thermal_corrections(const LatticeSystem& sys, std::span<const double> Ta,
                                       const Tolerances& tol = {});

/// Least-squares c2 T^2 + c4 T^4 on given data; never throws on a bad fit.
LowTCoefficients fit_low_T(std::span<const double> Ta, const Eigen::ArrayXd& delta, const Eigen::ArrayXd& err);

/// Requires every Ta * b <= 0.05. WindowTooNarrow below 4 points,
/// FitDegenerate when the residual exceeds 10x the propagated error.
LowTCoefficients low_T_coefficients(const LatticeSystem& sys, std::span<const double> window,
                                    const Tolerances& tol = {});

/// zeta'(0) = -int_BZ d^2q/(2pi)^2 ln(1 - |h(0, q)|^2), per cell.
double zeta_prime_zero(const LatticeSystem& sys, const Tolerances& tol = {});
EnergyResult zeta_prime_zero_result(const LatticeSystem& sys, const Tolerances& tol = {});

MatsubaraSplit matsubara_split(const LatticeSystem& sys, double Ta, const Tolerances& tol = {});

/// -(T/2) zeta' + a0 T^4 pi^2/90 - a_half T^3 zeta(3) / (4 pi^{3/2}) - a1 T^2 / 24.
double high_T_asymptote(double T, double zeta_prime, double a0, double a_half, double a1);

/// zeta(3) from (5/2) sum_k (-1)^{k+1} / (k^3 C(2k, k)).
double riemann_zeta3();

}  // namespace diraclat
