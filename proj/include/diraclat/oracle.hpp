#pragma once

#include "diraclat/model.hpp"
#include "diraclat/spectral.hpp"

#include <Eigen/Core>

#include <span>

namespace diraclat {

/// n_side x n_side sites per sheet: B at (n, 0), A at (n + c, b), with c taken in [-1/2, 1/2).
struct FiniteLatticeSpec {
  int n_side = 1;
  LatticeSystem sys = make_system(0.1, 1.0, Vec2::Zero());
};

/// Phi = 1/g on the diagonal plus G0 between distinct sites of one sheet,
/// G_AB = G0 between the sheets, G0(r) = exp(-xi r) / (4 pi r).
struct GreenMatrixSet {
  Eigen::MatrixXd Phi_A;
  Eigen::MatrixXd Phi_B;
  Eigen::MatrixXd G_AB;
};

GreenMatrixSet green_matrices(const FiniteLatticeSpec& spec, double xi);

/// ln det(1 - Phi_A^{-1} G_AB Phi_B^{-1} G_AB^T).
double tgtg_log_det(const GreenMatrixSet& m, double xi = 0.0);

struct FiniteLatticeEnergy {
  EnergyResult total;
  EnergyResult per_cell;  ///< total / n_side^2
};

/// (1/2 pi) int_0^inf dxi ln det(1 - M(xi)).
FiniteLatticeEnergy finite_lattice_energy(const FiniteLatticeSpec& spec, const Tolerances& tol = {});

/// Ta sum'_{n >= 0} ln det(1 - M(2 pi Ta n)).
FiniteLatticeEnergy matsubara_finite_lattice(const FiniteLatticeSpec& spec, double Ta, const Tolerances& tol = {});

/// One delta per sheet: (1/2 pi) int dxi ln(1 - A^2 exp(-2 xi b)) = -Li2(A^2) / (4 pi b), A = g / (4 pi b).
double two_center_energy(double g, double b);

enum class LifshitzReflection {
  DeltaSheet,  ///< r = g / (g + 2 Gamma), the exact reflection of a uniform sheet of strength g/a^2
  Bare,        ///< r = g / (2 Gamma), the first-order coefficient
};

/// (1/4 pi^2) int_0^inf rho^2 ln(1 - r^2 exp(-2 rho b)) drho, the plate energy per area a^2
/// written in polar coordinates (rho^2 = xi^2 + k^2).
/// NonPhysicalKernel when r^2 exp(-2 rho b) reaches 1 somewhere; with the bare
/// coefficient this always happens near rho = 0.
EnergyResult lifshitz_plates(const LatticeSystem& sys, const Tolerances& tol = {},
                             LifshitzReflection reflection = LifshitzReflection::DeltaSheet);

/// Weak-coupling limit -g^2 / (32 pi^2 b).
double lifshitz_leading_order(double g, double b);

/// Two-point extrapolation in 1/n: (n2 E2 - n1 E1) / (n2 - n1).
double richardson(int n1, double e1, int n2, double e2);

/// Polynomial extrapolation in 1/n through every (n_i, E_i) to 1/n = 0 (Neville
/// tableau); with two sizes this is richardson().
double richardson_tableau(std::span<const int> n, std::span<const double> e);

}  // namespace diraclat
