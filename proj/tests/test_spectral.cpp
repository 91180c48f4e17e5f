#include "diraclat/heat_kernel.hpp"
#include "diraclat/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace diraclat;

namespace {

Tolerances loose(double rel = 1e-6) {
  Tolerances tol;
  tol.quad_rel_tol = rel;
  return tol;
}

// zeta(3) = sum_{k <= K} k^-3 plus the Euler-Maclaurin tail 1/(2K^2) - 1/(2K^3) + 1/(4K^4) - 1/(12K^6) + ...
double zeta3_series() {
  const int K = 200;
  long double sum = 0.0L;
  for (int k = K; k >= 1; --k) sum += 1.0L / (static_cast<long double>(k) * k * k);
  const long double n = K;
  sum += 1.0L / (2 * n * n) - 1.0L / (2 * n * n * n) + 1.0L / (4 * n * n * n * n) - 1.0L / (12 * n * n * n * n * n * n);
  return static_cast<double>(sum);
}

}  // namespace

TEST_CASE("vacuum energy is negative and scales as g squared at weak coupling") {
  std::vector<double> gs{1e-2, 5e-3, 2.5e-3}, es;
  for (double g : gs) {
    const EnergyResult e = vacuum_energy(make_system(g, 1.0, Vec2::Zero()), loose());
    CHECK(e.value < 0.0);
    CHECK(e.err_estimate < 1e-5 * std::abs(e.value));
    es.push_back(std::abs(e.value));
  }
  const PowerLawFit fit = fit_power_law(gs, es);
  CHECK(fit.exponent == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("vacuum energy decreases in magnitude with separation") {
  double prev = std::numeric_limits<double>::infinity();
  for (double b : {2.0, 4.0, 8.0}) {
    const double e = std::abs(vacuum_energy(make_system(0.1, b, Vec2::Zero()), loose()).value);
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("energies are bitwise invariant under displacement symmetries") {
  const Tolerances tol = loose(1e-4);
  const Vec2 c(0.25, 0.1);
  const double e = vacuum_energy(make_system(0.1, 1.0, c), tol).value;
  CHECK(vacuum_energy(make_system(0.1, 1.0, -c), tol).value == e);
  CHECK(vacuum_energy(make_system(0.1, 1.0, c + Vec2(1.0, 0.0)), tol).value == e);
  const double f = free_energy(make_system(0.1, 1.0, c), 0.3, tol).first.value;
  CHECK(free_energy(make_system(0.1, 1.0, -c), 0.3, tol).first.value == f);
  CHECK(free_energy(make_system(0.1, 1.0, c + Vec2(1.0, 0.0)), 0.3, tol).first.value == f);
}

TEST_CASE("error estimates cover a tenfold tightening") {
  const LatticeSystem sys = make_system(0.1, 2.0, Vec2::Zero());
  const EnergyResult coarse = vacuum_energy(sys, loose(1e-5));
  const EnergyResult fine = vacuum_energy(sys, loose(1e-6));
  CHECK(std::abs(fine.value - coarse.value) < coarse.err_estimate);
}

TEST_CASE("free energy tends to the vacuum energy at low temperature") {
  const LatticeSystem sys = make_system(0.1, 5.0, Vec2::Zero());
  const Tolerances tol = loose(1e-5);
  const EnergyResult e0 = vacuum_energy(sys, tol);
  const auto [f, grid] = free_energy(sys, 1e-3, tol);
  CHECK(grid.n_max > 100);
  CHECK(std::abs(f.value - e0.value) <= std::max(3.0 * (f.err_estimate + e0.err_estimate), 1e-3 * std::abs(e0.value)));
}

TEST_CASE("high temperature: the n = 0 term carries the free energy") {
  const LatticeSystem sys = make_system(0.1, 1.0, Vec2::Zero());
  const Tolerances tol = loose();
  const double T = 10.0;
  const auto [f, grid] = free_energy(sys, T, tol);
  const MatsubaraSplit split = matsubara_split(sys, T, tol);
  CHECK(std::abs(f.value - split.zero_term.value) <= tol.matsubara_tail_tol + f.err_estimate);
  CHECK(std::abs(split.zero_term.value + split.remainder.value - f.value) < 1e-12 * std::abs(f.value));
  const double f2 = free_energy(sys, 2.0 * T, tol).first.value;
  CHECK(f2 / f.value == doctest::Approx(2.0).epsilon(1e-3));

  const double zp = zeta_prime_zero(sys, tol);
  CHECK(std::abs(f.value / T + 0.5 * zp) <= 1e-6 * std::abs(zp));
  CHECK(high_T_asymptote(T, zp, 0.0, 0.0, 0.0) < 0.0);
}

TEST_CASE("zeta prime decreases in magnitude with separation") {
  double prev = std::numeric_limits<double>::infinity();
  for (double b : {2.0, 4.0, 8.0}) {
    const double z = std::abs(zeta_prime_zero(make_system(0.1, b, Vec2::Zero()), loose()));
    CHECK(z < prev);
    prev = z;
  }
}

TEST_CASE("high-temperature asymptote arithmetic and zeta(3)") {
  CHECK(high_T_asymptote(1.5, 0.0, 0.0, 0.0, 0.0) == 0.0);
  CHECK(high_T_asymptote(3.0, 2.0, 0.0, 0.0, 0.0) == doctest::Approx(-3.0));
  CHECK(high_T_asymptote(2.0, 0.0, 1.0, 0.0, 0.0) == doctest::Approx(16.0 * kPi * kPi / 90.0));
  CHECK(high_T_asymptote(2.0, 0.0, 0.0, 0.0, 1.0) == doctest::Approx(-4.0 / 24.0));
  const double half = high_T_asymptote(2.0, 0.0, 0.0, 1.0, 0.0);
  CHECK(half == doctest::Approx(-8.0 * riemann_zeta3() / (4.0 * std::pow(kPi, 1.5))));
  CHECK(std::abs(riemann_zeta3() - zeta3_series()) < 1e-12);
}

TEST_CASE("low-temperature fit recovers synthetic coefficients") {
  std::vector<double> T;
  for (int i = 0; i < 6; ++i) T.push_back(1e-3 * std::pow(10.0, i / 5.0));
  Eigen::ArrayXd d(6), err = Eigen::ArrayXd::Constant(6, 1e-18);
  for (int i = 0; i < 6; ++i) d[i] = -3e-4 * T[static_cast<std::size_t>(i)] * T[static_cast<std::size_t>(i)] +
                                     2e-2 * std::pow(T[static_cast<std::size_t>(i)], 4);
  const LowTCoefficients fit = fit_low_T(T, d, err);
  CHECK(fit.c2 == doctest::Approx(-3e-4).epsilon(1e-9));
  CHECK(fit.c4 == doctest::Approx(2e-2).epsilon(1e-6));
  CHECK(fit.exponent == doctest::Approx(2.0).epsilon(0.01));
  CHECK(fit.fit_window[0] == T.front());
  CHECK(fit.fit_window[1] == T.back());

  // a pure T^3 law is not a T^2 + T^4 law
  for (int i = 0; i < 6; ++i) d[i] = -0.2 * std::pow(T[static_cast<std::size_t>(i)], 3);
  const LowTCoefficients cubic = fit_low_T(T, d, err);
  CHECK(cubic.exponent == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(cubic.fit_residual > 10.0 * cubic.propagated_error);
}

TEST_CASE("low-temperature window preconditions") {
  const LatticeSystem sys = make_system(0.1, 5.0, Vec2::Zero());
  const std::vector<double> three{1e-3, 2e-3, 4e-3};
  CHECK_THROWS_AS(low_T_coefficients(sys, three), WindowTooNarrow);
  const std::vector<double> hot{1e-3, 2e-3, 4e-3, 2e-2};
  CHECK_THROWS_AS(low_T_coefficients(sys, hot), InvalidArgument);
}

TEST_CASE("thermal corrections: shared Matsubara grids and coupling dependence") {
  const LatticeSystem sys = make_system(0.1, 1.0, Vec2::Zero());
  const Tolerances tol = loose(1e-5);
  const std::vector<double> single{0.05};
  const std::vector<double> pair{0.025, 0.05};
  const ThermalCorrections a = thermal_corrections(sys, single, tol);
  const ThermalCorrections b = thermal_corrections(sys, pair, tol);
  CHECK(a.delta[0] < 0.0);
  CHECK(b.delta[1] == doctest::Approx(a.delta[0]).epsilon(1e-5));
  CHECK(std::abs(b.delta[0]) < std::abs(b.delta[1]));

  // F - E0 obtained as a difference of two independent totals
  const double f = free_energy(sys, 0.05, tol).first.value;
  CHECK(std::abs((f - a.vacuum.value) - a.delta[0]) < 10.0 * tol.quad_rel_tol * std::abs(a.vacuum.value));

  // weaker coupling lowers |F - E0|, but not like g^2: the q -> 0 modes reflect
  // completely at any g and keep a coupling-independent part
  const ThermalCorrections weak = thermal_corrections(make_system(0.01, 1.0, Vec2::Zero()), single, tol);
  CHECK(weak.delta[0] < 0.0);
  CHECK(std::abs(weak.delta[0]) < 0.2 * std::abs(a.delta[0]));
  CHECK(std::abs(weak.delta[0]) > 0.01 * std::abs(a.delta[0]));
}
