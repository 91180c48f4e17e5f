// Acceptance suite: one PASS/FAIL line per criterion with the measured value,
// its tolerance and the wall time against the time budget.
//
//   acceptance            run every criterion
//   acceptance 2 5        run criteria 2 and 5 only

#include "diraclat/app.hpp"
#include "diraclat/heat_kernel.hpp"
#include "diraclat/lattice_sums.hpp"
#include "diraclat/oracle.hpp"
#include "diraclat/scattering.hpp"
#include "diraclat/spectral.hpp"
#include "support/erfcx_oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace diraclat;

namespace {

struct Outcome {
  bool within = false;  // measured value inside the tolerance
  double measured = 0.0;
  double tolerance = 0.0;
  std::string note;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome weak_coupling_lifshitz() {
  const LatticeSystem sys = make_system(0.01, 5.0, Vec2::Zero());
  const EnergyResult e0 = vacuum_energy(sys);
  const EnergyResult plates = lifshitz_plates(sys);
  const double rel = std::abs(e0.value / plates.value - 1.0);
  return {rel <= 0.01, rel, 0.01,
          "E0 " + fmt("%.10e", e0.value) + ", plates " + fmt("%.10e", plates.value) + " (relative gap)"};
}

Outcome finite_lattice_oracle() {
  const LatticeSystem sys = make_system(0.1, 1.0, Vec2::Zero());
  const std::vector<int> sizes{3, 5, 7, 9};
  std::vector<double> per_cell;
  std::ostringstream seq;
  for (int n : sizes) {
    per_cell.push_back(finite_lattice_energy({n, sys}).per_cell.value);
    seq << (n == 3 ? "" : ", ") << n << ": " << fmt("%.6e", per_cell.back());
  }
  const double e0 = vacuum_energy(sys).value;
  const double tableau = richardson_tableau(sizes, per_cell);
  const double two_point = richardson(7, per_cell[2], 9, per_cell[3]);
  const double rel = std::abs(tableau / e0 - 1.0);
  return {rel <= 0.02, rel, 0.02,
          "per cell {" + seq.str() + "}, extrapolated " + fmt("%.6e", tableau) + " vs E0 " + fmt("%.6e", e0) +
              "; two-point (7, 9) alone deviates by " + fmt("%.2f%%", 100.0 * std::abs(two_point / e0 - 1.0))};
}

Outcome two_center_reduction() {
  const LatticeSystem sys = make_system(0.1, 5.0, Vec2::Zero());
  const double e = finite_lattice_energy({1, sys}).total.value;
  const double ref = two_center_energy(0.1, 5.0);
  const double d = std::abs(e - ref);
  return {d <= 1e-8, d, 1e-8, "n_side 1 " + fmt("%.12e", e) + " vs closed form " + fmt("%.12e", ref)};
}

Outcome ewald_correctness() {
  double worst = 0.0;
  for (double xi : {0.5, 1.0, 2.0, 5.0})
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const Vec2 q(-kPi + kTwoPi * (i + 0.5) / 5.0, -kPi + kTwoPi * (j + 0.5) / 5.0);
        worst = std::max(worst, std::abs(ewald_sum(xi, q, kDefaultEta, 1e-12).value - direct_sum(xi, q, 1e-12).value));
      }
  double eta_worst = 0.0;
  for (double xi : {0.0, 0.5, 1.0, 2.0, 5.0})
    for (const Vec2& q : {Vec2(1.0, 0.0), Vec2(kPi, kPi), Vec2(0.3, -2.0), Vec2(0.05, 0.02)}) {
      const double a = ewald_sum(xi, q, kDefaultEta, 1e-12).value;
      const double b = ewald_sum(xi, q, 2.0 * kDefaultEta, 1e-12).value;
      eta_worst = std::max(eta_worst, std::abs(a - b));
    }
  // both parts must hold; report the first against 2e-12 and the second in the note
  return {worst <= 2e-12 && eta_worst <= 1e-10, worst, 2e-12,
          "max |ewald - direct| over 4 xi x 25 zone points; eta vs 2 eta " + fmt("%.2e", eta_worst) +
              " (tolerance 1e-10)"};
}

Outcome low_temperature_law() {
  // window Ta b = 0.05 2^(-j/2), j = 0..6, inside [0.005, 0.05]; halving the
  // upper edge keeps j = 2..6. One call evaluates both on nested grids.
  const double b = 5.0;
  const LatticeSystem sys = make_system(0.1, b, Vec2::Zero());
  std::vector<double> T;
  for (int j = 0; j <= 6; ++j) T.push_back(0.05 * std::pow(2.0, -0.5 * j) / b);
  Tolerances tol;
  tol.quad_rel_tol = 1e-5;
  const ThermalCorrections d = thermal_corrections(sys, T, tol);

  const std::vector<double> window(T.begin(), T.end());
  const std::vector<double> halved(T.begin() + 2, T.end());
  const LowTCoefficients fw = fit_low_T(window, d.delta, d.err);
  const LowTCoefficients fh = fit_low_T(halved, d.delta.tail(5), d.err.tail(5));
  const double c2_shift = std::abs(fh.c2 / fw.c2 - 1.0);
  const double local_low = std::log(d.delta[6] / d.delta[5]) / std::log(T[6] / T[5]);
  const double local_high = std::log(d.delta[1] / d.delta[0]) / std::log(T[1] / T[0]);
  const double dev = std::abs(fw.exponent - 2.0);

  std::ostringstream note;
  note << "exponent " << fmt("%.4f", fw.exponent) << " (window), " << fmt("%.4f", fh.exponent) << " (halved); c2 "
       << fmt("%.5e", fw.c2) << " -> " << fmt("%.5e", fh.c2) << " shift " << fmt("%.1f%%", 100.0 * c2_shift)
       << " (tolerance 2%); local slope " << fmt("%.3f", local_high) << " at Ta b = 0.05 rising to "
       << fmt("%.3f", local_low) << " at Ta b = 0.0063; D/T^3 at the lowest T " << fmt("%.4f", d.delta[6] / std::pow(T[6], 3))
       << "; T^2 + T^4 residual " << fmt("%.2e", fw.fit_residual) << " vs quadrature error "
       << fmt("%.2e", fw.propagated_error) << " (measured value: |exponent - 2|)";
  return {dev <= 0.1 && c2_shift <= 0.02, dev, 0.1, note.str()};
}

Outcome high_temperature_law() {
  const double b = 1.0;
  const LatticeSystem sys = make_system(0.1, b, Vec2::Zero());
  const std::vector<double> T{5.0, 5.5, 6.0};
  Tolerances tol;
  tol.quad_rel_tol = 1e-6;
  double worst = 0.0;
  std::vector<double> rem;
  for (double t : T) {
    const MatsubaraSplit s = matsubara_split(sys, t, tol);
    const double f = s.zero_term.value + s.remainder.value;
    worst = std::max(worst, std::abs(s.remainder.value / f));
    rem.push_back(std::abs(s.remainder.value));
  }
  const double rate = std::log(rem[0] / rem[2]) / (T[2] - T[0]);
  const double need = 0.9 * 4.0 * kPi * b;
  return {worst <= 1e-6 && rate >= need, worst, 1e-6,
          "max |F - n0 term| / |F| over Ta b in {5, 5.5, 6}; remainder decay rate " + fmt("%.4f", rate) +
              " (required >= " + fmt("%.4f", need) + ")"};
}

Outcome heat_kernel_consistency() {
  const double exact = exact_single_delta_trace(1.0, 0.01).value;
  const double born = 0.01 / (8.0 * std::pow(kPi, 1.5));
  const double rel = std::abs(exact / born - 1.0);
  double worst = 0.0;
  for (int i = 0; i <= 60; ++i) {
    const double x = 0.5 * i;
    worst = std::max(worst, std::abs(erfcx(x) - testing::erfcx_oracle(x)));
  }
  return {rel <= 0.01 && worst <= 1e-12, rel, 0.01,
          "exact " + fmt("%.8e", exact) + " vs g/(8 pi^1.5) " + fmt("%.8e", born) + "; erfcx vs quadrature on [0, 30] " +
              fmt("%.2e", worst) + " (tolerance 1e-12)"};
}

Outcome zero_frequency_limit() {
  const double b = 5.0;
  const LatticeSystem sys = make_system(1.0, b, Vec2::Zero());
  auto ratio = [&](double q) { return reflection_kernel(sys, 0.0, Vec2(q, 0.0)).h_abs2 / std::exp(-2.0 * q * b); };
  const double r = ratio(1e-3);
  const double dev = std::abs(r - 1.0);
  return {dev <= 0.01, dev, 0.01,
          "g = 1: |h|^2 e^{2|q|b} = " + fmt("%.6f", ratio(1e-2)) + ", " + fmt("%.6f", r) + ", " + fmt("%.6f", ratio(1e-4)) +
              " at |q| = 1e-2, 1e-3, 1e-4"};
}

Outcome symmetry_and_determinism() {
  // bit patterns, not accuracy, are under test here
  Tolerances tol;
  tol.quad_rel_tol = 1e-2;
  const Vec2 c(0.25, 0.1);
  const std::vector<Vec2> images{c, -c, c + Vec2(1.0, 0.0)};
  std::vector<double> e0, f;
  for (const Vec2& v : images) {
    const LatticeSystem sys = make_system(0.1, 5.0, v);
    e0.push_back(vacuum_energy(sys, tol).value);
    f.push_back(free_energy(sys, 0.5, tol).first.value);
  }
  int mismatches = 0;
  for (std::size_t i = 1; i < images.size(); ++i) mismatches += (e0[i] != e0[0]) + (f[i] != f[0]);

  app::RunConfig cfg;
  cfg.task = "free-energy";
  cfg.g_over_a = 0.1;
  cfg.b_over_a = 5.0;
  cfg.c_over_a = c;
  cfg.Ta_sweep = {0.2, 0.5, 1.0};
  cfg.tol = tol;
  cfg.format = app::Format::Json;
  std::ostringstream a, b, log;
  const int ca = app::execute(cfg, a, log);
  const int cb = app::execute(cfg, b, log);
  const bool same_bytes = ca == 0 && cb == 0 && a.str() == b.str() && !a.str().empty();
  mismatches += same_bytes ? 0 : 1;
  return {mismatches == 0, static_cast<double>(mismatches), 0.0,
          "bitwise mismatches among E0, F under c -> -c, c + (1, 0), plus repeated JSON output (" +
              std::string(same_bytes ? "identical" : "different") + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "weak-coupling Lifshitz agreement", 60.0, weak_coupling_lifshitz},
      {2, "finite-lattice oracle", 300.0, finite_lattice_oracle},
      {3, "two-center reduction", 5.0, two_center_reduction},
      {4, "Ewald correctness", 10.0, ewald_correctness},
      {5, "low-temperature law", 600.0, low_temperature_law},
      {6, "high-temperature law", 120.0, high_temperature_law},
      {7, "heat-kernel consistency", 5.0, heat_kernel_consistency},
      {8, "zero-frequency reflection limit", 5.0, zero_frequency_limit},
      {9, "symmetry and determinism", 30.0, symmetry_and_determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const Error& e) {
      o.note = std::string("error ") + to_string(e.kind()) + ": " + e.what();
    } catch (const std::exception& e) {
      o.note = std::string("error: ") + e.what();
    }
    const double elapsed = seconds_since(t0);
    const bool pass = o.within && elapsed <= c.budget_s;
    failures += pass ? 0 : 1;
    std::printf("%s  [%d] %-34s measured %.3e  tolerance %.1e  runtime %.1f s (budget %.0f s)  %s\n",
                pass ? "PASS" : "FAIL", c.id, c.name, o.measured, o.tolerance, elapsed, c.budget_s, o.note.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
