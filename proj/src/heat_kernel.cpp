#include "diraclat/heat_kernel.hpp"

#include "diraclat/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace diraclat {

namespace {

constexpr double kInvSqrtPi = 0.56418958354775628694807945156077;  // 1/sqrt(pi)
constexpr double kFourPiPow32 = 44.546623974653656;                 // (4 pi)^{3/2}

// exp(x^2) - (2x/sqrt(pi)) sum_n (2x^2)^n / (2n+1)!!, all terms positive.
double erfcx_series(double x) {
  const double x2 = x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 200; ++n) {
    term *= 2.0 * x2 / (2.0 * n + 1.0);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return std::exp(x2) - 2.0 * x * kInvSqrtPi * sum;
}

// Laplace continued fraction x + (1/2)/(x + 1/(x + (3/2)/(x + ...))), modified Lentz.
double erfcx_continued_fraction(double x) {
  constexpr double tiny = 1e-300;
  double f = x;
  double c = f;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    const double a = 0.5 * k;
    d = x + a * d;
    d = d == 0.0 ? 1.0 / tiny : 1.0 / d;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return kInvSqrtPi / f;
}

// 1/(x sqrt(pi)) sum_n (-1)^n (2n-1)!! / (2x^2)^n, cut at the smallest term.
double erfcx_asymptotic(double x) {
  const double inv = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 60; ++n) {
    const double next = -term * (2.0 * n - 1.0) * inv;
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return kInvSqrtPi * sum / x;
}

}  // namespace

double erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) return 2.0 * std::exp(x * x) - erfcx(-x);
  if (x < 1.5) return erfcx_series(x);
  if (x <= 30.0) return erfcx_continued_fraction(x);
  if (std::isinf(x)) return 0.0;
  return erfcx_asymptotic(x);
}

HeatKernelTrace exact_single_delta_trace(double t, double g) {
  if (!(t > 0.0)) throw InvalidArgument("heat-kernel time must be > 0");
  if (!(g > 0.0)) throw InvalidArgument("single-delta trace requires g > 0");
  const double x = 4.0 * kPi * std::sqrt(t) / g;
  return {t, 0.5 * erfcx(x), TraceOrder::ExactSingleDelta};
}

HeatKernelTrace born0(double t, double volume) {
  if (!(t > 0.0)) throw InvalidArgument("heat-kernel time must be > 0");
  if (!(volume > 0.0)) throw InvalidArgument("volume must be > 0");
  return {t, volume / std::pow(4.0 * kPi * t, 1.5), TraceOrder::Born0};
}

HeatKernelTrace born1(double t, double g, int n_side) {
  if (!(t > 0.0)) throw InvalidArgument("heat-kernel time must be > 0");
  if (n_side < 1) throw InvalidArgument("n_side must be >= 1");
  const double sites = static_cast<double>(n_side) * static_cast<double>(n_side);
  return {t, 2.0 * sites * g / (kFourPiPow32 * std::sqrt(t)), TraceOrder::Born1};
}

HeatKernelTrace born1_per_site(double t, double g) {
  if (!(t > 0.0)) throw InvalidArgument("heat-kernel time must be > 0");
  return {t, g / (kFourPiPow32 * std::sqrt(t)), TraceOrder::Born1};
}

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw FitDegenerate("power-law fit needs >= 2 paired points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw FitDegenerate("power-law fit needs positive data");
    design(i, 0) = 1.0;
    design(i, 1) = std::log(x[k]);
    rhs[i] = std::log(y[k]);
  }
  if ((design.col(1).array() - design(0, 1)).abs().maxCoeff() == 0.0)
    throw FitDegenerate("power-law fit needs distinct abscissae");
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(rhs);
  PowerLawFit fit;
  fit.exponent = beta[1];
  fit.coefficient = std::exp(beta[0]);
  fit.residual = (design * beta - rhs).cwiseAbs().maxCoeff();
  fit.slot = 2.0 * fit.exponent + 3.0;
  fit.a_coefficient = fit.coefficient * kFourPiPow32;
  return fit;
}

std::map<std::string, PowerLawFit> hk_coefficient_report(std::span<const double> t_grid, double g,
                                                         int n_side, double volume) {
  if (t_grid.size() < 4) throw FitDegenerate("heat-kernel fit needs at least 4 proper times");
  for (double t : t_grid) {
    if (!(t > 0.0) || t > 0.1) {
      std::ostringstream os;
      os << "heat-kernel fit grid must lie in (0, 0.1], got t = " << t;
      throw FitDegenerate(os.str());
    }
  }
  std::vector<double> k0, k1, k1s, kex;
  for (double t : t_grid) {
    k0.push_back(born0(t, volume).value);
    k1.push_back(born1(t, g, n_side).value);
    k1s.push_back(born1_per_site(t, g).value);
    kex.push_back(exact_single_delta_trace(t, g).value);
  }
  std::map<std::string, PowerLawFit> report;
  report["born0"] = fit_power_law(t_grid, k0);
  report["born1"] = fit_power_law(t_grid, k1);
  report["born1_per_site"] = fit_power_law(t_grid, k1s);
  report["exact_single_delta"] = fit_power_law(t_grid, kex);
  return report;
}

}  // namespace diraclat
