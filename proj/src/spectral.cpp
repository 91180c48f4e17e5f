#include "diraclat/spectral.hpp"

#include "diraclat/heat_kernel.hpp"
#include "diraclat/quadrature.hpp"
#include "diraclat/scattering.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

namespace diraclat {

namespace {

// Smallest |q| resolved around the Gamma point; the excluded disc is bounded analytically.
constexpr double kRhoMin = 1e-6;
constexpr double kRhoRatio = 8.0;
constexpr int kMaxMatsubara = 50'000'000;

struct Domain {
  double lo;
  double hi;
  double weight;
};

// Maps c onto a representative with the same energy (c_i -> -c_i and c1 <-> c2 are
// symmetries of the integral) and picks the matching irreducible part of the zone.
LatticeSystem canonical_system(const LatticeSystem& sys, Domain& domain) {
  std::array<std::int64_t, 2> t = sys.c_ticks();
  for (auto& v : t) v = std::min(v, kDisplacementTicks - v);
  if (t[0] > t[1]) std::swap(t[0], t[1]);
  auto special = [](std::int64_t v) { return v == 0 || v == kDisplacementTicks / 2; };
  if (special(t[0]) && special(t[1])) {
    domain = t[0] == t[1] ? Domain{0.0, 0.25 * kPi, 8.0} : Domain{0.0, 0.5 * kPi, 4.0};
  } else {
    domain = Domain{0.0, kPi, 2.0};
  }
  const double k = static_cast<double>(kDisplacementTicks);
  return make_system(sys.g_over_a(), sys.b_over_a(),
                     Vec2(static_cast<double>(t[0]) / k, static_cast<double>(t[1]) / k));
}

std::vector<double> radial_breakpoints(double rho_max) {
  std::vector<double> bp{kRhoMin};
  for (double r = kRhoMin * kRhoRatio; r < rho_max; r *= kRhoRatio) bp.push_back(r);
  bp.push_back(rho_max);
  return bp;
}

// Polar quadrature over the irreducible domain, normalized as int d^2q / (2 pi)^2 over the zone.
template <class V, class F>
QuadResult<V> integrate_bz(const Domain& d, F&& f, double rel, double abs, const V& like) {
  const double norm = d.weight / (kTwoPi * kTwoPi);
  const double abs_raw = abs / norm;
  std::vector<double> theta_bp{d.lo};
  for (double t = d.lo + 0.25 * kPi; t < d.hi - 1e-12; t += 0.25 * kPi) theta_bp.push_back(t);
  theta_bp.push_back(d.hi);

  const QuadOptions rho_opt{0.3 * abs_raw / (d.hi - d.lo), 0.3 * rel, 400, false};
  auto theta_integrand = [&](double theta) -> Sample<V> {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double rho_max = kPi / std::max(std::abs(c), std::abs(s));
    auto rho_integrand = [&](double rho) -> Sample<V> {
      Sample<V> v = f(Vec2(rho * c, rho * s));
      return Sample<V>{v.value * rho, v.error * rho, v.evals};
    };
    const auto bp = radial_breakpoints(rho_max);
    QuadResult<V> r = integrate<V>(rho_integrand, std::span<const double>(bp), rho_opt, like);
    // disc rho < kRhoMin: |int rho f| <= rho_min^2 |f(rho_min)| for the logarithmic growth at Gamma
    Sample<V> edge = f(Vec2(kRhoMin * c, kRhoMin * s));
    V err = r.error + kRhoMin * kRhoMin * (quad_detail::vabs(edge.value) + edge.error);
    return Sample<V>{r.value, err, r.evals + edge.evals};
  };
  const QuadOptions theta_opt{abs_raw, rel, 200, true};
  QuadResult<V> out = integrate<V>(theta_integrand, std::span<const double>(theta_bp), theta_opt, like);
  out.value = out.value * norm;
  out.error = out.error * norm;
  return out;
}

// int_0^inf dxi ln(1 - |h|^2) at fixed q on xi = u / (2b (1 - u)).
Sample<double> frequency_integral(const LatticeSystem& sys, const Vec2& q, const Tolerances& tol, double rel) {
  const HalfLineMap map{0.5 / sys.b_over_a()};
  const double u_q = map.u(q.norm());
  std::vector<double> bp{0.0};
  if (u_q > 0.0 && u_q < 1.0) bp.push_back(u_q);
  bp.push_back(1.0);
  auto integrand = [&](double u) {
    const double xi = map.x(u);
    const double f = kernel_log_integrand(sys, xi, q, tol);
    return f == 0.0 ? 0.0 : f * map.jacobian(u);
  };
  const QuadOptions opt{0.0, rel, 300, false};
  const QuadResult<double> r = integrate(integrand, std::span<const double>(bp), opt);
  return Sample<double>{r.value, r.error, r.evals};
}

struct MatsubaraAtQ {
  double sum = 0.0;   // sum'_n f_n (without the factor T)
  double tail = 0.0;  // geometric estimate of the dropped terms
  int n_max = 0;
  std::size_t evals = 0;
};

// term(n) returns f(2 pi T n, q); the stopping rule is shared by every caller.
template <class Term>
MatsubaraAtQ matsubara_terms(Term&& term, const Vec2& q, double T, const Tolerances& tol, int n_start) {
  MatsubaraAtQ out;
  CompensatedSum sum;
  double prev = 0.0;
  for (int n = n_start;; ++n) {
    if (n > kMaxMatsubara) {
      std::ostringstream os;
      os << "Matsubara sum not converged after " << kMaxMatsubara << " terms at Ta = " << T;
      throw QuadratureNotConverged(os.str(), SamplePoint{kTwoPi * T * n, q});
    }
    const double f = term(n, out.evals);
    sum.add(n == 0 ? 0.5 * f : f);
    out.n_max = n;
    if (f == 0.0) {
      out.tail = 0.0;
      break;
    }
    if (n > n_start && prev != 0.0) {
      const double r = f / prev;
      if (r < 1.0) {
        const double tail = std::abs(f) * r / (1.0 - r);
        if (tail <= 1e-15 * std::abs(sum.value()) && T * tail <= tol.matsubara_tail_tol) {
          out.tail = tail;
          break;
        }
      }
    }
    prev = f;
  }
  out.sum = sum.value();
  return out;
}

MatsubaraAtQ matsubara_at_q(const LatticeSystem& sys, const Vec2& q, double T, const Tolerances& tol,
                            int n_start) {
  auto term = [&](int n, std::size_t& evals) {
    ++evals;
    return kernel_log_integrand(sys, kTwoPi * T * n, q, tol);
  };
  return matsubara_terms(term, q, T, tol, n_start);
}

// Temperatures that are integer multiples of a lower one reuse its frequency grid:
// base[j] is the lowest such temperature and stride[j] the multiple.
struct SharedGrid {
  std::vector<std::size_t> base;
  std::vector<int> stride;
};

SharedGrid shared_matsubara_grid(std::span<const double> Ta) {
  SharedGrid grid;
  grid.base.resize(Ta.size());
  grid.stride.assign(Ta.size(), 1);
  for (std::size_t j = 0; j < Ta.size(); ++j) {
    grid.base[j] = j;
    for (std::size_t i = 0; i < Ta.size(); ++i) {
      if (!(Ta[i] < Ta[grid.base[j]])) continue;
      const double ratio = Ta[j] / Ta[i];
      const double k = std::round(ratio);
      if (k >= 2.0 && k <= 1024.0 && std::abs(ratio - k) <= 1e-12 * k) {
        grid.base[j] = i;
        grid.stride[j] = static_cast<int>(k);
      }
    }
  }
  return grid;
}

void require_converged(bool converged, const char* what) {
  if (!converged) throw QuadratureNotConverged(std::string(what) + ": adaptive quadrature hit its interval limit");
}

double max_of(const Eigen::ArrayXd& v) { return v.size() ? v.maxCoeff() : 0.0; }

}  // namespace

EnergyResult vacuum_energy(const LatticeSystem& sys, const Tolerances& tol) {
  tol.validate();
  Domain domain;
  const LatticeSystem canon = canonical_system(sys, domain);
  const double inner_rel = 0.1 * tol.quad_rel_tol;
  auto f = [&](const Vec2& q) { return frequency_integral(canon, q, tol, inner_rel); };
  const QuadResult<double> r = integrate_bz<double>(domain, f, tol.quad_rel_tol, 0.0, 0.0);
  require_converged(r.converged, "vacuum_energy");
  EnergyResult out;
  out.value = r.value / kTwoPi;
  out.err_estimate = r.error / kTwoPi;
  out.diagnostics["kernel_evals"] = static_cast<double>(r.evals);
  out.diagnostics["angular_intervals"] = static_cast<double>(r.intervals);
  out.diagnostics["zone_weight"] = domain.weight;
  return out;
}

std::pair<EnergyResult, ThermalGrid> free_energy(const LatticeSystem& sys, double Ta, const Tolerances& tol) {
  tol.validate();
  if (!(Ta > 0.0) || !std::isfinite(Ta)) throw InvalidArgument("temperature Ta must be > 0");
  Domain domain;
  const LatticeSystem canon = canonical_system(sys, domain);
  std::mutex mutex;
  int n_max = 0;
  double tail = 0.0;
  auto f = [&](const Vec2& q) {
    const MatsubaraAtQ m = matsubara_at_q(canon, q, Ta, tol, 0);
    {
      std::lock_guard lock(mutex);
      n_max = std::max(n_max, m.n_max);
      tail = std::max(tail, Ta * m.tail);
    }
    return Sample<double>{Ta * m.sum, Ta * m.tail, m.evals};
  };
  const QuadResult<double> r = integrate_bz<double>(domain, f, tol.quad_rel_tol, 0.0, 0.0);
  require_converged(r.converged, "free_energy");
  EnergyResult out;
  out.value = r.value;
  out.err_estimate = r.error;
  out.diagnostics["kernel_evals"] = static_cast<double>(r.evals);
  out.diagnostics["angular_intervals"] = static_cast<double>(r.intervals);
  out.diagnostics["zone_weight"] = domain.weight;
  out.diagnostics["n_max"] = n_max;
  out.diagnostics["tail_bound"] = tail;
  return {out, ThermalGrid{Ta, n_max, tail}};
}

ThermalCorrections thermal_corrections(const LatticeSystem& sys, std::span<const double> Ta,
                                       const Tolerances& tol) {
  tol.validate();
  if (Ta.empty()) throw InvalidArgument("thermal_corrections needs at least one temperature");
  for (double T : Ta)
    if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("temperature Ta must be > 0");

  ThermalCorrections out;
  out.Ta.assign(Ta.begin(), Ta.end());
  out.vacuum = vacuum_energy(sys, tol);

  Domain domain;
  const LatticeSystem canon = canonical_system(sys, domain);
  const auto m = static_cast<Eigen::Index>(Ta.size());
  const SharedGrid grid = shared_matsubara_grid(Ta);
  // lowest temperatures first, so every base grid is filled before its multiples read it
  std::vector<std::size_t> order(Ta.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return Ta[x] < Ta[y]; });
  auto f = [&](const Vec2& q) {
    // the difference is small against either term, so the frequency integral is taken tight
    const Sample<double> inner = frequency_integral(canon, q, tol, 1e-13);
    Sample<Eigen::ArrayXd> s{Eigen::ArrayXd::Zero(m), Eigen::ArrayXd::Zero(m), inner.evals};
    std::vector<std::vector<double>> memo(Ta.size());
    for (const std::size_t j : order) {
      const double T = Ta[j];
      std::vector<double>& cache = memo[grid.base[j]];
      const double T_base = Ta[grid.base[j]];
      const int stride = grid.stride[j];
      auto term = [&](int n, std::size_t& evals) {
        const auto idx = static_cast<std::size_t>(n) * static_cast<std::size_t>(stride);
        while (cache.size() <= idx) {
          ++evals;
          cache.push_back(kernel_log_integrand(canon, kTwoPi * T_base * static_cast<double>(cache.size()), q, tol));
        }
        return cache[idx];
      };
      const MatsubaraAtQ ms = matsubara_terms(term, q, T, tol, 0);
      const auto k = static_cast<Eigen::Index>(j);
      s.value[k] = T * ms.sum - inner.value / kTwoPi;
      s.error[k] = T * ms.tail + inner.error / kTwoPi;
      s.evals += ms.evals;
    }
    return s;
  };
  // the corrections are tiny against E0 at low T, so the floor is only there to stop at D = 0
  const double abs_tol = 1e-14 * std::abs(out.vacuum.value);
  const double rel_tol = tol.quad_rel_tol;
  const QuadResult<Eigen::ArrayXd> r =
      integrate_bz<Eigen::ArrayXd>(domain, f, rel_tol, abs_tol, Eigen::ArrayXd::Zero(m));
  require_converged(r.converged, "thermal_corrections");
  out.delta = r.value;
  out.err = r.error;
  return out;
}

LowTCoefficients fit_low_T(std::span<const double> Ta, const Eigen::ArrayXd& delta, const Eigen::ArrayXd& err) {
  const auto n = static_cast<Eigen::Index>(Ta.size());
  if (n < 2 || delta.size() != n || err.size() != n) throw FitDegenerate("low-T fit needs paired data");
  LowTCoefficients out;
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  double t_max = 0.0;
  double t_min = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double T = Ta[static_cast<std::size_t>(i)];
    design(i, 0) = T * T;
    design(i, 1) = T * T * T * T;
    rhs[i] = delta[i];
    t_max = std::max(t_max, T);
    t_min = std::min(t_min, T);
  }
  const Eigen::Vector2d scale(1.0 / (t_max * t_max), 1.0 / (t_max * t_max * t_max * t_max));
  const Eigen::MatrixXd scaled = design * scale.asDiagonal();
  const Eigen::Vector2d beta = scaled.colPivHouseholderQr().solve(rhs).cwiseProduct(scale);
  out.c2 = beta[0];
  out.c4 = beta[1];
  out.fit_residual = (design * beta - rhs).cwiseAbs().maxCoeff();
  out.propagated_error = max_of(err);
  out.fit_window = {t_min, t_max};
  out.c4_valid = std::abs(out.c4) * t_max * t_max < 0.1 * std::abs(out.c2);

  const bool one_sign = (delta > 0.0).all() || (delta < 0.0).all();
  if (one_sign) {
    std::vector<double> y(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = std::abs(delta[i]);
    out.exponent = fit_power_law(Ta, y).exponent;
  } else {
    out.exponent = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

LowTCoefficients low_T_coefficients(const LatticeSystem& sys, std::span<const double> window,
                                    const Tolerances& tol) {
  if (window.size() < 4) throw WindowTooNarrow("low-T window needs at least 4 temperatures");
  for (double T : window) {
    if (!(T > 0.0) || T * sys.b_over_a() > 0.05 * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "low-T window requires 0 < Ta * b <= 0.05, got Ta = " << T;
      throw InvalidArgument(os.str());
    }
  }
  const ThermalCorrections d = thermal_corrections(sys, window, tol);
  LowTCoefficients fit = fit_low_T(window, d.delta, d.err);
  if (fit.fit_residual > 10.0 * fit.propagated_error) {
    std::ostringstream os;
    os << "T^2 + T^4 fit residual " << fit.fit_residual << " exceeds 10x the quadrature error "
       << fit.propagated_error;
    throw FitDegenerate(os.str());
  }
  return fit;
}

EnergyResult zeta_prime_zero_result(const LatticeSystem& sys, const Tolerances& tol) {
  tol.validate();
  Domain domain;
  const LatticeSystem canon = canonical_system(sys, domain);
  auto f = [&](const Vec2& q) { return kernel_log_integrand(canon, 0.0, q, tol); };
  auto wrapped = [&](const Vec2& q) { return Sample<double>{f(q), 0.0, 1}; };
  const QuadResult<double> r = integrate_bz<double>(domain, wrapped, tol.quad_rel_tol, 0.0, 0.0);
  require_converged(r.converged, "zeta_prime_zero");
  EnergyResult out;
  out.value = -r.value;
  out.err_estimate = r.error;
  out.diagnostics["kernel_evals"] = static_cast<double>(r.evals);
  out.diagnostics["zone_weight"] = domain.weight;
  return out;
}

double zeta_prime_zero(const LatticeSystem& sys, const Tolerances& tol) {
  return zeta_prime_zero_result(sys, tol).value;
}

MatsubaraSplit matsubara_split(const LatticeSystem& sys, double Ta, const Tolerances& tol) {
  tol.validate();
  if (!(Ta > 0.0) || !std::isfinite(Ta)) throw InvalidArgument("temperature Ta must be > 0");
  Domain domain;
  const LatticeSystem canon = canonical_system(sys, domain);
  auto f = [&](const Vec2& q) {
    const double f0 = kernel_log_integrand(canon, 0.0, q, tol);
    const MatsubaraAtQ rest = matsubara_at_q(canon, q, Ta, tol, 1);
    Sample<Eigen::ArrayXd> s{Eigen::ArrayXd(2), Eigen::ArrayXd(2), rest.evals + 1};
    s.value << 0.5 * Ta * f0, Ta * rest.sum;
    s.error << 0.0, Ta * rest.tail;
    return s;
  };
  const QuadResult<Eigen::ArrayXd> r =
      integrate_bz<Eigen::ArrayXd>(domain, f, tol.quad_rel_tol, 0.0, Eigen::ArrayXd::Zero(2));
  require_converged(r.converged, "matsubara_split");
  MatsubaraSplit out;
  out.zero_term.value = r.value[0];
  out.zero_term.err_estimate = r.error[0];
  out.remainder.value = r.value[1];
  out.remainder.err_estimate = r.error[1];
  out.zero_term.diagnostics["kernel_evals"] = static_cast<double>(r.evals);
  out.remainder.diagnostics["kernel_evals"] = static_cast<double>(r.evals);
  return out;
}

double riemann_zeta3() {
  static const double value = [] {
    // central binomials grow like 4^k, so 40 terms exhaust double precision
    double sum = 0.0;
    double binom = 1.0;
    for (int k = 1; k <= 40; ++k) {
      binom *= 2.0 * (2.0 * k - 1.0) / k;
      const double term = 1.0 / (static_cast<double>(k) * k * k * binom);
      sum += (k % 2 == 1) ? term : -term;
    }
    return 2.5 * sum;
  }();
  return value;
}

double high_T_asymptote(double T, double zeta_prime, double a0, double a_half, double a1) {
  if (!(T > 0.0)) throw InvalidArgument("temperature must be > 0");
  const double T2 = T * T;
  return -0.5 * T * zeta_prime + a0 * T2 * T2 * kPi * kPi / 90.0 -
         a_half / (4.0 * std::pow(kPi, 1.5)) * T2 * T * riemann_zeta3() - a1 * T2 / 24.0;
}

}  // namespace diraclat
