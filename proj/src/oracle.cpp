#include "diraclat/oracle.hpp"

#include "diraclat/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace diraclat {

namespace {

constexpr int kMaxMatsubara = 10'000'000;

struct Sites {
  std::vector<Eigen::Vector3d> a;
  std::vector<Eigen::Vector3d> b;
};

Sites site_positions(const FiniteLatticeSpec& spec) {
  const int n = spec.n_side;
  Vec2 c = spec.sys.c_over_a();
  for (int i = 0; i < 2; ++i)
    if (c[i] >= 0.5) c[i] -= 1.0;
  const double offset = 0.5 * (n - 1);
  Sites s;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = i - offset;
      const double y = j - offset;
      s.b.emplace_back(x, y, 0.0);
      s.a.emplace_back(x + c.x(), y + c.y(), spec.sys.b_over_a());
    }
  }
  return s;
}

double green0(double xi, double r) { return std::exp(-xi * r) / (2.0 * kTwoPi * r); }

// Li2(x) for 0 <= x < 1.
double dilog(double x) {
  if (x == 0.0) return 0.0;
  if (x > 0.5) return kPi * kPi / 6.0 - std::log(x) * std::log1p(-x) - dilog(1.0 - x);
  double term = x;
  double sum = 0.0;
  for (int k = 1; k < 2000; ++k) {
    const double t = term / (static_cast<double>(k) * k);
    sum += t;
    if (t < 1e-17 * sum) break;
    term *= x;
  }
  return sum;
}

void check_spec(const FiniteLatticeSpec& spec) {
  if (spec.n_side < 1) throw InvalidArgument("n_side must be >= 1");
}

FiniteLatticeEnergy package(double total, double err, std::size_t evals, int n_side) {
  FiniteLatticeEnergy out;
  const double cells = static_cast<double>(n_side) * n_side;
  out.total.value = total;
  out.total.err_estimate = err;
  out.total.diagnostics["evals"] = static_cast<double>(evals);
  out.per_cell.value = total / cells;
  out.per_cell.err_estimate = err / cells;
  out.per_cell.diagnostics["evals"] = static_cast<double>(evals);
  return out;
}

}  // namespace

GreenMatrixSet green_matrices(const FiniteLatticeSpec& spec, double xi) {
  check_spec(spec);
  if (!(xi >= 0.0)) throw InvalidArgument("imaginary frequency xi must be >= 0");
  const Sites s = site_positions(spec);
  const auto n = static_cast<Eigen::Index>(s.a.size());
  const double diag = 1.0 / spec.sys.g_over_a();
  GreenMatrixSet m;
  m.Phi_B.resize(n, n);
  m.G_AB.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m.Phi_B(i, i) = diag;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double g = green0(xi, (s.b[static_cast<std::size_t>(i)] - s.b[static_cast<std::size_t>(j)]).norm());
      m.Phi_B(i, j) = g;
      m.Phi_B(j, i) = g;
    }
    for (Eigen::Index j = 0; j < n; ++j)
      m.G_AB(i, j) = green0(xi, (s.a[static_cast<std::size_t>(i)] - s.b[static_cast<std::size_t>(j)]).norm());
  }
  // both sheets are the same square patch, so the intra-sheet distances coincide
  m.Phi_A = m.Phi_B;
  return m;
}

double tgtg_log_det(const GreenMatrixSet& m, double xi) {
  const Eigen::LLT<Eigen::MatrixXd> la(m.Phi_A);
  const Eigen::LLT<Eigen::MatrixXd> lb(m.Phi_B);
  if (la.info() == Eigen::Success && lb.info() == Eigen::Success) {
    // K K^T is similar to Phi_A^{-1} G Phi_B^{-1} G^T and symmetric
    Eigen::MatrixXd k = la.matrixL().solve(m.G_AB);
    k = lb.matrixL().solve(k.transpose()).transpose();
    const Eigen::MatrixXd kk = k * k.transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kk, Eigen::EigenvaluesOnly);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
      const double lambda = eig.eigenvalues()[i];
      if (!(lambda < 1.0)) {
        std::ostringstream os;
        os << "TGTG eigenvalue " << lambda << " >= 1 at xi = " << xi;
        throw NonPhysicalKernel(os.str(), SamplePoint{xi, Vec2::Zero()});
      }
      sum += std::log1p(-std::max(lambda, 0.0));
    }
    return sum;
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lua(m.Phi_A);
  const Eigen::FullPivLU<Eigen::MatrixXd> lub(m.Phi_B);
  if (!lua.isInvertible() || !lub.isInvertible()) {
    std::ostringstream os;
    os << "Phi is singular at xi = " << xi;
    throw SingularPhi(os.str(), SamplePoint{xi, Vec2::Zero()});
  }
  const Eigen::MatrixXd mm = lua.solve(m.G_AB) * lub.solve(Eigen::MatrixXd(m.G_AB.transpose()));
  const Eigen::MatrixXd one_minus = Eigen::MatrixXd::Identity(mm.rows(), mm.cols()) - mm;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(one_minus);
  const Eigen::MatrixXd& u = lu.matrixLU();
  double sum = 0.0;
  double sign = lu.permutationP().determinant();
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    sum += std::log(std::abs(u(i, i)));
    if (u(i, i) < 0.0) sign = -sign;
  }
  if (!(sign > 0.0)) {
    std::ostringstream os;
    os << "det(1 - M) <= 0 at xi = " << xi;
    throw NonPhysicalKernel(os.str(), SamplePoint{xi, Vec2::Zero()});
  }
  return sum;
}

FiniteLatticeEnergy finite_lattice_energy(const FiniteLatticeSpec& spec, const Tolerances& tol) {
  check_spec(spec);
  tol.validate();
  const HalfLineMap map{0.5 / spec.sys.b_over_a()};
  auto integrand = [&](double u) {
    const double xi = map.x(u);
    const double v = tgtg_log_det(green_matrices(spec, xi), xi);
    return v == 0.0 ? 0.0 : v * map.jacobian(u);
  };
  const std::vector<double> bp{0.0, 0.5, 1.0};
  const QuadOptions opt{0.0, tol.quad_rel_tol, 400, true};
  const QuadResult<double> r = integrate(integrand, std::span<const double>(bp), opt);
  if (!r.converged) throw QuadratureNotConverged("finite_lattice_energy: frequency quadrature hit its interval limit");
  return package(r.value / kTwoPi, r.error / kTwoPi, r.evals, spec.n_side);
}

FiniteLatticeEnergy matsubara_finite_lattice(const FiniteLatticeSpec& spec, double Ta, const Tolerances& tol) {
  check_spec(spec);
  tol.validate();
  if (!(Ta > 0.0) || !std::isfinite(Ta)) throw InvalidArgument("temperature Ta must be > 0");
  CompensatedSum sum;
  double prev = 0.0;
  double tail = 0.0;
  std::size_t evals = 0;
  for (int n = 0;; ++n) {
    if (n > kMaxMatsubara) throw QuadratureNotConverged("finite-lattice Matsubara sum did not converge");
    const double xi = kTwoPi * Ta * n;
    const double f = tgtg_log_det(green_matrices(spec, xi), xi);
    ++evals;
    sum.add(n == 0 ? 0.5 * f : f);
    if (f == 0.0) break;
    if (n > 0 && prev != 0.0) {
      const double r = f / prev;
      if (r < 1.0) {
        tail = std::abs(f) * r / (1.0 - r);
        if (tail <= 1e-15 * std::abs(sum.value()) && Ta * tail <= tol.matsubara_tail_tol) break;
      }
    }
    prev = f;
  }
  FiniteLatticeEnergy out = package(Ta * sum.value(), Ta * tail, evals, spec.n_side);
  out.total.diagnostics["n_max"] = static_cast<double>(evals - 1);
  return out;
}

double two_center_energy(double g, double b) {
  if (!(b > 0.0)) throw NonPositiveSeparation("separation must be > 0");
  const double a = g / (2.0 * kTwoPi * b);
  const double a2 = a * a;
  if (!(a2 < 1.0)) throw NonPhysicalKernel("two-center coupling g / (4 pi b) must be below 1");
  return -dilog(a2) / (2.0 * kTwoPi * b);
}

EnergyResult lifshitz_plates(const LatticeSystem& sys, const Tolerances& tol, LifshitzReflection reflection) {
  tol.validate();
  const double g = sys.g_over_a();
  const double b = sys.b_over_a();
  auto coefficient = [&](double rho) {
    return reflection == LifshitzReflection::Bare ? g / (2.0 * rho) : g / (g + 2.0 * rho);
  };
  auto breakdown = [&](double rho, double x) {
    std::ostringstream os;
    os << "plate reflection r^2 exp(-2 Gamma b) = " << x << " >= 1 at Gamma = " << rho;
    throw NonPhysicalKernel(os.str(), SamplePoint{rho, Vec2::Zero()});
  };
  if (reflection == LifshitzReflection::Bare) {
    // g^2 exp(-2 rho b) / (4 rho^2) grows without bound as rho -> 0
    for (double rho = 0.5 * std::abs(g);; rho *= 0.5) {
      const double r = coefficient(rho);
      const double x = r * r * std::exp(-2.0 * rho * b);
      if (x >= 1.0) breakdown(rho, x);
    }
  }
  const HalfLineMap map{0.5 / b};
  auto integrand = [&](double u) {
    const double rho = map.x(u);
    const double r = coefficient(rho);
    const double x = r * r * std::exp(-2.0 * rho * b);
    if (!(x < 1.0)) breakdown(rho, x);
    if (x == 0.0) return 0.0;
    return rho * rho * std::log1p(-x) * map.jacobian(u);
  };
  std::vector<double> bp{0.0};
  const double u_g = map.u(0.5 * std::abs(g));
  if (u_g > 0.0 && u_g < 1.0) bp.push_back(u_g);
  bp.push_back(1.0);
  const QuadOptions opt{0.0, 0.01 * tol.quad_rel_tol, 400, false};
  const QuadResult<double> res = integrate(integrand, std::span<const double>(bp), opt);
  if (!res.converged) throw QuadratureNotConverged("lifshitz_plates: quadrature hit its interval limit");
  EnergyResult out;
  const double norm = 1.0 / (4.0 * kPi * kPi);
  out.value = res.value * norm;
  out.err_estimate = res.error * norm;
  out.diagnostics["evals"] = static_cast<double>(res.evals);
  return out;
}

double lifshitz_leading_order(double g, double b) {
  if (!(b > 0.0)) throw NonPositiveSeparation("separation must be > 0");
  return -g * g / (32.0 * kPi * kPi * b);
}

double richardson(int n1, double e1, int n2, double e2) {
  if (n1 == n2) throw InvalidArgument("Richardson extrapolation needs two distinct sizes");
  return (n2 * e2 - n1 * e1) / static_cast<double>(n2 - n1);
}

double richardson_tableau(std::span<const int> n, std::span<const double> e) {
  if (n.size() != e.size() || n.size() < 2) throw InvalidArgument("Richardson tableau needs >= 2 paired sizes");
  std::vector<double> h;
  for (int v : n) {
    if (v < 1) throw InvalidArgument("lattice sizes must be >= 1");
    h.push_back(1.0 / v);
  }
  std::vector<double> p(e.begin(), e.end());
  for (std::size_t k = 1; k < h.size(); ++k) {
    for (std::size_t i = 0; i + k < h.size(); ++i) {
      if (h[i + k] == h[i]) throw InvalidArgument("Richardson tableau needs distinct sizes");
      p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i]);
    }
  }
  return p[0];
}

}  // namespace diraclat
