#include "diraclat/model.hpp"

#include <cmath>
#include <sstream>

namespace diraclat {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonPositiveSeparation: return "NonPositiveSeparation";
    case ErrorKind::ZeroCoupling: return "ZeroCoupling";
    case ErrorKind::ConvergenceTooSlow: return "ConvergenceTooSlow";
    case ErrorKind::EwaldSingular: return "EwaldSingular";
    case ErrorKind::PhiTildePole: return "PhiTildePole";
    case ErrorKind::GammaPointSingular: return "GammaPointSingular";
    case ErrorKind::NonPhysicalKernel: return "NonPhysicalKernel";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::SingularPhi: return "SingularPhi";
    case ErrorKind::WindowTooNarrow: return "WindowTooNarrow";
    case ErrorKind::FitDegenerate: return "FitDegenerate";
  }
  return "Unknown";
}

void Tolerances::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << "tolerance " << name << " must be strictly positive, got " << v;
      throw InvalidArgument(os.str());
    }
  };
  check(sum_tol, "sum_tol");
  check(quad_rel_tol, "quad_rel_tol");
  check(matsubara_tail_tol, "matsubara_tail_tol");
}

Vec2 LatticeSystem::c_over_a() const noexcept {
  const double scale = 1.0 / static_cast<double>(kDisplacementTicks);
  return {static_cast<double>(c_ticks_[0]) * scale, static_cast<double>(c_ticks_[1]) * scale};
}

namespace {

std::int64_t to_ticks(double c) {
  double frac = c - std::floor(c);
  auto ticks = static_cast<std::int64_t>(std::llround(frac * static_cast<double>(kDisplacementTicks)));
  ticks %= kDisplacementTicks;
  if (ticks < 0) ticks += kDisplacementTicks;
  return ticks;
}

}  // namespace

LatticeSystem make_system(double g_over_a, double b_over_a, const Vec2& c_over_a) {
  if (!std::isfinite(b_over_a) || !(b_over_a > 0.0)) {
    std::ostringstream os;
    os << "b_over_a must be > 0, got " << b_over_a;
    throw NonPositiveSeparation(os.str());
  }
  if (!std::isfinite(g_over_a)) throw InvalidArgument("g_over_a must be finite");
  if (g_over_a == 0.0) throw ZeroCoupling("g_over_a = 0 decouples the lattices");
  if (!c_over_a.allFinite()) throw InvalidArgument("c_over_a must be finite");
  return LatticeSystem(g_over_a, b_over_a, {to_ticks(c_over_a.x()), to_ticks(c_over_a.y())});
}

MomentumPoint fold_to_zone(const Vec2& k) {
  MomentumPoint p;
  for (int i = 0; i < 2; ++i) {
    const double n = std::floor((k[i] + kPi) / kTwoPi);
    p.N[i] = static_cast<int>(n);
    p.q[i] = k[i] - kTwoPi * n;
    // guard the upper edge against rounding
    if (p.q[i] >= kPi) {
      p.q[i] -= kTwoPi;
      p.N[i] += 1;
    } else if (p.q[i] < -kPi) {
      p.q[i] += kTwoPi;
      p.N[i] -= 1;
    }
  }
  return p;
}

}  // namespace diraclat
