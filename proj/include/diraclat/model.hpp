#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace diraclat {

using Vec2 = Eigen::Vector2d;
using IVec2 = Eigen::Vector2i;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class ErrorKind {
  InvalidArgument,
  NonPositiveSeparation,
  ZeroCoupling,
  ConvergenceTooSlow,
  EwaldSingular,
  PhiTildePole,
  GammaPointSingular,
  NonPhysicalKernel,
  QuadratureNotConverged,
  SingularPhi,
  WindowTooNarrow,
  FitDegenerate,
};

const char* to_string(ErrorKind kind) noexcept;

/// Point in (imaginary frequency, quasi-momentum) space where a numerical
/// failure was detected.
struct SamplePoint {
  double xi = 0.0;
  Vec2 q = Vec2::Zero();
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::optional<SamplePoint> where = std::nullopt)
      : std::runtime_error(what), kind_(kind), where_(where) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::optional<SamplePoint>& where() const noexcept { return where_; }

 private:
  ErrorKind kind_;
  std::optional<SamplePoint> where_;
};

template <ErrorKind K>
class KindedError : public Error {
 public:
  explicit KindedError(const std::string& what, std::optional<SamplePoint> where = std::nullopt)
      : Error(K, what, where) {}
};

using InvalidArgument = KindedError<ErrorKind::InvalidArgument>;
using NonPositiveSeparation = KindedError<ErrorKind::NonPositiveSeparation>;
using ZeroCoupling = KindedError<ErrorKind::ZeroCoupling>;
using ConvergenceTooSlow = KindedError<ErrorKind::ConvergenceTooSlow>;
using EwaldSingular = KindedError<ErrorKind::EwaldSingular>;
using PhiTildePole = KindedError<ErrorKind::PhiTildePole>;
using GammaPointSingular = KindedError<ErrorKind::GammaPointSingular>;
using NonPhysicalKernel = KindedError<ErrorKind::NonPhysicalKernel>;
using QuadratureNotConverged = KindedError<ErrorKind::QuadratureNotConverged>;
using SingularPhi = KindedError<ErrorKind::SingularPhi>;
using WindowTooNarrow = KindedError<ErrorKind::WindowTooNarrow>;
using FitDegenerate = KindedError<ErrorKind::FitDegenerate>;

/// Numerical tolerances shared by every module.
struct Tolerances {
  double sum_tol = 1e-12;             ///< absolute truncation of lattice / image sums
  double quad_rel_tol = 1e-8;         ///< relative target of the outer quadratures
  double matsubara_tail_tol = 1e-10;  ///< absolute bound on the dropped Matsubara tail

  /// Throws InvalidArgument unless every field is strictly positive.
  void validate() const;
};

/// Displacements are stored on a dyadic grid of this many ticks per lattice
/// spacing, so that c, c + m and -c are represented exactly.
inline constexpr std::int64_t kDisplacementTicks = std::int64_t{1} << 40;

/// Two parallel square lattices of delta potentials in units of the spacing a.
///
/// Sheet B sits at x3 = 0 with sites n, sheet A at x3 = b with sites n + c.
/// The coupling g is the renormalized one (on-site element of Phi equal to 1/g).
class LatticeSystem {
 public:
  double g_over_a() const noexcept { return g_; }
  double b_over_a() const noexcept { return b_; }
  Vec2 c_over_a() const noexcept;
  const std::array<std::int64_t, 2>& c_ticks() const noexcept { return c_ticks_; }

  bool operator==(const LatticeSystem& other) const noexcept {
    return g_ == other.g_ && b_ == other.b_ && c_ticks_ == other.c_ticks_;
  }

 private:
  friend LatticeSystem make_system(double, double, const Vec2&);
  LatticeSystem(double g, double b, std::array<std::int64_t, 2> ticks)
      : g_(g), b_(b), c_ticks_(ticks) {}

  double g_;
  double b_;
  std::array<std::int64_t, 2> c_ticks_;
};

/// Validates and normalizes the system; c is reduced modulo 1 per component.
LatticeSystem make_system(double g_over_a, double b_over_a, const Vec2& c_over_a);

/// Quasi-momentum q in [-pi, pi)^2 plus reciprocal index N.
struct MomentumPoint {
  Vec2 q = Vec2::Zero();
  IVec2 N = IVec2::Zero();
};

/// k = q + 2 pi N.
inline Vec2 full_momentum(const MomentumPoint& p) { return p.q + kTwoPi * p.N.cast<double>(); }

/// Splits an arbitrary momentum into its Brillouin-zone part and reciprocal index.
MomentumPoint fold_to_zone(const Vec2& k);

}  // namespace diraclat
