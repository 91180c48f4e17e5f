#include "diraclat/lattice_sums.hpp"

#include "diraclat/heat_kernel.hpp"
#include "diraclat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <vector>

namespace diraclat {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kPlainErfcRange = 50.0;
constexpr double kHalfDiagonal = 0.70710678118654752440;  // half diagonal of the unit cell

struct LatticeSite {
  int n1;
  int n2;
  int norm2;
  double r;
};

using SiteList = std::vector<LatticeSite>;

// Sites with |n| <= radius, sorted by (|n|^2, n1, n2); the origin is excluded.
std::shared_ptr<const SiteList> lattice_shells(int radius) {
  static std::mutex mutex;
  static std::shared_ptr<const SiteList> cached;
  static int cached_radius = -1;
  std::lock_guard lock(mutex);
  if (cached_radius >= radius) return cached;
  const int r = std::max(radius, 2 * std::max(cached_radius, 8));
  auto sites = std::make_shared<SiteList>();
  for (int n1 = -r; n1 <= r; ++n1) {
    for (int n2 = -r; n2 <= r; ++n2) {
      const int m = n1 * n1 + n2 * n2;
      if (m == 0 || m > r * r) continue;
      sites->push_back({n1, n2, m, std::sqrt(static_cast<double>(m))});
    }
  }
  std::sort(sites->begin(), sites->end(), [](const LatticeSite& a, const LatticeSite& b) {
    if (a.norm2 != b.norm2) return a.norm2 < b.norm2;
    if (a.n1 != b.n1) return a.n1 < b.n1;
    return a.n2 < b.n2;
  });
  cached = std::move(sites);
  cached_radius = r;
  return cached;
}

// Bound on sum_{|n| > R} exp(-xi |n|) / |n| from unit cells covering |x| >= R - 1/sqrt2.
double direct_tail_bound(double xi, int radius) {
  const double s0 = radius - 2.0 * kHalfDiagonal;
  if (s0 <= 0.0) return std::numeric_limits<double>::infinity();
  return kTwoPi * (1.0 + kHalfDiagonal / s0) * std::exp(-xi * s0) / xi;
}

// Same construction for the real-space Ewald terms, |t(r)| <= exp(-eta^2 r^2 - c^2) / r.
double ewald_real_tail_bound(double eta, double c, int radius) {
  const double s0 = radius - 2.0 * kHalfDiagonal;
  if (s0 <= 0.0 || s0 * eta < c) return std::numeric_limits<double>::infinity();
  return kTwoPi * std::exp(-c * c) * (1.0 + kHalfDiagonal / s0) * (kSqrtPi / (2.0 * eta)) *
         std::erfc(eta * s0);
}

// Images with |N|_inf > L have |q + 2 pi N| >= pi (2 |N|_inf - 1) for q in the zone.
double ewald_reciprocal_tail_bound(double eta, int shells) {
  double tail = 0.0;
  for (int m = shells + 1; m <= shells + 40; ++m) {
    const double p = kPi * (2.0 * m - 1.0);
    const double t = 8.0 * m * (kTwoPi / p) * std::erfc(p / (2.0 * eta));
    tail += t;
    if (t < 1e-30 * tail || t == 0.0) break;
  }
  return tail;
}

}  // namespace

ScreenedSum direct_sum(double xi, const Vec2& q, double tol) {
  if (!(xi >= kDirectMinXi)) {
    std::ostringstream os;
    os << "direct lattice sum needs xi >= " << kDirectMinXi << ", got " << xi;
    throw ConvergenceTooSlow(os.str(), SamplePoint{xi, q});
  }
  if (!(tol > 0.0)) throw InvalidArgument("lattice-sum tolerance must be > 0");
  const Vec2 qz = fold_to_zone(q).q;

  int radius = 2;
  while (direct_tail_bound(xi, radius) > 0.25 * tol) ++radius;

  const auto sites = lattice_shells(radius);
  const int r2max = radius * radius;
  CompensatedSum sum;
  double abs_sum = 0.0;
  std::size_t terms = 0;
  for (const auto& s : *sites) {
    if (s.norm2 > r2max) break;
    const double t = std::exp(-xi * s.r) * std::cos(qz.x() * s.n1 + qz.y() * s.n2) / s.r;
    sum.add(t);
    abs_sum += std::abs(t) * (1.0 + qz.norm() * s.r);
    ++terms;
  }
  ScreenedSum out;
  out.value = sum.value();
  out.err_estimate = direct_tail_bound(xi, radius) + 4.0 * kEps * abs_sum;
  out.method = SumMethod::Direct;
  out.terms = terms;
  return out;
}

ScreenedSum ewald_sum(double xi, const Vec2& q, double eta, double tol) {
  if (!(xi >= 0.0)) throw InvalidArgument("screening xi must be >= 0");
  if (!(eta >= kMinEta && eta <= kMaxEta)) {
    std::ostringstream os;
    os << "Ewald parameter eta must lie in [" << kMinEta << ", " << kMaxEta << "], got " << eta;
    throw InvalidArgument(os.str());
  }
  if (!(tol > 0.0)) throw InvalidArgument("lattice-sum tolerance must be > 0");
  const Vec2 qz = fold_to_zone(q).q;
  if (xi == 0.0 && qz.x() == 0.0 && qz.y() == 0.0)
    throw EwaldSingular("screened sum diverges at xi = 0, q = 0", SamplePoint{xi, q});

  const double c = xi / (2.0 * eta);
  const double eta2 = eta * eta;

  int radius = 2;
  while (ewald_real_tail_bound(eta, c, radius) > 0.125 * tol) ++radius;
  int shells = 1;
  while (ewald_reciprocal_tail_bound(eta, shells) > 0.125 * tol) ++shells;

  const auto sites = lattice_shells(std::max(radius, 2 * shells));

  CompensatedSum sum;
  double abs_sum = 0.0;
  std::size_t terms = 0;

  const int r2max = radius * radius;
  for (const auto& s : *sites) {
    if (s.norm2 > r2max) break;
    const double r = s.r;
    const double z1 = r * eta + c;
    const double z2 = r * eta - c;
    double up;
    double down;
    if (xi * r < kPlainErfcRange) {
      up = std::exp(xi * r) * std::erfc(z1);
      down = std::exp(-xi * r) * std::erfc(z2);
    } else {
      // exp(xi r) erfc(z1) overflows in intermediate steps; factor out the Gaussian envelope
      const double envelope = std::exp(-eta2 * r * r - c * c);
      up = envelope * erfcx(z1);
      down = z2 >= 0.0 ? envelope * erfcx(z2) : 2.0 * std::exp(-xi * r) - envelope * erfcx(-z2);
    }
    const double t = 0.5 / r * (up + down) * std::cos(qz.x() * s.n1 + qz.y() * s.n2);
    sum.add(t);
    abs_sum += std::abs(t) * (1.0 + qz.norm() * r);
    ++terms;
  }

  auto image = [&](int n1, int n2) {
    const double p1 = qz.x() + kTwoPi * n1;
    const double p2 = qz.y() + kTwoPi * n2;
    const double kappa = std::sqrt(xi * xi + p1 * p1 + p2 * p2);
    const double t = kTwoPi / kappa * std::erfc(kappa / (2.0 * eta));
    sum.add(t);
    abs_sum += std::abs(t);
    ++terms;
  };
  image(0, 0);
  const int reciprocal_norm2 = 2 * shells * shells;
  for (const auto& s : *sites) {
    if (s.norm2 > reciprocal_norm2) break;
    if (std::max(std::abs(s.n1), std::abs(s.n2)) > shells) continue;
    image(s.n1, s.n2);
  }

  const double self = 2.0 * eta / kSqrtPi * std::exp(-c * c) - xi * std::erfc(c);
  sum.add(-self);
  abs_sum += std::abs(self);

  ScreenedSum out;
  out.value = sum.value();
  out.err_estimate = ewald_real_tail_bound(eta, c, radius) + ewald_reciprocal_tail_bound(eta, shells) +
                     8.0 * kEps * abs_sum;
  out.method = SumMethod::Ewald;
  out.terms = terms;
  return out;
}

ScreenedSum screened_sum(double xi, const Vec2& q, double tol) {
  if (xi >= kDirectPreferredXi) return direct_sum(xi, q, tol);
  return ewald_sum(xi, q, kDefaultEta, tol);
}

double phi_tilde(const LatticeSystem& sys, double xi, const Vec2& q, const Tolerances& tol) {
  const ScreenedSum s = screened_sum(xi, q, tol.sum_tol);
  return 1.0 / sys.g_over_a() + s.value / (2.0 * kTwoPi);
}

}  // namespace diraclat
