#include "diraclat/scattering.hpp"

#include "diraclat/lattice_sums.hpp"
#include "diraclat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace diraclat {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// exp(-x) underflows to zero beyond this
constexpr double kExpCutoff = 745.0;

struct Image {
  double gamma;
  int n1;
  int n2;
};

// Bound on the images with |N|_inf > shells: |q_i + 2 pi N_i| >= pi (2 |N_i| - 1) in the zone.
double image_tail_bound(double xi, double b, double abs_phi, int shells) {
  double tail = 0.0;
  for (int m = shells + 1;; ++m) {
    const double p = kPi * (2.0 * m - 1.0);
    const double gamma = std::sqrt(xi * xi + p * p);
    if (gamma * b > kExpCutoff) break;
    const double t = 8.0 * m * std::exp(-gamma * b) / (2.0 * gamma * abs_phi);
    tail += t;
    if (t <= 1e-20 * tail) break;
  }
  return tail;
}

// 2 pi N.c from the tick representation, reduced to [-pi, pi) so that c -> -c negates it exactly.
double phase_angle(const LatticeSystem& sys, int n1, int n2) {
  const auto& t = sys.c_ticks();
  std::int64_t m = (static_cast<std::int64_t>(n1) * t[0] + static_cast<std::int64_t>(n2) * t[1]) % kDisplacementTicks;
  if (m < 0) m += kDisplacementTicks;
  if (m >= kDisplacementTicks / 2) m -= kDisplacementTicks;
  return kTwoPi * static_cast<double>(m) / static_cast<double>(kDisplacementTicks);
}

}  // namespace

double axial_wavenumber(double xi, const Vec2& q, const IVec2& N) {
  const Vec2 k = q + kTwoPi * N.cast<double>();
  return std::sqrt(xi * xi + k.squaredNorm());
}

KernelValue reflection_kernel(const LatticeSystem& sys, double xi, const Vec2& q, const Tolerances& tol) {
  const MomentumPoint folded = fold_to_zone(q);
  const Vec2 qz = folded.q;
  if (xi == 0.0 && qz.x() == 0.0 && qz.y() == 0.0)
    throw GammaPointSingular("reflection kernel evaluated at the Gamma point", SamplePoint{xi, q});
  if (!(xi >= 0.0)) throw InvalidArgument("imaginary frequency xi must be >= 0");

  const double b = sys.b_over_a();
  KernelValue out;
  const double gamma0 = std::sqrt(xi * xi + qz.squaredNorm());
  if (gamma0 * b > kExpCutoff) return out;

  const ScreenedSum s = screened_sum(xi, qz, tol.sum_tol);
  const double inv_g = 1.0 / sys.g_over_a();
  const double phi = inv_g + s.value / (2.0 * kTwoPi);
  const double phi_err = s.err_estimate / (2.0 * kTwoPi);
  const double resolution = 64.0 * kEps * (std::abs(inv_g) + std::abs(s.value) / (2.0 * kTwoPi)) + phi_err;
  if (!(std::abs(phi) > resolution)) {
    std::ostringstream os;
    os << "phi~ vanishes (" << phi << ") at xi = " << xi << ", q = (" << q.x() << ", " << q.y() << ")";
    throw PhiTildePole(os.str(), SamplePoint{xi, q});
  }
  const double abs_phi = std::abs(phi);

  const double leading = std::exp(-gamma0 * b) / (2.0 * gamma0 * abs_phi);
  const double threshold = tol.sum_tol * std::min(1.0, leading);
  int shells = 1;
  while (image_tail_bound(xi, b, abs_phi, shells) > threshold) ++shells;

  std::vector<Image> images;
  images.reserve(static_cast<std::size_t>((2 * shells + 1) * (2 * shells + 1)));
  for (int n1 = -shells; n1 <= shells; ++n1) {
    for (int n2 = -shells; n2 <= shells; ++n2) {
      const double k1 = qz.x() + kTwoPi * n1;
      const double k2 = qz.y() + kTwoPi * n2;
      images.push_back({std::sqrt(xi * xi + k1 * k1 + k2 * k2), n1, n2});
    }
  }
  std::sort(images.begin(), images.end(), [](const Image& a, const Image& b) {
    if (a.gamma != b.gamma) return a.gamma < b.gamma;
    if (a.n1 != b.n1) return a.n1 < b.n1;
    return a.n2 < b.n2;
  });

  CompensatedSum re;
  CompensatedSum im;
  double abs_sum = 0.0;
  for (const auto& img : images) {
    const double mag = std::exp(-img.gamma * b) / (2.0 * img.gamma);
    if (mag == 0.0) break;
    const double angle = phase_angle(sys, img.n1, img.n2);
    re.add(mag * std::cos(angle));
    im.add(mag * std::sin(angle));
    abs_sum += mag;
  }

  std::complex<double> sum(re.value(), im.value());
  // q = q_zone + 2 pi M relabels the images and leaves a factor exp(-i 2 pi M.c)
  if (folded.N.x() != 0 || folded.N.y() != 0) {
    const double shift = phase_angle(sys, -folded.N.x(), -folded.N.y());
    sum *= std::complex<double>(std::cos(shift), std::sin(shift));
  }
  out.h = -sum / phi;
  out.h_abs2 = std::norm(out.h);
  out.n_images = images.size();
  const double abs_h = std::abs(out.h);
  out.err_estimate = image_tail_bound(xi, b, abs_phi, shells) + 8.0 * kEps * abs_sum / abs_phi +
                     abs_h * phi_err / abs_phi;
  return out;
}

double kernel_log_integrand(const LatticeSystem& sys, double xi, const Vec2& q, const Tolerances& tol) {
  const KernelValue k = reflection_kernel(sys, xi, q, tol);
  if (!(k.h_abs2 < 1.0)) {
    std::ostringstream os;
    os << "|h|^2 = " << k.h_abs2 << " >= 1 at xi = " << xi << ", q = (" << q.x() << ", " << q.y() << ")";
    throw NonPhysicalKernel(os.str(), SamplePoint{xi, q});
  }
  return std::log1p(-k.h_abs2);
}

}  // namespace diraclat
