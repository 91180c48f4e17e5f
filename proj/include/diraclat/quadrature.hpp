#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature and compensated summation.
//
// The integrator is templated on the value type: `double` or `Eigen::ArrayXd`
// (several integrands sharing one set of nodes). An integrand may return a bare
// value or a Sample carrying the error of a nested integration, which is
// propagated into the interval error with the Kronrod weights.

#include "diraclat/parallel.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

namespace diraclat {

/// Neumaier summation; the result depends only on the order of add() calls.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Maps u in [0, 1) onto x in [0, inf) with x = scale * u / (1 - u).
struct HalfLineMap {
  double scale = 1.0;
  double x(double u) const noexcept { return scale * u / (1.0 - u); }
  double jacobian(double u) const noexcept {
    const double w = 1.0 - u;
    return scale / (w * w);
  }
  double u(double x) const noexcept { return x / (x + scale); }
};

template <class V>
struct Sample {
  V value;
  V error;
  std::size_t evals = 1;
};

template <class V>
struct QuadResult {
  V value;
  V error;
  std::size_t evals = 0;
  std::size_t intervals = 0;
  bool converged = false;
};

struct QuadOptions {
  double abs_tol = 0.0;
  double rel_tol = 1e-10;
  std::size_t max_intervals = 4000;
  bool parallel = false;  ///< evaluate the nodes of each panel through parallel_for
};

namespace quad_detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the nodes kXgk[1], kXgk[3], kXgk[5], kXgk[7].
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double zero_like(double) { return 0.0; }
inline Eigen::ArrayXd zero_like(const Eigen::ArrayXd& v) { return Eigen::ArrayXd::Zero(v.size()); }

inline double vabs(double v) { return std::abs(v); }
inline Eigen::ArrayXd vabs(const Eigen::ArrayXd& v) { return v.abs(); }

// QUADPACK error heuristic, componentwise.
inline double gk_error(double diff, double resasc, double resabs) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double tiny = std::numeric_limits<double>::min();
  double err = std::abs(diff);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > tiny / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return err;
}
inline Eigen::ArrayXd gk_error(const Eigen::ArrayXd& diff, const Eigen::ArrayXd& resasc,
                               const Eigen::ArrayXd& resabs) {
  Eigen::ArrayXd out(diff.size());
  for (Eigen::Index i = 0; i < diff.size(); ++i) out[i] = gk_error(diff[i], resasc[i], resabs[i]);
  return out;
}

// Largest err_i / max(abs_tol, rel_tol |total_i|).
inline double excess(double err, double total, const QuadOptions& o) {
  const double tol = std::max({o.abs_tol, o.rel_tol * std::abs(total), 1e-300});
  return err / tol;
}
inline double excess(const Eigen::ArrayXd& err, const Eigen::ArrayXd& total, const QuadOptions& o) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) worst = std::max(worst, excess(err[i], total[i], o));
  return worst;
}

template <class V>
class VectorSum {
 public:
  explicit VectorSum(const V& like) {
    if constexpr (std::is_same_v<V, double>) {
      sums_.resize(1);
    } else {
      sums_.resize(static_cast<std::size_t>(like.size()));
    }
  }
  void add(const V& v) {
    if constexpr (std::is_same_v<V, double>) {
      sums_[0].add(v);
    } else {
      for (Eigen::Index i = 0; i < v.size(); ++i) sums_[static_cast<std::size_t>(i)].add(v[i]);
    }
  }
  V value() const {
    if constexpr (std::is_same_v<V, double>) {
      return sums_[0].value();
    } else {
      V out(static_cast<Eigen::Index>(sums_.size()));
      for (std::size_t i = 0; i < sums_.size(); ++i) out[static_cast<Eigen::Index>(i)] = sums_[i].value();
      return out;
    }
  }

 private:
  std::vector<CompensatedSum> sums_;
};

template <class V>
struct Panel {
  double a;
  double b;
  V value;
  V error;
  std::size_t evals;
  bool splittable;
};

template <class V, class F>
Sample<V> call(F& f, double x) {
  using R = std::invoke_result_t<F&, double>;
  if constexpr (std::is_same_v<std::decay_t<R>, Sample<V>>) {
    return f(x);
  } else {
    V v = f(x);
    V e = zero_like(v);
    return Sample<V>{std::move(v), std::move(e), 1};
  }
}

template <class V, class F>
void evaluate_panels(F& f, std::vector<Panel<V>>& panels, std::span<const std::size_t> which,
                     const QuadOptions& opt) {
  constexpr std::size_t kNodes = 15;
  std::vector<Sample<V>> samples(which.size() * kNodes);
  auto node = [&](std::size_t k) {
    const Panel<V>& p = panels[which[k / kNodes]];
    const std::size_t j = k % kNodes;
    const double center = 0.5 * (p.a + p.b);
    const double half = 0.5 * (p.b - p.a);
    // j in [0,7): left nodes, j = 7 center, j in (7,15): right nodes
    double x;
    if (j < 7)
      x = center - half * kXgk[j];
    else if (j == 7)
      x = center;
    else
      x = center + half * kXgk[14 - j];
    samples[k] = call<V>(f, x);
  };
  if (opt.parallel) {
    parallel_for(samples.size(), node);
  } else {
    for (std::size_t k = 0; k < samples.size(); ++k) node(k);
  }

  for (std::size_t w = 0; w < which.size(); ++w) {
    Panel<V>& p = panels[which[w]];
    const double half = 0.5 * (p.b - p.a);
    const Sample<V>* s = &samples[w * kNodes];
    auto weight_k = [](std::size_t j) { return j < 7 ? kWgk[j] : (j == 7 ? kWgk[7] : kWgk[14 - j]); };
    auto weight_g = [](std::size_t j) -> double {
      const std::size_t m = j < 7 ? j : (j == 7 ? 7 : 14 - j);
      if (m % 2 == 0) return 0.0;
      return kWg[m / 2];
    };
    V resk = zero_like(s[0].value);
    V resg = zero_like(s[0].value);
    V resabs = zero_like(s[0].value);
    V inner = zero_like(s[0].value);
    std::size_t evals = 0;
    for (std::size_t j = 0; j < kNodes; ++j) {
      resk = resk + weight_k(j) * s[j].value;
      resg = resg + weight_g(j) * s[j].value;
      resabs = resabs + weight_k(j) * vabs(s[j].value);
      inner = inner + weight_k(j) * vabs(s[j].error);
      evals += s[j].evals;
    }
    const V mean = 0.5 * resk;
    V resasc = zero_like(s[0].value);
    for (std::size_t j = 0; j < kNodes; ++j) resasc = resasc + weight_k(j) * vabs(s[j].value - mean);
    const double ah = std::abs(half);
    p.value = resk * half;
    p.error = gk_error((resk - resg) * ah, resasc * ah, resabs * ah) + inner * ah;
    p.evals = evals;
    const double mid = 0.5 * (p.a + p.b);
    p.splittable = mid > std::min(p.a, p.b) && mid < std::max(p.a, p.b) &&
                   std::abs(p.b - p.a) > 64.0 * std::numeric_limits<double>::epsilon() *
                                             std::max(std::abs(p.a), std::abs(p.b));
  }
}

}  // namespace quad_detail

/// Globally adaptive integration over consecutive panels [bp[0], bp[1]], ...
/// The panel with the largest error relative to its share of the tolerance is
/// bisected until max(abs_tol, rel_tol |I|) is met for every component.
template <class V, class F>
QuadResult<V> integrate(F&& f, std::span<const double> breakpoints, const QuadOptions& opt,
                        const V& like) {
  using quad_detail::Panel;
  std::vector<Panel<V>> panels;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (breakpoints[i + 1] == breakpoints[i]) continue;
    panels.push_back(Panel<V>{breakpoints[i], breakpoints[i + 1], like, like, 0, true});
  }
  QuadResult<V> out{quad_detail::zero_like(like), quad_detail::zero_like(like), 0, 0, true};
  if (panels.empty()) return out;

  std::vector<std::size_t> all(panels.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  quad_detail::evaluate_panels<V>(f, panels, all, opt);

  std::size_t evals = 0;
  for (const auto& p : panels) evals += p.evals;

  while (true) {
    quad_detail::VectorSum<V> value(like);
    quad_detail::VectorSum<V> error(like);
    for (const auto& p : panels) {
      value.add(p.value);
      error.add(p.error);
    }
    out.value = value.value();
    out.error = error.value();
    if (quad_detail::excess(out.error, out.value, opt) <= 1.0) {
      out.converged = true;
      break;
    }
    if (panels.size() >= opt.max_intervals) {
      out.converged = false;
      break;
    }
    std::size_t worst = panels.size();
    double worst_excess = -1.0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      if (!panels[i].splittable) continue;
      const double e = quad_detail::excess(panels[i].error, out.value, opt);
      if (e > worst_excess) {
        worst_excess = e;
        worst = i;
      }
    }
    if (worst == panels.size()) {
      out.converged = false;
      break;
    }
    const double a = panels[worst].a;
    const double b = panels[worst].b;
    const double mid = 0.5 * (a + b);
    panels[worst] = Panel<V>{a, mid, like, like, 0, true};
    panels.insert(panels.begin() + static_cast<std::ptrdiff_t>(worst) + 1, Panel<V>{mid, b, like, like, 0, true});
    const std::array<std::size_t, 2> fresh = {worst, worst + 1};
    quad_detail::evaluate_panels<V>(f, panels, fresh, opt);
    evals += panels[worst].evals + panels[worst + 1].evals;
  }
  out.evals = evals;
  out.intervals = panels.size();
  return out;
}

/// Scalar convenience overload.
template <class F>
QuadResult<double> integrate(F&& f, std::span<const double> breakpoints, const QuadOptions& opt) {
  return integrate<double>(std::forward<F>(f), breakpoints, opt, 0.0);
}

}  // namespace diraclat
