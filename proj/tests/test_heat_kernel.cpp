#include "diraclat/heat_kernel.hpp"
#include "diraclat/model.hpp"
#include "support/erfcx_oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace diraclat;
using diraclat::testing::erfcx_oracle;

TEST_CASE("erfcx against an independent quadrature of its defining integral") {
  CHECK(erfcx(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  double worst = 0.0;
  for (int i = 0; i <= 60; ++i) {
    const double x = 0.5 * i;
    worst = std::max(worst, std::abs(erfcx(x) - erfcx_oracle(x)));
  }
  CHECK(worst < 1e-12);
  CHECK(std::abs(erfcx(1.0) - erfcx_oracle(1.0)) < 1e-12);
  for (double x : {0.13, 2.7, 5.9, 12.3}) CHECK(std::abs(erfcx(x) - erfcx_oracle(x)) < 1e-13);
}

TEST_CASE("erfcx asymptotics and the reflection branch") {
  CHECK(50.0 * std::sqrt(kPi) * erfcx(50.0) == doctest::Approx(1.0 - 1.0 / 5000.0).epsilon(1e-6));
  CHECK(std::abs(50.0 * std::sqrt(kPi) * erfcx(50.0) - 1.0) < 1e-3);
  CHECK(std::isfinite(erfcx(1e9)));
  for (double x : {-3.0, -1.0, -0.2, 0.4, 2.0})
    CHECK(erfcx(x) == doctest::Approx(std::exp(x * x) * std::erfc(x)).epsilon(1e-13));
}

TEST_CASE("single-delta trace") {
  const double g = 0.01;
  const double born = born1_per_site(1.0, g).value;
  CHECK(born == doctest::Approx(2.2431e-4).epsilon(1e-4));
  CHECK(exact_single_delta_trace(1.0, g).value == doctest::Approx(born).epsilon(0.01));
  // first correction -g^2 / (32 pi^2 t) relative to Born 1
  const double rel = exact_single_delta_trace(1.0, g).value / born - 1.0;
  CHECK(rel == doctest::Approx(-g * g / (32.0 * kPi * kPi)).epsilon(1e-3));

  CHECK(exact_single_delta_trace(1.0, 1000.0).value == doctest::Approx(0.4929).epsilon(1e-4));
  CHECK(exact_single_delta_trace(1.0, 1000.0).value == doctest::Approx(0.5 * erfcx_oracle(4.0 * kPi / 1000.0)).epsilon(1e-12));
  double prev = 0.0;
  for (double gg : {1e-8, 1e-3, 0.1, 10.0, 1e4}) {
    const double v = exact_single_delta_trace(1.0, gg).value;
    CHECK(std::isfinite(v));
    CHECK(v > prev);
    CHECK(v <= 0.5);
    prev = v;
  }
  CHECK_THROWS_AS(exact_single_delta_trace(0.0, g), InvalidArgument);
  CHECK_THROWS_AS(exact_single_delta_trace(1.0, -1.0), InvalidArgument);
}

TEST_CASE("Born terms") {
  CHECK(born0(1.0 / (4.0 * kPi), 1.0).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(born0(2.0, 1.0).value / born0(1.0, 1.0).value == doctest::Approx(std::pow(2.0, -1.5)));
  CHECK(born0(1.0, 2.0).value == doctest::Approx(2.0 * born0(1.0, 1.0).value));
  CHECK(born1_per_site(4.0, 0.01).value == doctest::Approx(0.5 * born1_per_site(1.0, 0.01).value));
  CHECK(born1_per_site(1.0, 0.02).value == doctest::Approx(2.0 * born1_per_site(1.0, 0.01).value));
  CHECK(born1(1.0, 0.01, 3).value == doctest::Approx(18.0 * born1_per_site(1.0, 0.01).value));
  CHECK_THROWS_AS(born1(1.0, 0.01, 0), InvalidArgument);
  CHECK_THROWS_AS(born0(1.0, 0.0), InvalidArgument);
}

TEST_CASE("heat-kernel coefficient report") {
  const std::vector<double> t{0.01, 0.02, 0.04, 0.08};
  const auto report = hk_coefficient_report(t, 0.01, 3);
  const PowerLawFit& b0 = report.at("born0");
  CHECK(b0.exponent == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(b0.coefficient == doctest::Approx(std::pow(4.0 * kPi, -1.5)).epsilon(1e-12));
  CHECK(b0.slot == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(b0.residual < 1e-12);
  const PowerLawFit& b1 = report.at("born1_per_site");
  CHECK(std::abs(b1.exponent + 0.5) < 1e-10);
  CHECK(b1.slot == doctest::Approx(2.0));
  const PowerLawFit& ex = report.at("exact_single_delta");
  CHECK(ex.coefficient == doctest::Approx(b1.coefficient).epsilon(0.01));
  CHECK(report.count("born1") == 1);

  const std::vector<double> short_grid{0.01, 0.02, 0.04};
  CHECK_THROWS_AS(hk_coefficient_report(short_grid, 0.01, 1), FitDegenerate);
}
