#include <cmath>

#include <Eigen/Dense>

#include "conecalc/cone_laplacian.hpp"
#include "conecalc/kernel_estimates.hpp"
#include "doctest.h"

using namespace conecalc;

TEST_CASE("the conjugated kernel matrix is lower-triangular Toeplitz") {
  const int N = 60;
  const double R = 6.0;
  const double eps = 0.5;
  const RMat m = kernels::hardy_matrix(3, eps, N, R);
  REQUIRE(m.rows() == N);
  REQUIRE(m.cols() == N);
  const double h = R / (N + 1);

  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (j > i) {
        CHECK(m(i, j) == 0.0);
      } else {
        const double expected = h * std::exp(-eps * h * (i - j));
        CHECK(m(i, j) == doctest::Approx(expected).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("matrix and direct application agree through the conjugation") {
  const int n = 3;
  const double eps = 0.5;
  const int N = 120;
  const double R = 7.0;
  const cone::LogGrid g = cone::make_log_grid(N, R);
  RVec u(N);
  for (int i = 0; i < N; ++i) u(i) = 1.0 + 0.3 * std::sin(3.0 * g.r(i));

  const RVec out = kernels::hardy_apply(g, n, eps, u);
  const RMat m = kernels::hardy_matrix(n, eps, N, R);

  // The matrix indexes t increasing (deep end first); the grid profile is
  // stored t decreasing. Conjugate by t^{(n+1)/2} and reverse.
  const double a = 0.5 * (n + 1);
  RVec um(N), wm(N);
  for (int k = 0; k < N; ++k) {
    wm(k) = std::pow(std::exp(-(N - k) * g.h), a);
    um(k) = u(N - 1 - k);
  }
  const RVec vm = (m * wm.cwiseProduct(um)).cwiseQuotient(wm);
  double gap = 0.0;
  for (int k = 0; k < N; ++k) gap = std::max(gap, std::abs(vm(N - 1 - k) - out(k)));
  CHECK(gap <= 1e-12 * out.norm());
}

TEST_CASE("applying the kernel to a constant reproduces the closed form") {
  // (G 1)(t) = 1 / ((n+1)/2 + eps), uniformly in t; the left-endpoint rule
  // converges at first order in h.
  const int n = 3;
  const double eps = 0.5;
  const double target = 1.0 / (0.5 * (n + 1) + eps);

  double prev = 1.0;
  for (int N : {200, 400}) {
    const cone::LogGrid g = cone::make_log_grid(N, 8.0);
    const RVec out = kernels::hardy_apply(g, n, eps, RVec::Ones(N));
    double worst = 0.0;
    for (int i = N / 4; i < 3 * N / 4; ++i) {
      worst = std::max(worst, std::abs(out(i) - target) / target);
    }
    CHECK(worst <= 2.0 * g.h);
    CHECK(worst <= 0.7 * prev);
    prev = worst;
  }
}

TEST_CASE("spectral estimates stay within the continuum bound") {
  kernels::HardyParams params;
  params.n = 3;
  params.eps = 0.5;
  params.p = 2.0;
  params.N = 200;
  params.R = 8.0;
  const auto res = kernels::hardy_norm(params);
  CHECK(res.bound == doctest::Approx(2.0));
  CHECK(res.ratio == doctest::Approx(res.norm_estimate * params.eps));
  CHECK(res.pass);
  CHECK(res.ratio <= 1.05);
  CHECK(res.ratio >= 0.5);

  // Row/column sums bound the spectral norm by h / (1 - e^{-eps h}).
  const double h = params.R / (params.N + 1);
  CHECK(res.norm_estimate <= h / (1.0 - std::exp(-params.eps * h)) + 1e-9);

  kernels::HardyParams sharp = params;
  sharp.eps = 1.0;
  sharp.N = 400;
  sharp.R = 10.0;
  const auto res2 = kernels::hardy_norm(sharp);
  CHECK(res2.pass);
  CHECK(res2.ratio <= 1.05);
}

TEST_CASE("power iteration matches the SVD on small grids") {
  kernels::HardyParams params;
  params.n = 2;
  params.eps = 0.4;
  params.p = 2.0;
  params.N = 80;
  params.R = 6.0;
  const auto res = kernels::hardy_norm(params);
  const RMat m = kernels::hardy_matrix(params.n, params.eps, params.N, params.R);
  const double svd = m.bdcSvd().singularValues()(0);
  CHECK(res.norm_estimate == doctest::Approx(svd).epsilon(1e-8));
}

TEST_CASE("probe estimates for general exponents stay below the certified bound") {
  for (double p : {1.5, 3.0}) {
    kernels::HardyParams params;
    params.n = 3;
    params.eps = 0.5;
    params.p = p;
    params.N = 200;
    params.R = 8.0;
    const auto res = kernels::hardy_norm(params);
    // Lower bound by probing; the interpolation bound still caps it.
    const double h = params.R / (params.N + 1);
    CHECK(res.norm_estimate <= h / (1.0 - std::exp(-params.eps * h)) + 1e-9);
    CHECK(res.norm_estimate > 0.5 / params.eps);
    CHECK(res.pass);

    // Seeded probing is deterministic.
    const auto res_again = kernels::hardy_norm(params);
    CHECK(res_again.norm_estimate == res.norm_estimate);
  }
}

TEST_CASE("invalid kernel parameters are rejected") {
  kernels::HardyParams params;
  params.N = 0;
  CHECK_THROWS_AS(kernels::hardy_norm(params), InvalidRequestError);
  params.N = 100;
  params.R = 0.0;
  CHECK_THROWS_AS(kernels::hardy_norm(params), InvalidRequestError);
  params.R = 8.0;
  params.eps = 0.0;
  CHECK_THROWS_AS(kernels::hardy_norm(params), InvalidRequestError);
  params.eps = 0.5;
  params.p = 1.0;
  CHECK_THROWS_AS(kernels::hardy_norm(params), InvalidRequestError);
}
