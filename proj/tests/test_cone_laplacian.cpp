#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "conecalc/cone_laplacian.hpp"
#include "conecalc/operators.hpp"
#include "doctest.h"

using namespace conecalc;
using cone::BoundaryCondition;

TEST_CASE("log grid layout") {
  const cone::LogGrid g = cone::make_log_grid(3, 1.0);
  CHECK(g.h == doctest::Approx(0.25));
  CHECK(g.r(0) == doctest::Approx(0.25));
  CHECK(g.r(1) == doctest::Approx(0.50));
  CHECK(g.r(2) == doctest::Approx(0.75));
  CHECK(g.t(0) == doctest::Approx(std::exp(-0.25)));
  CHECK(g.t(2) == doctest::Approx(std::exp(-0.75)));

  CHECK_THROWS_AS(cone::make_log_grid(0, 1.0), InvalidRequestError);
  CHECK_THROWS_AS(cone::make_log_grid(10, 0.0), InvalidRequestError);
  CHECK_THROWS_AS(cone::make_log_grid(10, -2.0), InvalidRequestError);
}

TEST_CASE("interval spectra for both boundary conditions") {
  const RVec d = cone::interval_spectrum(kPi, BoundaryCondition::Dirichlet, 3);
  REQUIRE(d.size() == 3);
  CHECK(d(0) == doctest::Approx(-1.0));
  CHECK(d(1) == doctest::Approx(-4.0));
  CHECK(d(2) == doctest::Approx(-9.0));

  const RVec dh =
      cone::interval_spectrum(kPi / 2.0, BoundaryCondition::Dirichlet, 1);
  CHECK(dh(0) == doctest::Approx(-4.0));

  const RVec nm = cone::interval_spectrum(kPi, BoundaryCondition::Neumann, 2);
  CHECK(nm(0) == doctest::Approx(0.0));
  CHECK(nm(1) == doctest::Approx(-1.0));

  CHECK_THROWS_AS(cone::interval_spectrum(kPi, BoundaryCondition::Dirichlet, 0),
                  InvalidRequestError);
  CHECK_THROWS_AS(cone::interval_spectrum(0.0, BoundaryCondition::Dirichlet, 1),
                  InvalidRequestError);
}

TEST_CASE("stencil entries match the hand computation on a tiny grid") {
  // n = 1, lambda = -4, N = 3, R = 1: h = 1/4,
  //   main_i  = e^{2 r_i} (2/h^2 + 4),
  //   off_i   = -e^{2 r_i + h} / h^2  (both couplings, exactly symmetric).
  const cone::LogGrid g = cone::make_log_grid(3, 1.0);
  const cone::ConeModeOperator op(g, 1, -4.0);
  const double h = 0.25;
  for (int i = 0; i < 3; ++i) {
    const double expected = std::exp(2.0 * g.r(i)) * (2.0 / (h * h) + 4.0);
    CHECK(op.main_diagonal()(i) == doctest::Approx(expected).epsilon(1e-14));
  }
  for (int i = 0; i < 2; ++i) {
    const double off = -std::exp(2.0 * g.r(i) + h) / (h * h);
    CHECK(op.upper_diagonal()(i) == doctest::Approx(off).epsilon(1e-14));
    CHECK(op.lower_diagonal()(i) == doctest::Approx(off).epsilon(1e-14));
  }

  // apply() realizes exactly this tridiagonal.
  CVec e1 = CVec::Zero(3);
  e1(1) = 1.0;
  CVec out(3);
  op.apply(e1, out);
  CHECK(std::abs(out(0) - op.upper_diagonal()(0)) < 1e-12);
  CHECK(std::abs(out(1) - op.main_diagonal()(1)) < 1e-12);
  CHECK(std::abs(out(2) - op.lower_diagonal()(1)) < 1e-12);
}

TEST_CASE("construction rejects invalid parameters") {
  const cone::LogGrid g = cone::make_log_grid(10, 2.0);
  CHECK_THROWS_AS(cone::ConeModeOperator(g, 0, -1.0), InvalidRequestError);
  CHECK_THROWS_AS(cone::ConeModeOperator(g, 3, -1.0, 0.0, 1.0),
                  InvalidRequestError);
  // Grids reaching too deep overflow the e^{2r} entry growth.
  CHECK_THROWS_AS(
      cone::ConeModeOperator(cone::make_log_grid(40, 15.0), 3, -1.0),
      InvalidRequestError);
}

TEST_CASE("the conjugated matrix is exactly symmetric at the natural weight") {
  const cone::LogGrid g = cone::make_log_grid(60, 4.0);
  const cone::ConeModeOperator sym(g, 3, -1.0, 0.0, 2.0);
  CHECK(sym.symmetry_defect() == 0.0);

  const cone::ConeModeOperator skew(g, 3, -1.0, 0.3, 2.0);
  CHECK(skew.symmetry_defect() > 0.0);
}

TEST_CASE("mode operators of the standard cross-section are positive") {
  const cone::LogGrid g = cone::make_log_grid(80, 4.0);
  const RVec spectrum =
      cone::interval_spectrum(kPi, BoundaryCondition::Dirichlet, 3);
  const auto modes = cone::build_cone_modes(g, 3, spectrum);
  REQUIRE(modes.size() == 3);
  for (const auto& m : modes) {
    const auto range = m.eigenvalue_range();
    CHECK(range.first > 0.0);
    CHECK(range.second > range.first);
    const auto bounds = m.real_spectral_bounds();
    REQUIRE(bounds.has_value());
    CHECK(bounds->first == doctest::Approx(range.first));
  }
}

TEST_CASE("the smallest eigenvalue is stable under refinement") {
  const cone::ConeModeOperator coarse(cone::make_log_grid(200, 6.0), 3, -1.0);
  const cone::ConeModeOperator fine(cone::make_log_grid(400, 7.0), 3, -1.0);
  const double e1 = coarse.eigenvalue_range().first;
  const double e2 = fine.eigenvalue_range().first;
  CHECK(std::abs(e2 - e1) <= 0.05 * std::abs(e1));
}

TEST_CASE("a vanishing cross-section eigenvalue pushes the bottom of the spectrum to zero") {
  // n = 1, lambda_mode = 0: no spectral gap in the continuum; the discrete
  // bottom eigenvalue must decay as the truncation deepens.
  double prev = std::numeric_limits<double>::infinity();
  for (double R : {2.0, 4.0, 6.0}) {
    const cone::ConeModeOperator op(cone::make_log_grid(160, R), 1, 0.0);
    const double bottom = op.eigenvalue_range().first;
    CHECK(bottom > 0.0);
    CHECK(bottom < prev);
    prev = bottom;
  }
}

TEST_CASE("resolve agrees with the dense matrix and leaves a small residual") {
  const cone::LogGrid g = cone::make_log_grid(50, 4.0);
  const cone::ConeModeOperator op(g, 3, -4.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CVec rhs(g.N);
  for (int i = 0; i < g.N; ++i) rhs(i) = Complex(u(rng), u(rng));

  const Complex lambda(-2.0 * op.scale_hint(), 0.5 * op.scale_hint());
  CVec x(g.N), ax(g.N);
  op.resolve(lambda, rhs, x);
  op.apply(x, ax);
  CHECK((lambda * x - ax - rhs).norm() <= 1e-10 * rhs.norm());

  CMat r(g.N, g.N);
  op.resolve_matrix(lambda, r);
  CHECK((r * rhs - x).norm() <= 1e-9 * x.norm());

  // Adjoint consistency through inner products.
  CVec y(g.N), ry(g.N);
  for (int i = 0; i < g.N; ++i) y(i) = Complex(u(rng), u(rng));
  op.resolve_adjoint(lambda, y, ry);
  CHECK(std::abs(x.dot(y) - rhs.dot(ry)) <= 1e-9 * rhs.norm() * y.norm());
}

TEST_CASE("discrete norm unwinds to the weighted lp sum") {
  const cone::LogGrid g = cone::make_log_grid(32, 3.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CVec v(g.N);
  for (int i = 0; i < g.N; ++i) v(i) = Complex(u(rng), u(rng));

  const int n = 3;
  const double p = 2.5;
  const double gamma = 0.4;
  const double beta = 0.5 * (n + 1) - gamma;
  double acc = 0.0;
  for (int i = 0; i < g.N; ++i) {
    acc += std::pow(std::pow(g.t(i), beta) * std::abs(v(i)), p);
  }
  const double oracle = std::pow(g.h * acc, 1.0 / p);
  CHECK(cone::discrete_norm(g, v, p, gamma, n) ==
        doctest::Approx(oracle).epsilon(1e-13));

  // Homogeneity.
  CHECK(cone::discrete_norm(g, CVec(3.0 * v), p, gamma, n) ==
        doctest::Approx(3.0 * oracle).epsilon(1e-13));
}

TEST_CASE("index-shift dilations scale the norm by the weight gap") {
  const cone::LogGrid g = cone::make_log_grid(120, 6.0);
  const int n = 3;

  // No shift: trivially an isometry.
  const auto none = cone::dilation_check(g, n, 2.0, 0.7, 0);
  CHECK(none.ratio == doctest::Approx(1.0));
  CHECK(none.defect <= 1e-14);

  // At the dilation-invariant weight the shift is an exact isometry.
  const auto iso = cone::dilation_check(g, n, 2.0, 0.0, 7);
  CHECK(iso.predicted == doctest::Approx(1.0));
  CHECK(iso.defect <= 1e-12);

  // Off the invariant weight the ratio follows rho^{gamma - gamma_p}.
  const auto off = cone::dilation_check(g, n, 2.0, 0.5, 7);
  const double rho = std::exp(7.0 * g.h);
  CHECK(off.predicted == doctest::Approx(std::pow(rho, 0.5)));
  CHECK(off.defect <= 1e-12);

  const auto lp = cone::dilation_check(g, n, 3.0, 0.2, 5);
  const double gamma_p = (n + 1) * (0.5 - 1.0 / 3.0);
  CHECK(lp.predicted ==
        doctest::Approx(std::pow(std::exp(5.0 * g.h), 0.2 - gamma_p)));
  CHECK(lp.defect <= 1e-12);

  CHECK_THROWS_AS(cone::dilation_check(g, n, 2.0, 0.0, g.N), InvalidRequestError);
}

TEST_CASE("transform profiles reproduce closed-form integrals") {
  const cone::LogGrid g = cone::make_log_grid(200, 3.0);
  const std::vector<Complex> zs = {Complex(1.0, 0.0)};

  // u == 1 (including boundary values): integral of t^z dt/t over
  // (e^{-R}, 1) at z = 1 is 1 - e^{-R}.
  const CVec ones = CVec::Ones(g.N);
  const CVec f1 = cone::mellin_profile(g, ones, zs, 1.0, 1.0);
  CHECK(std::abs(f1(0) - Complex(1.0 - std::exp(-g.R), 0.0)) <= 1e-4);

  // u(t) = t: value (1 - e^{-2R}) / 2 at z = 1.
  CVec lin(g.N);
  for (int i = 0; i < g.N; ++i) lin(i) = g.t(i);
  const CVec f2 = cone::mellin_profile(g, lin, zs, 1.0, std::exp(-g.R));
  CHECK(std::abs(f2(0) - Complex((1.0 - std::exp(-2.0 * g.R)) / 2.0, 0.0)) <=
        1e-4);

  // Zero profile, zero boundaries.
  const CVec f0 = cone::mellin_profile(g, CVec::Zero(g.N), zs);
  CHECK(std::abs(f0(0)) == 0.0);

  CHECK_THROWS_AS(cone::mellin_profile(g, CVec::Zero(5), zs),
                  InvalidRequestError);
}

TEST_CASE("eigenvalue list matches a dense eigensolve") {
  const cone::LogGrid g = cone::make_log_grid(40, 3.0);
  const cone::ConeModeOperator op(g, 3, -1.0, 0.2);
  const RVec eigs = op.eigenvalues();
  REQUIRE(eigs.size() == g.N);
  for (int i = 1; i < eigs.size(); ++i) CHECK(eigs(i) >= eigs(i - 1));

  const auto dense = op.dense();
  REQUIRE(dense.has_value());
  Eigen::ComplexEigenSolver<CMat> es(*dense, false);
  RVec dense_eigs(g.N);
  double max_imag = 0.0;
  for (int i = 0; i < g.N; ++i) {
    dense_eigs(i) = es.eigenvalues()(i).real();
    max_imag = std::max(max_imag, std::abs(es.eigenvalues()(i).imag()));
  }
  std::sort(dense_eigs.begin(), dense_eigs.end());
  // The similarity transform guarantees a real spectrum even at gamma != 0.
  CHECK(max_imag <= 1e-8 * op.scale_hint());
  for (int i = 0; i < g.N; ++i) {
    CHECK(eigs(i) == doctest::Approx(dense_eigs(i))
                         .epsilon(1e-8)
                         .scale(op.scale_hint()));
  }
}
