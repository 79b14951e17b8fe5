#include "doctest.h"

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "conecalc/calculus.hpp"
#include "conecalc/cone_laplacian.hpp"

using namespace conecalc;
using sectors::Sector;

namespace {

sectors::Contour contour_for(const holo::HFunction& f, const Sector& s,
                             double tol, int max_nodes) {
  sectors::ContourOptions co;
  co.integrand_scale = f.certificate->scale;
  co.imag_order = f.imag_order;
  return sectors::boundary_contour(s, f.certificate->delta, tol, max_nodes, co);
}

CMat symmetric_mode_matrix(const cone::ConeModeOperator& op) {
  const int n = static_cast<int>(op.dim());
  RMat sym = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i) sym(i, i) = op.main_diagonal()(i);
  for (int i = 0; i + 1 < n; ++i) {
    sym(i, i + 1) = op.upper_diagonal()(i);
    sym(i + 1, i) = op.lower_diagonal()(i);
  }
  return sym.cast<Complex>();
}

CMat mode_function_oracle(const cone::ConeModeOperator& op,
                          const std::function<Complex(double)>& f) {
  const int n = static_cast<int>(op.dim());
  Eigen::SelfAdjointEigenSolver<RMat> es(symmetric_mode_matrix(op).real());
  CMat out = CMat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    out += f(es.eigenvalues()(k)) *
           (es.eigenvectors().col(k) * es.eigenvectors().col(k).transpose())
               .cast<Complex>();
  }
  return out;
}

}  // namespace

TEST_CASE("diagonal transform reproduces pointwise values") {
  const Sector s(kPi / 2.0);
  CVec d(2);
  d << 1.0, 4.0;
  ops::DiagonalOperator op(d);

  auto f = holo::power_quotient(0.5, s);
  auto c = contour_for(f, s, 1e-8, 400);
  auto r = calc::dunford(op, f, c);

  CHECK(r.error_estimate <= 1e-8);
  CHECK(std::abs(r.value(0, 0) - 0.5) <= r.error_estimate + 1e-12);
  CHECK(std::abs(r.value(1, 1) - 0.4) <= r.error_estimate + 1e-12);
  CHECK(std::abs(r.value(0, 1)) <= 1e-14);
  CHECK(std::abs(r.value(1, 0)) <= 1e-14);
  CHECK(r.nodes_used == c.total_nodes());
}

TEST_CASE("several certified members hit the diagonal oracle inside estimate") {
  const Sector s(kPi / 2.0);
  CVec d(3);
  d << 0.5, 3.0, 40.0;
  ops::DiagonalOperator op(d);

  std::vector<holo::HFunction> members = {
      holo::power_quotient(0.5, s), holo::power_quotient(1.0, s),
      holo::imaginary_power_regularized(1.0, 1.0, s),
      holo::imaginary_power_regularized(-2.0, 1.0, s)};
  for (const auto& f : members) {
    auto c = contour_for(f, s, 1e-8, 2000);
    auto r = calc::dunford(op, f, c);
    double gap = 0.0;
    for (int i = 0; i < 3; ++i)
      gap = std::max(gap, std::abs(r.value(i, i) - f.eval(d(i))));
    CAPTURE(f.description);
    CHECK(gap <= r.error_estimate + 1e-12);
    CHECK(gap <= 1e-8);
  }
}

TEST_CASE("quarter power needs more than four hundred nodes at 1e-8") {
  const Sector s(kPi / 2.0);
  auto f = holo::power_quotient(0.25, s);
  sectors::ContourOptions co;
  co.integrand_scale = f.certificate->scale;

  bool threw = false;
  try {
    sectors::boundary_contour(s, 0.25, 1e-8, 400, co);
  } catch (const BudgetExceededError& e) {
    threw = true;
    CHECK(e.achievable > 1e-8);
    CHECK(e.achievable < 1e-3);
  }
  CHECK(threw);

  // The same request converges once the budget allows ~900 nodes.
  auto c = sectors::boundary_contour(s, 0.25, 1e-8, 1000, co);
  CVec d(2);
  d << 1.0, 4.0;
  ops::DiagonalOperator op(d);
  auto r = calc::dunford(op, f, c);
  const double gap = std::max(std::abs(r.value(0, 0) - f.eval(1.0)),
                              std::abs(r.value(1, 1) - f.eval(4.0)));
  CHECK(gap <= 1e-8);
  CHECK(c.total_nodes() <= 1000);
}

TEST_CASE("non-normal block matches the analytic transform") {
  // A = [[2,1],[0,2]], f = z/(1+z)^2: f(A) = f(2) I + f'(2) N.
  const Sector s(kPi / 2.0);
  CMat a(2, 2);
  a << 2.0, 1.0, 0.0, 2.0;
  ops::DenseOperator op(a);
  auto f = holo::power_quotient(1.0, s);
  auto c = contour_for(f, s, 1e-8, 2000);
  auto r = calc::dunford(op, f, c);

  CMat oracle(2, 2);
  oracle << 2.0 / 9.0, -1.0 / 27.0, 0.0, 2.0 / 9.0;
  const double gap = (r.value - oracle).norm();
  // The error estimate is calibrated on scalar data; non-normal residuals
  // may exceed it by a bounded factor.
  CHECK(gap <= 1.5 * r.error_estimate);
  CHECK(gap <= 1e-7);
}

TEST_CASE("transform of a product equals the product of transforms") {
  const Sector s(kPi / 2.0);
  CVec d(3);
  d << 0.5, 3.0, 40.0;
  ops::DiagonalOperator op(d);

  auto f = holo::power_quotient(0.5, s);
  auto g = holo::power_quotient(0.25, s);
  auto fg = holo::product(f, g, s);

  auto rf = calc::dunford(op, f, contour_for(f, s, 1e-8, 2000));
  auto rg = calc::dunford(op, g, contour_for(g, s, 1e-8, 2000));
  auto rfg = calc::dunford(op, fg, contour_for(fg, s, 1e-8, 2000));

  CHECK((rf.value * rg.value - rfg.value).norm() <= 1e-7);
}

TEST_CASE("rescaling the operator matches rescaling the argument") {
  const Sector s(kPi / 2.0);
  const double scale = 7.0;
  CVec d(3);
  d << 0.3, 2.0, 11.0;
  ops::DiagonalOperator op(d);
  ops::DiagonalOperator op_scaled((scale * d).eval());

  auto f = holo::power_quotient(0.5, s);
  auto lhs = calc::dunford(op_scaled, f, contour_for(f, s, 1e-9, 4000));

  // z -> f(scale z) keeps the decay exponent; the certificate constant
  // grows by at most scale^delta.
  auto fc = holo::user_defined(
      [&](Complex z) { return f.eval(scale * z); },
      holo::DecayCertificate{0.5, f.certificate->scale * std::sqrt(scale)},
      s.theta);
  auto rhs = calc::dunford(op, fc, contour_for(fc, s, 1e-9, 4000));

  CHECK((lhs.value - rhs.value).norm() <= 1e-8);
}

TEST_CASE("cone mode transform matches its eigendecomposition") {
  const Sector s(kPi / 2.0);
  const cone::LogGrid g = cone::make_log_grid(60, 5.0);
  const cone::ConeModeOperator op(g, 3, -1.0);

  auto f = holo::power_quotient(0.5, s);
  auto c = contour_for(f, s, 1e-7, 4000);
  auto r = calc::dunford(op, f, c);

  CMat oracle =
      mode_function_oracle(op, [&](double a) { return f.eval(a); });
  const double gap = (r.value - oracle).norm();
  CHECK(gap <= 1.5 * r.error_estimate);
  CHECK(gap <= 1e-6);
}

TEST_CASE("closed-path imaginary powers are exact on known points") {
  CVec d(2);
  d << 1.0, std::exp(1.0);
  ops::DiagonalOperator op(d);
  auto r = calc::imaginary_power_closed_path(op, 1.0);

  CHECK(std::abs(r.value(0, 0) - 1.0) <= 1e-9);
  CHECK(std::abs(r.value(1, 1) - std::exp(Complex(0.0, 1.0))) <= 1e-9);
}

TEST_CASE("imaginary powers of positive diagonal operators are isometries") {
  CVec d(4);
  d << 0.5, 1.1, 2.3, 4.0;
  ops::DiagonalOperator op(d);
  for (double t : {1.0, -1.0, 3.0, -3.0}) {
    auto r = calc::imaginary_power_closed_path(op, t);
    const double nrm = ops::weighted_spectral_norm(r.value, RVec::Ones(4));
    CAPTURE(t);
    CHECK(std::abs(nrm - 1.0) <= 1e-6);
  }
}

TEST_CASE("regularized and closed imaginary-power paths agree") {
  const Sector s(kPi / 2.0);
  CVec d(3);
  d << 0.5, 1.0, 2.0;
  ops::DiagonalOperator op(d);
  for (double t : {1.0, -2.0}) {
    auto closed = calc::imaginary_power_closed_path(op, t);
    auto reg = calc::imaginary_power_regularized_path(op, t, s);
    CAPTURE(t);
    CHECK((closed.value - reg.value).norm() <= 1e-6);
  }
}

TEST_CASE("imaginary-power growth stays inside the resolvent envelope") {
  const Sector s(kPi / 2.0);
  CMat nn(2, 2);
  nn << 1.0, 10.0, 0.0, 1.5;
  ops::DenseOperator op(nn);
  auto scan = ops::sectoriality_scan(op, s);
  for (double t : {1.0, 3.0, -3.0}) {
    auto r = calc::imaginary_power_closed_path(op, t);
    const double nrm = ops::weighted_spectral_norm(r.value, RVec::Ones(2));
    const double bound = 1.1 * scan.sup_norm * std::exp(std::abs(t) * s.theta);
    CAPTURE(t);
    CHECK(nrm <= bound);
  }
}

TEST_CASE("heat evolution matches the exponential on diagonal operators") {
  CVec d(3);
  d << 1.0, 4.0, 9.0;
  ops::DiagonalOperator op(d);
  auto r1 = calc::heat_semigroup(op, 0.3);
  auto r2 = calc::heat_semigroup(op, 0.5);
  auto r3 = calc::heat_semigroup(op, 0.8);

  CHECK(r2.path == "closed-circle");
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    worst = std::max(worst, std::abs(r2.value(i, i) - std::exp(-0.5 * d(i).real())));
  CHECK(worst <= 1e-12);
  // One-parameter composition law.
  CHECK((r1.value * r2.value - r3.value).norm() <= 1e-12);
}

TEST_CASE("stiff spectra switch the heat path to the parabola") {
  CVec d(3);
  d << 1.0, 5e3, 2e4;
  ops::DiagonalOperator op(d);
  for (double tau : {1.0, 0.05}) {
    auto r = calc::heat_semigroup(op, tau);
    CAPTURE(tau);
    CHECK(r.path == "parabola");
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
      worst = std::max(worst, std::abs(r.value(i, i) - std::exp(-tau * d(i).real())));
    CHECK(worst <= 1e-10);
    CHECK(std::abs(r.value(0, 1)) + std::abs(r.value(1, 2)) <= 1e-12);
  }
}

TEST_CASE("cone-mode heat kernel is positive and matches the mode oracle") {
  const cone::LogGrid g = cone::make_log_grid(60, 5.0);
  const cone::ConeModeOperator op(g, 3, -1.0);
  const double tau = 1e-4;
  auto r = calc::heat_semigroup(op, tau);

  CMat oracle = mode_function_oracle(
      op, [&](double a) { return Complex(std::exp(-tau * a), 0.0); });
  CHECK((r.value - oracle).norm() <= 1e-10);
  CHECK(r.value.real().minCoeff() >= -1e-12);
  CHECK(r.value.imag().cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("invalid transform requests are refused") {
  const Sector s(kPi / 2.0);
  CVec d1(1);
  d1 << 1.0;
  ops::DiagonalOperator op(d1);

  // Closed power path with spectrum touching the left half-plane.
  CVec dneg(2);
  dneg << 0.5, -0.1;
  ops::DiagonalOperator opneg(dneg);
  CHECK_THROWS_AS(calc::imaginary_power_closed_path(opneg, 1.0),
                  InvalidRequestError);

  CHECK_THROWS_AS(calc::heat_semigroup(op, 0.0), InvalidRequestError);

  auto c = sectors::boundary_contour(s, 0.5, 1e-6, 400);
  // No decay certificate.
  auto g = holo::shifted_rational(1.0, s);
  CHECK_THROWS_AS(calc::dunford(op, g, c), InvalidRequestError);
  // Certificate decay weaker than the contour assumes.
  auto f025 = holo::power_quotient(0.25, s);
  CHECK_THROWS_AS(calc::dunford(op, f025, c), InvalidRequestError);
  // Certificate valid only on a narrower sector than the contour.
  auto fn = holo::power_quotient(0.5, Sector(kPi / 4.0));
  CHECK_THROWS_AS(calc::dunford(op, fn, c), InvalidRequestError);
}

TEST_CASE("cauchy evolution reproduces the scalar closed form") {
  const Sector s(kPi / 2.0);
  ops::DiagonalOperator mode((CVec(1) << Complex(1.0, 0.0)).finished());
  std::vector<const ops::ResolventProvider*> modes = {&mode};
  std::vector<std::function<CVec(double)>> forcing = {
      [](double) { return (CVec(1) << Complex(1.0, 0.0)).finished(); }};
  calc::CauchyOptions copt;
  copt.T = 1.0;
  copt.steps = 256;
  auto r = calc::cauchy_solve(modes, forcing, s, copt);

  // u' + u = 1, u(0) = 0 has u(t) = 1 - e^{-t}.
  double worst = 0.0;
  for (int k = 0; k <= copt.steps; ++k)
    worst = std::max(worst, std::abs(r.trajectories[0](k, 0) -
                                     (1.0 - std::exp(-r.times(k)))));
  CHECK(worst <= 1e-6);
  CHECK(r.rho > 0.0);
  CHECK(r.rho < 50.0);
  CHECK(r.path == "exponential-midpoint(closed-circle)");

  std::vector<std::function<CVec(double)>> zero_forcing = {
      [](double) { return CVec::Zero(1).eval(); }};
  auto rz = calc::cauchy_solve(modes, zero_forcing, s, copt);
  CHECK(rz.rho == 0.0);
  CHECK(rz.trajectories[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cauchy solve rejects wide sectors and unstable modes") {
  const Sector s(kPi / 2.0);
  ops::DiagonalOperator mode((CVec(1) << Complex(1.0, 0.0)).finished());
  std::vector<const ops::ResolventProvider*> modes = {&mode};
  std::vector<std::function<CVec(double)>> forcing = {
      [](double) { return (CVec(1) << Complex(1.0, 0.0)).finished(); }};
  CHECK_THROWS_AS(
      calc::cauchy_solve(modes, forcing, Sector(3.0 * kPi / 4.0), {}),
      InvalidRequestError);

  ops::DiagonalOperator neg((CVec(1) << Complex(-1.0, 0.0)).finished());
  std::vector<const ops::ResolventProvider*> bad = {&neg};
  CHECK_THROWS_AS(calc::cauchy_solve(bad, forcing, s, {}), InvalidRequestError);
}

TEST_CASE("sup calculus bound is tight for diagonal and stable for dense") {
  const Sector s(kPi / 2.0);
  CVec d(3);
  d << 0.2, 1.0, 5.0;
  ops::DiagonalOperator op(d);
  auto fam = calc::default_bound_family(s, 42, 4);
  CHECK(fam.size() == 11);

  auto b1 = calc::sup_calculus_bound(op, s, fam);
  CHECK(b1.bound <= 1.05);
  CHECK(b1.bound > 0.5);
  CHECK(b1.member_ratios.size() == fam.size());

  CMat nn(2, 2);
  nn << 1.0, 10.0, 0.0, 1.5;
  ops::DenseOperator nop(nn);
  auto nb1 = calc::sup_calculus_bound(nop, s, fam);
  auto nb2 = calc::sup_calculus_bound(nop, s, fam, 1e-6, 4000, 2);
  CHECK(nb1.bound > 0.0);
  CHECK(std::abs(nb2.bound - nb1.bound) / nb1.bound < 0.2);
}
