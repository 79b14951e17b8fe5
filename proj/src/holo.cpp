#include "conecalc/holo.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace conecalc::holo {

namespace {

using sectors::principal_log;

// Max of a scalar function over s in [lo, hi]: dense bracket scan, then
// golden-section refinement of the best bracket.
double maximize_on_interval(const std::function<double(double)>& g, double lo,
                            double hi, int scan = 512) {
  double best_s = lo;
  double best = g(lo);
  for (int i = 1; i <= scan; ++i) {
    const double s = lo + (hi - lo) * i / scan;
    const double v = g(s);
    if (v > best) {
      best = v;
      best_s = s;
    }
  }
  const double step = (hi - lo) / scan;
  double a = std::max(lo, best_s - step);
  double b = std::min(hi, best_s + step);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = g(x1);
  double f2 = g(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-14; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = g(x1);
    }
  }
  return std::max({best, f1, f2});
}

}  // namespace

double power_quotient_scale(double d, double theta) {
  // (1 + r^{2d}) / (1 + 2 r cos(theta) + r^2)^d in s = log r; even in s, so
  // scan the positive half-line.
  const double ct = std::cos(theta);
  auto g = [d, ct](double s) {
    const double r = std::exp(s);
    const double den = 1.0 + 2.0 * r * ct + r * r;
    return (1.0 + std::pow(r, 2.0 * d)) / std::pow(den, d);
  };
  return maximize_on_interval(g, 0.0, 60.0);
}

HFunction power_quotient(double d, const sectors::Sector& sector) {
  if (!(d > 0.0)) {
    throw InvalidRequestError("power quotient exponent must be positive");
  }
  HFunction f;
  f.kind = Kind::PowerQuotient;
  f.description = "lambda^d/(1+lambda)^{2d}, d=" + std::to_string(d);
  f.eval = [d](Complex lambda) {
    return std::exp(d * principal_log(lambda) -
                    2.0 * d * principal_log(1.0 + lambda));
  };
  f.certificate = DecayCertificate{d, power_quotient_scale(d, sector.theta)};
  f.theta_ref = sector.theta;
  f.bounded_on_sector = true;
  return f;
}

HFunction shifted_rational(double a, const sectors::Sector& sector) {
  if (!(a > 0.0)) {
    throw InvalidRequestError("shift must be positive");
  }
  HFunction f;
  f.kind = Kind::ShiftedRational;
  f.description = "a/(a+lambda), a=" + std::to_string(a);
  f.eval = [a](Complex lambda) { return a / (a + lambda); };
  // Bounded (pole at -a sits inside the resolvent sector) but with no decay
  // at 0, so no open-contour certificate.
  f.theta_ref = sector.theta;
  f.bounded_on_sector = true;
  return f;
}

HFunction imaginary_power_regularized(double t, double eps,
                                      const sectors::Sector& sector) {
  if (!(eps > 0.0)) {
    throw InvalidRequestError("regularization exponent must be positive");
  }
  HFunction f;
  f.kind = Kind::ImaginaryPowerRegularized;
  f.description = "lambda^{it} lambda^e/(1+lambda)^{2e}, t=" +
                  std::to_string(t) + ", e=" + std::to_string(eps);
  f.eval = [t, eps](Complex lambda) {
    return std::exp(Complex(eps, t) * principal_log(lambda) -
                    2.0 * eps * principal_log(1.0 + lambda));
  };
  // |lambda^{it}| = e^{-t arg lambda} <= e^{|t| theta} on the spectral
  // sector of half-angle theta; the quotient factor contributes its own
  // sharp scale.
  f.certificate = DecayCertificate{
      eps, std::exp(std::abs(t) * sector.theta) *
               power_quotient_scale(eps, sector.theta)};
  f.theta_ref = sector.theta;
  f.imag_order = std::abs(t);
  f.bounded_on_sector = true;
  return f;
}

HFunction exponential_decay(double tau, const sectors::Sector& sector) {
  if (!(tau > 0.0)) {
    throw InvalidRequestError("time parameter must be positive");
  }
  if (sector.theta > kPi / 2.0 + 1e-12) {
    throw InvalidRequestError(
        "exp(-tau lambda) is unbounded when the spectral sector leaves the "
        "right half-plane (theta > pi/2)");
  }
  HFunction f;
  f.kind = Kind::ExponentialDecay;
  f.description = "exp(-tau lambda), tau=" + std::to_string(tau);
  f.eval = [tau](Complex lambda) { return std::exp(-tau * lambda); };
  // Bounded on the spectral sector but with |f(0)| = 1: closed paths only.
  f.theta_ref = sector.theta;
  f.bounded_on_sector = true;
  return f;
}

HFunction user_defined(std::function<Complex(Complex)> fn,
                       std::optional<DecayCertificate> certificate,
                       double theta_ref, std::string description) {
  HFunction f;
  f.kind = Kind::UserDefined;
  f.description = std::move(description);
  f.eval = std::move(fn);
  f.certificate = certificate;
  f.theta_ref = theta_ref;
  f.bounded_on_sector = certificate.has_value();
  return f;
}

HFunction product(const HFunction& f, const HFunction& g,
                  const sectors::Sector& sector) {
  HFunction out;
  out.kind = Kind::Product;
  out.description = "(" + f.description + ")*(" + g.description + ")";
  auto fe = f.eval;
  auto ge = g.eval;
  out.eval = [fe, ge](Complex lambda) { return fe(lambda) * ge(lambda); };
  out.theta_ref = std::max(f.theta_ref, g.theta_ref);
  out.imag_order = f.imag_order + g.imag_order;
  out.bounded_on_sector = f.bounded_on_sector && g.bounded_on_sector;
  if (f.certificate && g.certificate) {
    // (r^a + r^-a)(r^b + r^-b) >= r^{a+b} + r^{-(a+b)}
    out.certificate = DecayCertificate{
        f.certificate->delta + g.certificate->delta,
        f.certificate->scale * g.certificate->scale};
  } else if (f.certificate && g.bounded_on_sector) {
    out.certificate = DecayCertificate{
        f.certificate->delta, f.certificate->scale * sup_norm_estimate(g, sector)};
  } else if (g.certificate && f.bounded_on_sector) {
    out.certificate = DecayCertificate{
        g.certificate->delta, g.certificate->scale * sup_norm_estimate(f, sector)};
  }
  return out;
}

double sup_norm_estimate(const HFunction& f, const sectors::Sector& sector,
                         int samples_per_decade, int decades) {
  if (!f.bounded_on_sector) {
    throw InvalidRequestError(
        "sup norm requested for a function with no boundedness information");
  }
  // The sup over the spectral sector sits on the two boundary rays
  // arg = +-theta; sample them geometrically around r = 1.
  const int total = samples_per_decade * decades + 1;
  const double lo = -0.5 * decades * std::log(10.0);
  const double hi = 0.5 * decades * std::log(10.0);
  double best = 0.0;
  for (int i = 0; i < total; ++i) {
    const double s = lo + (hi - lo) * i / (total - 1);
    const double r = std::exp(s);
    best = std::max(best, std::abs(f.eval(std::polar(r, sector.theta))));
    best = std::max(best, std::abs(f.eval(std::polar(r, -sector.theta))));
  }
  return best;
}

}  // namespace conecalc::holo
