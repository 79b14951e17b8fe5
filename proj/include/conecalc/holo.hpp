#pragma once

#include <functional>
#include <optional>
#include <string>

#include "conecalc/sector.hpp"
#include "conecalc/types.hpp"

namespace conecalc::holo {

// Two-sided decay certificate on a sector boundary:
//   |f(lambda)| <= scale / (r^delta + r^-delta),  r = |lambda|,
// valid on every ray with angular distance >= theta from the positive axis.
// This is exactly the bound the open-contour tail estimate consumes.
struct DecayCertificate {
  double delta = 0.0;
  double scale = 1.0;
};

enum class Kind {
  PowerQuotient,              // lambda^d / (1+lambda)^{2d}
  ShiftedRational,            // a / (a + lambda), a > 0
  ImaginaryPowerRegularized,  // lambda^{it} * lambda^e / (1+lambda)^{2e}
  ExponentialDecay,           // exp(-tau lambda)
  Product,
  UserDefined,
};

// A scalar function holomorphic off the sector, with optional metadata used
// by the quadrature layer: a decay certificate (open contours), a boundedness
// flag (closed contours / sup norms), and the oscillation order |t| of any
// imaginary-power factor (node-count selection).
struct HFunction {
  Kind kind = Kind::UserDefined;
  std::string description;
  std::function<Complex(Complex)> eval;
  // Certificate valid for apertures >= theta_ref. Empty means no two-sided
  // decay is known and open contours must refuse the function.
  std::optional<DecayCertificate> certificate;
  double theta_ref = 0.0;
  double imag_order = 0.0;
  bool bounded_on_sector = false;

  Complex operator()(Complex lambda) const { return eval(lambda); }
};

// sup over r > 0 of (1 + r^{2 d}) / |1 + r e^{i theta}|^{2 d}; the sharp
// certificate scale for power quotients on the aperture-theta boundary.
double power_quotient_scale(double d, double theta);

HFunction power_quotient(double d, const sectors::Sector& sector);
HFunction shifted_rational(double a, const sectors::Sector& sector);
HFunction imaginary_power_regularized(double t, double eps,
                                      const sectors::Sector& sector);
// exp(-tau lambda); bounded only when the spectral sector stays in the right
// half-plane (theta <= pi/2), and carries no decay certificate (no decay at
// 0), so it is usable through closed contours only.
HFunction exponential_decay(double tau, const sectors::Sector& sector);
HFunction user_defined(std::function<Complex(Complex)> fn,
                       std::optional<DecayCertificate> certificate,
                       double theta_ref, std::string description = "user");

// Pointwise product; certificates compose as (d1 + d2, c1 * c2) when both
// factors carry one, and as (d, c * sup) when one factor is merely bounded.
HFunction product(const HFunction& f, const HFunction& g,
                  const sectors::Sector& sector);

// Estimates sup over the sector of |f| by dense geometric sampling of the two
// boundary rays (the maximum principle pushes the sup to the boundary).
// Throws InvalidRequestError for functions with no boundedness information.
double sup_norm_estimate(const HFunction& f, const sectors::Sector& sector,
                         int samples_per_decade = 64, int decades = 12);

}  // namespace conecalc::holo
