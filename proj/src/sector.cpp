#include "conecalc/sector.hpp"

#include <cmath>

namespace conecalc::sectors {

namespace {
constexpr double kAngleSlack = 1e-14;
}

Sector::Sector(double theta_) : theta(theta_) {
  if (!(theta > 0.0) || !(theta < kPi)) {
    throw InvalidRequestError("sector aperture must satisfy 0 < theta < pi");
  }
}

double arg_in_2pi(Complex z) {
  double phi = std::arg(z);
  if (phi < 0.0) phi += 2.0 * kPi;
  return phi;
}

bool Sector::contains(Complex z) const {
  if (std::abs(z) == 0.0) return true;
  const double phi = arg_in_2pi(z);
  return phi >= theta - kAngleSlack && phi <= 2.0 * kPi - theta + kAngleSlack;
}

double Sector::angular_distance(Complex z) const {
  if (std::abs(z) == 0.0) return 0.0;
  const double phi = arg_in_2pi(z);
  if (phi >= theta && phi <= 2.0 * kPi - theta) return 0.0;
  const double lo = (phi < theta) ? theta - phi : phi - (2.0 * kPi - theta);
  return lo;
}

bool RootSector::contains(Complex z) const {
  if (std::abs(z) == 0.0) return true;
  const double phi = arg_in_2pi(z);
  return phi >= alpha_lo - kAngleSlack && phi <= alpha_hi + kAngleSlack;
}

RootSector mu_root_sector(const Sector& sector, double mu) {
  if (!(mu > 0.0)) {
    throw InvalidRequestError("root order mu must be positive");
  }
  return RootSector{sector.theta / mu, (2.0 * kPi - sector.theta) / mu};
}

Complex principal_log(Complex z) {
  if (std::abs(z) == 0.0) {
    throw InvalidRequestError("principal_log of zero");
  }
  return std::log(z);  // std::log uses arg in (-pi, pi]
}

Complex principal_pow(Complex base, Complex exponent) {
  return std::exp(exponent * principal_log(base));
}

}  // namespace conecalc::sectors
