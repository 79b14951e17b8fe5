#pragma once

#include "conecalc/types.hpp"

namespace conecalc::sectors {

// Closed sector around the negative real axis:
//   { r e^{i phi} : r >= 0, theta <= phi <= 2 pi - theta }, 0 < theta < pi.
// The resolvent bound of the operators treated here holds on this set; its
// open complement is a sector around the positive real axis containing the
// spectrum.
struct Sector {
  double theta;

  explicit Sector(double theta_);

  // Membership test. The origin belongs to every sector. Angles are compared
  // with a small absolute slack so boundary rays count as members.
  bool contains(Complex z) const;

  // Angular distance (radians) from arg(z) to the sector, 0 if inside.
  double angular_distance(Complex z) const;
};

// Image of a sector under the mu-th root map:
//   { s e^{i alpha} : s >= 0, theta/mu <= alpha <= (2 pi - theta)/mu }.
struct RootSector {
  double alpha_lo;
  double alpha_hi;
  bool contains(Complex z) const;
};

RootSector mu_root_sector(const Sector& sector, double mu);

// Argument normalized to [0, 2 pi).
double arg_in_2pi(Complex z);

// Principal branch log / power, cut along the negative real axis. The cut
// lies inside the sector, so integrands stay holomorphic on the complement
// where the spectrum lives, conjugate symmetry holds, and positive reals
// reproduce their real powers.
Complex principal_log(Complex z);
Complex principal_pow(Complex base, Complex exponent);

}  // namespace conecalc::sectors
