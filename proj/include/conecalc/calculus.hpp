#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "conecalc/contour.hpp"
#include "conecalc/holo.hpp"
#include "conecalc/operators.hpp"
#include "conecalc/types.hpp"

namespace conecalc::calc {

// f(A) through the open sector-boundary contour. Requires a decay
// certificate on f compatible with the contour (f.delta >= contour.delta,
// certificate aperture <= contour aperture). The reported error estimate is
// the contour's tail bound rescaled to f's certificate plus the larger of
// the rescaled self-test estimate and the operator-level fine/coarse
// Richardson difference.
CalcResult dunford(const ops::ResolventProvider& op, const holo::HFunction& f,
                   const sectors::Contour& contour);

struct ClosedPathOptions {
  double tol = 1e-10;
  int max_nodes = 4096;
  int min_nodes = 16;
  // Enlarges the spectral enclosure circle: radius += margin_factor * lower
  // spectral bound (keeps the circle clear of the origin branch point).
  double margin_factor = 0.4;
  // When true the circle must stay in the open right half-plane (for
  // functions with a branch point at 0); heat kernels relax this.
  bool origin_singular = true;
};

// f(A) through a circle around a real spectral enclosure, trapezoid in the
// angle (spectrally convergent). Needs real spectral bounds on the operator.
CalcResult closed_path(const ops::ResolventProvider& op,
                       const holo::HFunction& f,
                       const ClosedPathOptions& options = {});

struct RegularizedPowerOptions {
  // Regularization exponents, decreasing; the values f_eps(A) are
  // extrapolated to eps -> 0 through the Lagrange rule at 0.
  std::vector<double> eps_seq = {0.3, 0.25, 0.2, 0.15, 0.1, 0.05};
  double contour_tol = 3e-9;
  int max_nodes_per_member = 20000;
};

// A^{it} as the eps -> 0 limit of the regularized functions
// lambda^{it} lambda^eps / (1+lambda)^{2 eps} evaluated on open contours.
CalcResult imaginary_power_regularized_path(
    const ops::ResolventProvider& op, double t, const sectors::Sector& sector,
    const RegularizedPowerOptions& options = {});

// A^{it} by integrating lambda^{it} directly on a closed circle; the
// accurate reference path when the spectrum is enclosed away from 0.
CalcResult imaginary_power_closed_path(const ops::ResolventProvider& op,
                                       double t,
                                       const ClosedPathOptions& options = {});

struct HeatOptions {
  double tol = 1e-9;
  int max_circle_nodes = 4096;
  // tau * (spectral radius) above which the circle path would need too many
  // nodes and the parabola path takes over.
  double circle_cap = 40.0;
  int parabola_nodes = 65;
  double parabola_mu = 9.0;
  double parabola_halfwidth = 2.0;
};

// exp(-tau A). Moderate tau * ||A||: circle around the spectral enclosure.
// Stiff case: right-opening parabola contour w = mu (u + i)^2 / tau,
// uniformly accurate in tau for real nonnegative spectra.
CalcResult heat_semigroup(const ops::ResolventProvider& op, double tau,
                          const HeatOptions& options = {});

struct FamilyMember {
  std::string name;
  holo::HFunction f;
};

// Probe family for sup-calculus bounds: power quotients, regularized
// imaginary powers, and seeded random certified rational products.
std::vector<FamilyMember> default_bound_family(const sectors::Sector& sector,
                                               std::uint64_t seed,
                                               int random_members = 4);

struct BoundReport {
  double bound = 0.0;  // max over members of ||f(A)|| / sup |f|
  std::vector<std::pair<std::string, double>> member_ratios;
  int total_nodes = 0;
};

// Empirical bound on the calculus norm: evaluates each certified member
// through an open contour, normalizes by the member's sup norm, takes the
// max. node_multiplier > 1 re-runs each member contour with that many times
// the adaptively chosen nodes (stability diagnostics).
BoundReport sup_calculus_bound(const ops::ResolventProvider& op,
                               const sectors::Sector& sector,
                               const std::vector<FamilyMember>& members,
                               double contour_tol = 1e-6, int max_nodes = 4000,
                               int node_multiplier = 1);

struct CauchyOptions {
  double T = 1.0;
  int steps = 256;
  double r_time = 2.0;  // exponent of the time norm
  std::vector<CVec> initial;  // per mode; empty = zero
};

struct CauchyResult {
  double rho = 0.0;      // (||u'|| + ||A u||) / ||f|| in the discrete norms
  double norm_du = 0.0;
  double norm_au = 0.0;
  double norm_f = 0.0;
  RVec times;
  std::vector<CMat> trajectories;  // per mode, (steps+1) x dim, rows = times
  double propagator_error_estimate = 0.0;
  std::string path;
};

// Mode-wise exponential midpoint march for u' + A u = f, u(0) = u0:
//   u_{k+1} = E u_k + dt E_half f(t_k + dt/2),  E_half = exp(-dt/2 A),
// E = E_half^2. Refuses to integrate unless every mode verifies the sector
// check first (spectrum in the closed complement sector, bounded away from
// 0, aperture <= pi/2).
CauchyResult cauchy_solve(
    const std::vector<const ops::ResolventProvider*>& modes,
    const std::vector<std::function<CVec(double)>>& forcing,
    const sectors::Sector& sector, const CauchyOptions& options,
    const HeatOptions& heat_options = {});

}  // namespace conecalc::calc
