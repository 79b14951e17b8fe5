#pragma once

#include <vector>

#include "conecalc/sector.hpp"
#include "conecalc/types.hpp"

namespace conecalc::sectors {

struct ContourOptions {
  // Resolvent bound M assumed in the tail estimate: ||lambda R(lambda)|| <= M
  // on the sector.
  double resolvent_bound = 1.0;
  // Integrand scale c assumed in the tail estimate:
  // |f(lambda)| <= c / (r^delta + r^-delta) on the sector boundary.
  double integrand_scale = 1.0;
  // Oscillation order of the integrand (|t| for factors lambda^{it}); the
  // node-count search resolves this oscillation in its scalar self-test.
  double imag_order = 0.0;
  // If > 0, skip the adaptive search and use exactly this many nodes per ray.
  int force_nodes_per_ray = 0;
  // Fraction of tol allocated to the truncation tails (rest to quadrature).
  double tail_fraction = 0.3;
};

// Quadrature of the boundary integral
//   f(A) = (1/2 pi i) \oint f(lambda) (lambda - A)^{-1} dlambda
// along the two rays arg = +-theta, positively oriented around the spectrum
// sector, discretized by the trapezoid rule in s = log r on a geometric grid.
// Weights absorb the arc element dlambda and the 1/(2 pi i) prefactor, so
// applying the contour is a plain weighted sum of resolvent evaluations.
struct Contour {
  double theta = 0.0;
  double delta = 0.0;
  double tol = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  int nodes_per_ray = 0;
  std::string orientation = "positive";

  // Upper ray (arg = +theta) in increasing |lambda|, then lower ray
  // (arg = -theta) in increasing |lambda|.
  std::vector<Complex> nodes;
  std::vector<Complex> weights;
  // Same layout; nonzero only on the every-other-node subrule used for
  // a-posteriori error estimates.
  std::vector<Complex> coarse_weights;

  // Bounds assumed when the radii were chosen; estimates for integrands with
  // a different certificate rescale against these.
  double integrand_scale = 1.0;
  double resolvent_bound = 1.0;

  double tail_bound = 0.0;      // truncation part of the estimate
  double disc_estimate = 0.0;   // quadrature part, from the scalar self-test
  double error_estimate = 0.0;  // tail_bound + disc_estimate
  // Ratio of the self-test fine-rule error to the fine/coarse difference;
  // rescales operator-level Richardson differences into fine-rule estimates.
  double richardson_beta = 1.0;

  int total_nodes() const { return static_cast<int>(nodes.size()); }
};

// Builds a contour whose truncation tails and quadrature error estimate sum
// below tol, using at most max_nodes nodes across both rays. The radii come
// from the analytic tail bound c r^{-delta} M / delta at both ends; the node
// count comes from a convergence study of the scalar self-test
// f(lambda) = lambda^{i t} lambda^delta / (1+lambda)^{2 delta} applied to the
// point spectrum {1}, whose exact value is known. Throws BudgetExceededError
// (carrying the best achievable estimate) if max_nodes is too small.
Contour boundary_contour(const Sector& sector, double delta, double tol,
                         int max_nodes, const ContourOptions& options = {});

}  // namespace conecalc::sectors
