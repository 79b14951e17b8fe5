#pragma once

#include <cstdint>

#include "conecalc/cone_laplacian.hpp"
#include "conecalc/types.hpp"

namespace conecalc::kernels {

// Discrete Green-type kernel operator on the log grid:
//   (G u)(t) = t^{-(n+1)/2 - eps} * integral_0^t s^{-(n+1)/2 + eps} u(s)
//              s^n ds,
// whose norm on the weighted space (exponent (n+1)/2, measure t^n dt) is
// exactly 1/eps in the continuum. The discrete estimate must stay within a
// modest factor of that bound once eps * R is large enough to resolve the
// kernel's slow decay.
struct HardyParams {
  int n = 3;
  double eps = 0.5;
  double p = 2.0;
  int N = 200;
  double R = 8.0;
  std::uint64_t seed = 12345;  // sampling seed for p != 2
  int power_iterations = 300;
  int samples = 200;  // random probes for p != 2
};

struct HardyResult {
  double norm_estimate = 0.0;
  double bound = 0.0;        // 1/eps
  double ratio = 0.0;        // norm_estimate * eps
  bool pass = false;         // ratio <= tolerance_factor
  double tolerance_factor = 1.05;
};

// p == 2: power iteration on M^T M for the weight-conjugated kernel matrix
// (an upper estimate converging to the spectral norm). p != 2: maximum of
// ||M v||_p / ||v||_p over seeded nonnegative probes and the constant vector
// (a certified lower bound on the norm).
HardyResult hardy_norm(const HardyParams& params,
                       double tolerance_factor = 1.05);

// The conjugated kernel matrix itself (mostly for tests and diagnostics):
// M = D G D^{-1} with D = diag(t^{(n+1)/2}); strictly lower triangular plus
// diagonal in the t-increasing index order used here.
RMat hardy_matrix(int n, double eps, int N, double R);

// Apply the plain kernel to a profile (t-increasing order, u given on the
// interior grid): (G u)_i = sum_{j <= i} k(t_i, t_j) u_j t_j^{n+1} h.
RVec hardy_apply(const cone::LogGrid& grid, int n, double eps, const RVec& u);

}  // namespace conecalc::kernels
