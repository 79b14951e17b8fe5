#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "conecalc/operators.hpp"
#include "conecalc/types.hpp"

namespace conecalc::cone {

// Uniform grid in r = -log t on (0, R): interior points r_i = i h,
// i = 1..N, h = R/(N+1), with homogeneous Dirichlet values pinned at r = 0
// (t = 1) and r = R (t = e^{-R}).
struct LogGrid {
  int N = 0;
  double R = 0.0;
  double h = 0.0;
  RVec r;  // interior log coordinates
  RVec t;  // t_i = exp(-r_i)
};

LogGrid make_log_grid(int N, double R);

enum class BoundaryCondition { Dirichlet, Neumann };

// Eigenvalues (all <= 0, decreasing) of the second derivative on an interval
// of the given length: Dirichlet -(k pi / L)^2 for k >= 1, Neumann for k >= 0.
RVec interval_spectrum(double length, BoundaryCondition bc, int count);

// Weighted-norm exponent beta = (n+1)/2 - gamma; the discrete norm of an
// interior profile u is  ( h * sum_i (t_i^beta |u_i|)^p )^{1/p}.
double discrete_norm(const LogGrid& grid, const CVec& u, double p,
                     double gamma, int n);

// One cross-section mode of the cone Laplacian in log coordinates,
//   A = e^{2r} ( -d^2/dr^2 + (n-1) d/dr - lambda_mode ),
// discretized in exact divergence (flux) form and conjugated by the norm
// weight t^{(n+1)/2 - gamma}, so that at gamma = 0, p = 2 the stored matrix
// is symmetric to the last bit. The provider acts in the conjugated
// coordinates v = t^beta u, where the norm is plain ell_p scaled by h^{1/p}.
class ConeModeOperator final : public ops::ResolventProvider {
 public:
  ConeModeOperator(LogGrid grid, int n, double lambda_mode, double gamma = 0.0,
                   double p = 2.0);

  int dim() const override { return grid_.N; }
  void resolve(Complex lambda, const CVec& rhs, CVec& out) const override;
  void resolve_adjoint(Complex lambda, const CVec& rhs,
                       CVec& out) const override;
  void apply(const CVec& rhs, CVec& out) const override;
  void resolve_matrix(Complex lambda, CMat& out) const override;
  RVec norm_weights() const override;
  double norm_exponent() const override { return p_; }
  std::optional<std::pair<double, double>> real_spectral_bounds()
      const override;
  std::optional<RVec> real_spectrum() const override;
  double scale_hint() const override;
  bool self_adjoint_like() const override;
  std::optional<CMat> dense() const override;
  // Closed form via the (real) eigenvalue list when the conjugated matrix is
  // exactly symmetric (gamma = 0).
  std::optional<double> resolvent_norm_exact(Complex lambda) const override;

  const LogGrid& grid() const { return grid_; }
  int space_dim() const { return n_; }
  double mode_eigenvalue() const { return lambda_mode_; }
  double gamma() const { return gamma_; }

  // Conjugated tridiagonal (the operator the provider realizes).
  const RVec& main_diagonal() const { return main_; }
  const RVec& upper_diagonal() const { return upper_; }
  const RVec& lower_diagonal() const { return lower_; }
  // Unconjugated tridiagonal of A itself (u coordinates).
  const RVec& raw_main_diagonal() const { return raw_main_; }
  const RVec& raw_upper_diagonal() const { return raw_upper_; }
  const RVec& raw_lower_diagonal() const { return raw_lower_; }

  // Largest off-diagonal asymmetry of the conjugated matrix, relative to its
  // largest entry; exactly 0 at gamma = 0, p = 2.
  double symmetry_defect() const;

  // Conjugation weights t^beta (v = weight .* u).
  const RVec& conjugation_weights() const { return conj_weight_; }

  // Smallest and largest eigenvalue (conjugated matrix; real since the
  // matrix is always similar to a symmetric one).
  std::pair<double, double> eigenvalue_range() const;

  // All eigenvalues, ascending (real; same similarity argument).
  const RVec& eigenvalues() const;

 private:
  void ensure_eigs() const;

  LogGrid grid_;
  int n_;
  double lambda_mode_;
  double gamma_;
  double p_;
  RVec main_, upper_, lower_;
  RVec raw_main_, raw_upper_, raw_lower_;
  RVec conj_weight_;
  mutable std::optional<RVec> eigs_;
};

std::vector<ConeModeOperator> build_cone_modes(const LogGrid& grid, int n,
                                               const RVec& mode_spectrum,
                                               double gamma = 0.0,
                                               double p = 2.0);

// Mellin profile F(z) = integral over (e^{-R}, 1) of t^{z} u(t) dt/t on the
// log grid (trapezoid in r including the two boundary values). With u == 1
// and unit boundary values, F(1) = 1 - e^{-R} up to O(h^2).
CVec mellin_profile(const LogGrid& grid, const CVec& u_interior,
                    const std::vector<Complex>& zs,
                    Complex boundary_at_t1 = 0.0,
                    Complex boundary_at_tmin = 0.0);

// Discrete dilation by rho = e^{k h} (an exact index shift on the log grid)
// with the volume normalization rho^{(n+1)/p}. The measured norm ratio must
// equal rho^{gamma - gamma_p} with gamma_p = (n+1)(1/2 - 1/p); in particular
// the dilation is an exact isometry at gamma = gamma_p.
struct DilationCheck {
  double ratio = 0.0;
  double predicted = 0.0;
  double defect = 0.0;  // |ratio/predicted - 1|
};

DilationCheck dilation_check(const LogGrid& grid, int n, double p,
                             double gamma, int shift_cells);

}  // namespace conecalc::cone
