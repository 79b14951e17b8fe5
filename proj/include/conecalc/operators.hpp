#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "conecalc/sector.hpp"
#include "conecalc/types.hpp"

namespace conecalc::ops {

// Abstract access to an operator through its resolvent. Quadrature layers
// only ever need (lambda - A)^{-1} applied to vectors (plus the adjoint for
// norm estimation and A itself for residual-type diagnostics).
class ResolventProvider {
 public:
  virtual ~ResolventProvider() = default;

  virtual int dim() const = 0;

  // out = (lambda - A)^{-1} rhs. Throws SingularResolventError when lambda is
  // numerically indistinguishable from a spectral point.
  virtual void resolve(Complex lambda, const CVec& rhs, CVec& out) const = 0;

  // out = ((lambda - A)^{-1})^H rhs = (conj(lambda) - A^H)^{-1} rhs.
  virtual void resolve_adjoint(Complex lambda, const CVec& rhs,
                               CVec& out) const = 0;

  // out = A rhs.
  virtual void apply(const CVec& rhs, CVec& out) const = 0;

  // out = (lambda - A)^{-1} (dense). Default: column-by-column resolves.
  virtual void resolve_matrix(Complex lambda, CMat& out) const;

  // Diagonal weights of the norm this operator is measured in; the vector
  // norm is || w .* v ||_p with p = norm_exponent(). Defaults to unweighted
  // Euclidean.
  virtual RVec norm_weights() const { return RVec::Ones(dim()); }
  virtual double norm_exponent() const { return 2.0; }

  // Enclosure [lo, hi] of the spectrum when it is known to be real.
  virtual std::optional<std::pair<double, double>> real_spectral_bounds()
      const {
    return std::nullopt;
  }

  // Full eigenvalue list when the spectrum is known real and cheaply
  // available (diagonal entries, tridiagonal similarity). Spares spectrum
  // checks a dense eigensolve.
  virtual std::optional<RVec> real_spectrum() const { return std::nullopt; }

  // Rough magnitude of the operator, used to scale radius grids.
  virtual double scale_hint() const = 0;

  virtual bool self_adjoint_like() const { return false; }

  // Dense form when cheaply available (for eigenvalue-based checks).
  virtual std::optional<CMat> dense() const { return std::nullopt; }

  // Exact weighted norm of lambda (lambda - A)^{-1} when the realization
  // admits a closed form (diagonal, or unitarily diagonalizable in the
  // weighted inner product). nullopt means callers must fall back to dense
  // evaluation. Throws SingularResolventError at spectral points.
  virtual std::optional<double> resolvent_norm_exact(Complex /*lambda*/) const {
    return std::nullopt;
  }
};

// Weighted norm of v under the provider's norm weights: ||w .* v||_p.
double weighted_norm(const ResolventProvider& op, const CVec& v);

// || diag(w) M diag(w)^{-1} ||_2, exact SVD for small sizes, power iteration
// otherwise. Deterministic.
double weighted_spectral_norm(const CMat& m, const RVec& w,
                              int power_iterations = 50);

class DiagonalOperator final : public ResolventProvider {
 public:
  explicit DiagonalOperator(CVec entries, RVec weights = RVec());

  int dim() const override { return static_cast<int>(entries_.size()); }
  void resolve(Complex lambda, const CVec& rhs, CVec& out) const override;
  void resolve_adjoint(Complex lambda, const CVec& rhs,
                       CVec& out) const override;
  void apply(const CVec& rhs, CVec& out) const override;
  void resolve_matrix(Complex lambda, CMat& out) const override;
  RVec norm_weights() const override;
  std::optional<std::pair<double, double>> real_spectral_bounds()
      const override;
  std::optional<RVec> real_spectrum() const override;
  double scale_hint() const override;
  bool self_adjoint_like() const override;
  std::optional<CMat> dense() const override;
  std::optional<double> resolvent_norm_exact(Complex lambda) const override;

  const CVec& entries() const { return entries_; }

 private:
  CVec entries_;
  RVec weights_;
};

class DenseOperator final : public ResolventProvider {
 public:
  explicit DenseOperator(CMat a, RVec weights = RVec());

  int dim() const override { return static_cast<int>(a_.rows()); }
  void resolve(Complex lambda, const CVec& rhs, CVec& out) const override;
  void resolve_adjoint(Complex lambda, const CVec& rhs,
                       CVec& out) const override;
  void apply(const CVec& rhs, CVec& out) const override;
  void resolve_matrix(Complex lambda, CMat& out) const override;
  RVec norm_weights() const override;
  std::optional<std::pair<double, double>> real_spectral_bounds()
      const override;
  double scale_hint() const override;
  bool self_adjoint_like() const override;
  std::optional<CMat> dense() const override;

  const CMat& matrix() const { return a_; }

 private:
  CMat a_;
  RVec weights_;
  bool hermitian_;
};

struct ScanSample {
  double radius;
  double angle;
  double norm;
};

struct ScanResult {
  double sup_norm = 0.0;
  Complex argmax_lambda;
  std::vector<ScanSample> samples;
  bool pass = true;     // sup_norm <= bound (when a bound was given)
  double bound = 0.0;   // 0 means no bound was enforced
};

struct ScanOptions {
  int radii_per_decade = 4;
  double decades_below = 7.0;  // radius grid spans scale_hint * 10^[-below, +above]
  double decades_above = 7.0;
  int angles = 17;
  int power_iterations = 50;
  double bound = 0.0;  // if > 0, pass iff sup <= bound
};

// Samples sup over the sector of || w (lambda (lambda-A)^{-1}) w^{-1} || on a
// radius/angle grid (norm per point via power iteration on R^H R, with the
// provider's weights absorbed). Deterministic start vector.
ScanResult sectoriality_scan(const ResolventProvider& op,
                             const sectors::Sector& sector,
                             const ScanOptions& options = {});

struct SpectrumLocation {
  bool pass = true;
  std::vector<Complex> eigenvalues;
  std::vector<Complex> violations;  // eigenvalues inside the sector interior
};

// Checks that every eigenvalue of A stays outside the open sector interior
// (i.e. in the closed spectral sector around the positive axis). Eigenvalues
// within origin_radius of 0 are treated as the origin puncture and never
// count as violations.
SpectrumLocation spectrum_in_complement(const ResolventProvider& op,
                                        const sectors::Sector& sector,
                                        double origin_radius = 0.0);

}  // namespace conecalc::ops
