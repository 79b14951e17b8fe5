#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "conecalc/operators.hpp"
#include "conecalc/sector.hpp"
#include "conecalc/types.hpp"

namespace conecalc::elliptic {

// Roots of q^2 - (n-1) q + lambda = 0:
//   q_{+,-} = (n-1)/2 +- sqrt( ((n-1)/2)^2 - lambda ).
struct ConormalRoots {
  Complex q_minus;
  Complex q_plus;
};

ConormalRoots conormal_roots(int n, Complex lambda_mode);

// Admissible weight window derived from the top cross-section eigenvalue
// lambda_0 (the one closest to 0): s0 = sqrt( ((n-1)/2)^2 - lambda_0 ),
// window (1 - s0, s0 - 1), admissible iff s0 > 1.
struct WeightWindow {
  double s0 = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool admissible = false;
};

WeightWindow weight_window(int n, const RVec& mode_spectrum);

enum class StripMode { Line, Strip };

// Checks that no conormal root Re-part meets the weight line
// Re z = (n+1)/2 - gamma - mu (Line) or enters the closed strip
// [(n+1)/2 - gamma - mu, (n+1)/2 - gamma] (Strip), within tol.
struct StripCheckResult {
  bool clear = true;
  double line_lo = 0.0;
  double line_hi = 0.0;
  double min_distance = 0.0;
  std::vector<Complex> violations;
};

StripCheckResult strip_check(int n, const RVec& mode_spectrum, double gamma,
                             double mu, StripMode mode, double tol = 1e-12);

// Interior-symbol sector condition: the eigenvalues of the sampled principal
// symbol must avoid the open sector interior for every nonzero covariable.
struct SymbolCheckResult {
  bool pass = true;
  std::vector<Complex> violations;
  int samples = 0;
};

SymbolCheckResult symbol_sector_check(
    const std::function<CMat(const RVec&, const RVec&)>& principal_symbol,
    const std::vector<RVec>& base_points, const std::vector<RVec>& covectors,
    const sectors::Sector& sector);

// Numeric sector verification for a discretized operator family: resolvent
// scan below the bound on every refinement level, refinement-consistent sup
// norms, spectra in the closed complement on every level, and an angular
// margin that refinement does not shrink below min_angular_fraction of the
// coarsest level's margin.
struct NumericSectorCheck {
  bool pass = false;
  bool scan_pass = false;
  bool refinement_consistent = false;
  bool spectrum_pass = false;
  double sup_norm_finest = 0.0;
  double sup_variation = 0.0;     // relative change across levels
  double angular_margin = 0.0;    // min over eigenvalues, finest level
  std::vector<double> level_sup_norms;
};

struct NumericSectorOptions {
  double resolvent_bound = 0.0;   // 0: consistency and spectrum checks only
  double max_sup_variation = 0.5;
  double min_angular_fraction = 0.5;
  ops::ScanOptions scan;
};

// levels: the same operator discretized at >= 2 refinement levels.
NumericSectorCheck numeric_sector_check(
    const std::vector<const ops::ResolventProvider*>& levels,
    const sectors::Sector& sector, const NumericSectorOptions& options = {});

// Aggregated report for the standard condition chain: symbol condition
// (optional, sampled), shift condition (assumed, recorded), weight window,
// strip clearance, numeric sector verification (optional).
struct EllipticityReport {
  std::optional<SymbolCheckResult> symbol;
  bool shift_condition_assumed = false;
  WeightWindow window;
  StripCheckResult strip;
  std::optional<NumericSectorCheck> numeric;
  bool admissible = false;  // conjunction of everything present
};

EllipticityReport assemble_report(std::optional<SymbolCheckResult> symbol,
                                  bool shift_condition_assumed,
                                  WeightWindow window, StripCheckResult strip,
                                  std::optional<NumericSectorCheck> numeric);

}  // namespace conecalc::elliptic
