#include "conecalc/ellipticity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace conecalc::elliptic {

ConormalRoots conormal_roots(int n, Complex lambda_mode) {
  if (n < 1) throw InvalidRequestError("space dimension must be >= 1");
  const double half = 0.5 * (n - 1);
  const Complex disc = half * half - lambda_mode;
  const Complex root = std::sqrt(disc);
  return ConormalRoots{half - root, half + root};
}

WeightWindow weight_window(int n, const RVec& mode_spectrum) {
  if (mode_spectrum.size() == 0) {
    throw InvalidRequestError("weight window needs at least one mode");
  }
  const double lambda0 = mode_spectrum.maxCoeff();
  const double half = 0.5 * (n - 1);
  const double disc = half * half - lambda0;
  WeightWindow out;
  out.s0 = disc > 0.0 ? std::sqrt(disc) : 0.0;
  out.lo = 1.0 - out.s0;
  out.hi = out.s0 - 1.0;
  out.admissible = out.s0 > 1.0;
  return out;
}

StripCheckResult strip_check(int n, const RVec& mode_spectrum, double gamma,
                             double mu, StripMode mode, double tol) {
  StripCheckResult out;
  out.line_hi = 0.5 * (n + 1) - gamma;
  out.line_lo = out.line_hi - mu;
  out.min_distance = std::numeric_limits<double>::infinity();
  for (int j = 0; j < mode_spectrum.size(); ++j) {
    const ConormalRoots roots = conormal_roots(n, mode_spectrum(j));
    for (const Complex q : {roots.q_minus, roots.q_plus}) {
      const double re = q.real();
      double dist;
      if (mode == StripMode::Line) {
        dist = std::abs(re - out.line_lo);
      } else {
        // Signed distance to the closed strip [line_lo, line_hi].
        if (re < out.line_lo) {
          dist = out.line_lo - re;
        } else if (re > out.line_hi) {
          dist = re - out.line_hi;
        } else {
          dist = 0.0;
        }
      }
      out.min_distance = std::min(out.min_distance, dist);
      if (dist <= tol) out.violations.push_back(q);
    }
  }
  out.clear = out.violations.empty();
  return out;
}

SymbolCheckResult symbol_sector_check(
    const std::function<CMat(const RVec&, const RVec&)>& principal_symbol,
    const std::vector<RVec>& base_points, const std::vector<RVec>& covectors,
    const sectors::Sector& sector) {
  SymbolCheckResult out;
  for (const RVec& x : base_points) {
    for (const RVec& xi : covectors) {
      if (xi.norm() == 0.0) continue;
      const CMat sym = principal_symbol(x, xi);
      Eigen::ComplexEigenSolver<CMat> es(sym, false);
      ++out.samples;
      for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const Complex e = es.eigenvalues()(i);
        if (std::abs(e) == 0.0) {
          out.violations.push_back(e);  // degenerate symbol
          continue;
        }
        const double phi = sectors::arg_in_2pi(e);
        if (phi > sector.theta + 1e-12 &&
            phi < 2.0 * kPi - sector.theta - 1e-12) {
          out.violations.push_back(e);
        }
      }
    }
  }
  out.pass = out.violations.empty();
  return out;
}

NumericSectorCheck numeric_sector_check(
    const std::vector<const ops::ResolventProvider*>& levels,
    const sectors::Sector& sector, const NumericSectorOptions& options) {
  if (levels.size() < 2) {
    throw InvalidRequestError(
        "numeric sector verification needs at least two refinement levels");
  }
  NumericSectorCheck out;
  ops::ScanOptions sopt = options.scan;
  sopt.bound = options.resolvent_bound;
  for (const ops::ResolventProvider* level : levels) {
    const ops::ScanResult scan = ops::sectoriality_scan(*level, sector, sopt);
    out.level_sup_norms.push_back(scan.sup_norm);
  }
  out.sup_norm_finest = out.level_sup_norms.back();
  double lo = out.level_sup_norms[0];
  double hi = lo;
  for (double v : out.level_sup_norms) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  out.sup_variation = (hi - lo) / std::max(hi, 1e-300);
  out.refinement_consistent = out.sup_variation <= options.max_sup_variation;
  out.scan_pass = options.resolvent_bound <= 0.0 ||
                  out.sup_norm_finest <= options.resolvent_bound;

  // Every level's spectrum must stay in the closed complement and away from
  // 0, and refinement must not eat the angular margin: the finest level keeps
  // at least min_angular_fraction of the coarsest level's margin.
  out.spectrum_pass = true;
  std::vector<double> margins;
  for (const ops::ResolventProvider* level : levels) {
    const ops::SpectrumLocation loc = ops::spectrum_in_complement(
        *level, sector, 1e-12 * level->scale_hint());
    if (!loc.pass) out.spectrum_pass = false;
    double margin = std::numeric_limits<double>::infinity();
    for (const Complex& e : loc.eigenvalues) {
      margin = std::min(margin, sector.angular_distance(e));
    }
    margins.push_back(margin);
  }
  out.angular_margin = margins.back();
  if (std::isfinite(margins.front()) &&
      margins.back() <
          options.min_angular_fraction * margins.front() - 1e-12) {
    out.spectrum_pass = false;
  }
  out.pass = out.scan_pass && out.refinement_consistent && out.spectrum_pass;
  return out;
}

EllipticityReport assemble_report(std::optional<SymbolCheckResult> symbol,
                                  bool shift_condition_assumed,
                                  WeightWindow window, StripCheckResult strip,
                                  std::optional<NumericSectorCheck> numeric) {
  EllipticityReport out;
  out.symbol = std::move(symbol);
  out.shift_condition_assumed = shift_condition_assumed;
  out.window = window;
  out.strip = strip;
  out.numeric = std::move(numeric);
  out.admissible = window.admissible && strip.clear &&
                   (!out.symbol || out.symbol->pass) &&
                   (!out.numeric || out.numeric->pass);
  return out;
}

}  // namespace conecalc::elliptic
