#include "conecalc/cone_laplacian.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace conecalc::cone {

namespace {

// Tridiagonal solve for (diag, upper, lower) x = rhs; returns false on a
// vanishing pivot. O(N).
bool tridiag_solve(const CVec& diag, const CVec& upper, const CVec& lower,
                   const CVec& rhs, CVec& x) {
  const int n = static_cast<int>(diag.size());
  CVec c(n), d(n);
  Complex den = diag(0);
  if (std::abs(den) < 1e-300) return false;
  if (n > 1) c(0) = upper(0) / den;
  d(0) = rhs(0) / den;
  for (int i = 1; i < n; ++i) {
    den = diag(i) - lower(i - 1) * c(i - 1);
    if (std::abs(den) < 1e-300) return false;
    if (i < n - 1) c(i) = upper(i) / den;
    d(i) = (rhs(i) - lower(i - 1) * d(i - 1)) / den;
  }
  x.resize(n);
  x(n - 1) = d(n - 1);
  for (int i = n - 2; i >= 0; --i) x(i) = d(i) - c(i) * x(i + 1);
  return true;
}

}  // namespace

LogGrid make_log_grid(int N, double R) {
  if (N < 1 || !(R > 0.0)) {
    throw InvalidRequestError("log grid needs N >= 1 and R > 0");
  }
  LogGrid g;
  g.N = N;
  g.R = R;
  g.h = R / (N + 1);
  g.r.resize(N);
  g.t.resize(N);
  for (int i = 0; i < N; ++i) {
    g.r(i) = (i + 1) * g.h;
    g.t(i) = std::exp(-g.r(i));
  }
  return g;
}

RVec interval_spectrum(double length, BoundaryCondition bc, int count) {
  if (!(length > 0.0) || count < 1) {
    throw InvalidRequestError("interval spectrum needs length > 0, count >= 1");
  }
  RVec out(count);
  const int k0 = (bc == BoundaryCondition::Dirichlet) ? 1 : 0;
  for (int j = 0; j < count; ++j) {
    const double k = k0 + j;
    const double w = k * kPi / length;
    out(j) = -w * w;
  }
  return out;
}

double discrete_norm(const LogGrid& grid, const CVec& u, double p,
                     double gamma, int n) {
  if (u.size() != grid.N) {
    throw InvalidRequestError("profile size does not match the grid");
  }
  const double beta = 0.5 * (n + 1) - gamma;
  double acc = 0.0;
  for (int i = 0; i < grid.N; ++i) {
    acc += std::pow(std::pow(grid.t(i), beta) * std::abs(u(i)), p);
  }
  return std::pow(grid.h * acc, 1.0 / p);
}

ConeModeOperator::ConeModeOperator(LogGrid grid, int n, double lambda_mode,
                                   double gamma, double p)
    : grid_(std::move(grid)),
      n_(n),
      lambda_mode_(lambda_mode),
      gamma_(gamma),
      p_(p) {
  if (n_ < 1) throw InvalidRequestError("space dimension must be >= 1");
  if (!(p_ > 1.0)) throw InvalidRequestError("norm exponent must exceed 1");
  // Matrix entries grow like e^{2R}; beyond ~1e12 the conditioning destroys
  // every digit the quadrature could deliver.
  if (std::exp(2.0 * grid_.R) > 1e12) {
    throw InvalidRequestError("log grid reaches too deep; entry growth e^{2R} exceeds 1e12");
  }
  const int N = grid_.N;
  const double h = grid_.h;
  const double beta = 0.5 * (n_ + 1) - gamma_;
  const double curv = 2.0 * std::cosh(0.5 * (n_ - 1) * h) / (h * h);

  main_.resize(N);
  raw_main_.resize(N);
  upper_.resize(std::max(0, N - 1));
  lower_.resize(std::max(0, N - 1));
  raw_upper_.resize(std::max(0, N - 1));
  raw_lower_.resize(std::max(0, N - 1));
  conj_weight_.resize(N);

  for (int i = 0; i < N; ++i) {
    const double e2r = std::exp(2.0 * grid_.r(i));
    raw_main_(i) = e2r * (curv - lambda_mode_);
    main_(i) = raw_main_(i);
    conj_weight_(i) = std::pow(grid_.t(i), beta);
  }
  for (int i = 0; i + 1 < N; ++i) {
    const double e2r = std::exp(2.0 * grid_.r(i));
    raw_upper_(i) = -e2r * std::exp(-0.5 * (n_ - 1) * h) / (h * h);
    raw_lower_(i) = -e2r * std::exp(2.0 * h + 0.5 * (n_ - 1) * h) / (h * h);
    if (gamma_ == 0.0) {
      // Conjugation by t^{(n+1)/2} makes the two couplings the same
      // expression; evaluate it once so the matrix is symmetric exactly.
      const double off = -std::exp(2.0 * grid_.r(i) + h) / (h * h);
      upper_(i) = off;
      lower_(i) = off;
    } else {
      upper_(i) = raw_upper_(i) * std::exp(beta * h);
      lower_(i) = raw_lower_(i) * std::exp(-beta * h);
    }
  }
}

void ConeModeOperator::resolve(Complex lambda, const CVec& rhs,
                               CVec& out) const {
  const int N = grid_.N;
  CVec diag(N), up(std::max(0, N - 1)), lo(std::max(0, N - 1));
  for (int i = 0; i < N; ++i) diag(i) = lambda - main_(i);
  for (int i = 0; i + 1 < N; ++i) {
    up(i) = -upper_(i);
    lo(i) = -lower_(i);
  }
  CVec x;
  bool ok = tridiag_solve(diag, up, lo, rhs, x);
  double resid = 0.0;
  if (ok) {
    // Residual of (lambda - B) x against rhs, O(N).
    double scale = 0.0;
    for (int i = 0; i < N; ++i) {
      Complex row = diag(i) * x(i);
      if (i > 0) row += lo(i - 1) * x(i - 1);
      if (i + 1 < N) row += up(i) * x(i + 1);
      resid += std::norm(row - rhs(i));
      scale = std::max(scale, std::abs(diag(i)));
    }
    resid = std::sqrt(resid);
    ok = x.allFinite() && resid <= 1e-8 * (rhs.norm() + scale * x.norm());
  }
  if (!ok) {
    // Pivoted dense fallback for the rare ill-conditioned shift.
    CMat m = CMat::Zero(N, N);
    for (int i = 0; i < N; ++i) m(i, i) = diag(i);
    for (int i = 0; i + 1 < N; ++i) {
      m(i, i + 1) = up(i);
      m(i + 1, i) = lo(i);
    }
    Eigen::PartialPivLU<CMat> lu(m);
    x = lu.solve(rhs);
    if (!x.allFinite() ||
        (m * x - rhs).norm() > 1e-6 * std::max(1e-300, rhs.norm())) {
      throw SingularResolventError(
          "mode resolvent numerically singular at the requested point");
    }
  }
  out = std::move(x);
}

void ConeModeOperator::resolve_adjoint(Complex lambda, const CVec& rhs,
                                       CVec& out) const {
  // (conj(lambda) - B^T) with real B: swap the couplings.
  const int N = grid_.N;
  CVec diag(N), up(std::max(0, N - 1)), lo(std::max(0, N - 1));
  for (int i = 0; i < N; ++i) diag(i) = std::conj(lambda) - main_(i);
  for (int i = 0; i + 1 < N; ++i) {
    up(i) = -lower_(i);
    lo(i) = -upper_(i);
  }
  CVec x;
  if (!tridiag_solve(diag, up, lo, rhs, x) || !x.allFinite()) {
    throw SingularResolventError(
        "adjoint mode resolvent numerically singular");
  }
  out = std::move(x);
}

void ConeModeOperator::apply(const CVec& rhs, CVec& out) const {
  const int N = grid_.N;
  out.resize(N);
  for (int i = 0; i < N; ++i) {
    Complex v = main_(i) * rhs(i);
    if (i > 0) v += lower_(i - 1) * rhs(i - 1);
    if (i + 1 < N) v += upper_(i) * rhs(i + 1);
    out(i) = v;
  }
}

void ConeModeOperator::resolve_matrix(Complex lambda, CMat& out) const {
  const int N = grid_.N;
  out.resize(N, N);
  CVec e = CVec::Zero(N), col(N);
  for (int j = 0; j < N; ++j) {
    e(j) = 1.0;
    resolve(lambda, e, col);
    out.col(j) = col;
    e(j) = 0.0;
  }
}

RVec ConeModeOperator::norm_weights() const {
  return RVec::Constant(grid_.N, std::pow(grid_.h, 1.0 / p_));
}

void ConeModeOperator::ensure_eigs() const {
  if (eigs_) return;
  const int N = grid_.N;
  // Always similar to a symmetric tridiagonal matrix: the coupling products
  // are positive, so replace them by minus the geometric mean.
  RVec diag = main_;
  RVec sub(std::max(0, N - 1));
  for (int i = 0; i + 1 < N; ++i) {
    sub(i) = -std::sqrt(upper_(i) * lower_(i));
  }
  Eigen::SelfAdjointEigenSolver<RMat> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  eigs_ = es.eigenvalues();
}

std::optional<std::pair<double, double>> ConeModeOperator::real_spectral_bounds()
    const {
  ensure_eigs();
  return std::make_pair((*eigs_)(0), (*eigs_)(eigs_->size() - 1));
}

std::pair<double, double> ConeModeOperator::eigenvalue_range() const {
  ensure_eigs();
  return {(*eigs_)(0), (*eigs_)(eigs_->size() - 1)};
}

std::optional<RVec> ConeModeOperator::real_spectrum() const {
  ensure_eigs();
  return *eigs_;
}

const RVec& ConeModeOperator::eigenvalues() const {
  ensure_eigs();
  return *eigs_;
}

std::optional<double> ConeModeOperator::resolvent_norm_exact(
    Complex lambda) const {
  // Only the gamma = 0 realization is exactly symmetric; elsewhere the
  // 2-norm exceeds the spectral formula and must be measured densely.
  if (gamma_ != 0.0) return std::nullopt;
  ensure_eigs();
  double norm = 0.0;
  for (Eigen::Index i = 0; i < eigs_->size(); ++i) {
    const double mu = (*eigs_)(i);
    const Complex d = lambda - mu;
    if (std::abs(d) <=
        1e-14 * std::max({1.0, std::abs(lambda), std::abs(mu)})) {
      throw SingularResolventError(
          "resolvent requested at an eigenvalue of a cone mode operator");
    }
    norm = std::max(norm, std::abs(lambda) / std::abs(d));
  }
  return norm;
}

double ConeModeOperator::scale_hint() const {
  double m = 0.0;
  for (int i = 0; i < grid_.N; ++i) {
    double row = std::abs(main_(i));
    if (i > 0) row += std::abs(lower_(i - 1));
    if (i + 1 < grid_.N) row += std::abs(upper_(i));
    m = std::max(m, row);
  }
  return m > 0.0 ? m : 1.0;
}

bool ConeModeOperator::self_adjoint_like() const { return gamma_ == 0.0; }

std::optional<CMat> ConeModeOperator::dense() const {
  const int N = grid_.N;
  CMat a = CMat::Zero(N, N);
  for (int i = 0; i < N; ++i) a(i, i) = main_(i);
  for (int i = 0; i + 1 < N; ++i) {
    a(i, i + 1) = upper_(i);
    a(i + 1, i) = lower_(i);
  }
  return a;
}

double ConeModeOperator::symmetry_defect() const {
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < grid_.N; ++i) den = std::max(den, std::abs(main_(i)));
  for (int i = 0; i + 1 < grid_.N; ++i) {
    num = std::max(num, std::abs(upper_(i) - lower_(i)));
    den = std::max({den, std::abs(upper_(i)), std::abs(lower_(i))});
  }
  return den > 0.0 ? num / den : 0.0;
}

std::vector<ConeModeOperator> build_cone_modes(const LogGrid& grid, int n,
                                               const RVec& mode_spectrum,
                                               double gamma, double p) {
  std::vector<ConeModeOperator> out;
  out.reserve(mode_spectrum.size());
  for (int j = 0; j < mode_spectrum.size(); ++j) {
    out.emplace_back(grid, n, mode_spectrum(j), gamma, p);
  }
  return out;
}

CVec mellin_profile(const LogGrid& grid, const CVec& u_interior,
                    const std::vector<Complex>& zs, Complex boundary_at_t1,
                    Complex boundary_at_tmin) {
  if (u_interior.size() != grid.N) {
    throw InvalidRequestError("profile size does not match the grid");
  }
  CVec out(static_cast<int>(zs.size()));
  for (int k = 0; k < out.size(); ++k) {
    const Complex z = zs[k];
    Complex acc = 0.5 * boundary_at_t1;  // r = 0, t^z = 1
    for (int i = 0; i < grid.N; ++i) {
      acc += u_interior(i) * std::exp(-grid.r(i) * z);
    }
    acc += 0.5 * boundary_at_tmin * std::exp(-grid.R * z);
    out(k) = grid.h * acc;
  }
  return out;
}

DilationCheck dilation_check(const LogGrid& grid, int n, double p,
                             double gamma, int shift_cells) {
  const int N = grid.N;
  const int lo = N / 3;
  const int hi = 2 * N / 3;
  if (shift_cells < 0 || hi + shift_cells >= N) {
    throw InvalidRequestError(
        "dilation shift pushes the test profile out of the interior");
  }
  CVec u = CVec::Zero(N);
  for (int i = lo; i < hi; ++i) {
    const double x = (i - lo + 0.5) / (hi - lo);  // (0,1)
    u(i) = std::exp(-1.0 / (x * (1.0 - x)));      // smooth interior bump
  }
  const double rho = std::exp(shift_cells * grid.h);
  CVec shifted = CVec::Zero(N);
  const double normalization = std::pow(rho, (n + 1) / p);
  for (int i = 0; i < N; ++i) {
    const int j = i - shift_cells;
    if (j >= 0 && j < N) shifted(i) = normalization * u(j);
  }
  DilationCheck out;
  const double base = discrete_norm(grid, u, p, gamma, n);
  out.ratio = discrete_norm(grid, shifted, p, gamma, n) / base;
  const double gamma_p = (n + 1) * (0.5 - 1.0 / p);
  out.predicted = std::pow(rho, gamma - gamma_p);
  out.defect = std::abs(out.ratio / out.predicted - 1.0);
  return out;
}

}  // namespace conecalc::cone
