#include "conecalc/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "conecalc/parallel.hpp"

namespace conecalc::ops {

namespace {

constexpr double kSingularGuard = 1e-14;

// Deterministic start vector for power iterations; mild index modulation
// avoids starting orthogonal to a top singular subspace.
CVec power_start(int n) {
  CVec v(n);
  for (int i = 0; i < n; ++i) {
    v(i) = Complex(1.0 + 0.01 * std::cos(0.7 * i), 0.01 * std::sin(1.3 * i));
  }
  v /= v.norm();
  return v;
}

// Spectral norm of a dense matrix: exact SVD for small sizes, power
// iteration on T^H T otherwise.
double spectral_norm(const CMat& t, int iterations) {
  const int n = static_cast<int>(t.rows());
  if (n <= 64) {
    return t.jacobiSvd().singularValues()(0);
  }
  CVec v = power_start(n);
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    CVec w = t * v;
    CVec u = t.adjoint() * w;
    const double nu = u.norm();
    if (nu == 0.0) return 0.0;
    sigma = std::sqrt(nu);
    v = u / nu;
  }
  return sigma;
}

}  // namespace

void ResolventProvider::resolve_matrix(Complex lambda, CMat& out) const {
  const int n = dim();
  out.resize(n, n);
  CVec e = CVec::Zero(n);
  CVec col(n);
  for (int j = 0; j < n; ++j) {
    e(j) = 1.0;
    resolve(lambda, e, col);
    out.col(j) = col;
    e(j) = 0.0;
  }
}

double weighted_spectral_norm(const CMat& m, const RVec& w,
                              int power_iterations) {
  CMat t = m;
  for (int row = 0; row < t.rows(); ++row) t.row(row) *= w(row);
  for (int col = 0; col < t.cols(); ++col) t.col(col) /= w(col);
  return spectral_norm(t, power_iterations);
}

double weighted_norm(const ResolventProvider& op, const CVec& v) {
  const RVec w = op.norm_weights();
  const double p = op.norm_exponent();
  if (p == 2.0) {
    return (w.array() * v.array().abs()).matrix().norm();
  }
  return std::pow((w.array() * v.array().abs()).pow(p).sum(), 1.0 / p);
}

DiagonalOperator::DiagonalOperator(CVec entries, RVec weights)
    : entries_(std::move(entries)), weights_(std::move(weights)) {
  if (entries_.size() == 0) {
    throw InvalidRequestError("empty diagonal operator");
  }
  if (weights_.size() != 0 && weights_.size() != entries_.size()) {
    throw InvalidRequestError("weight vector size mismatch");
  }
}

void DiagonalOperator::resolve(Complex lambda, const CVec& rhs,
                               CVec& out) const {
  const int n = dim();
  out.resize(n);
  for (int i = 0; i < n; ++i) {
    const Complex d = lambda - entries_(i);
    if (std::abs(d) <= kSingularGuard *
                           std::max({1.0, std::abs(lambda),
                                     std::abs(entries_(i))})) {
      throw SingularResolventError(
          "resolvent requested at a spectral point of a diagonal operator");
    }
    out(i) = rhs(i) / d;
  }
}

void DiagonalOperator::resolve_adjoint(Complex lambda, const CVec& rhs,
                                       CVec& out) const {
  const int n = dim();
  out.resize(n);
  for (int i = 0; i < n; ++i) {
    const Complex d = std::conj(lambda) - std::conj(entries_(i));
    if (std::abs(d) <= kSingularGuard *
                           std::max({1.0, std::abs(lambda),
                                     std::abs(entries_(i))})) {
      throw SingularResolventError(
          "adjoint resolvent requested at a spectral point");
    }
    out(i) = rhs(i) / d;
  }
}

void DiagonalOperator::apply(const CVec& rhs, CVec& out) const {
  out = entries_.array() * rhs.array();
}

void DiagonalOperator::resolve_matrix(Complex lambda, CMat& out) const {
  const int n = dim();
  out.setZero(n, n);
  for (int i = 0; i < n; ++i) {
    const Complex d = lambda - entries_(i);
    if (std::abs(d) <= kSingularGuard *
                           std::max({1.0, std::abs(lambda),
                                     std::abs(entries_(i))})) {
      throw SingularResolventError(
          "resolvent requested at a spectral point of a diagonal operator");
    }
    out(i, i) = 1.0 / d;
  }
}

RVec DiagonalOperator::norm_weights() const {
  if (weights_.size() == 0) return RVec::Ones(dim());
  return weights_;
}

std::optional<std::pair<double, double>> DiagonalOperator::real_spectral_bounds()
    const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < dim(); ++i) {
    if (std::abs(entries_(i).imag()) >
        1e-12 * std::max(1.0, std::abs(entries_(i)))) {
      return std::nullopt;
    }
    lo = std::min(lo, entries_(i).real());
    hi = std::max(hi, entries_(i).real());
  }
  return std::make_pair(lo, hi);
}

double DiagonalOperator::scale_hint() const {
  double m = 0.0;
  for (int i = 0; i < dim(); ++i) m = std::max(m, std::abs(entries_(i)));
  return m > 0.0 ? m : 1.0;
}

bool DiagonalOperator::self_adjoint_like() const {
  return real_spectral_bounds().has_value();
}

std::optional<CMat> DiagonalOperator::dense() const {
  CMat a = CMat::Zero(dim(), dim());
  a.diagonal() = entries_;
  return a;
}

std::optional<RVec> DiagonalOperator::real_spectrum() const {
  if (!real_spectral_bounds()) return std::nullopt;
  return entries_.real();
}

std::optional<double> DiagonalOperator::resolvent_norm_exact(
    Complex lambda) const {
  // lambda (lambda - A)^{-1} is diagonal, so the weighted norm equals the
  // largest entry magnitude regardless of the (diagonal) weights.
  double norm = 0.0;
  for (int i = 0; i < dim(); ++i) {
    const Complex d = lambda - entries_(i);
    if (std::abs(d) <= kSingularGuard *
                           std::max({1.0, std::abs(lambda),
                                     std::abs(entries_(i))})) {
      throw SingularResolventError(
          "resolvent requested at a spectral point of a diagonal operator");
    }
    norm = std::max(norm, std::abs(lambda / d));
  }
  return norm;
}

DenseOperator::DenseOperator(CMat a, RVec weights)
    : a_(std::move(a)), weights_(std::move(weights)) {
  if (a_.rows() == 0 || a_.rows() != a_.cols()) {
    throw InvalidRequestError("dense operator must be square and nonempty");
  }
  if (weights_.size() != 0 && weights_.size() != a_.rows()) {
    throw InvalidRequestError("weight vector size mismatch");
  }
  hermitian_ = (a_ - a_.adjoint()).norm() <= 1e-12 * std::max(1.0, a_.norm());
}

void DenseOperator::resolve(Complex lambda, const CVec& rhs, CVec& out) const {
  CMat m = -a_;
  m.diagonal().array() += lambda;
  Eigen::PartialPivLU<CMat> lu(m);
  out = lu.solve(rhs);
  const double resid = (m * out - rhs).norm();
  if (!out.allFinite() || resid > 1e-6 * std::max(1e-300, rhs.norm())) {
    throw SingularResolventError(
        "resolvent numerically singular for the dense operator");
  }
}

void DenseOperator::resolve_adjoint(Complex lambda, const CVec& rhs,
                                    CVec& out) const {
  CMat m = (-a_).adjoint();
  m.diagonal().array() += std::conj(lambda);
  Eigen::PartialPivLU<CMat> lu(m);
  out = lu.solve(rhs);
  const double resid = (m * out - rhs).norm();
  if (!out.allFinite() || resid > 1e-6 * std::max(1e-300, rhs.norm())) {
    throw SingularResolventError(
        "adjoint resolvent numerically singular for the dense operator");
  }
}

void DenseOperator::apply(const CVec& rhs, CVec& out) const { out = a_ * rhs; }

void DenseOperator::resolve_matrix(Complex lambda, CMat& out) const {
  CMat m = -a_;
  m.diagonal().array() += lambda;
  Eigen::PartialPivLU<CMat> lu(m);
  out = lu.solve(CMat::Identity(dim(), dim()));
  const double resid = (m * out - CMat::Identity(dim(), dim())).norm();
  if (!out.allFinite() || resid > 1e-6 * std::sqrt(double(dim()))) {
    throw SingularResolventError(
        "resolvent numerically singular for the dense operator");
  }
}

RVec DenseOperator::norm_weights() const {
  if (weights_.size() == 0) return RVec::Ones(dim());
  return weights_;
}

std::optional<std::pair<double, double>> DenseOperator::real_spectral_bounds()
    const {
  if (!hermitian_) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<CMat> es(a_, Eigen::EigenvaluesOnly);
  const RVec ev = es.eigenvalues();
  return std::make_pair(ev.minCoeff(), ev.maxCoeff());
}

double DenseOperator::scale_hint() const {
  const double m = a_.cwiseAbs().rowwise().sum().maxCoeff();
  return m > 0.0 ? m : 1.0;
}

bool DenseOperator::self_adjoint_like() const { return hermitian_; }

std::optional<CMat> DenseOperator::dense() const { return a_; }

ScanResult sectoriality_scan(const ResolventProvider& op,
                             const sectors::Sector& sector,
                             const ScanOptions& options) {
  const double hint = op.scale_hint();
  const int n_radii = static_cast<int>(
      (options.decades_below + options.decades_above) * options.radii_per_decade) + 1;
  const int n_angles = std::max(2, options.angles);
  std::vector<double> radii(n_radii);
  for (int i = 0; i < n_radii; ++i) {
    const double e = -options.decades_below +
                     (options.decades_below + options.decades_above) * i /
                         (n_radii - 1);
    radii[i] = hint * std::pow(10.0, e);
  }
  std::vector<double> angles(n_angles);
  for (int j = 0; j < n_angles; ++j) {
    angles[j] = sector.theta +
                (2.0 * kPi - 2.0 * sector.theta) * j / (n_angles - 1);
  }

  const RVec w = op.norm_weights();
  const int total = n_radii * n_angles;
  std::vector<ScanSample> samples(total);
  parallel_for(total, [&](int idx) {
    const int i = idx / n_angles;
    const int j = idx % n_angles;
    const Complex lambda = std::polar(radii[i], angles[j]);
    // || W lambda R W^{-1} || in the provider's weighted norm; use the
    // closed form when the realization has one, dense SVD otherwise.
    if (auto exact = op.resolvent_norm_exact(lambda)) {
      samples[idx] = ScanSample{radii[i], angles[j], *exact};
      return;
    }
    CMat r;
    op.resolve_matrix(lambda, r);
    samples[idx] = ScanSample{
        radii[i], angles[j],
        weighted_spectral_norm(lambda * r, w, options.power_iterations)};
  });

  ScanResult out;
  out.samples = std::move(samples);
  out.bound = options.bound;
  for (int idx = 0; idx < total; ++idx) {
    const ScanSample& s = out.samples[idx];
    if (s.norm > out.sup_norm) {
      out.sup_norm = s.norm;
      out.argmax_lambda = std::polar(s.radius, s.angle);
    }
  }
  if (options.bound > 0.0) out.pass = out.sup_norm <= options.bound;
  return out;
}

SpectrumLocation spectrum_in_complement(const ResolventProvider& op,
                                        const sectors::Sector& sector,
                                        double origin_radius) {
  SpectrumLocation out;
  if (auto real = op.real_spectrum()) {
    for (Eigen::Index i = 0; i < real->size(); ++i) {
      out.eigenvalues.emplace_back((*real)(i), 0.0);
    }
  } else {
    const std::optional<CMat> a = op.dense();
    if (!a) {
      throw InvalidRequestError(
          "spectrum check needs a dense form of the operator");
    }
    if (op.self_adjoint_like()) {
      Eigen::SelfAdjointEigenSolver<CMat> es(*a, Eigen::EigenvaluesOnly);
      for (int i = 0; i < es.eigenvalues().size(); ++i) {
        out.eigenvalues.emplace_back(es.eigenvalues()(i), 0.0);
      }
    } else {
      Eigen::ComplexEigenSolver<CMat> es(*a, false);
      for (int i = 0; i < es.eigenvalues().size(); ++i) {
        out.eigenvalues.push_back(es.eigenvalues()(i));
      }
    }
  }
  for (const Complex& e : out.eigenvalues) {
    const double r = std::abs(e);
    // Eigenvalues within origin_radius count as the excluded origin puncture
    // (the sector to avoid is the sector minus 0).
    if (r <= origin_radius) continue;
    const double phi = sectors::arg_in_2pi(e);
    if (phi > sector.theta + 1e-12 && phi < 2.0 * kPi - sector.theta - 1e-12) {
      out.violations.push_back(e);
    }
  }
  out.pass = out.violations.empty();
  return out;
}

}  // namespace conecalc::ops
